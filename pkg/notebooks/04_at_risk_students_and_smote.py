"""
Flagging at-risk students
=========================

Only 7% of students score 65 or below. Oversampling that class with SMOTE
on the training rows lets the classifiers see it more often.
"""

from edumine.metrics import accuracy_table, classification_table
from edumine.pipeline import CLASSIFIERS, MODEL_LABELS, TrainConfig, train
from edumine.synth import SynthConfig, generate_dataset

table, _ = generate_dataset(SynthConfig(n_students=1000, noise_sd=3.0, seed=7))

for smote in (True, False):
    rows = []
    for model in CLASSIFIERS:
        cfg = TrainConfig("classify", model, seed=7, smote=smote, stratify=True)
        rows.append((MODEL_LABELS[model], train(table, cfg).extra["report"]))
    print("with SMOTE" if smote else "without SMOTE")
    print(accuracy_table(rows))
    print(classification_table(rows))
