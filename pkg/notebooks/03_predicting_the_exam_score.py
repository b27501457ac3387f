"""
Predicting the exam score
=========================

Multiple linear regression against a random forest regressor, with the
generator's own formula as a ceiling.
"""

from edumine.metrics import regression_table
from edumine.pipeline import TrainConfig, train
from edumine.synth import SynthConfig, generate_dataset, oracle_r2

table, truth = generate_dataset(SynthConfig(n_students=200, seed=7))
print(f"oracle R2 (noise-free formula vs observed): {oracle_r2(truth, table):.3f}")

rows = []
for model, k in (("mlr", None), ("rfr", None), ("rfr", 11)):
    result = train(table, TrainConfig("regress", model, seed=42, select_k=k))
    label = f"{model.upper()} with {len(result.features)} features"
    rows.append((label, result.extra["report"]))
print(regression_table(rows))
