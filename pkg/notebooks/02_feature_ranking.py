"""
Which behaviours track the exam score?
======================================

Rank the 14 predictors by Pearson correlation with etest on a synthetic
cohort and keep the top 11.
"""

from edumine.preprocess import rank_features, select_top_k
from edumine.synth import SynthConfig, generate_dataset

table, truth = generate_dataset(SynthConfig(n_students=200, seed=7))
report = rank_features(table)
print(report.to_csv())

keep = select_top_k(report, 11)
print("kept:", keep)
print("dropped:", [name for name in report.names if name not in keep])
