"""
A small reproducible benchmark
==============================

run_benchmark draws fresh ensembles for every run from a seed derived
from the master seed, the dataset name and the run number, so reports
are identical on every machine and for any number of worker processes.
"""

import tempfile
from pathlib import Path

from soul import run_benchmark
from soul.datasets import load_report, make_planted_dataset, save_report

datasets = [
    make_planted_dataset(150, 8, 2, 4.0, seed=0),
    make_planted_dataset(150, 8, 5, 3.0, seed=1),
]
report = run_benchmark(
    datasets,
    selectors=["core", "cull", "all"],
    modes=["flat"],
    consensus=["avg", "max"],
    runs=3,
    master_seed=42,
    ensemble_size=10,
)
print(report.format_table())
print()
print(report.summary_csv())

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "report.json"
    save_report(report, path)
    assert load_report(path).to_json() == report.to_json()
    print("report round-trips through", path.name)
