"""
Reproducible refinement reports
===============================

Every experiment returns a report with one row per level, observed orders,
and built-in checks. Reports written twice with the same config are
byte-identical.
"""

import tempfile
from pathlib import Path

from fvlab import ExperimentConfig, run_experiment

for name in ("transport-fd", "shift-bound", "tvd"):
    report = run_experiment(ExperimentConfig(name, levels=3))
    print(f"--- {name} ({'pass' if report.passed else 'fail'})")
    print(report.to_csv())

with tempfile.TemporaryDirectory() as tmp:
    paths = [Path(tmp) / f"run{i}.csv" for i in range(2)]
    for path in paths:
        run_experiment(ExperimentConfig("poincare", levels=3, seed=7, out=str(path)))
    print("identical reports:", paths[0].read_bytes() == paths[1].read_bytes())
