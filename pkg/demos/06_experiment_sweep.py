"""Grid experiment: convergence step across robot counts and drop rates.

Writes the dataset and the median/min/max summary CSV next to it, like
the `swarmlang sweep` subcommand.
Run:  python3 demos/06_experiment_sweep.py
"""

import tempfile
from pathlib import Path

from swarmlang.sim import experiment_sweep, write_outputs

rows, summary = experiment_sweep(
    "consensus", n_grid=[10, 25], p_grid=[0.0, 0.5, 0.75], reps=5,
    master_seed=2025, max_steps=60)

print(f"{'N':>4} {'P':>5} {'median':>7} {'min':>4} {'max':>4}")
for s in summary:
    print(f"{s['N']:>4} {s['P']:>5} {s['median']:>7} {s['min']:>4} "
          f"{s['max']:>4}")

out = Path(tempfile.mkdtemp()) / "consensus.csv"
paths = write_outputs(rows, summary, str(out), gnuplot=True)
print("\nwrote:")
for p in paths:
    print(" ", p)
