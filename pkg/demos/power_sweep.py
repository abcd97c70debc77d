"""
A small power curve
===================

Rejection rates for the circle scenario over a few offsets. Each cell
prints its Wilson interval. The sweep is deterministic given the seed,
whatever the worker count.
"""
import numpy as np

from isomet.harness import SweepConfig, run_sweep

deltas = [0.0, 0.1, 0.2, 0.3, 0.5]
cfg = SweepConfig("circle-vm", [100], deltas=deltas, datasets=100, replicates=199, seed=5)
rows = run_sweep(cfg, workers=2, timing=False)

print(" delta  rate   95% interval")
for r in rows:
    bar = "#" * int(round(40 * r.rejection_rate))
    print(f"{r.delta:6.2f}  {r.rejection_rate:.2f}  [{r.wilson_low:.2f}, {r.wilson_high:.2f}]  {bar}")

# local alternatives delta_n = c / sqrt(n); with 100 datasets the two rates are noisy
local = run_sweep(SweepConfig("circle-vm", [50, 200], local_c=1.5, datasets=100, replicates=199, seed=6),
                  timing=False)
for r in local:
    print(f"n = {r.n:3d}, delta = {r.delta:.3f}: rate {r.rejection_rate:.2f}")
