"""
A small phase diagram sweep
===========================

x = log k / log n and y = -log(1 - beta) / log n.  The region labels compare
exponents only, so they are a rough guide at this size.
"""

import sys

from smallworld import SweepConfig, region_of, run_sweep
from smallworld.experiments import format_csv

xs = [0.3, 0.5, 0.7]
ys = [0.1, 0.3, 0.7]
for y in reversed(ys):
    print(f"y={y:.1f} ", "  ".join(f"{region_of(x, y):>16}" for x in xs))

cfg = SweepConfig(
    n=300,
    x_grid=xs,
    y_grid=ys,
    trials=10,
    methods=["spectral_test", "correlation"],
    calibration_trials=40,
    base_seed=11,
)
cells = run_sweep(cfg)
for cell in cells:
    spec = cell.metrics["spectral_test"]
    corr = cell.metrics["correlation"]
    print(
        f"x={cell.x} y={cell.y} k={cell.k:3d} beta={cell.beta:.3f}"
        f"  power={spec['power']:.2f} type1={spec['type1']:.2f}  corr max err={corr['max_error']:.2f}"
    )

sys.stdout.write(format_csv(cells)[:400])
