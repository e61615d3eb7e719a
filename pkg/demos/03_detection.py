"""
Detecting structure: spectral test and the exact likelihood statistic
=====================================================================
"""

import numpy as np

from smallworld import (
    SampleSpec,
    WsParams,
    calibrate_spectral_threshold,
    derive_seed,
    kl_ws_er,
    ml_test,
    ml_threshold,
    sample_er,
    sample_ws,
    spectral_test,
)

n, k = 800, 30

# the constant in front of max(sqrt k, sqrt log n) is set from null samples
const = calibrate_spectral_threshold(n, k, alpha=0.05, trials=100, seed=3)
print("calibrated constant:", round(const, 4))

for beta in (0.3, 0.7, 0.95):
    hits = 0
    for t in range(20):
        g, _ = sample_ws(SampleSpec(WsParams(n, k, beta), derive_seed(4, t)))
        hits += spectral_test(g, k, const).rejects_null
    print(f"beta={beta}: detected {hits}/20   KL to ER = {kl_ws_er(WsParams(n, k, beta)):.1f}")

false_alarms = sum(spectral_test(sample_er(n, k / (n - 1), derive_seed(5, t)), k, const).rejects_null for t in range(20))
print("ER false alarms:", false_alarms, "/ 20")

# exact search over relabelings only works for tiny graphs
g, _ = sample_ws(SampleSpec(WsParams(9, 2, 0.2), seed=2))
out = ml_test(g, 2)
print("ML statistic", out.statistic, "threshold", round(ml_threshold(9, 2), 2), "->", out.decision)
print("best relabeling:", out.details["permutation"])
