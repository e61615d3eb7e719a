"""
The lattice spectrum and how rewiring shrinks it
================================================
"""

import numpy as np

from smallworld import (
    SampleSpec,
    WsParams,
    circulant_eigenvalue,
    circulant_lambda2,
    circulant_spectrum,
    dense_eig_oracle,
    ring_lattice,
    sample_er,
    sample_ws,
    spectral_gap,
    top_eigenpairs,
)

n, k = 64, 8
values, vectors = dense_eig_oracle(ring_lattice(n, k))
print("Jacobi:   ", np.round(values[:6], 6))
print("cosine sum:", np.round(circulant_spectrum(n, k)[:6], 6))
print("closed form lambda_2:", circulant_lambda2(n, k), circulant_eigenvalue(n, k, 1))

# lambda_2 grows like k for the lattice, like sqrt(k) for ER noise
for beta in (0.0, 0.3, 0.6, 0.9, 1.0):
    g, _ = sample_ws(SampleSpec(WsParams(1000, 40, beta), seed=1))
    lam = top_eigenpairs(g, 2)
    print(f"beta={beta:.1f}  lambda_2={lam.values[1]:7.3f}  expected gap={spectral_gap(WsParams(1000, 40, beta)):.3f}")

er = sample_er(1000, 40 / 999, seed=1)
print("ER lambda_2:", round(top_eigenpairs(er, 2).values[1], 3), " 2*sqrt(k) =", round(2 * np.sqrt(40), 3))
