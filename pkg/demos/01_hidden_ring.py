"""
Hiding a ring lattice and finding it again
==========================================

A ring lattice is relabelled by a random permutation and pushed through the
rewiring channel.  Two reconstruction methods then try to recover who the
lattice neighbours were.
"""

import numpy as np

from smallworld import (
    GroundTruth,
    SampleSpec,
    WsParams,
    correlation_threshold,
    neighborhood_error,
    ring_lattice,
    sample_ws,
    spectral_order,
)

# a clean lattice first: every node talks to its k/2 neighbours on each side
lattice = ring_lattice(12, 4)
print(lattice.dense)

# rewire a bigger one; the permutation is what we pretend not to know
params = WsParams(n=600, k=60, beta=0.2)
g, perm = sample_ws(SampleSpec(params, seed=7))
print("edges:", g.edge_count, "expected:", params.n * params.k // 2)
print("first labels on the ring:", perm.forward[:10])

truth = GroundTruth(perm, params.k)

# rows of A + I that overlap most are likely ring neighbours
est = correlation_threshold(g, params.k)
print("correlation thresholding, worst node error:", neighborhood_error(est, truth))

# the 2nd and 3rd eigenvectors of a circulant are a cosine/sine pair
est = spectral_order(g, params.k)
print("spectral ordering, worst node error:", neighborhood_error(est, truth))
print("harmonic gap:", round(est.details["harmonic_gap"], 3))

# angles put the hidden ring back in order (up to rotation and reflection)
ring_position = perm.inverse
order = np.argsort(est.angles)
print("ring positions in angle order:", ring_position[order][:15])
