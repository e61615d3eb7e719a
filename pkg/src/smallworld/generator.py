"""Seeded sampling of WS(n, k, beta) and ER(n, p) adjacency matrices.

Every unordered pair ``i < j`` is visited in row-major order and receives one
uniform draw ``u``; the edge is present iff ``u < p(i, j)``. The pair sequence
is cut into fixed blocks of ``PAIR_BLOCK`` pairs, and block ``b`` draws from its
own Philox stream keyed by ``SeedSequence(seed, spawn_key=(EDGE_STREAM, b))``.
Blocks can therefore be generated in any order or in parallel and still give
bit-identical graphs.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .graph import Graph, InvalidParameters, Permutation, WsParams, ring_distance

PAIR_BLOCK = 1 << 16
EDGE_STREAM = 0
PERM_STREAM = 1

PermutationMode = Union[str, Permutation]


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def pair_uniforms(n: int, seed: int, workers: int = 1) -> np.ndarray:
    """One uniform in [0, 1) per unordered pair, in row-major ``i < j`` order."""
    total = n * (n - 1) // 2
    out = np.empty(total, dtype=np.float64)
    starts = range(0, total, PAIR_BLOCK)

    def fill(block: int) -> None:
        lo = block * PAIR_BLOCK
        hi = min(lo + PAIR_BLOCK, total)
        out[lo:hi] = _block_rng(seed, EDGE_STREAM, block).random(hi - lo)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(len(starts))))
    else:
        for block in range(len(starts)):
            fill(block)
    return out


@lru_cache(maxsize=8)
def _upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(n, 1)
    iu.flags.writeable = False
    ju.flags.writeable = False
    return iu, ju


def _graph_from_pairs(n: int, present: np.ndarray) -> Graph:
    iu, ju = _upper_pairs(n)
    a = np.zeros((n, n), dtype=bool)
    a[iu[present], ju[present]] = True
    a |= a.T
    return Graph.from_dense(a, validate=False)


def random_permutation(n: int, seed: int) -> Permutation:
    """Uniform draw from the symmetric group via a Fisher-Yates shuffle."""
    if n < 1:
        raise InvalidParameters(f"n must be positive, got {n}")
    rng = _block_rng(seed, PERM_STREAM, 0)
    return Permutation(rng.permutation(n))


@dataclass(frozen=True)
class SampleSpec:
    params: WsParams
    seed: int
    permutation_mode: PermutationMode = "random"

    def __post_init__(self):
        mode = self.permutation_mode
        if isinstance(mode, Permutation):
            if mode.n != self.params.n:
                raise InvalidParameters(
                    f"explicit permutation has {mode.n} nodes, params have {self.params.n}"
                )
        elif mode not in ("identity", "random"):
            raise InvalidParameters(f"unknown permutation mode {mode!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameters("seed must be a 64-bit unsigned integer")

    def resolve_permutation(self) -> Permutation:
        mode = self.permutation_mode
        if isinstance(mode, Permutation):
            return mode
        if mode == "identity":
            return Permutation.identity(self.params.n)
        return random_permutation(self.params.n, self.seed)


def sample_ws(spec: SampleSpec, workers: int = 1) -> tuple[Graph, Permutation]:
    """Draw one WS(n, k, beta) graph through the entry-wise Bernoulli channel.

    Returns the graph together with the hidden permutation: graph node
    ``perm(i)`` sits at ring position ``i``.
    """
    params = spec.params
    n, k = params.n, params.k
    perm = spec.resolve_permutation()
    iu, ju = _upper_pairs(n)
    pos = perm.inverse
    on_lattice = ring_distance(pos[iu], pos[ju], n) <= k // 2
    prob = np.where(on_lattice, params.p_in, params.q)
    present = pair_uniforms(n, spec.seed, workers) < prob
    return _graph_from_pairs(n, present), perm


def sample_er(n: int, p: float, seed: int, workers: int = 1) -> Graph:
    """Draw one Erdos-Renyi graph: every pair present independently with probability p."""
    if n < 1:
        raise InvalidParameters(f"n must be positive, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameters(f"p must lie in [0, 1], got {p}")
    present = pair_uniforms(n, seed, workers) < p
    return _graph_from_pairs(n, present)


def derive_seed(base_seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed for ``(base_seed, *key)``."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(x) for x in key))
    return int(ss.generate_state(1, np.uint64)[0])
