"""Neighbourhood reconstruction: correlation thresholding and spectral ordering."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, InvalidParameters, Permutation, SizeMismatch, _pack_rows
from .linalg import top_eigenpairs

ROW_BLOCK = 64


@dataclass
class NeighborhoodEstimate:
    """Estimated neighbour set of every node; ``sets[i]`` is sorted, size ``k``."""

    n: int
    k: int
    sets: np.ndarray
    method: str
    angles: np.ndarray | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sets = np.asarray(self.sets, dtype=np.int64)
        if self.sets.shape != (self.n, self.k):
            raise SizeMismatch(f"expected sets of shape {(self.n, self.k)}, got {self.sets.shape}")
        if np.any(self.sets == np.arange(self.n)[:, None]):
            raise InvalidParameters("a node cannot be its own estimated neighbour")

    def neighbors(self, i: int) -> list[int]:
        return self.sets[i].tolist()


@dataclass
class GroundTruth:
    permutation: Permutation
    k: int

    @property
    def n(self) -> int:
        return self.permutation.n

    def sets(self) -> np.ndarray:
        """True lattice neighbours of each node, sorted per row."""
        n, half = self.n, self.k // 2
        offsets = np.concatenate([-np.arange(half, 0, -1), np.arange(1, half + 1)])
        pos = self.permutation.inverse
        ring_pos = (pos[:, None] + offsets[None, :]) % n
        return np.sort(self.permutation.forward[ring_pos], axis=1)


def _check_k(n: int, k: int) -> None:
    if k <= 0 or k >= n - 1:
        raise InvalidParameters(f"need 0 < k < n-1, got k={k}, n={n}")


def row_correlations(g: Graph, closed: bool = True) -> np.ndarray:
    """Matrix of row inner products ``<A_i, A_j>`` via AND + popcount.

    With ``closed=True`` each row includes its own node (rows of ``A + I``).
    That adds ``2 A_ij`` to every off-diagonal entry and makes lattice
    correlations strictly decreasing in ring distance.
    """
    bits = g.bits
    if closed:
        bits = bits | _pack_rows(np.eye(g.n, dtype=bool))
    n = g.n
    out = np.empty((n, n), dtype=np.int64)
    for lo in range(0, n, ROW_BLOCK):
        hi = min(lo + ROW_BLOCK, n)
        both = bits[lo:hi, None, :] & bits[None, :, :]
        out[lo:hi] = np.bitwise_count(both).sum(axis=2, dtype=np.int64)
    return out


def correlation_threshold(g: Graph, k: int, closed: bool = True) -> NeighborhoodEstimate:
    """For each node keep the ``k`` other nodes with the largest row correlation.

    Ties go to the smaller node index.
    """
    _check_k(g.n, k)
    corr = row_correlations(g, closed=closed)
    np.fill_diagonal(corr, -1)
    top = np.argsort(-corr, axis=1, kind="stable")[:, :k]
    return NeighborhoodEstimate(g.n, k, np.sort(top, axis=1), "correlation", details={"closed": closed})


def neighbors_from_angles(angles: np.ndarray, k: int) -> np.ndarray:
    """The ``k`` nearest nodes in cyclic rank order (k/2 on each side).

    Nodes are sorted by angle, ties broken by node index.
    """
    angles = np.asarray(angles, dtype=np.float64)
    n = angles.size
    _check_k(n, k)
    half = k // 2
    order = np.lexsort((np.arange(n), angles))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    offsets = np.concatenate([-np.arange(half, 0, -1), np.arange(1, k - half + 1)])
    return np.sort(order[(rank[:, None] + offsets[None, :]) % n], axis=1)


def spectral_order(
    g: Graph,
    k: int,
    split_sample: Graph | None = None,
    seed: int = 0,
    gap_tol: float = 1e-8,
) -> NeighborhoodEstimate:
    """Place nodes on a circle from the second and third eigenvectors.

    The eigenvectors come from ``split_sample`` when given (an independent
    observation of the same graph), otherwise from ``g`` itself.  Node ``i``
    gets angle ``atan2(v . A_i, u . A_i)``.
    """
    _check_k(g.n, k)
    source = g if split_sample is None else split_sample
    if source.n != g.n:
        raise SizeMismatch(f"split sample has {source.n} nodes, graph has {g.n}")
    eig = top_eigenpairs(source, 3, seed=seed)
    u, v = eig[1].vector, eig[2].vector
    x = g.matvec(u)
    y = g.matvec(v)
    theta = np.arctan2(y, x)
    # the two harmonic eigenvectors must stand apart from the rest of the spectrum
    gap = eig[2].value - eig.next_value if eig.next_value is not None else np.inf
    details = {
        "eigenvalues": eig.values.tolist(),
        "next_eigenvalue": eig.next_value,
        "harmonic_gap": float(gap),
        "degenerate_gap": bool(gap < gap_tol * max(1.0, abs(eig[0].value))),
        "split_sample": split_sample is not None,
    }
    return NeighborhoodEstimate(
        g.n, k, neighbors_from_angles(theta, k), "spectral_ordering", angles=theta, details=details
    )


def per_node_errors(est: NeighborhoodEstimate, truth: GroundTruth) -> np.ndarray:
    """``|estimated symmetric-difference true| / k`` for every node."""
    if est.n != truth.n or est.k != truth.k:
        raise SizeMismatch(
            f"estimate is (n={est.n}, k={est.k}), truth is (n={truth.n}, k={truth.k})"
        )
    n, k = est.n, est.k
    rows = np.repeat(np.arange(n), k)
    est_mask = np.zeros((n, n), dtype=bool)
    est_mask[rows, est.sets.ravel()] = True
    true_mask = np.zeros((n, n), dtype=bool)
    true_mask[rows, truth.sets().ravel()] = True
    sym_diff = np.count_nonzero(est_mask ^ true_mask, axis=1)
    return sym_diff / k


def neighborhood_error(est: NeighborhoodEstimate, truth: GroundTruth) -> float:
    """Worst-node symmetric-difference ratio, in [0, 2]."""
    return float(per_node_errors(est, truth).max())


def format_neighborhoods(est: NeighborhoodEstimate, meta: dict | None = None) -> str:
    lines = [f"# {key}={value}" for key, value in (meta or {}).items()]
    for i in range(est.n):
        lines.append(f"{i}: " + " ".join(str(j) for j in est.sets[i]))
    return "\n".join(lines) + "\n"


def write_neighborhoods(est: NeighborhoodEstimate, path, meta: dict | None = None) -> None:
    Path(path).write_text(format_neighborhoods(est, meta))


def read_neighborhoods(path) -> dict[int, list[int]]:
    sets = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        head, _, tail = line.partition(":")
        sets[int(head)] = [int(t) for t in tail.split()]
    return sets
