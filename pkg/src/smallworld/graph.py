"""Graph representation, ring lattices and permutations.

Adjacency is stored as bit-packed rows (``uint64`` words, little-endian bit
order inside each word) so that row inner products reduce to AND + popcount.
Node indices are 0-based everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class InvalidParameters(ValueError):
    """Raised when model or operation parameters violate their preconditions."""


class SizeMismatch(ValueError):
    """Raised when two objects that must share a node count do not."""


def _pack_rows(dense: np.ndarray) -> np.ndarray:
    n = dense.shape[0]
    n_words = max(1, (n + 63) // 64)
    packed = np.packbits(dense.astype(bool), axis=1, bitorder="little")
    padded = np.zeros((n, n_words * 8), dtype=np.uint8)
    padded[:, : packed.shape[1]] = packed
    return padded.view(np.uint64)


class Graph:
    """Simple undirected graph on ``n`` nodes with bit-packed adjacency rows.

    Instances are immutable. Use :meth:`from_dense` or :meth:`from_edges`
    rather than calling the constructor with raw words.
    """

    __slots__ = ("n", "bits", "__dict__")

    def __init__(self, n: int, bits: np.ndarray):
        if n < 1:
            raise InvalidParameters(f"node count must be positive, got {n}")
        bits = np.ascontiguousarray(bits, dtype=np.uint64)
        if bits.shape != (n, max(1, (n + 63) // 64)):
            raise SizeMismatch(f"bit array of shape {bits.shape} does not fit n={n}")
        bits.flags.writeable = False
        self.n = n
        self.bits = bits

    @classmethod
    def from_dense(cls, adjacency, validate: bool = True) -> Graph:
        a = np.asarray(adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidParameters("adjacency must be a square matrix")
        if validate:
            if not np.all((a == 0) | (a == 1)):
                raise InvalidParameters("adjacency entries must be 0 or 1")
            if np.any(np.diagonal(a) != 0):
                raise InvalidParameters("adjacency must have a zero diagonal")
            if not np.array_equal(a, a.T):
                raise InvalidParameters("adjacency must be symmetric")
        return cls(a.shape[0], _pack_rows(a != 0))

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        a = np.zeros((n, n), dtype=bool)
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise InvalidParameters("edge endpoint out of range")
            if np.any(e[:, 0] == e[:, 1]):
                raise InvalidParameters("self-loops are not allowed")
            a[e[:, 0], e[:, 1]] = True
            a[e[:, 1], e[:, 0]] = True
        return cls(n, _pack_rows(a))

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n, np.zeros((n, max(1, (n + 63) // 64)), dtype=np.uint64))

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls.from_dense(1 - np.eye(n, dtype=np.uint8), validate=False)

    @cached_property
    def dense(self) -> np.ndarray:
        """Read-only ``uint8`` adjacency matrix."""
        raw = self.bits.view(np.uint8)
        a = np.unpackbits(raw, axis=1, count=self.n, bitorder="little")
        a.flags.writeable = False
        return a

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """Adjacency as a float64 CSR matrix (for matrix-vector products)."""
        return sp.csr_matrix(self.dense, dtype=np.float64)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.bitwise_count(self.bits).sum(axis=1, dtype=np.int64)
        d.flags.writeable = False
        return d

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> np.ndarray:
        """Edge array of shape (m, 2) with u < v, lexicographically sorted."""
        u, v = np.nonzero(np.triu(self.dense, 1))
        return np.column_stack([u, v]).astype(np.int64)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if self.edge_count * 2 < 0.15 * self.n * self.n:
            return self.csr @ x
        return self.dense_float @ x

    @cached_property
    def dense_float(self) -> np.ndarray:
        return self.dense.astype(np.float64)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class WsParams:
    """Watts-Strogatz parameter bundle ``(n, k, beta)``."""

    n: int
    k: int
    beta: float

    def __post_init__(self):
        n, k, beta = self.n, self.k, self.beta
        if n < 3:
            raise InvalidParameters(f"n must be at least 3, got {n}")
        if k <= 0 or k % 2 or k >= n - 1:
            raise InvalidParameters(f"k must be even with 0 < k < n-1, got k={k}, n={n}")
        if not 0.0 <= beta <= 1.0:
            raise InvalidParameters(f"beta must lie in [0, 1], got {beta}")

    @property
    def q(self) -> float:
        """Edge probability for pairs outside the lattice."""
        return self.beta * self.k / (self.n - 1)

    @property
    def p_in(self) -> float:
        """Edge probability for lattice pairs (kept, or erased and re-added)."""
        return 1.0 - self.beta * (1.0 - self.q)

    @property
    def er_probability(self) -> float:
        return self.k / (self.n - 1)


class Permutation:
    """Bijection on ``range(n)``; ``forward[i]`` is the image of ``i``."""

    __slots__ = ("forward", "inverse")

    def __init__(self, forward):
        f = np.array(forward, dtype=np.int64)
        n = f.size
        if f.ndim != 1 or n == 0:
            raise InvalidParameters("permutation must be a non-empty 1-d array")
        if not np.array_equal(np.sort(f), np.arange(n)):
            raise InvalidParameters("forward array is not a bijection on range(n)")
        inv = np.empty_like(f)
        inv[f] = np.arange(n)
        f.flags.writeable = False
        inv.flags.writeable = False
        self.forward = f
        self.inverse = inv

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(np.arange(n))

    @property
    def n(self) -> int:
        return self.forward.size

    def __len__(self):
        return self.forward.size

    def __call__(self, i):
        return self.forward[i]

    def compose(self, other: Permutation) -> Permutation:
        """Return ``self o other`` (apply ``other`` first)."""
        if other.n != self.n:
            raise SizeMismatch("permutation sizes differ")
        return Permutation(self.forward[other.forward])

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.forward, other.forward)

    def __hash__(self):
        return hash(self.forward.tobytes())

    def __repr__(self):
        if self.n <= 12:
            return f"Permutation({self.forward.tolist()})"
        return f"Permutation(n={self.n})"


def ring_distance(i, j, n: int):
    """Circular distance ``min(|i-j|, n-|i-j|)``; works elementwise on arrays."""
    d = np.abs(np.asarray(i) - np.asarray(j))
    out = np.minimum(d, n - d)
    return int(out) if out.ndim == 0 else out


def ring_lattice(n: int, k: int) -> Graph:
    """k-regular ring lattice: ``i ~ j`` iff their circular distance is at most k/2."""
    if k <= 0 or k % 2 or k >= n - 1:
        raise InvalidParameters(f"ring lattice needs even k with 0 < k < n-1, got k={k}, n={n}")
    idx = np.arange(n)
    d = ring_distance(idx[:, None], idx[None, :], n)
    return Graph.from_dense((d > 0) & (d <= k // 2), validate=False)


def lattice_mask(n: int, k: int, perm: Permutation | None = None) -> np.ndarray:
    """Boolean matrix marking lattice pairs in graph labels under ``perm``."""
    pos = np.arange(n) if perm is None else perm.inverse
    d = ring_distance(pos[:, None], pos[None, :], n)
    return (d > 0) & (d <= k // 2)


def permute(g: Graph, p: Permutation) -> Graph:
    """Relabel nodes so that ``H[p(i), p(j)] = A[i, j]``."""
    if p.n != g.n:
        raise SizeMismatch(f"permutation on {p.n} nodes applied to graph on {g.n}")
    inv = p.inverse
    return Graph.from_dense(g.dense[np.ix_(inv, inv)], validate=False)


def matrix_inner(g1: Graph, g2: Graph) -> int:
    """Entrywise inner product <A, B>; twice the number of shared edges."""
    if g1.n != g2.n:
        raise SizeMismatch(f"graphs have {g1.n} and {g2.n} nodes")
    return int(np.bitwise_count(g1.bits & g2.bits).sum())


# --- edge-list and permutation files -------------------------------------


def format_edgelist(g: Graph, meta: dict | None = None) -> str:
    lines = [f"# n={g.n}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.extend(f"{u},{v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def write_edgelist(g: Graph, path, meta: dict | None = None) -> None:
    Path(path).write_text(format_edgelist(g, meta))


def parse_edgelist(text: str) -> tuple[Graph, dict]:
    """Parse edge-list text; returns the graph and any ``# key=value`` metadata."""
    n = None
    meta = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                key, value = key.strip(), value.strip()
                if key == "n" and n is None:
                    n = int(value)
                else:
                    meta[key] = value
            continue
        try:
            u, v = (int(t) for t in line.split(","))
        except ValueError:
            raise InvalidParameters(f"line {lineno}: expected 'u,v', got {raw!r}") from None
        edges.append((u, v))
    if n is None:
        raise InvalidParameters("edge list is missing its '# n=<n>' header")
    return Graph.from_edges(n, edges), meta


def read_edgelist(path) -> tuple[Graph, dict]:
    return parse_edgelist(Path(path).read_text())


def write_permutation(p: Permutation, path) -> None:
    Path(path).write_text("".join(f"{int(x)}\n" for x in p.forward))


def read_permutation(path) -> Permutation:
    values = [int(t) for t in Path(path).read_text().split()]
    return Permutation(values)
