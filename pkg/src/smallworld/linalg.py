"""Eigenvalue machinery for symmetric 0/1 adjacency matrices.

Three independent routes are provided:

* :func:`top_eigenpairs` - block power iteration with Chebyshev acceleration,
  Rayleigh-Ritz extraction and locking of converged vectors.  Only
  matrix-vector products with the adjacency matrix are used.
* :func:`dense_eig_oracle` - full decomposition by row-cyclic Jacobi rotations.
* :func:`circulant_eigenvalue` and friends - closed forms for ring lattices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp

from .graph import Graph, InvalidParameters, WsParams

DENSE_ORACLE_MAX_N = 2048


class ConvergenceError(RuntimeError):
    """The iteration budget ran out before every residual met its tolerance.

    ``partial`` holds the best :class:`EigenResult` reached so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SizeTooLarge(ValueError):
    pass


@dataclass
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float


@dataclass
class EigenResult:
    """Top eigenpairs in descending order plus solver diagnostics."""

    pairs: list[EigenPair]
    degenerate_gap: bool = False
    next_value: float | None = None
    matvecs: int = 0
    restarts: int = 0
    converged: bool = True
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def __iter__(self):
        return iter(self.pairs)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs])

    @property
    def vectors(self) -> np.ndarray:
        return np.column_stack([p.vector for p in self.pairs])


def _as_operator(g):
    if isinstance(g, Graph):
        return g.n, g.matvec, int(g.degrees.max(initial=0))
    if sp.issparse(g):
        m = sp.csr_matrix(g, dtype=np.float64)
        bound = float(abs(m).sum(axis=1).max()) if m.nnz else 0.0
        return m.shape[0], m.__matmul__, bound
    a = np.asarray(g, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameters("operator must be a square matrix")
    return a.shape[0], a.__matmul__, float(np.abs(a).sum(axis=1).max(initial=0.0))


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > 1e-12)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def _orthonormalize(x: np.ndarray, locked: np.ndarray | None) -> np.ndarray:
    # two passes of classical Gram-Schmidt against locked vectors, then QR
    if locked is not None and locked.shape[1]:
        for _ in range(2):
            x = x - locked @ (locked.T @ x)
    q, _ = np.linalg.qr(x)
    return q


def _chebyshev_filter(matvec, x, degree, lower, upper):
    """Apply T_degree of the affine map sending [lower, upper] onto [-1, 1]."""
    half = (upper - lower) / 2.0
    centre = (upper + lower) / 2.0
    y = (matvec(x) - centre * x) / half
    prev = x
    for _ in range(2, degree + 1):
        nxt = 2.0 * (matvec(y) - centre * y) / half - prev
        prev, y = y, nxt
        # rescale columns jointly; keeps relative weights, avoids overflow
        scale = np.abs(y).max()
        if scale > 1e100:
            y /= scale
            prev = prev / scale
    return y


def top_eigenpairs(
    g,
    m: int,
    tol: float = 1e-8,
    max_iter: int | None = None,
    seed: int = 0,
    block: int | None = None,
) -> EigenResult:
    """Largest ``m`` eigenpairs (algebraic order) of a symmetric matrix.

    Parameters
    ----------
    g : Graph or array-like
        Graph, or a symmetric dense/sparse matrix.
    m : int
        Number of eigenpairs, ``1 <= m <= min(8, n)``.
    tol : float
        Success requires ``||Av - lambda v|| <= tol * max(1, |lambda|)`` for
        each returned pair.
    max_iter : int, optional
        Budget of single-vector matrix products; defaults to ``10 n log n``.
    seed : int
        Seed of the random start block.
    block : int, optional
        Working block size (defaults to ``m + max(m, 6)``).

    Returns
    -------
    EigenResult
        Pairs sorted by decreasing eigenvalue.  Vectors are orthonormal and
        the first coordinate above 1e-12 in magnitude is positive.
        ``degenerate_gap`` is set when ``|lambda_m - lambda_{m+1}|`` falls
        below ``1e-10 * |lambda_1|``.

    Raises
    ------
    ConvergenceError
        If the budget is exhausted first; retry with another seed.
    """
    n, matvec, radius = _as_operator(g)
    if not 1 <= m <= min(8, n):
        raise InvalidParameters(f"m must satisfy 1 <= m <= min(8, n), got m={m}, n={n}")
    if tol <= 0:
        raise InvalidParameters("tol must be positive")
    if max_iter is None:
        max_iter = int(10 * n * max(1.0, math.log(n)))
    p = min(n, block if block is not None else m + max(m, 6))
    if p < m:
        raise InvalidParameters("block size must be at least m")

    rng = np.random.default_rng(seed)
    if p == n:
        x = np.eye(n)
    else:
        x = _orthonormalize(rng.standard_normal((n, p)), None)
    lower = -max(radius, 1.0)  # Gershgorin bound on the spectrum
    n_locked = 0
    matvecs = 0
    restarts = 0
    best = math.inf
    stalled = 0

    while True:
        ax = matvec(x)
        matvecs += p
        h = x.T @ ax
        w, s = np.linalg.eigh((h + h.T) / 2.0)
        order = np.argsort(-w, kind="stable")
        w, s = w[order], s[:, order]
        x = x @ s
        ax = ax @ s
        res = np.linalg.norm(ax - x * w, axis=0)
        ok = res <= tol * np.maximum(1.0, np.abs(w))
        done = p == n or bool(ok[:m].all())
        if done or matvecs >= max_iter:
            vecs = _fix_signs(x[:, :m])
            pairs = [
                EigenPair(float(w[j]), vecs[:, j].copy(), float(res[j])) for j in range(m)
            ]
            next_value = float(w[m]) if p > m else None
            degenerate = next_value is not None and abs(w[m - 1] - w[m]) < 1e-10 * abs(w[0])
            result = EigenResult(
                pairs,
                degenerate_gap=bool(degenerate),
                next_value=next_value,
                matvecs=matvecs,
                restarts=restarts,
                converged=done,
            )
            if done:
                return result
            raise ConvergenceError(
                f"top_eigenpairs: residuals {res[:m]} above tolerance after {matvecs} products",
                partial=result,
            )

        # lock the leading run of converged vectors
        lead = 0
        while lead < m and ok[lead]:
            lead += 1
        n_locked = lead

        worst = float(np.max(res[:m] / np.maximum(1.0, np.abs(w[:m]))))
        if worst < 0.9 * best:
            best = worst
            stalled = 0
        else:
            stalled += 1
        if stalled >= 8 and p > m:
            # stagnation: refresh the trailing (unwanted) columns
            x[:, m:] = rng.standard_normal((n, p - m))
            restarts += 1
            stalled = 0
            best = math.inf

        locked = x[:, :n_locked]
        active = x[:, n_locked:]
        upper = float(w[-1])
        top = float(w[0])
        if upper - lower <= 1e-12 * max(1.0, abs(lower)):
            filtered = matvec(active) - lower * active
            matvecs += active.shape[1]
        else:
            # mapped position of the top Ritz value decides a safe degree
            xi = 1.0 + 2.0 * max(top - upper, 0.0) / (upper - lower)
            reach = math.acosh(xi) if xi > 1.0 else 0.0
            degree = 40 if reach == 0.0 else int(min(40, max(2, 18.0 / reach)))
            filtered = _chebyshev_filter(matvec, active, degree, lower, upper)
            matvecs += degree * active.shape[1]
        active = _orthonormalize(filtered, locked)
        x = np.hstack([locked, active]) if n_locked else active


@numba.njit(cache=True)
def _jacobi_sweep(a, vt):
    # one row-cyclic sweep; a is symmetric, vt holds eigenvectors as rows
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0.0:
                continue
            app = a[p, p]
            aqq = a[q, q]
            tau = (aqq - app) / (2.0 * apq)
            t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            for r in range(n):
                x = a[p, r]
                y = a[q, r]
                a[p, r] = c * x - s * y
                a[q, r] = s * x + c * y
            for r in range(n):
                a[r, p] = a[p, r]
                a[r, q] = a[q, r]
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0
            for r in range(n):
                x = vt[p, r]
                y = vt[q, r]
                vt[p, r] = c * x - s * y
                vt[q, r] = s * x + c * y


def _off_norm(a: np.ndarray) -> float:
    return math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))


def jacobi_eigh(matrix, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Returns ``(values, vectors)`` in no particular order; ``vectors[:, i]``
    belongs to ``values[i]``.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    vt = np.eye(n)
    scale = max(math.sqrt(float(np.sum(a * a))), 1e-300)
    for _ in range(max_sweeps):
        if _off_norm(a) <= tol * scale:
            break
        _jacobi_sweep(a, vt)
    return a.diagonal().copy(), vt.T.copy()


def dense_eig_oracle(g) -> tuple[np.ndarray, np.ndarray]:
    """Full spectrum (descending) and orthonormal eigenvectors via Jacobi rotations."""
    a = g.dense_float if isinstance(g, Graph) else np.asarray(g, dtype=np.float64)
    n = a.shape[0]
    if n > DENSE_ORACLE_MAX_N:
        raise SizeTooLarge(f"dense oracle limited to n <= {DENSE_ORACLE_MAX_N}, got {n}")
    values, vectors = jacobi_eigh(a)
    order = np.argsort(-values, kind="stable")
    return values[order], _fix_signs(vectors[:, order])


def _check_lattice(n: int, k: int) -> None:
    if k <= 0 or k % 2 or k >= n - 1:
        raise InvalidParameters(f"need even k with 0 < k < n-1, got k={k}, n={n}")


def circulant_eigenvalue(n: int, k: int, j: int) -> float:
    """Eigenvalue of the ring lattice for the harmonic of frequency ``j``."""
    _check_lattice(n, k)
    if not 0 <= j <= n / 2:
        raise InvalidParameters(f"frequency j must satisfy 0 <= j <= n/2, got {j}")
    i = np.arange(1, k // 2 + 1)
    return float(2.0 * np.sum(np.cos(2.0 * np.pi * i * j / n)))


def circulant_spectrum(n: int, k: int) -> np.ndarray:
    """All ``n`` ring-lattice eigenvalues (with multiplicity), descending."""
    _check_lattice(n, k)
    values = []
    for j in range(n // 2 + 1):
        lam = circulant_eigenvalue(n, k, j)
        interior = 0 < j < n / 2
        values.extend([lam, lam] if interior else [lam])
    return np.sort(np.array(values))[::-1]


def circulant_lambda2(n: int, k: int) -> float:
    """Closed-form second ring-lattice eigenvalue, valid for ``k/n <= 1/2``."""
    _check_lattice(n, k)
    if 2 * k > n:
        raise InvalidParameters(f"closed form assumes k/n <= 1/2, got k={k}, n={n}")
    return (
        2.0 * math.sin(k * math.pi / (2 * n)) / math.sin(math.pi / n)
        * math.cos((k + 2) * math.pi / (2 * n))
    )


def spectral_gap(params: WsParams) -> float:
    """Gap between the first and second harmonics of the expected WS adjacency."""
    n, k, beta = params.n, params.k, params.beta
    if n < 4:
        raise InvalidParameters("spectral gap needs n >= 4")
    shrink = (1.0 - beta) * (1.0 - beta * k / (n - 1))
    return shrink * (circulant_eigenvalue(n, k, 1) - circulant_eigenvalue(n, k, 2))
