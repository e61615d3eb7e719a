"""Detection tests for ring-lattice structure: maximum likelihood and spectral."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .generator import derive_seed, sample_er
from .graph import Graph, InvalidParameters, Permutation, WsParams, ring_lattice
from .linalg import top_eigenpairs

ML_MAX_N = 10
DEFAULT_SPECTRAL_CONST = 2.5

NULL = "null_ER"
ALTERNATIVE = "alternative_WS"


class TooLarge(ValueError):
    """Exact maximum-likelihood search requested for more than ``ML_MAX_N`` nodes."""


@dataclass
class DetectionOutcome:
    method: str
    statistic: float
    threshold: float
    decision: str
    details: dict = field(default_factory=dict)

    @property
    def rejects_null(self) -> bool:
        return self.decision == ALTERNATIVE

    def record(self, n: int, k: int, seed=None) -> dict:
        return {
            "method": self.method,
            "n": n,
            "k": k,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "decision": self.decision,
            "seed": seed,
        }


def _decide(statistic: float, threshold: float) -> str:
    return ALTERNATIVE if statistic >= threshold else NULL


# --- maximum likelihood -------------------------------------------------------


def _lattice_edges(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    e = ring_lattice(n, k).edges()
    return e[:, 0], e[:, 1]


def _coset_representatives(n: int) -> np.ndarray:
    # one permutation per coset pi o D_n of the dihedral group: pi(0) = 0 and
    # pi(1) < pi(n-1) (the reflection i -> -i swaps positions 1 and n-1)
    rest = np.array(list(itertools.permutations(range(1, n))), dtype=np.int8)
    rest = rest[rest[:, 0] < rest[:, -1]]
    return np.hstack([np.zeros((rest.shape[0], 1), dtype=np.int8), rest])


def _dihedral(n: int) -> np.ndarray:
    idx = np.arange(n)
    rotations = [(idx + r) % n for r in range(n)]
    reflections = [(r - idx) % n for r in range(n)]
    return np.array(rotations + reflections, dtype=np.int64)


def _lex_min(rows: np.ndarray) -> np.ndarray:
    order = np.lexsort(rows.T[::-1])
    return rows[order[0]]


def ml_statistic_exact(g: Graph, k: int) -> tuple[int, Permutation]:
    """Maximise ``<P B P^T, A>`` over all relabelings of the ring lattice ``B``.

    The objective is invariant under rotations and reflections of the ring,
    so only ``(n-1)!/2`` coset representatives are scored. The returned
    argmax is the lexicographically smallest forward array among *all*
    ``n!`` maximisers.
    """
    n = g.n
    if n > ML_MAX_N:
        raise TooLarge(f"exact ML statistic is limited to n <= {ML_MAX_N}, got {n}")
    if k <= 0 or k % 2 or k >= n - 1:
        raise InvalidParameters(f"need even k with 0 < k < n-1, got k={k}, n={n}")
    flat = g.dense.astype(np.int64).ravel()
    u, v = _lattice_edges(n, k)
    reps = _coset_representatives(n).astype(np.int64)
    scores = np.zeros(reps.shape[0], dtype=np.int64)
    for a, b in zip(u, v):
        scores += flat[reps[:, a] * n + reps[:, b]]
    best = int(scores.max())
    winners = reps[scores == best]
    candidates = []
    for d in _dihedral(n):
        candidates.append(_lex_min(winners[:, d]))
    argmax = _lex_min(np.array(candidates))
    return 2 * best, Permutation(argmax)


def ml_statistic_naive(g: Graph, k: int) -> tuple[int, Permutation]:
    """Full enumeration of all n! relabelings with a dense inner product each.

    Deliberately unoptimised; kept as an independent check of
    :func:`ml_statistic_exact`.
    """
    n = g.n
    if n > ML_MAX_N:
        raise TooLarge(f"naive ML enumeration is limited to n <= {ML_MAX_N}, got {n}")
    a = g.dense.astype(np.int64)
    b = ring_lattice(n, k).dense.astype(np.int64)
    best, arg = -1, None
    for perm in itertools.permutations(range(n)):
        p = np.asarray(perm)
        value = 0
        for i in range(n):
            for j in range(n):
                value += b[i, j] * a[p[i], p[j]]
        if value > best:
            best, arg = value, perm
    return best, Permutation(arg)


def ml_statistic_heuristic(g: Graph, k: int, restarts: int = 8, seed: int = 0):
    """HEURISTIC: 2-swap hill climbing on the relabeling; no optimality claim.

    Returns a lower bound on the exact statistic together with the
    permutation that attains it.  Usable at any ``n``.
    """
    n = g.n
    if k <= 0 or k % 2 or k >= n - 1:
        raise InvalidParameters(f"need even k with 0 < k < n-1, got k={k}, n={n}")
    a = g.dense.astype(np.int64)
    offsets = np.concatenate([np.arange(1, k // 2 + 1), -np.arange(1, k // 2 + 1)])
    nbr = (np.arange(n)[:, None] + offsets[None, :]) % n  # ring neighbours of each position
    rng = np.random.default_rng(seed)
    best_value, best_perm = -1, None
    for _ in range(restarts):
        perm = rng.permutation(n)
        value = int(a[perm[:, None], perm[nbr]].sum())
        improved = True
        while improved:
            improved = False
            for x in range(n - 1):
                for y in range(x + 1, n):
                    trial = perm.copy()
                    trial[x], trial[y] = trial[y], trial[x]
                    tv = int(a[trial[:, None], trial[nbr]].sum())
                    if tv > value:
                        perm, value, improved = trial, tv, True
        if value > best_value:
            best_value, best_perm = value, perm
    return best_value, Permutation(best_perm)


def ml_threshold(n: int, k: int) -> float:
    """Rejection threshold for the maximum likelihood statistic (natural logs)."""
    if n < 2:
        raise InvalidParameters("n must be at least 2")
    log_nfact = math.lgamma(n + 1)
    mean = k / (n - 1) * n * k
    return mean + 2.0 * math.sqrt(mean * log_nfact) + 2.0 / 3.0 * log_nfact


def ml_test(g: Graph, k: int) -> DetectionOutcome:
    statistic, perm = ml_statistic_exact(g, k)
    threshold = ml_threshold(g.n, k)
    return DetectionOutcome(
        "max_likelihood",
        float(statistic),
        threshold,
        _decide(statistic, threshold),
        {"permutation": perm.forward.tolist()},
    )


# --- spectral -----------------------------------------------------------------


def spectral_scale(n: int, k: int) -> float:
    return max(math.sqrt(k), math.sqrt(math.log(n)))


def spectral_statistic(g: Graph, seed: int = 0, tol: float = 1e-8) -> float:
    """Second largest adjacency eigenvalue."""
    if g.n < 2:
        raise InvalidParameters("spectral statistic needs at least two nodes")
    return top_eigenpairs(g, 2, tol=tol, seed=seed)[1].value


def spectral_test(
    g: Graph, k: int, threshold_const: float = DEFAULT_SPECTRAL_CONST, seed: int = 0
) -> DetectionOutcome:
    if threshold_const <= 0:
        raise InvalidParameters("threshold constant must be positive")
    result = top_eigenpairs(g, 2, seed=seed)
    statistic = result[1].value
    threshold = threshold_const * spectral_scale(g.n, k)
    return DetectionOutcome(
        "spectral",
        statistic,
        threshold,
        _decide(statistic, threshold),
        {"const": threshold_const, "lambda1": result[0].value, "matvecs": result.matvecs},
    )


def _er_lambda2(args) -> float:
    n, p, seed = args
    return spectral_statistic(sample_er(n, p, seed), seed=seed)


def null_ratios(n: int, k: int, trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """``lambda_2 / max(sqrt k, sqrt log n)`` over ``trials`` ER(n, k/(n-1)) draws.

    Trial ``t`` uses the child seed ``derive_seed(seed, t)``, so the result
    does not depend on ``workers``.
    """
    p = k / (n - 1)
    tasks = [(n, p, derive_seed(seed, t)) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(_er_lambda2, tasks, chunksize=max(1, trials // (4 * workers))))
    else:
        stats = [_er_lambda2(t) for t in tasks]
    return np.array(stats) / spectral_scale(n, k)


def smallest_const(ratios, alpha: float) -> float:
    """Smallest constant ``c`` with ``mean(ratios >= c) <= alpha``."""
    r = np.sort(np.asarray(ratios, dtype=np.float64))
    allowed = math.floor(alpha * r.size + 1e-9)
    if allowed >= r.size:
        return 0.0
    return float(np.nextafter(r[r.size - allowed - 1], np.inf))


def calibrate_spectral_threshold(
    n: int, k: int, alpha: float, trials: int, seed: int, workers: int = 1
) -> float:
    """Empirical constant giving type-I error at most ``alpha`` under ER(n, k/(n-1)).

    ``alpha = 1`` is accepted as a degenerate case and returns 0.
    """
    if not 0 < alpha <= 1:
        raise InvalidParameters(f"alpha must lie in (0, 1), got {alpha}")
    if trials < 100:
        raise InvalidParameters(f"calibration needs at least 100 trials, got {trials}")
    if alpha == 1:
        return 0.0
    return smallest_const(null_ratios(n, k, trials, seed, workers), alpha)


# --- information ----------------------------------------------------------------


def kl_bernoulli(p: float, q: float) -> float:
    """KL(Bern(p) || Bern(q)) with the convention 0 log 0 = 0."""
    total = 0.0
    for a, b in ((p, q), (1.0 - p, 1.0 - q)):
        if a > 0:
            if b <= 0:
                return math.inf
            total += a * math.log(a / b)
    return total


def kl_ws_er_oracle(params: WsParams) -> float:
    """KL(WS || ER) as a sum of independent per-pair Bernoulli divergences."""
    n, k = params.n, params.k
    r = params.er_probability
    lattice_pairs = n * k / 2
    other_pairs = n * (n - 1) / 2 - lattice_pairs
    return lattice_pairs * kl_bernoulli(params.p_in, r) + other_pairs * kl_bernoulli(params.q, r)


def kl_ws_er(params: WsParams) -> float:
    """Closed-form KL divergence between WS(n, k, beta) and ER(n, k/(n-1)).

    Evaluated as the three-term expression obtained by expanding both
    log-likelihoods; agrees with :func:`kl_ws_er_oracle`.  ``beta = 0`` makes
    the lattice pairs deterministic and the divergence infinite.
    """
    n, k, beta = params.n, params.k, params.beta
    if beta == 0:
        return math.inf
    if beta == 1:
        return 0.0
    r = k / (n - 1)
    q = beta * r
    p_in = 1.0 - beta * (1.0 - q)
    if not (0 < p_in < 1 and 0 < q < 1):
        raise InvalidParameters("edge probabilities must lie strictly inside (0, 1)")
    term_beta = -math.log(1.0 / beta) * n * k * (1.0 + beta - q)
    term_null = math.log((1.0 - q) / (1.0 - r)) * n * ((n - 1 - k) + (1.0 - beta) * beta * k * k / (n - 1))
    term_lattice = math.log(p_in / q) * n * k * p_in
    return 0.5 * (term_beta + term_null + term_lattice)
