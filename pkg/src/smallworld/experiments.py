"""Monte Carlo phase-diagram sweeps and exponent-level region classification.

A grid point ``(x, y)`` stands for ``k ~ n**x`` and ``1 - beta ~ n**-y``.
Region boundaries are compared at the level of exponents only; log factors
are dropped, so cells close to a boundary are not meaningful at desk scale.
"""

from __future__ import annotations

import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detection import ml_statistic_exact, ml_threshold, smallest_const, spectral_scale, spectral_statistic
from .generator import SampleSpec, derive_seed, sample_er, sample_ws
from .graph import InvalidParameters, WsParams
from .reconstruction import GroundTruth, correlation_threshold, neighborhood_error, spectral_order

log = logging.getLogger(__name__)

METHODS = ("spectral_test", "ml_test", "correlation", "spectral_ordering")
DETECTION_METHODS = ("spectral_test", "ml_test")
CSV_HEADER = "x,y,n,k,beta,method,metric,value,trials,seed"

IMPOSSIBLE = "impossible"
HARD = "hard"
EASY = "easy"
RECONSTRUCTABLE = "reconstructable"
RECONSTRUCTABLE_PRIME = "reconstructable_prime"
BOUNDARY = "boundary"

# trial kinds; the integer is part of the derived seed
WS_TRIAL, ER_TRIAL, CALIBRATION_TRIAL = 0, 1, 2


def region_of(x: float, y: float, eps: float = 1e-9) -> str:
    """Classify ``(x, y)`` in the unit square by exponent comparisons.

    impossible        y > min(1/2, x)
    hard              x/2 < y <= min(1/2, x)
    easy              min(1/2, x)/2 <= y <= x/2
    reconstructable   y < min(1/2, x)/2
    reconstructable_prime
                      easy points with x > 7/8 and y < 4x - 7/2, where
                      spectral ordering still reconstructs
    Points within ``eps`` of a boundary that decides the label get ``boundary``.
    """
    if not (0 < x < 1 and 0 < y < 1):
        raise InvalidParameters(f"(x, y) must lie in the open unit square, got ({x}, {y})")
    detect = min(0.5, x)
    for edge in (detect, x / 2, detect / 2):
        if abs(y - edge) <= eps:
            return BOUNDARY
    if y > detect:
        return IMPOSSIBLE
    if y > x / 2:
        return HARD
    if y < detect / 2:
        return RECONSTRUCTABLE
    if x > 7 / 8:
        edge = 4 * x - 3.5
        if abs(y - edge) <= eps or abs(x - 7 / 8) <= eps:
            return BOUNDARY
        if y < edge:
            return RECONSTRUCTABLE_PRIME
    return EASY


def cell_parameters(n: int, x: float, y: float) -> tuple[int, float]:
    """``k = n**x`` rounded to an even integer in [2, n-2]; ``beta = 1 - n**-y`` clamped."""
    k = max(2, 2 * round(n**x / 2))
    largest = n - 2 if n % 2 == 0 else n - 3
    k = min(k, largest)
    beta = min(1.0, max(0.0, 1.0 - n ** (-y)))
    return k, beta


@dataclass
class SweepConfig:
    n: int
    x_grid: list[float]
    y_grid: list[float]
    trials: int
    methods: list[str]
    alpha: float = 0.05
    base_seed: int = 0
    spectral_const: float | None = None
    calibration_trials: int | None = None

    def __post_init__(self):
        self.x_grid = [float(v) for v in self.x_grid]
        self.y_grid = [float(v) for v in self.y_grid]
        self.methods = list(self.methods)
        if self.trials < 1:
            raise InvalidParameters("trials must be at least 1")
        if not self.x_grid or not self.y_grid:
            raise InvalidParameters("grids must be non-empty")
        for v in self.x_grid + self.y_grid:
            if not 0 < v < 1:
                raise InvalidParameters(f"grid values must lie in (0, 1), got {v}")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise InvalidParameters(f"unknown or empty methods: {sorted(unknown)}")
        if "ml_test" in self.methods and self.n > 10:
            raise InvalidParameters("ml_test is only available for n <= 10")
        if not 0 < self.alpha <= 1:
            raise InvalidParameters("alpha must lie in (0, 1]")
        if self.n < 5:
            raise InvalidParameters("n must be at least 5")

    @property
    def n_calibration(self) -> int:
        return self.calibration_trials if self.calibration_trials is not None else self.trials

    def resolved(self) -> dict:
        return {
            "n": self.n,
            "x_grid": self.x_grid,
            "y_grid": self.y_grid,
            "trials": self.trials,
            "methods": self.methods,
            "alpha": self.alpha,
            "base_seed": self.base_seed,
            "spectral_const": self.spectral_const,
            "calibration_trials": self.n_calibration,
        }


@dataclass
class CellResult:
    x: float
    y: float
    n: int
    k: int
    beta: float
    seed: int
    trials: int
    metrics: dict = field(default_factory=dict)  # method -> {metric: value}
    wall_time: float = 0.0


def _parse_list(value: str) -> list[str]:
    return [t.strip() for t in value.replace(";", ",").split(",") if t.strip()]


def parse_config(text: str) -> SweepConfig:
    """Read a ``key = value`` sweep configuration; lists are comma separated."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameters(f"config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()
    known = {
        "n", "x_grid", "y_grid", "trials", "methods", "alpha",
        "base_seed", "spectral_const", "calibration_trials",
    }
    extra = set(raw) - known
    if extra:
        raise InvalidParameters(f"unknown config keys: {sorted(extra)}")
    missing = {"n", "x_grid", "y_grid", "trials", "methods"} - set(raw)
    if missing:
        raise InvalidParameters(f"missing config keys: {sorted(missing)}")
    return SweepConfig(
        n=int(raw["n"]),
        x_grid=[float(v) for v in _parse_list(raw["x_grid"])],
        y_grid=[float(v) for v in _parse_list(raw["y_grid"])],
        trials=int(raw["trials"]),
        methods=_parse_list(raw["methods"]),
        alpha=float(raw.get("alpha", 0.05)),
        base_seed=int(raw.get("base_seed", 0)),
        spectral_const=float(raw["spectral_const"]) if raw.get("spectral_const") not in (None, "", "none") else None,
        calibration_trials=int(raw["calibration_trials"]) if raw.get("calibration_trials") else None,
    )


def read_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text())


def _run_trial(task):
    """Evaluate every requested method on one sampled graph.

    Returns ``{method: value}``; a failing method maps to its error message.
    """
    kind, n, k, beta, seed, methods = task
    out = {}
    if kind == WS_TRIAL:
        g, perm = sample_ws(SampleSpec(WsParams(n, k, beta), seed, "random"))
    else:
        g, perm = sample_er(n, k / (n - 1), seed), None
    for method in methods:
        try:
            if method == "spectral_test":
                out[method] = spectral_statistic(g, seed=seed)
            elif method == "ml_test":
                out[method] = float(ml_statistic_exact(g, k)[0])
            elif method == "correlation":
                out[method] = neighborhood_error(correlation_threshold(g, k), GroundTruth(perm, k))
            elif method == "spectral_ordering":
                out[method] = neighborhood_error(spectral_order(g, k, seed=seed), GroundTruth(perm, k))
        except Exception as exc:  # recorded per cell, never aborts the sweep
            out[method] = f"{type(exc).__name__}: {exc}"
    return out


def _cell_tasks(cfg: SweepConfig, n, k, beta, cell_seed):
    tasks = []
    detect = [m for m in cfg.methods if m in DETECTION_METHODS]
    ws_methods = tuple(cfg.methods)
    for t in range(cfg.trials):
        tasks.append((WS_TRIAL, n, k, beta, derive_seed(cell_seed, WS_TRIAL, t), ws_methods))
    if detect:
        for t in range(cfg.trials):
            tasks.append((ER_TRIAL, n, k, beta, derive_seed(cell_seed, ER_TRIAL, t), tuple(detect)))
    if "spectral_test" in cfg.methods and cfg.spectral_const is None:
        for t in range(cfg.n_calibration):
            seed = derive_seed(cell_seed, CALIBRATION_TRIAL, t)
            tasks.append((CALIBRATION_TRIAL, n, k, beta, seed, ("spectral_test",)))
    return tasks


def _values(outputs, method):
    good, failed = [], 0
    for out in outputs:
        if method not in out:
            continue
        value = out[method]
        if isinstance(value, str):
            failed += 1
        else:
            good.append(value)
    return np.array(good, dtype=np.float64), failed


def _aggregate(cfg: SweepConfig, cell: CellResult, outputs) -> None:
    by_kind = {WS_TRIAL: [], ER_TRIAL: [], CALIBRATION_TRIAL: []}
    for kind, out in outputs:
        by_kind[kind].append(out)
    n, k = cell.n, cell.k
    for method in cfg.methods:
        metrics = {}
        ws, ws_failed = _values(by_kind[WS_TRIAL], method)
        failed = ws_failed
        if method == "spectral_test":
            er, er_failed = _values(by_kind[ER_TRIAL], method)
            failed += er_failed
            if cfg.spectral_const is None:
                cal, cal_failed = _values(by_kind[CALIBRATION_TRIAL], method)
                failed += cal_failed
                const = smallest_const(cal / spectral_scale(n, k), cfg.alpha) if cal.size else math.nan
            else:
                const = cfg.spectral_const
            threshold = const * spectral_scale(n, k)
            metrics["const"] = const
            metrics["power"] = float(np.mean(ws >= threshold)) if ws.size else math.nan
            metrics["type1"] = float(np.mean(er >= threshold)) if er.size else math.nan
        elif method == "ml_test":
            er, er_failed = _values(by_kind[ER_TRIAL], method)
            failed += er_failed
            threshold = ml_threshold(n, k)
            metrics["threshold"] = threshold
            metrics["power"] = float(np.mean(ws >= threshold)) if ws.size else math.nan
            metrics["type1"] = float(np.mean(er >= threshold)) if er.size else math.nan
        else:
            metrics["mean_error"] = float(ws.mean()) if ws.size else math.nan
            metrics["max_error"] = float(ws.max()) if ws.size else math.nan
        if failed:
            metrics["failed"] = float(failed)
        cell.metrics[method] = metrics


def run_sweep(cfg: SweepConfig, workers: int = 1, out=None) -> list[CellResult]:
    """Run every ``(x, y)`` cell of ``cfg``; optionally write the CSV to ``out``.

    Results depend only on ``cfg`` (each trial has its own derived seed), so
    the output is identical for any ``workers``.
    """
    cells = []
    plan = []
    for xi, x in enumerate(cfg.x_grid):
        for yi, y in enumerate(cfg.y_grid):
            k, beta = cell_parameters(cfg.n, x, y)
            seed = derive_seed(cfg.base_seed, xi, yi)
            cell = CellResult(x, y, cfg.n, k, beta, seed, cfg.trials)
            tasks = _cell_tasks(cfg, cfg.n, k, beta, seed)
            cells.append(cell)
            plan.append(tasks)

    flat = [task for tasks in plan for task in tasks]
    started = time.perf_counter()
    if workers > 1 and len(flat) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, flat, chunksize=max(1, len(flat) // (8 * workers))))
    else:
        results = []
        for i, task in enumerate(flat):
            results.append(_run_trial(task))
            if (i + 1) % 50 == 0:
                log.info("sweep: %d/%d trials done", i + 1, len(flat))
    elapsed = time.perf_counter() - started

    pos = 0
    for cell, tasks in zip(cells, plan):
        outputs = [(task[0], res) for task, res in zip(tasks, results[pos : pos + len(tasks)])]
        pos += len(tasks)
        _aggregate(cfg, cell, outputs)
        cell.wall_time = elapsed * len(tasks) / max(1, len(flat))
        log.info("cell x=%g y=%g k=%d beta=%.6g done", cell.x, cell.y, cell.k, cell.beta)

    if out is not None:
        write_csv(cells, out)
    return cells


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def format_csv(cells: list[CellResult]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for cell in cells:
        for method, metrics in cell.metrics.items():
            for metric, value in metrics.items():
                row = [
                    _fmt(cell.x), _fmt(cell.y), _fmt(cell.n), _fmt(cell.k), _fmt(cell.beta),
                    method, metric, _fmt(value), _fmt(cell.trials), _fmt(cell.seed),
                ]
                buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_csv(cells: list[CellResult], path) -> None:
    Path(path).write_text(format_csv(cells))
