"""Command-line front end: ``smallworld <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 runtime error (an oracle FAIL
counts as a runtime error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import detection, experiments, generator, linalg, reconstruction
from .graph import (
    InvalidParameters,
    SizeMismatch,
    WsParams,
    format_edgelist,
    read_edgelist,
    read_permutation,
    ring_lattice,
    write_permutation,
)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
THREADS_ENV = "SMALLWORLD_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("json", "text"), default="json", help="result record format")
    p.add_argument("--threads", type=int, default=None, help=f"worker cap (fallback: ${THREADS_ENV}, else 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smallworld", description="Small-world graph detection and reconstruction.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="sample a WS or ER graph to an edge file")
    _common(p)
    p.add_argument("--model", choices=("ws", "er"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta", type=float, default=None, help="rewiring probability (ws only)")
    p.add_argument("--perm", choices=("identity", "random"), default="random")
    p.add_argument("--perm-out", help="write the ground-truth permutation here")

    p = sub.add_parser("detect", help="run a detection test on an edge file")
    _common(p)
    p.add_argument("--method", choices=("spectral", "ml"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--const", type=float, default=None, help="spectral threshold constant")
    group.add_argument("--calibrate", default=None, metavar="ALPHA,TRIALS", help="calibrate the constant first")

    p = sub.add_parser("reconstruct", help="estimate lattice neighbourhoods")
    _common(p)
    p.add_argument("--method", choices=("corr", "spectral"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--split-input", default=None, help="independent second sample for the eigenvectors")
    p.add_argument("--truth", default=None, help="ground-truth permutation file")

    p = sub.add_parser("sweep", help="Monte Carlo sweep over an (x, y) grid")
    _common(p)
    p.add_argument("--config", required=True)

    p = sub.add_parser("calibrate", help="calibrate the spectral threshold constant")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)

    p = sub.add_parser("oracle", help="check an implementation against its oracle")
    _common(p)
    p.add_argument("--check", choices=("circulant", "kl", "eig", "ml"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta", type=float, default=None)
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        value = args.threads
    else:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            value = int(raw)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise UsageError("thread count must be at least 1")
    return value


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _record(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, sort_keys=False) + "\n"
    return "".join(f"{key}: {value}\n" for key, value in record.items())


def _meta_float(meta: dict, key: str):
    try:
        return float(meta[key])
    except (KeyError, ValueError):
        return None


# --- subcommands ------------------------------------------------------------------


def cmd_generate(args, threads: int) -> int:
    if args.model == "ws":
        if args.beta is None:
            raise UsageError("--beta is required for --model ws")
        params = WsParams(args.n, args.k, args.beta)
        g, perm = generator.sample_ws(generator.SampleSpec(params, args.seed, args.perm), workers=threads)
        meta = {"model": "ws", "k": args.k, "beta": repr(args.beta), "perm": args.perm, "seed": args.seed}
    else:
        if args.n < 2 or not 0 <= args.k <= args.n - 1:
            raise InvalidParameters(f"need 0 <= k <= n-1, got n={args.n}, k={args.k}")
        g = generator.sample_er(args.n, args.k / (args.n - 1), args.seed, workers=threads)
        perm = None
        meta = {"model": "er", "k": args.k, "p": repr(args.k / (args.n - 1)), "seed": args.seed}
    _emit(format_edgelist(g, meta), args.out)
    if args.perm_out:
        if perm is None:
            raise UsageError("--perm-out only applies to --model ws")
        write_permutation(perm, args.perm_out)
    return EXIT_OK


def cmd_detect(args, threads: int) -> int:
    g, _ = read_edgelist(args.input)
    if args.method == "ml":
        if args.const is not None or args.calibrate is not None:
            raise UsageError("--const and --calibrate apply to --method spectral only")
        outcome = detection.ml_test(g, args.k)
    else:
        const = args.const
        if args.calibrate is not None:
            try:
                alpha_text, trials_text = args.calibrate.split(",")
                alpha, trials = float(alpha_text), int(trials_text)
            except ValueError:
                raise UsageError("--calibrate expects ALPHA,TRIALS") from None
            const = detection.calibrate_spectral_threshold(g.n, args.k, alpha, trials, args.seed, threads)
        if const is None:
            const = detection.DEFAULT_SPECTRAL_CONST
        outcome = detection.spectral_test(g, args.k, const, seed=args.seed)
    _emit(_record(outcome.record(g.n, args.k, args.seed), args.format), args.out)
    return EXIT_OK


def cmd_reconstruct(args, threads: int) -> int:
    g, meta = read_edgelist(args.input)
    if args.method == "corr":
        if args.split_input:
            raise UsageError("--split-input applies to --method spectral only")
        est = reconstruction.correlation_threshold(g, args.k)
        method = "correlation"
    else:
        split = read_edgelist(args.split_input)[0] if args.split_input else None
        est = reconstruction.spectral_order(g, args.k, split_sample=split, seed=args.seed)
        method = "spectral_ordering"
    error = None
    if args.truth:
        truth = reconstruction.GroundTruth(read_permutation(args.truth), args.k)
        error = reconstruction.neighborhood_error(est, truth)
    file_meta = {"method": method, "n": g.n, "k": args.k, "seed": args.seed, "input": args.input}
    if args.split_input:
        file_meta["split_input"] = args.split_input
    if args.out is None:
        raise UsageError("reconstruct needs --out for the neighbourhood file")
    reconstruction.write_neighborhoods(est, args.out, file_meta)
    summary = {
        "method": method,
        "n": g.n,
        "k": args.k,
        "beta": _meta_float(meta, "beta"),
        "error": error,
        "seed": args.seed,
    }
    sys.stdout.write(_record(summary, args.format))
    return EXIT_OK


def cmd_sweep(args, threads: int) -> int:
    cfg = experiments.read_config(args.config)
    print(json.dumps({"sweep_config": cfg.resolved()}), file=sys.stderr)
    cells = experiments.run_sweep(cfg, workers=threads)
    _emit(experiments.format_csv(cells), args.out)
    return EXIT_OK


def cmd_calibrate(args, threads: int) -> int:
    const = detection.calibrate_spectral_threshold(args.n, args.k, args.alpha, args.trials, args.seed, threads)
    record = {"n": args.n, "k": args.k, "alpha": args.alpha, "trials": args.trials, "seed": args.seed, "const": const}
    _emit(_record(record, args.format), args.out)
    return EXIT_OK


def _oracle_circulant(args, threads):
    n, k = args.n, args.k
    values, _ = linalg.dense_eig_oracle(ring_lattice(n, k))
    diff = float(np.max(np.abs(values - linalg.circulant_spectrum(n, k))))
    checks = {"spectrum_max_abs_diff": (diff, 1e-8)}
    if 2 * k <= n:
        closed = abs(linalg.circulant_lambda2(n, k) - linalg.circulant_eigenvalue(n, k, 1))
        checks["lambda2_abs_diff"] = (closed, 1e-9)
    return checks


def _oracle_kl(args, threads):
    params = WsParams(args.n, args.k, 0.5 if args.beta is None else args.beta)
    closed, oracle = detection.kl_ws_er(params), detection.kl_ws_er_oracle(params)
    if oracle == 0 or np.isinf(oracle):
        rel = 0.0 if closed == oracle else np.inf
    else:
        rel = abs(closed - oracle) / abs(oracle)
    return {"kl_relative_diff": (float(rel), 1e-9)}


def _oracle_eig(args, threads):
    params = WsParams(args.n, args.k, 0.5 if args.beta is None else args.beta)
    g, _ = generator.sample_ws(generator.SampleSpec(params, args.seed), workers=threads)
    m = min(3, g.n)
    result = linalg.top_eigenpairs(g, m, seed=args.seed)
    values, _ = linalg.dense_eig_oracle(g)
    diff = float(np.max(np.abs(result.values - values[:m])))
    return {"top_eigenvalue_max_abs_diff": (diff, 1e-7)}


def _oracle_ml(args, threads):
    params = WsParams(args.n, args.k, 0.5 if args.beta is None else args.beta)
    g, _ = generator.sample_ws(generator.SampleSpec(params, args.seed))
    exact, _ = detection.ml_statistic_exact(g, args.k)
    naive, _ = detection.ml_statistic_naive(g, args.k)
    return {"ml_statistic_abs_diff": (float(abs(exact - naive)), 0.0)}


ORACLES = {"circulant": _oracle_circulant, "kl": _oracle_kl, "eig": _oracle_eig, "ml": _oracle_ml}


def cmd_oracle(args, threads: int) -> int:
    checks = ORACLES[args.check](args, threads)
    ok = all(value <= tol for value, tol in checks.values())
    record = {
        "check": args.check,
        "n": args.n,
        "k": args.k,
        "beta": args.beta,
        "seed": args.seed,
        "result": "PASS" if ok else "FAIL",
    }
    record.update({name: value for name, (value, _) in checks.items()})
    text = _record(record, args.format)
    _emit(text, args.out)
    if args.out is not None:
        sys.stdout.write(("PASS" if ok else "FAIL") + "\n")
    return EXIT_OK if ok else EXIT_RUNTIME


COMMANDS = {
    "generate": cmd_generate,
    "detect": cmd_detect,
    "reconstruct": cmd_reconstruct,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(message)s")
    try:
        args = build_parser().parse_args(argv)
        threads = _threads(args)
        resolved = dict(vars(args))
        resolved["threads"] = threads
        print(json.dumps({"config": resolved}), file=sys.stderr)
        return COMMANDS[args.subcommand](args, threads)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (InvalidParameters, SizeMismatch, detection.TooLarge, linalg.SizeTooLarge) as exc:
        print(f"smallworld: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - top-level guard maps to exit code 2
        print(f"smallworld: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
