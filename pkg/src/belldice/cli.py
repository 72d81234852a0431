"""Command-line front end.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 domain error.

Every subcommand accepts ``--config FILE``: a flat ``key = value`` file
whose keys are flag names (``eta-h`` or ``eta_h``).  Explicit flags override
file values, which override built-in defaults.
"""

import argparse
import contextlib
import json
import math
import os
import sys
import time

import numpy as np

from . import kernels
from .correlators import SourceParams, ch_value, joint_probabilities
from .errors import BellDiceError, TruncationError
from .oracle import OracleConfig, oracle_joint_probabilities
from .optimizer import OptimizationProblem, find_eta_min, optimize_chsh
from .povm import write_trajectory_csv
from .randomness import min_entropy
from .sweep import SweepConfig, run_sweep, write_records

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3

# documented ranges for oracle-check draws
ORACLE_RANGES = {
    "g": (0.01, 0.5),
    "eta_h": (0.3, 1.0),
    "eta": (0.3, 1.0),
    "T": (0.1, 0.9),
    "alpha": (-2.0, 2.0),
    "beta": (-2.0, 2.0),
}


def _ranged(lo, hi, lo_open=False, hi_open=False, kind=float):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}")
        below = v <= lo if lo_open else v < lo
        above = v >= hi if hi_open else v > hi
        if below or above or (kind is float and not math.isfinite(v)):
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            raise argparse.ArgumentTypeError(f"must lie in {left}{lo}, {hi}{right}, got {text}")
        return v

    return parse


efficiency = _ranged(0.0, 1.0, lo_open=True)
efficiency_or_zero = _ranged(0.0, 1.0)
dark_count = _ranged(0.0, 1.0, hi_open=True)
positive_int = _ranged(1, sys.maxsize, kind=int)
positive_float = _ranged(0.0, math.inf, lo_open=True)


def _env_workers():
    raw = os.environ.get("BELLDICE_WORKERS")
    return raw if raw else "1"


def _add_common(p, eta_default="1.0"):
    p.add_argument("--config", help="flat key = value file of flag defaults")
    p.add_argument("--eta", type=efficiency, default=eta_default, help="analysis detection efficiency")
    p.add_argument("--eta-h", type=efficiency, default=None, help="herald efficiency (default: tied to --eta)")
    p.add_argument("--pdc", type=dark_count, default="0", help="herald dark-count probability")
    p.add_argument("--restarts", type=positive_int, default="64")
    p.add_argument("--seed", type=int, default="0")
    p.add_argument("--tol", type=positive_float, default="1e-9")
    p.add_argument("--real-only", action="store_true", help="restrict displacements to signed reals")
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--workers", type=positive_int, default=_env_workers())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="belldice",
        description="CHSH violation and certified randomness of a heralded single-photon Bell test.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="maximize S at one efficiency and print JSON")
    _add_common(p)
    p.add_argument("--fix", action="append", default=[], metavar="NAME=VALUE", help="pin a search variable")

    p = sub.add_parser("sweep", help="optimize S over an efficiency grid")
    _add_common(p)
    p.add_argument("--eta-start", type=efficiency, default="0.80")
    p.add_argument("--eta-stop", type=efficiency, default="1.00")
    p.add_argument("--eta-step", type=positive_float, default="0.005")
    p.add_argument("--no-warm-start", dest="warm_start", action="store_false")
    p.add_argument("--chunk-size", type=positive_int, default="8")
    p.add_argument("--with-phases", action="store_true", help="append displacement phase columns")
    p.set_defaults(format="csv")

    p = sub.add_parser("trajectory", help="Bloch vector mu*n of the displaced click detector")
    p.add_argument("--config")
    p.add_argument("--eta", type=efficiency_or_zero, default="1.0")
    p.add_argument("--alpha-max", type=_ranged(0.0, math.inf), default="4.0")
    p.add_argument("--steps", type=_ranged(2, sys.maxsize, kind=int), default="401")
    p.add_argument("--out", default="-")

    p = sub.add_parser("oracle-check", help="compare closed forms with the Fock-space oracle")
    p.add_argument("--config")
    p.add_argument("--samples", type=positive_int, default="100")
    p.add_argument("--seed", type=int, default="0")
    p.add_argument("--n-max", type=positive_int, default="20")
    p.add_argument("--tol", type=positive_float, default="1e-8")

    p = sub.add_parser("eta-min", help="bisect for the threshold efficiency")
    _add_common(p)
    p.add_argument("--low", type=efficiency, default="0.7")
    p.add_argument("--high", type=efficiency, default="1.0")
    p.add_argument("--bisect-tol", type=positive_float, default="1e-3")
    return parser


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":"
            if sep not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split(sep, 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        values = read_config(args.config)
    except (OSError, ValueError) as exc:
        parser.error(f"argument --config: {exc}")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        parser.error(f"argument --config: unknown keys {', '.join(unknown)}")
    for key in ("real_only", "with_phases", "warm_start"):
        if key in values:
            values[key] = values[key].lower() in ("1", "true", "yes", "on")
    if "fix" in values:
        values["fix"] = [f.strip() for f in values["fix"].split(",") if f.strip()]
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def _open_out(path):
    if path == "-":
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", newline="")


def _problem_from(args):
    fixed = {}
    for item in getattr(args, "fix", []):
        name, _, value = item.partition("=")
        fixed[name.strip()] = float(value)
    return OptimizationProblem(
        eta=args.eta,
        eta_h=args.eta_h,
        p_dc=args.pdc,
        restarts=args.restarts,
        seed=args.seed,
        tol=args.tol,
        complex_phases=not args.real_only,
        fixed=fixed,
    )


def cmd_optimize(args):
    problem = _problem_from(args)
    t0 = time.perf_counter()
    res = optimize_chsh(problem)
    payload = {
        "eta": problem.eta,
        "eta_h": problem.herald_efficiency,
        "p_dc": problem.p_dc,
        "s_opt": res.s_opt,
        "ch": ch_value(res.s_opt),
        "h_min": min_entropy(res.s_opt).h_min,
        "params": res.params,
        "strategy": list(res.strategy),
        "converged": res.converged,
        "boundary": list(res.boundary),
        "evaluations": res.evaluations,
        "seconds": time.perf_counter() - t0,
        "backend": kernels.BACKEND,
    }
    with _open_out(args.out) as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_sweep(args):
    cfg = SweepConfig(
        eta_start=args.eta_start,
        eta_stop=args.eta_stop,
        eta_step=args.eta_step,
        eta_h=args.eta_h,
        p_dc=args.pdc,
        restarts=args.restarts,
        seed=args.seed,
        tol=args.tol,
        warm_start=args.warm_start,
        complex_phases=not args.real_only,
        chunk_size=args.chunk_size,
        workers=args.workers,
    )
    records = run_sweep(cfg)
    with _open_out(args.out) as fh:
        write_records(fh, records, args.format, with_phases=args.with_phases)
    return EXIT_OK


def cmd_trajectory(args):
    grid = np.linspace(0.0, args.alpha_max, args.steps)
    with _open_out(args.out) as fh:
        write_trajectory_csv(fh, args.eta, grid)
    return EXIT_OK


def _draw(rng):
    return {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in ORACLE_RANGES.items()}


def cmd_oracle_check(args):
    rng = np.random.default_rng(args.seed)
    cfg = OracleConfig(n_max=args.n_max)
    worst = 0.0
    worst_draw = None
    truncated = []
    for i in range(args.samples):
        d = _draw(rng)
        src = SourceParams(g=d["g"], eta_h=d["eta_h"])
        analytic = joint_probabilities(src, d["alpha"], d["beta"], d["T"], d["eta"])
        try:
            numeric = oracle_joint_probabilities(
                d["g"], d["eta_h"], d["alpha"], d["beta"], d["T"], d["eta"], cfg
            )
        except TruncationError as exc:
            truncated.append((i, d, str(exc)))
            continue
        dev = max(
            abs(analytic.correlator - numeric.correlator),
            *(abs(x - y) for x, y in zip(analytic.as_tuple(), numeric.as_tuple())),
        )
        if dev > worst:
            worst, worst_draw = dev, d
    checked = args.samples - len(truncated)
    print(f"oracle-check: samples={args.samples} checked={checked} n_max={args.n_max} seed={args.seed}")
    print(f"max |analytic - oracle| = {worst:.3e} (tol {args.tol:.1e})")
    if worst_draw is not None:
        print("worst draw: " + ", ".join(f"{k}={v:.6g}" for k, v in worst_draw.items()))
    for i, d, msg in truncated[:10]:
        print(f"truncation failure, sample {i} (g={d['g']:.4g}): {msg}")
    if len(truncated) > 10:
        print(f"... {len(truncated) - 10} more truncation failures")
    ok = not truncated and worst < args.tol
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_eta_min(args):
    problem = _problem_from(args)
    eta = find_eta_min(problem, bracket=(args.low, args.high), tol=args.bisect_tol)
    with _open_out(args.out) as fh:
        fh.write(json.dumps({"eta_min": eta, "local_model_bound": 2.0 / (math.sqrt(2.0) + 1.0)}) + "\n")
    return EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "trajectory": cmd_trajectory,
    "oracle-check": cmd_oracle_check,
    "eta-min": cmd_eta_min,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except BellDiceError as exc:
        print(f"belldice {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"belldice {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
