"""Efficiency sweeps: optimal CHSH value, min-entropy and rates per grid point.

Grid points are processed in fixed-size contiguous chunks.  Within a chunk
each point is warm-started from the previous optimum; chunks are farmed out
to a process pool.  Chunking does not depend on the worker count, so output
is identical for any ``workers``.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import InvalidParameterError
from .optimizer import OptimizationProblem, optimize_chsh, optimize_rate
from .randomness import min_entropy, rate_detection_limited

__all__ = [
    "CSV_HEADER",
    "PHASE_COLUMNS",
    "SweepConfig",
    "SweepRecord",
    "eta_grid",
    "run_sweep",
    "write_records",
]

CSV_HEADER = (
    "eta",
    "s_opt",
    "g_opt",
    "t_opt",
    "alpha1",
    "alpha2",
    "beta1",
    "beta2",
    "h_min",
    "rate_pump",
    "rate_detection",
    "converged",
)
PHASE_COLUMNS = ("phi_alpha2", "phi_beta1", "phi_beta2")


@dataclass(frozen=True)
class SweepConfig:
    eta_start: float = 0.80
    eta_stop: float = 1.00
    eta_step: float = 0.005
    # None ties the herald efficiency to each grid eta
    eta_h: float | None = None
    p_dc: float = 0.0
    restarts: int = 64
    seed: int = 0
    tol: float = 1e-9
    warm_start: bool = True
    complex_phases: bool = True
    chunk_size: int = 8
    workers: int = 1

    def __post_init__(self):
        if not self.eta_start < self.eta_stop:
            raise InvalidParameterError("eta_start must be < eta_stop")
        if not self.eta_step > 0.0:
            raise InvalidParameterError("eta_step must be > 0")
        if not (0.0 < self.eta_start and self.eta_stop <= 1.0):
            raise InvalidParameterError("efficiency grid must lie in (0, 1]")
        if self.chunk_size < 1 or self.workers < 1:
            raise InvalidParameterError("chunk_size and workers must be >= 1")


@dataclass(frozen=True)
class SweepRecord:
    eta: float
    s_opt: float
    g_opt: float
    t_opt: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    h_min: float
    rate_pump: float
    rate_detection: float
    converged: bool
    phi_alpha2: float = 0.0
    phi_beta1: float = 0.0
    phi_beta2: float = 0.0


def eta_grid(cfg: SweepConfig):
    n = int(math.floor((cfg.eta_stop - cfg.eta_start) / cfg.eta_step + 1e-9)) + 1
    if n < 2:
        raise InvalidParameterError("efficiency grid needs at least 2 points")
    return [round(cfg.eta_start + k * cfg.eta_step, 12) for k in range(n)]


def _problem(cfg, eta, starts=(), restarts=None):
    return OptimizationProblem(
        eta=eta,
        eta_h=cfg.eta_h,
        p_dc=cfg.p_dc,
        restarts=cfg.restarts if restarts is None else restarts,
        seed=cfg.seed,
        tol=cfg.tol,
        complex_phases=cfg.complex_phases,
        starts=starts,
    )


def _record(cfg, eta, res, problem):
    p = res.params
    rate = optimize_rate(problem, res)
    return SweepRecord(
        eta=eta,
        s_opt=res.s_opt,
        g_opt=p["g"],
        t_opt=p["T"],
        alpha1=p["alpha1"],
        alpha2=p["alpha2"],
        beta1=p["beta1"],
        beta2=p["beta2"],
        h_min=min_entropy(res.s_opt).h_min,
        rate_pump=rate.rate,
        rate_detection=rate_detection_limited(res.s_opt).rate,
        converged=res.converged,
        phi_alpha2=p.get("phi_alpha2", 0.0),
        phi_beta1=p.get("phi_beta1", 0.0),
        phi_beta2=p.get("phi_beta2", 0.0),
    )


def _run_chunk(cfg: SweepConfig, etas):
    out = []
    prev = None
    for eta in etas:
        if cfg.warm_start and prev is not None:
            # previous optimum plus a reduced set of fresh starts
            problem = _problem(cfg, eta, starts=(prev,), restarts=max(cfg.restarts // 4, 1))
        else:
            problem = _problem(cfg, eta)
        res = optimize_chsh(problem)
        prev = res.params
        out.append(_record(cfg, eta, res, problem))
    return out


def run_sweep(cfg: SweepConfig):
    """One :class:`SweepRecord` per grid point, ordered by ascending ``eta``."""
    etas = eta_grid(cfg)
    chunks = [etas[i : i + cfg.chunk_size] for i in range(0, len(etas), cfg.chunk_size)]
    if cfg.workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(cfg, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
    return [r for part in parts for r in part]


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return f"{v:.17g}"


def write_records(fh, records, fmt="csv", with_phases=False):
    """Write records as CSV (fixed header) or a JSON array mirroring the CSV columns."""
    columns = CSV_HEADER + (PHASE_COLUMNS if with_phases else ())
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in records:
            writer.writerow([_fmt(getattr(r, c)) for c in columns])
    elif fmt == "json":
        rows = [{c: getattr(r, c) for c in columns} for r in records]
        fh.write(json.dumps(rows, indent=1))
        fh.write("\n")
    else:
        raise InvalidParameterError(f"unknown format {fmt!r}")
