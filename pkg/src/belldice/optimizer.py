"""Multi-start maximization of the CHSH value and the threshold efficiency.

The search vector is ``(g, T, alpha1, alpha2, beta1, beta2)`` followed, when
``complex_phases`` is on, by the phases of ``alpha2``, ``beta1``, ``beta2``.
Correlators depend only on phase differences between the parties, so
``alpha1`` is kept real.  A global sign flip of all four displacements
leaves every correlator unchanged; results are folded to ``alpha1 >= 0``.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import kernels
from .correlators import TSIRELSON, MeasurementSettings, SourceParams
from .errors import BracketError, InvalidParameterError

__all__ = [
    "PARAM_NAMES",
    "DEFAULT_BOUNDS",
    "STRATEGIES",
    "OptimizationProblem",
    "OptimizationResult",
    "StrategyReport",
    "RateOptimum",
    "optimize_chsh",
    "optimize_rate",
    "find_eta_min",
    "strategy_equivalence_check",
]

PARAM_NAMES = ("g", "T", "alpha1", "alpha2", "beta1", "beta2", "phi_alpha2", "phi_beta1", "phi_beta2")
DISPLACEMENTS = ("alpha1", "alpha2", "beta1", "beta2")

DEFAULT_BOUNDS = {
    "g": (1e-4, 1.0),
    "T": (0.05, 0.95),
    "alpha1": (-3.0, 3.0),
    "alpha2": (-3.0, 3.0),
    "beta1": (-3.0, 3.0),
    "beta2": (-3.0, 3.0),
    # full turn although signed magnitudes already double-cover the plane:
    # a half-turn box traps the search on its edges
    "phi_alpha2": (-math.pi, math.pi),
    "phi_beta1": (-math.pi, math.pi),
    "phi_beta2": (-math.pi, math.pi),
}

# Region sampled for initial points; most of the default box is a plateau
# where large displacements make every detector click.
DEFAULT_START_BOUNDS = {
    "g": (1e-4, 0.5),
    "alpha1": (-1.5, 1.5),
    "alpha2": (-1.5, 1.5),
    "beta1": (-1.5, 1.5),
    "beta2": (-1.5, 1.5),
}

# (Alice, Bob) value assigned to the no-click outcome; click gets the opposite
STRATEGIES = ((1, 1), (1, -1), (-1, 1), (-1, -1))

_BOUNDARY_RTOL = 1e-6


@dataclass
class OptimizationProblem:
    """Fixed efficiencies plus search configuration.

    ``eta_h=None`` ties the herald efficiency to ``eta``.  Entries of
    ``fixed`` are pinned and removed from the search; ``starts`` are extra
    initial points (mappings from parameter name to value) tried before the
    low-discrepancy ones, which are drawn from ``start_bounds`` intersected
    with ``bounds``.

    By default the objective is ``|E11 + E12 + E21 - E22|``: each outcome
    assignment may either maximize or minimize the sum, so all assignments
    share one optimum.  ``signed=True`` instead maximizes ``sA*sB*sum`` for
    the chosen ``strategy``, which singles out one direction.
    """

    eta: float
    eta_h: float | None = None
    p_dc: float = 0.0
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    start_bounds: dict = field(default_factory=lambda: dict(DEFAULT_START_BOUNDS))
    restarts: int = 64
    seed: int = 0
    tol: float = 1e-9
    complex_phases: bool = True
    strategy: tuple = (1, 1)
    fixed: dict = field(default_factory=dict)
    starts: tuple = ()
    max_evals: int = 2000
    signed: bool = False

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise InvalidParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0.0 < self.herald_efficiency <= 1.0:
            raise InvalidParameterError(f"eta_h must lie in (0, 1], got {self.eta_h}")
        if not 0.0 <= self.p_dc < 1.0:
            raise InvalidParameterError(f"p_dc must lie in [0, 1), got {self.p_dc}")
        if self.restarts < 1:
            raise InvalidParameterError(f"restarts must be >= 1, got {self.restarts}")
        if tuple(self.strategy) not in STRATEGIES:
            raise InvalidParameterError(f"strategy must be one of {STRATEGIES}, got {self.strategy}")
        for name, (lo, hi) in self.bounds.items():
            if name not in PARAM_NAMES:
                raise InvalidParameterError(f"unknown parameter {name!r}")
            if not lo <= hi:
                raise InvalidParameterError(f"empty bounds for {name}: [{lo}, {hi}]")
        for name in self.fixed:
            if name not in self.names:
                raise InvalidParameterError(f"cannot fix unknown parameter {name!r}")

    @property
    def herald_efficiency(self) -> float:
        return self.eta if self.eta_h is None else self.eta_h

    @property
    def names(self):
        return PARAM_NAMES if self.complex_phases else PARAM_NAMES[:6]

    @property
    def free(self):
        return tuple(n for n in self.names if n not in self.fixed)


@dataclass(frozen=True)
class OptimizationResult:
    s_opt: float
    params: dict
    strategy: tuple
    converged: bool
    evaluations: int
    boundary: tuple = ()

    def source(self, problem: OptimizationProblem) -> SourceParams:
        return SourceParams(g=self.params["g"], eta_h=problem.herald_efficiency, p_dc=problem.p_dc)

    def settings(self, problem: OptimizationProblem) -> MeasurementSettings:
        p = self.params

        def amp(name, phase):
            return p[name] * complex(math.cos(p.get(phase, 0.0)), math.sin(p.get(phase, 0.0)))

        return MeasurementSettings(
            alpha1=complex(p["alpha1"]),
            alpha2=amp("alpha2", "phi_alpha2"),
            beta1=amp("beta1", "phi_beta1"),
            beta2=amp("beta2", "phi_beta2"),
            T=p["T"],
            eta=problem.eta,
        )


@dataclass(frozen=True)
class StrategyReport:
    values: dict

    @property
    def spread(self) -> float:
        v = list(self.values.values())
        return max(v) - min(v)


def _objective(problem: OptimizationProblem):
    names = problem.names
    free_idx = [names.index(n) for n in problem.free]
    full = np.array([problem.fixed.get(n, 0.0) for n in names], dtype=float)
    eta, eta_h, p_dc = problem.eta, problem.herald_efficiency, problem.p_dc
    sign = problem.strategy[0] * problem.strategy[1]
    chsh_sum = kernels.chsh_sum

    if problem.signed:

        def f(x):
            full[free_idx] = x
            return -sign * chsh_sum(full, eta, eta_h, p_dc)

    else:

        def f(x):
            full[free_idx] = x
            return -abs(chsh_sum(full, eta, eta_h, p_dc))

    return f


def _local_search(f, x0, bounds, problem):
    return minimize(
        f,
        x0,
        method="Nelder-Mead",
        bounds=bounds,
        options={"xatol": 1e-6, "fatol": 0.1 * problem.tol, "maxfev": problem.max_evals, "adaptive": True},
    )


def _start_points(problem, lo, hi):
    free = problem.free
    pts = [np.clip([s.get(n, 0.5 * (a + b)) for n, a, b in zip(free, lo, hi)], lo, hi) for s in problem.starts]
    box = [problem.start_bounds.get(n, (a, b)) for n, a, b in zip(free, lo, hi)]
    slo = np.clip([b[0] for b in box], lo, hi)
    shi = np.clip([b[1] for b in box], slo, hi)
    sampler = qmc.Halton(d=len(free), scramble=True, seed=problem.seed)
    pts.extend(slo + (shi - slo) * u for u in sampler.random(problem.restarts))
    return pts


def _canonical_phases(params):
    """Fold each phase into (-pi/2, pi/2] by flipping the magnitude sign."""
    for amp, phase in (("alpha2", "phi_alpha2"), ("beta1", "phi_beta1"), ("beta2", "phi_beta2")):
        if phase not in params:
            continue
        phi = math.remainder(params[phase], 2.0 * math.pi)
        if phi <= -math.pi / 2 or phi > math.pi / 2:
            phi = math.remainder(phi + math.pi, 2.0 * math.pi)
            params[amp] = -params[amp]
        params[phase] = phi


def optimize_chsh(problem: OptimizationProblem) -> OptimizationResult:
    """Maximize ``S`` by Nelder-Mead searches from low-discrepancy starts.

    The best local optimum is re-polished from a fresh simplex until ``S``
    improves by less than ``problem.tol``.  Deterministic for a fixed seed.
    """
    free = problem.free
    lo = np.array([problem.bounds[n][0] for n in free])
    hi = np.array([problem.bounds[n][1] for n in free])
    bounds = list(zip(lo, hi))
    f = _objective(problem)

    evaluations = 0
    best = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for x0 in _start_points(problem, lo, hi):
            res = _local_search(f, x0, bounds, problem)
            evaluations += res.nfev
            if best is None or res.fun < best.fun:
                best = res
        converged = bool(best.success)
        for _ in range(5):
            res = _local_search(f, best.x, bounds, problem)
            evaluations += res.nfev
            improvement = best.fun - res.fun
            if res.fun <= best.fun:
                best = res
            converged = bool(res.success)
            if improvement < problem.tol:
                break

    params = dict(problem.fixed)
    params.update(zip(free, (float(v) for v in best.x)))
    if all(n in free for n in DISPLACEMENTS) and params["alpha1"] < 0.0:
        for n in DISPLACEMENTS:
            params[n] = -params[n]
    if not problem.fixed:
        _canonical_phases(params)
    params = {n: params[n] for n in problem.names}

    boundary = tuple(
        n
        for n, v in zip(free, best.x)
        if not n.startswith("phi_")
        and min(v - problem.bounds[n][0], problem.bounds[n][1] - v)
        <= _BOUNDARY_RTOL * max(1.0, abs(problem.bounds[n][1] - problem.bounds[n][0]))
    )
    return OptimizationResult(
        s_opt=min(float(-best.fun), TSIRELSON),
        params=params,
        strategy=tuple(problem.strategy),
        converged=converged,
        evaluations=evaluations,
        boundary=boundary,
    )


def _tied(template, eta):
    return replace(template, eta=eta, eta_h=None if template.eta_h is None else template.eta_h)


def find_eta_min(template: OptimizationProblem, bracket=(0.7, 1.0), tol=1e-3, margin=1e-7):
    """Bisect on ``eta`` for the efficiency where the optimal ``S`` first exceeds 2.

    A point counts as violating when ``S_opt > 2 + margin``.  Returns the
    midpoint of the final bracket.

    Raises
    ------
    BracketError
        If the lower end violates or the upper end does not.
    """
    lo, hi = bracket
    if not 0.0 < lo < hi <= 1.0:
        raise BracketError(f"bracket must satisfy 0 < low < high <= 1, got {bracket}")

    def violates(eta):
        return optimize_chsh(_tied(template, eta)).s_opt > 2.0 + margin

    if violates(lo):
        raise BracketError(f"optimal S already exceeds 2 at the lower end eta={lo}")
    if not violates(hi):
        raise BracketError(f"optimal S does not exceed 2 at the upper end eta={hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if violates(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def strategy_equivalence_check(problem: OptimizationProblem) -> StrategyReport:
    """Optimize separately under each of the four outcome-to-value assignments."""
    values = {s: optimize_chsh(replace(problem, strategy=s)).s_opt for s in STRATEGIES}
    return StrategyReport(values=values)


@dataclass(frozen=True)
class RateOptimum:
    rate: float
    s: float
    params: dict
    evaluations: int


_RATE_G_LADDER = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.45)


def optimize_rate(problem: OptimizationProblem, seed_result: OptimizationResult | None = None) -> RateOptimum:
    """Maximize the pump-limited rate ``P_herald(g) * H_min(S)`` per pump pulse.

    ``H_min`` vanishes for ``S <= 2``, so starts are the S-optimal settings
    (from ``seed_result`` or a fresh :func:`optimize_chsh`) placed on a
    ladder of squeezing values, plus ``restarts // 8`` low-discrepancy points.
    """
    from .randomness import min_entropy

    if seed_result is None:
        seed_result = optimize_chsh(problem)
    eta_h = problem.herald_efficiency
    sign = problem.strategy[0] * problem.strategy[1]
    names = problem.names
    chsh_sum = kernels.chsh_sum

    def rate_of(x):
        raw = sign * chsh_sum(x, problem.eta, eta_h, problem.p_dc)
        s = min(max(raw, 0.0) if problem.signed else abs(raw), TSIRELSON)
        tg2 = math.tanh(x[0]) ** 2
        return eta_h * tg2 / (1.0 - (1.0 - eta_h) * tg2) * min_entropy(s).h_min, s

    lo = np.array([problem.bounds[n][0] for n in names])
    hi = np.array([problem.bounds[n][1] for n in names])
    base = np.array([seed_result.params[n] for n in names])
    starts = []
    for g in _RATE_G_LADDER:
        x = base.copy()
        x[0] = g
        starts.append(np.clip(x, lo, hi))
    sampler = qmc.Halton(d=len(names), scramble=True, seed=problem.seed)
    starts.extend(lo + (hi - lo) * u for u in sampler.random(max(problem.restarts // 8, 1)))

    def f(x):
        return -rate_of(x)[0]

    evaluations = 0
    best = None
    for x0 in starts:
        res = _local_search(f, x0, list(zip(lo, hi)), replace(problem, tol=problem.tol * 1e-3))
        evaluations += res.nfev
        if best is None or res.fun < best.fun:
            best = res
    rate, s = rate_of(best.x)
    return RateOptimum(
        rate=rate,
        s=s,
        params=dict(zip(names, (float(v) for v in best.x))),
        evaluations=evaluations,
    )
