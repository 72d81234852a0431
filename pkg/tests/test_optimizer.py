import math
from dataclasses import replace

import pytest

from belldice.correlators import SourceParams, chsh_value, heralding_probability
from belldice.errors import BracketError, InvalidParameterError
from belldice.optimizer import (
    DEFAULT_BOUNDS,
    OptimizationProblem,
    find_eta_min,
    optimize_chsh,
    optimize_rate,
)
from belldice.oracle import oracle_correlator
from belldice.randomness import min_entropy

S_IDEAL = 2.6883986183


@pytest.fixture(scope="module")
def ideal():
    problem = OptimizationProblem(eta=1.0)
    return problem, optimize_chsh(problem)


def oracle_chsh(res, problem):
    s = res.settings(problem)
    src = res.source(problem)

    def e(a, b):
        return oracle_correlator(src.g, src.eta_h, a, b, s.T, s.eta, p_dc=src.p_dc)

    return abs(e(s.alpha1, s.beta1) + e(s.alpha1, s.beta2) + e(s.alpha2, s.beta1) - e(s.alpha2, s.beta2))


def test_ideal_optimum(ideal):
    problem, res = ideal
    assert res.s_opt == pytest.approx(S_IDEAL, abs=1e-8)
    assert res.params["T"] == pytest.approx(0.5, abs=1e-5)
    assert res.params["g"] == pytest.approx(DEFAULT_BOUNDS["g"][0], rel=1e-6)
    assert "g" in res.boundary
    assert res.converged
    assert res.params["alpha1"] >= 0.0


def test_optimum_reproduced_by_closed_form_and_oracle(ideal):
    problem, res = ideal
    assert chsh_value(res.source(problem), res.settings(problem)) == pytest.approx(res.s_opt, abs=1e-12)
    assert oracle_chsh(res, problem) == pytest.approx(res.s_opt, abs=1e-10)


def test_deterministic(ideal):
    problem, res = ideal
    again = optimize_chsh(OptimizationProblem(eta=1.0))
    assert again.s_opt == res.s_opt
    assert again.params == res.params


def test_real_settings_suffice_at_unit_efficiency(ideal):
    res = optimize_chsh(OptimizationProblem(eta=1.0, complex_phases=False))
    assert res.s_opt == pytest.approx(ideal[1].s_opt, abs=1e-8)
    assert set(res.params) == {"g", "T", "alpha1", "alpha2", "beta1", "beta2"}


def test_phases_help_below_unit_efficiency():
    real = optimize_chsh(OptimizationProblem(eta=0.9, complex_phases=False))
    cplx = optimize_chsh(OptimizationProblem(eta=0.9))
    assert real.s_opt == pytest.approx(2.26763, abs=1e-4)
    assert cplx.s_opt == pytest.approx(2.27080, abs=1e-4)
    assert cplx.s_opt > real.s_opt + 1e-3


def test_no_violation_at_low_efficiency():
    assert optimize_chsh(OptimizationProblem(eta=0.5, restarts=32)).s_opt <= 2.0 + 1e-6


def test_restart_sufficiency():
    base = OptimizationProblem(eta=0.9, restarts=64)
    more = replace(base, restarts=128, seed=5)
    assert optimize_chsh(more).s_opt == pytest.approx(optimize_chsh(base).s_opt, abs=1e-6)


def test_fixed_parameters_are_respected(ideal):
    res = optimize_chsh(OptimizationProblem(eta=1.0, fixed={"T": 0.3}, restarts=16))
    assert res.params["T"] == 0.3
    assert res.s_opt < ideal[1].s_opt - 1e-3


def test_signed_strategies_differ():
    # the assignments giving sA*sB = -1 reach the |S| optimum, the others do not
    neg = optimize_chsh(OptimizationProblem(eta=1.0, strategy=(1, -1), signed=True, restarts=32))
    pos = optimize_chsh(OptimizationProblem(eta=1.0, strategy=(1, 1), signed=True, restarts=32))
    assert neg.s_opt == pytest.approx(S_IDEAL, abs=1e-7)
    assert pos.s_opt == pytest.approx(2.0706, abs=1e-3)


def test_rate_optimum():
    problem = OptimizationProblem(eta=1.0)
    rate = optimize_rate(problem)
    assert rate.rate == pytest.approx(0.02357, abs=2e-4)
    assert 0.25 < rate.params["g"] < 0.45
    src = SourceParams(g=rate.params["g"], eta_h=1.0)
    assert rate.rate == pytest.approx(heralding_probability(src) * min_entropy(rate.s).h_min, rel=1e-12)


def test_eta_min_bracket_errors():
    template = OptimizationProblem(eta=1.0, restarts=16)
    with pytest.raises(BracketError):
        find_eta_min(template, bracket=(0.9, 1.0))
    with pytest.raises(BracketError):
        find_eta_min(template, bracket=(0.6, 0.7))
    with pytest.raises(BracketError):
        find_eta_min(template, bracket=(0.9, 0.8))


def test_invalid_problems():
    with pytest.raises(InvalidParameterError):
        OptimizationProblem(eta=0.0)
    with pytest.raises(InvalidParameterError):
        OptimizationProblem(eta=1.0, eta_h=1.5)
    with pytest.raises(InvalidParameterError):
        OptimizationProblem(eta=1.0, restarts=0)
    with pytest.raises(InvalidParameterError):
        OptimizationProblem(eta=1.0, strategy=(1, 0))
    with pytest.raises(InvalidParameterError):
        OptimizationProblem(eta=1.0, fixed={"gamma": 1.0})
    with pytest.raises(InvalidParameterError):
        OptimizationProblem(eta=1.0, bounds={**DEFAULT_BOUNDS, "T": (0.9, 0.1)})


def test_results_stay_in_bounds(ideal):
    _, res = ideal
    for name, v in res.params.items():
        lo, hi = DEFAULT_BOUNDS[name]
        if name.startswith("phi_"):
            assert -math.pi / 2 < v <= math.pi / 2
        else:
            assert lo <= v <= hi
