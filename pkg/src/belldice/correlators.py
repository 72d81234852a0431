"""Closed-form click statistics of the heralded spatial-entanglement Bell test.

A two-mode squeezed vacuum heralds mode b, which is a weighted difference of
two thermal states.  Mode b is split on a beam splitter (transmittivity ``T``
to b, ``R = 1 - T`` to a), each output is displaced and detected by a click
detector of efficiency ``eta``.  Outcomes are valued ``+1`` for no-click and
``-1`` for click.

Displacements may be complex; the optimizer defaults to real ``alpha1`` and
relative phases on the other three settings.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidParameterError

__all__ = [
    "MIN_SQUEEZING",
    "TSIRELSON",
    "SourceParams",
    "HeraldedStateWeights",
    "MeasurementSettings",
    "JointProbabilities",
    "heralded_weights",
    "heralded_state_diagonal",
    "thermal_no_click_joint",
    "thermal_correlator",
    "correlator",
    "dark_count_adjusted_correlator",
    "joint_probabilities",
    "chsh_value",
    "ch_value",
    "heralding_probability",
]

MIN_SQUEEZING = 1e-4
TSIRELSON = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class SourceParams:
    """SPDC source: squeezing ``g``, herald efficiency, herald dark-count probability."""

    g: float
    eta_h: float = 1.0
    p_dc: float = 0.0

    def __post_init__(self):
        if not (self.g > 0.0 and math.isfinite(self.g)):
            raise InvalidParameterError(f"squeezing g must be > 0, got {self.g}")
        if not 0.0 <= self.eta_h <= 1.0:
            raise InvalidParameterError(f"eta_h must lie in [0, 1], got {self.eta_h}")
        if not 0.0 <= self.p_dc < 1.0:
            raise InvalidParameterError(f"p_dc must lie in [0, 1), got {self.p_dc}")

    @property
    def tg(self) -> float:
        return math.tanh(self.g)

    @property
    def rh(self) -> float:
        return math.sqrt(1.0 - self.eta_h)


@dataclass(frozen=True)
class HeraldedStateWeights:
    """``rho_h = c_plus * th(n1_bar) - c_minus * th(n2_bar)``."""

    c_plus: float
    c_minus: float
    n1_bar: float
    n2_bar: float


@dataclass(frozen=True)
class MeasurementSettings:
    alpha1: complex
    alpha2: complex
    beta1: complex
    beta2: complex
    T: float = 0.5
    eta: float = 1.0


@dataclass(frozen=True)
class JointProbabilities:
    p_ncnc: float
    p_ncc: float
    p_cnc: float
    p_cc: float

    @property
    def correlator(self) -> float:
        return self.p_ncnc + self.p_cc - self.p_ncc - self.p_cnc

    def as_tuple(self):
        return (self.p_ncnc, self.p_ncc, self.p_cnc, self.p_cc)


def _check_arm(T, eta):
    if not 0.0 < T < 1.0:
        raise InvalidParameterError(f"transmittivity T must lie in (0, 1), got {T}")
    if not 0.0 < eta <= 1.0:
        raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")


def _check_herald(src):
    if src.eta_h <= 0.0:
        raise InvalidParameterError("eta_h must be > 0 for a heralded state")
    if src.g < MIN_SQUEEZING:
        raise InvalidParameterError(f"g must be >= {MIN_SQUEEZING}, got {src.g}")


def _check_amplitude(x, name):
    if not math.isfinite(abs(x)):
        raise InvalidParameterError(f"{name} must be finite, got {x}")


def heralded_weights(src: SourceParams) -> HeraldedStateWeights:
    if src.eta_h <= 0.0:
        raise InvalidParameterError("eta_h must be > 0 for a heralded state")
    tg2 = src.tg**2
    rh2 = 1.0 - src.eta_h
    c_plus = (1.0 - rh2 * tg2) / (tg2 * src.eta_h)
    # c_plus * (1 - tg2) / (1 - rh2 * tg2) equals c_plus - 1; the subtraction
    # is exact for c_plus >= 2 and keeps the unit trace to the last bit
    return HeraldedStateWeights(
        c_plus=c_plus,
        c_minus=c_plus - 1.0,
        n1_bar=tg2 / (1.0 - tg2),
        n2_bar=rh2 * tg2 / (1.0 - rh2 * tg2),
    )


def heralded_state_diagonal(src: SourceParams, n_max: int) -> np.ndarray:
    """Photon-number populations ``<k|rho_h|k>`` for ``k = 0..n_max``."""
    w = heralded_weights(src)
    k = np.arange(n_max + 1)

    def thermal(n_bar):
        return (n_bar / (1.0 + n_bar)) ** k / (1.0 + n_bar)

    return w.c_plus * thermal(w.n1_bar) - w.c_minus * thermal(w.n2_bar)


def thermal_no_click_joint(n_bar, alpha, beta, T, eta):
    """Probability that neither detector clicks for a thermal input of mean ``n_bar``."""
    if n_bar < 0.0:
        raise InvalidParameterError(f"n_bar must be >= 0, got {n_bar}")
    _check_arm(T, eta)
    v = math.sqrt(1.0 - T) * alpha + math.sqrt(T) * beta
    x = 1.0 + eta * n_bar
    return math.exp(-eta * (abs(alpha) ** 2 + abs(beta) ** 2) + n_bar * eta**2 / x * abs(v) ** 2) / x


def _thermal_marginal(n_bar, amp, c, eta):
    x = 1.0 + eta * n_bar * c
    return math.exp(-eta * abs(amp) ** 2 / x) / x


def thermal_correlator(n_bar, alpha, beta, T, eta):
    p = thermal_no_click_joint(n_bar, alpha, beta, T, eta)
    return (
        1.0
        + 4.0 * p
        - 2.0 * _thermal_marginal(n_bar, alpha, 1.0 - T, eta)
        - 2.0 * _thermal_marginal(n_bar, beta, T, eta)
    )


def _validated(src, alpha, beta, T, eta):
    _check_herald(src)
    _check_arm(T, eta)
    _check_amplitude(alpha, "alpha")
    _check_amplitude(beta, "beta")
    a = complex(alpha)
    b = complex(beta)
    return src.tg**2, a, b


def correlator(src: SourceParams, alpha, beta, T, eta) -> float:
    """Heralded correlator ``c_plus*E_th(n1) - c_minus*E_th(n2)``; ignores ``src.p_dc``."""
    tg2, a, b = _validated(src, alpha, beta, T, eta)
    return kernels.correlator(tg2, src.eta_h, 0.0, T, eta, a.real, a.imag, b.real, b.imag)


def dark_count_adjusted_correlator(src: SourceParams, alpha, beta, T, eta) -> float:
    """Correlator averaged over photon heralds and dark-count heralds.

    A dark-count herald leaves mode b in the no-click conditional state,
    the thermal state of mean ``n2_bar``.
    """
    tg2, a, b = _validated(src, alpha, beta, T, eta)
    return kernels.correlator(tg2, src.eta_h, src.p_dc, T, eta, a.real, a.imag, b.real, b.imag)


def joint_probabilities(src: SourceParams, alpha, beta, T, eta) -> JointProbabilities:
    """Four-outcome table, including herald dark counts when ``src.p_dc > 0``."""
    tg2, a, b = _validated(src, alpha, beta, T, eta)
    v = math.sqrt(1.0 - T) * a + math.sqrt(T) * b
    pj, pa, pb = kernels.heralded_noclick(
        tg2, src.eta_h, src.p_dc, T, eta, abs(a) ** 2, abs(b) ** 2, abs(v) ** 2
    )
    return JointProbabilities(
        p_ncnc=pj,
        p_ncc=pa - pj,
        p_cnc=pb - pj,
        p_cc=1.0 - pa - pb + pj,
    )


def chsh_value(src: SourceParams, settings: MeasurementSettings) -> float:
    """``S = |E11 + E12 + E21 - E22|`` (dark-count adjusted when ``src.p_dc > 0``)."""
    s = settings

    def e(a, b):
        return dark_count_adjusted_correlator(src, a, b, s.T, s.eta)

    return abs(
        e(s.alpha1, s.beta1) + e(s.alpha1, s.beta2) + e(s.alpha2, s.beta1) - e(s.alpha2, s.beta2)
    )


def ch_value(s: float) -> float:
    return (s - 2.0) / 4.0


def heralding_probability(src: SourceParams) -> float:
    """Photon-induced herald click probability per pump pulse (dark counts excluded)."""
    tg2 = src.tg**2
    return src.eta_h * tg2 / (1.0 - (1.0 - src.eta_h) * tg2)
