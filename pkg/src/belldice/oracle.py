"""Brute-force truncated Fock-space simulation of the heralded Bell test.

Everything here is built from matrices: the two-mode squeezed vacuum, the
herald measurement and partial trace, the beam-splitter isometry, matrix
exponentials for displacements, and traces against the no-click operator.
No closed-form click statistic is used, so the module serves as an
independent check on :mod:`belldice.correlators`.

Two-mode indices are flattened as ``first * (n_max + 1) + second``.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .correlators import JointProbabilities
from .errors import InvalidParameterError, TruncationError, ZeroProbabilityError

__all__ = [
    "OracleConfig",
    "TruncatedState",
    "tmsv_state",
    "thermal_state",
    "coherent_state",
    "herald_condition",
    "no_herald_condition",
    "beamsplitter_apply",
    "displacement_matrix",
    "displace_apply",
    "npnr_noclick_operator",
    "displaced_noclick_operator",
    "state_joint_probabilities",
    "oracle_joint_probabilities",
    "oracle_correlator",
    "oracle_thermal_correlator",
]


@dataclass(frozen=True)
class OracleConfig:
    n_max: int = 20
    tail_tol: float = 1e-12
    padding: int = 10
    # raise n_max in steps of 5 until results move by less than tail_tol
    auto_raise: bool = True
    max_n_max: int = 80

    def __post_init__(self):
        if self.n_max < 1:
            raise InvalidParameterError(f"n_max must be >= 1, got {self.n_max}")
        if not self.tail_tol > 0.0:
            raise InvalidParameterError(f"tail_tol must be > 0, got {self.tail_tol}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class TruncatedState:
    data: np.ndarray
    n_max: int
    mode_count: int

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.data).real.copy()

    def normalized(self) -> "TruncatedState":
        return replace(self, data=self.data / self.trace)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.data, self.data)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.data).min())

    def as_4d(self) -> np.ndarray:
        d = self.dim
        return self.data.reshape(d, d, d, d)


def tmsv_state(g, cfg: OracleConfig = OracleConfig()) -> TruncatedState:
    """Two-mode squeezed vacuum on modes (b, c) as a pure density operator."""
    if not g > 0.0:
        raise InvalidParameterError(f"squeezing g must be > 0, got {g}")
    tg = math.tanh(g)
    tail = tg ** (2 * (cfg.n_max + 1))
    if tail > cfg.tail_tol:
        raise TruncationError(
            f"n_max={cfg.n_max} drops pair-number mass {tail:.3g} > tail_tol={cfg.tail_tol:.3g} at g={g}"
        )
    d = cfg.dim
    psi = np.zeros(d * d, dtype=complex)
    n = np.arange(d)
    psi[n * d + n] = math.sqrt(1.0 - tg**2) * tg**n
    return TruncatedState(data=np.outer(psi, psi.conj()), n_max=cfg.n_max, mode_count=2)


def thermal_state(n_bar, cfg: OracleConfig = OracleConfig()) -> TruncatedState:
    if n_bar < 0.0:
        raise InvalidParameterError(f"n_bar must be >= 0, got {n_bar}")
    q = n_bar / (1.0 + n_bar)
    if q ** cfg.dim > cfg.tail_tol:
        raise TruncationError(f"thermal tail {q ** cfg.dim:.3g} exceeds tail_tol at n_max={cfg.n_max}")
    p = q ** np.arange(cfg.dim) / (1.0 + n_bar)
    return TruncatedState(data=np.diag(p).astype(complex), n_max=cfg.n_max, mode_count=1)


def coherent_state(gamma, cfg: OracleConfig = OracleConfig()) -> TruncatedState:
    """Coherent state obtained by displacing the vacuum numerically."""
    vac = np.zeros((cfg.dim, cfg.dim), dtype=complex)
    vac[0, 0] = 1.0
    return displace_apply(TruncatedState(vac, cfg.n_max, 1), 0, gamma, cfg)


def _herald_split(state, eta_h):
    if state.mode_count != 2:
        raise InvalidParameterError("heralding needs a two-mode (b, c) state")
    if not 0.0 <= eta_h <= 1.0:
        raise InvalidParameterError(f"eta_h must lie in [0, 1], got {eta_h}")
    noclick = np.diag(npnr_noclick_operator(state.n_max, eta_h))
    rho = state.as_4d()
    # partial trace over c weighted by the no-click operator
    rho_b_noclick = np.einsum("icjc,c->ij", rho, noclick)
    rho_b_all = np.einsum("icjc->ij", rho)
    return rho_b_all - rho_b_noclick, rho_b_noclick


def herald_condition(state: TruncatedState, eta_h):
    """Condition mode b on a click of the herald detector on mode c.

    Returns the normalized state of b and the click probability.
    """
    if not 0.0 < eta_h <= 1.0:
        raise InvalidParameterError(f"eta_h must lie in (0, 1], got {eta_h}")
    rho_click, _ = _herald_split(state, eta_h)
    p = float(np.trace(rho_click).real)
    if p < 1e-300:
        raise ZeroProbabilityError(f"herald click probability {p:.3g}")
    return TruncatedState(rho_click / p, state.n_max, 1), p


def no_herald_condition(state: TruncatedState, eta_h):
    """Condition mode b on the herald detector not clicking."""
    _, rho_nc = _herald_split(state, eta_h)
    p = float(np.trace(rho_nc).real)
    if p < 1e-300:
        raise ZeroProbabilityError(f"herald no-click probability {p:.3g}")
    return TruncatedState(rho_nc / p, state.n_max, 1), p


def _beamsplitter_isometry(n_max, T):
    d = n_max + 1
    v = np.zeros((d * d, d))
    sr = math.sqrt(1.0 - T)
    st = math.sqrt(T)
    for n in range(d):
        for k in range(n + 1):
            v[k * d + (n - k), n] = math.sqrt(math.comb(n, k)) * sr**k * st ** (n - k)
    return v


def beamsplitter_apply(state: TruncatedState, T) -> TruncatedState:
    """Split single-mode b against vacuum into (a, b): ``|g>_b -> |sqrt(R) g>_a |sqrt(T) g>_b``."""
    if state.mode_count != 1:
        raise InvalidParameterError("beam splitter input must be single-mode")
    if not 0.0 < T < 1.0:
        raise InvalidParameterError(f"transmittivity T must lie in (0, 1), got {T}")
    v = _beamsplitter_isometry(state.n_max, T)
    return TruncatedState(v @ state.data @ v.T, state.n_max, 2)


def displacement_matrix(alpha, dim) -> np.ndarray:
    """``expm(alpha a^dag - conj(alpha) a)`` on a ``dim``-level truncation."""
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)
    alpha = complex(alpha)
    return expm(alpha * a.conj().T - alpha.conjugate() * a)


def displace_apply(state: TruncatedState, mode_index, alpha, cfg: OracleConfig = OracleConfig()):
    """Apply ``D(alpha)`` to one mode, computed on a padded space and projected back."""
    d = state.dim
    dp = d + cfg.padding
    dmat = displacement_matrix(alpha, dp)
    # isometric embedding of the truncated space followed by D(alpha)
    emb = dmat @ np.eye(dp, d)
    if state.mode_count == 1:
        big = emb
    elif mode_index == 0:
        big = np.kron(emb, np.eye(d))
    else:
        big = np.kron(np.eye(d), emb)
    rho = big @ state.data @ big.conj().T
    if state.mode_count == 1:
        kept = rho[:d, :d]
    else:
        rho4 = rho.reshape(dp, d, dp, d) if mode_index == 0 else rho.reshape(d, dp, d, dp)
        kept = rho4[:d, :, :d, :] if mode_index == 0 else rho4[:, :d, :, :d]
        kept = kept.reshape(d * d, d * d)
    lost = float(np.trace(rho).real - np.trace(kept).real)
    if lost > cfg.tail_tol:
        raise TruncationError(
            f"displacement by {alpha} pushes mass {lost:.3g} beyond n_max={state.n_max}"
        )
    return TruncatedState(kept, state.n_max, state.mode_count)


def npnr_noclick_operator(n_max, eta) -> np.ndarray:
    """Diagonal matrix ``(1 - eta)**n``."""
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameterError(f"eta must lie in [0, 1], got {eta}")
    return np.diag((1.0 - eta) ** np.arange(n_max + 1))


def displaced_noclick_operator(alpha, eta, n_max, padding=10) -> np.ndarray:
    """``D(alpha)^dag (1-eta)^n D(alpha)`` restricted to ``n <= n_max``."""
    dp = n_max + 1 + padding
    dmat = displacement_matrix(alpha, dp)
    full = dmat.conj().T @ npnr_noclick_operator(dp - 1, eta) @ dmat
    return full[: n_max + 1, : n_max + 1]


def state_joint_probabilities(state: TruncatedState, alpha, beta, eta, padding=10):
    """Click statistics of a two-mode (a, b) state; ``alpha`` on a, ``beta`` on b."""
    if state.mode_count != 2:
        raise InvalidParameterError("joint probabilities need a two-mode state")
    n = state.n_max
    pa0 = displaced_noclick_operator(alpha, eta, n, padding)
    pb0 = displaced_noclick_operator(beta, eta, n, padding)
    rho = state.as_4d()
    tr = state.trace
    p_ncnc = np.einsum("xy,uv,yvxu->", pa0, pb0, rho).real / tr
    p_nc_a = np.einsum("xy,yuxu->", pa0, rho).real / tr
    p_nc_b = np.einsum("uv,xvxu->", pb0, rho).real / tr
    return JointProbabilities(
        p_ncnc=float(p_ncnc),
        p_ncc=float(p_nc_a - p_ncnc),
        p_cnc=float(p_nc_b - p_ncnc),
        p_cc=float(1.0 - p_nc_a - p_nc_b + p_ncnc),
    )


def _heralded_mode_b(g, eta_h, p_dc, cfg):
    pair = tmsv_state(g, cfg)
    rho_h, p_h = herald_condition(pair, eta_h)
    if p_dc <= 0.0:
        return rho_h
    rho_nh, _ = no_herald_condition(pair, eta_h)
    wd = (1.0 - p_h) * p_dc
    mixed = (p_h * rho_h.data + wd * rho_nh.data) / (p_h + wd)
    return TruncatedState(mixed, cfg.n_max, 1)


def _single_run(g, eta_h, alpha, beta, T, eta, cfg, p_dc):
    rho_b = _heralded_mode_b(g, eta_h, p_dc, cfg)
    return state_joint_probabilities(beamsplitter_apply(rho_b, T), alpha, beta, eta, cfg.padding)


def oracle_joint_probabilities(
    g, eta_h, alpha, beta, T, eta, cfg: OracleConfig = OracleConfig(), p_dc=0.0
) -> JointProbabilities:
    """Herald, split, displace and detect numerically.

    For ``g > 0.3`` with ``cfg.auto_raise`` the truncation grows by 5 levels
    until no probability moves by more than ``tail_tol``.
    """
    probs = _single_run(g, eta_h, alpha, beta, T, eta, cfg, p_dc)
    if not (cfg.auto_raise and g > 0.3):
        return probs
    while True:
        bigger = replace(cfg, n_max=cfg.n_max + 5)
        if bigger.n_max > cfg.max_n_max:
            raise TruncationError(f"no convergence up to n_max={cfg.max_n_max} at g={g}")
        nxt = _single_run(g, eta_h, alpha, beta, T, eta, bigger, p_dc)
        delta = max(abs(x - y) for x, y in zip(probs.as_tuple(), nxt.as_tuple()))
        probs, cfg = nxt, bigger
        if delta <= cfg.tail_tol:
            return probs


def oracle_correlator(g, eta_h, alpha, beta, T, eta, cfg: OracleConfig = OracleConfig(), p_dc=0.0):
    return oracle_joint_probabilities(g, eta_h, alpha, beta, T, eta, cfg, p_dc).correlator


def oracle_thermal_correlator(n_bar, alpha, beta, T, eta, cfg: OracleConfig = OracleConfig()):
    """Correlator for a thermal input on the beam splitter (no heralding)."""
    split = beamsplitter_apply(thermal_state(n_bar, cfg), T)
    return state_joint_probabilities(split, alpha, beta, eta, cfg.padding).correlator
