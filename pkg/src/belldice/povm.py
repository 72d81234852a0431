"""Displaced click detector as a two-outcome qubit POVM.

The no-click element ``P0 = D(alpha)^dag (1-eta)^{n} D(alpha)`` is restricted
to ``span{|0>, |1>}`` and split into a weighted projector plus a
state-independent coin::

    P0 = mu * (1 + n.sigma) / 2 + (1 - mu) * r0 * 1

with ``sigma`` the standard Pauli matrices.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMeasurementError, InvalidParameterError

__all__ = [
    "DisplacedClickDetector",
    "QubitPovmPair",
    "ExtremalDecomposition",
    "PAULI",
    "povm_qubit_matrix",
    "extremal_decomposition",
    "bloch_trajectory",
    "write_trajectory_csv",
    "TRAJECTORY_HEADER",
]

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

TRAJECTORY_HEADER = ("alpha", "mu", "nx", "ny", "nz", "mu_nx", "mu_ny", "mu_nz")


@dataclass(frozen=True)
class DisplacedClickDetector:
    """Displacement ``alpha = alpha_abs * exp(i*delta)`` followed by a click detector."""

    alpha_abs: float
    delta: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError(f"eta must lie in [0, 1], got {self.eta}")
        if not self.alpha_abs >= 0.0:
            raise InvalidParameterError(f"alpha_abs must be >= 0, got {self.alpha_abs}")

    @property
    def alpha(self) -> complex:
        return self.alpha_abs * complex(math.cos(self.delta), math.sin(self.delta))


@dataclass(frozen=True)
class QubitPovmPair:
    p0: np.ndarray
    pc: np.ndarray


@dataclass(frozen=True)
class ExtremalDecomposition:
    mu: float
    n_vec: np.ndarray
    r0: float

    @property
    def rc(self) -> float:
        return 1.0 - self.r0

    def reconstruct_p0(self) -> np.ndarray:
        proj = 0.5 * (np.eye(2) + sum(c * s for c, s in zip(self.n_vec, PAULI)))
        return self.mu * proj + (1.0 - self.mu) * self.r0 * np.eye(2)


def povm_qubit_matrix(det: DisplacedClickDetector) -> QubitPovmPair:
    """No-click and click elements on the ``{|0>, |1>}`` subspace."""
    eta = det.eta
    a = det.alpha
    a2 = det.alpha_abs**2
    e = math.exp(-eta * a2)
    p0 = np.array(
        [
            [e, -eta * a.conjugate() * e],
            [-eta * a * e, (1.0 - eta + eta**2 * a2) * e],
        ],
        dtype=complex,
    )
    return QubitPovmPair(p0=p0, pc=np.eye(2) - p0)


def extremal_decomposition(det: DisplacedClickDetector) -> ExtremalDecomposition:
    """Split ``{P0, Pc}`` into ``mu`` times a projective measurement plus a coin.

    Raises
    ------
    DegenerateMeasurementError
        If ``eta == 0``: the POVM is ``{1, 0}`` and has no direction.
    """
    eta = det.eta
    if eta == 0.0:
        raise DegenerateMeasurementError("eta = 0 gives the trivial POVM {1, 0}")
    a2 = det.alpha_abs**2
    e = math.exp(-eta * a2)
    # mu * n, read off the Pauli components of P0
    mx = -2.0 * eta * det.alpha_abs * e * math.cos(det.delta)
    my = -2.0 * eta * det.alpha_abs * e * math.sin(det.delta)
    mz = eta * e * (1.0 - eta * a2)
    mu = eta * e * math.sqrt(a2 * (a2 * eta**2 - 2.0 * eta + 4.0) + 1.0)
    n_vec = np.array([mx, my, mz]) / mu
    trace_p0 = e * (2.0 - eta + eta**2 * a2)
    if 1.0 - mu < 1e-15:
        r0 = 1.0
    else:
        r0 = min(max((trace_p0 - mu) / (2.0 * (1.0 - mu)), 0.0), 1.0)
    return ExtremalDecomposition(mu=mu, n_vec=n_vec, r0=r0)


def bloch_trajectory(eta, alpha_grid):
    """Vectors ``mu * n`` for real displacements (``delta = 0``, x-z plane)."""
    out = []
    for a in alpha_grid:
        dec = extremal_decomposition(DisplacedClickDetector(alpha_abs=float(a), eta=eta))
        out.append(dec.mu * dec.n_vec)
    return out


def write_trajectory_csv(fh, eta, alpha_grid):
    """Write one CSV row per grid point at 17 significant digits."""
    rows = []
    for a in alpha_grid:
        dec = extremal_decomposition(DisplacedClickDetector(alpha_abs=float(a), eta=eta))
        # + 0.0 turns -0.0 into 0.0
        vals = [float(a), dec.mu, *dec.n_vec, *(dec.mu * dec.n_vec)]
        rows.append([f"{v + 0.0:.17g}" for v in vals])
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRAJECTORY_HEADER)
    writer.writerows(rows)
