"""Exact state algebra for the OAM x polarization two-qubit system.

The system qubit lives in the orbital-angular-momentum pair {|l>, |-l>},
the environment qubit in the polarization pair {|H>, |V>}.  Every routine
in the package uses one fixed product-basis ordering:

    index 0: |l, H>     index 1: |l, V>
    index 2: |-l, H>    index 3: |-l, V>

i.e. OAM is the slow (first) tensor factor and polarization the fast one.

States are plain numpy arrays: pure states as complex 4-vectors, mixed
states as 4x4 (or, reduced, 2x2) complex density matrices.  The density
matrix path is deliberately kept alongside the faster amplitude
manipulations so the two can cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import P_MIN, ZeroProbabilityPostselection

BASIS_LABELS = ("|l,H>", "|l,V>", "|-l,H>", "|-l,V>")

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

NORM_ATOL = 1e-12
HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_EIGVAL_FLOOR = -1e-10


@dataclass(frozen=True)
class StateParams:
    """Preparation angles of the two half-wave plates, in radians.

    ``theta`` sets the splitting between the interferometer arms (the
    plate before the interferometer), ``alpha`` the polarization rotation
    inside the lower arm.  Any finite real values are accepted; all
    downstream formulas are 2*pi-periodic in both angles.
    """

    theta: float
    alpha: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and math.isfinite(self.alpha)):
            raise ValueError("theta and alpha must be finite")

    def canonical(self) -> tuple[float, float]:
        """Angles folded into [0, 2*pi) for reporting."""
        two_pi = 2.0 * math.pi
        return (self.theta % two_pi, self.alpha % two_pi)


def state_vector(params: StateParams) -> np.ndarray:
    """Amplitude 4-vector of the prepared pure state.

    Returns cos(theta/2)|l,V> + sin(theta/2) |-l> (cos(alpha/2)|H> +
    sin(alpha/2)|V>); unit norm by construction for any real angles.
    """
    half_t = 0.5 * params.theta
    half_a = 0.5 * params.alpha
    return np.array(
        [
            0.0,
            math.cos(half_t),
            math.sin(half_t) * math.cos(half_a),
            math.sin(half_t) * math.sin(half_a),
        ],
        dtype=complex,
    )


def density_matrix(state: np.ndarray) -> np.ndarray:
    """Density matrix of ``state`` (passes 4x4 inputs through unchanged)."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    if state.shape == (4, 4):
        return state
    raise ValueError(f"expected a 4-vector or 4x4 matrix, got shape {state.shape}")


def validate_pure_state(psi: np.ndarray, atol: float = NORM_ATOL) -> None:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise ValueError(f"pure state must be a 4-vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"pure state norm {norm!r} deviates from 1 beyond {atol}")


def validate_density_matrix(rho: np.ndarray) -> None:
    """Check hermiticity, unit trace and positive semidefiniteness."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_ATOL:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(rho.trace() - 1.0) > TRACE_ATOL:
        raise ValueError(f"density matrix trace {rho.trace()!r} deviates from 1")
    eigvals = np.linalg.eigvalsh(rho)
    if eigvals.min() < PSD_EIGVAL_FLOOR:
        raise ValueError(f"density matrix has negative eigenvalue {eigvals.min()!r}")


def partial_trace_env(state: np.ndarray) -> np.ndarray:
    """Reduced 2x2 OAM state after tracing out polarization.

    Accepts either a pure 4-vector or a 4x4 density matrix.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        amps = state.reshape(2, 2)  # [oam, pol]
        return amps @ amps.conj().T
    rho = density_matrix(state).reshape(2, 2, 2, 2)
    return np.einsum("ikjk->ij", rho)


def projector_h() -> np.ndarray:
    """|H><H| on the polarization qubit."""
    return np.array([[1, 0], [0, 0]], dtype=complex)


def projector_v() -> np.ndarray:
    """|V><V| on the polarization qubit."""
    return np.array([[0, 0], [0, 1]], dtype=complex)


def projector_from_ket(ket: np.ndarray) -> np.ndarray:
    """Rank-1 projector onto an arbitrary pure polarization state."""
    ket = np.asarray(ket, dtype=complex)
    if ket.shape != (2,):
        raise ValueError(f"polarization ket must be a 2-vector, got {ket.shape}")
    norm = np.linalg.norm(ket)
    if norm == 0.0:
        raise ValueError("cannot project onto the zero vector")
    ket = ket / norm
    return np.outer(ket, ket.conj())


def projector_bloch(polar: float, azimuth: float) -> np.ndarray:
    """Projector onto cos(polar/2)|H> + exp(i*azimuth) sin(polar/2)|V>."""
    ket = np.array(
        [math.cos(0.5 * polar), np.exp(1j * azimuth) * math.sin(0.5 * polar)],
        dtype=complex,
    )
    return projector_from_ket(ket)


def validate_projector(proj: np.ndarray, atol: float = 1e-12) -> None:
    proj = np.asarray(proj, dtype=complex)
    if proj.shape != (2, 2):
        raise ValueError(f"projector must be 2x2, got shape {proj.shape}")
    if np.max(np.abs(proj - proj.conj().T)) > atol:
        raise ValueError("projector is not Hermitian within tolerance")
    if np.max(np.abs(proj @ proj - proj)) > atol:
        raise ValueError("projector is not idempotent within tolerance")


def postselect_env(
    state: np.ndarray,
    projector: np.ndarray,
    p_min: float = P_MIN,
) -> tuple[np.ndarray, float]:
    """Conditional OAM state after projecting the polarization qubit.

    Computes Tr_pol[(1 (x) proj) rho] and its trace p, returning the
    normalized 2x2 conditional state together with p.

    Raises:
        ZeroProbabilityPostselection: if p < p_min, in which case the
            conditional state is undefined.
    """
    rho = density_matrix(np.asarray(state, dtype=complex))
    proj = np.asarray(projector, dtype=complex)
    sandwiched = (np.kron(IDENTITY, proj) @ rho).reshape(2, 2, 2, 2)
    reduced = np.einsum("ikjk->ij", sandwiched)
    probability = float(reduced.trace().real)
    if probability < p_min:
        raise ZeroProbabilityPostselection(
            f"postselection probability {probability:.3e} below {p_min:.1e}"
        )
    return reduced / probability, probability
