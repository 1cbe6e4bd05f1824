"""Pointer-based scan of a transverse wavefunction via a wave-plate sliver.

A 1-D wavefunction psi(x) on N uniformly spaced grid points starts in the
vertical polarization.  A small half-wave-plate sliver at a single grid
point x0 rotates the local polarization by the coupling angle phi; the
beam is then postselected on zero transverse momentum and the surviving
polarization qubit |s> is read out.  The complex amplitude ratio

    w(x0) = psi(x0) / psi0,    psi0 = (1/sqrt(N)) sum_x psi(x)

is encoded in the pointer as |s> ~ |V> + (phi/2) w(x0) |H> and recovered
from exact polarization expectation values as (1/phi) <s| sx - i sy |s>,
accurate to O(phi^2).  Scanning x0 reconstructs the full wavefunction up
to the common factor psi0.

Discrete conventions
--------------------
The grid inner product is the plain sum (sum |psi|^2 = 1) and psi0 is the
zero-frequency component of the unitary DFT.  The postselection readout
takes the vertical channel through that zero-frequency amplitude and the
rotated (horizontal) channel through its total amplitude; this pairing is
what makes the pointer carry psi(x0)/psi0 itself rather than an
N-dependent multiple of it, and is applied consistently everywhere in
this module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import P_MIN, InvalidCoupling, ZeroProbabilityPostselection

WEAKNESS_WARN_THRESHOLD = 0.1
"""Warn when the pointer deflection |(phi/2) psi(x0)/psi0| exceeds this."""

NORM_ATOL = 1e-12


def normalized(psi: np.ndarray) -> np.ndarray:
    """Copy of ``psi`` normalized to unit discrete norm."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero wavefunction")
    return psi / norm


def validate_wavefunction(psi: np.ndarray) -> None:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or len(psi) < 2:
        raise ValueError("wavefunction must be a 1-D array of at least 2 points")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_ATOL:
        raise ValueError(f"wavefunction norm {norm!r} deviates from 1")


def grid_positions(n: int) -> np.ndarray:
    """Symmetric grid coordinates used by the built-in profiles."""
    return np.arange(n, dtype=float) - (n - 1) / 2.0


def gaussian_wavefunction(n: int, sigma: float, center: float = 0.0) -> np.ndarray:
    """Unit-norm Gaussian profile exp(-(x - center)^2 / (4 sigma^2))."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = grid_positions(n)
    return normalized(np.exp(-((x - center) ** 2) / (4.0 * sigma**2)).astype(complex))


def uniform_wavefunction(n: int) -> np.ndarray:
    """Flat unit-norm profile 1/sqrt(N)."""
    return np.full(n, 1.0 / math.sqrt(n), dtype=complex)


def zero_frequency_amplitude(psi: np.ndarray) -> complex:
    """Zero-frequency component of the unitary DFT: sum(psi)/sqrt(N)."""
    psi = np.asarray(psi, dtype=complex)
    return complex(psi.sum() / math.sqrt(len(psi)))


@dataclass(frozen=True)
class SliverCoupling:
    """Wave-plate sliver location, rotation angle and coupling model.

    ``mode="linearized"`` applies the first-order map that adds
    (phi/2) psi(x0) to the horizontal channel without touching the
    vertical one (the joint state is then not normalized);
    ``mode="exact"`` applies the true unitary rotation at x0.
    """

    x0: int
    phi: float
    mode: str = "linearized"

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        if self.mode not in ("linearized", "exact"):
            raise ValueError(f"unknown coupling mode {self.mode!r}")


@dataclass
class JointState:
    """Polarization-resolved transverse amplitudes (H and V channels)."""

    h: np.ndarray
    v: np.ndarray

    def norm(self) -> float:
        return math.sqrt(
            float(np.sum(np.abs(self.h) ** 2) + np.sum(np.abs(self.v) ** 2))
        )


def apply_sliver(psi: np.ndarray, coupling: SliverCoupling) -> JointState:
    """Couple the polarization to the presence of the beam at one point.

    The input beam is vertically polarized with transverse profile
    ``psi``.  See ``SliverCoupling`` for the two coupling models.
    """
    psi = np.asarray(psi, dtype=complex)
    if not 0 <= coupling.x0 < len(psi):
        raise ValueError(f"sliver position {coupling.x0} outside the grid")
    h = np.zeros_like(psi)
    v = psi.copy()
    half = 0.5 * coupling.phi
    if coupling.mode == "linearized":
        h[coupling.x0] = half * psi[coupling.x0]
    else:
        h[coupling.x0] = math.sin(half) * psi[coupling.x0]
        v[coupling.x0] = math.cos(half) * psi[coupling.x0]
    return JointState(h=h, v=v)


def postselect_zero_momentum(
    joint: JointState, p_min: float = P_MIN
) -> tuple[np.ndarray, float]:
    """Project on the uniform transverse mode; return (pointer, probability).

    The vertical channel is read out through its zero-frequency (p = 0)
    amplitude and the rotated channel through its total amplitude (see
    the module docstring for why the normalizations differ).  The pointer
    is the normalized polarization pair (s_H, s_V); the probability is
    the squared magnitude of the surviving amplitude pair.

    Raises:
        ZeroProbabilityPostselection: when the transmitted beam has no
            zero-momentum component (e.g. an odd-parity profile).
    """
    s_v = zero_frequency_amplitude(joint.v)
    if abs(s_v) < p_min:
        raise ZeroProbabilityPostselection(
            f"zero-momentum amplitude {abs(s_v):.3e} below {p_min:.1e}"
        )
    s_h = complex(joint.h.sum())
    pointer = np.array([s_h, s_v], dtype=complex)
    probability = float(np.sum(np.abs(pointer) ** 2))
    return pointer / np.linalg.norm(pointer), probability


def pointer_sigma_expectations(pointer: np.ndarray) -> tuple[float, float]:
    """Exact (<sigma_x>, <sigma_y>) of a normalized polarization qubit."""
    pointer = np.asarray(pointer, dtype=complex)
    s_h, s_v = pointer
    cross = np.conj(s_v) * s_h
    return float(2.0 * cross.real), float(-2.0 * cross.imag)


def reconstruct_weak_value(pointer: np.ndarray, phi: float) -> complex:
    """Complex weak value (1/phi)(<sigma_x> - i <sigma_y>) of the pointer.

    For a pointer produced by ``postselect_zero_momentum`` this equals
    psi(x0)/psi0 up to O(phi^2).  Its magnitude times phi is the
    polarization visibility of the pointer state.

    Raises:
        InvalidCoupling: when phi is zero (nothing was coupled).
    """
    if phi == 0.0:
        raise InvalidCoupling("phi = 0 encodes no weak value")
    pointer = np.asarray(pointer, dtype=complex)
    s_h, s_v = pointer
    deflection = abs(s_h) / abs(s_v) if abs(s_v) > 0 else math.inf
    if deflection > WEAKNESS_WARN_THRESHOLD:
        warnings.warn(
            f"pointer deflection {deflection:.3f} exceeds "
            f"{WEAKNESS_WARN_THRESHOLD}; the weak-coupling expansion "
            "is no longer accurate",
            stacklevel=2,
        )
    sx, sy = pointer_sigma_expectations(pointer)
    return complex(sx, -sy) / phi


def true_ratio(psi: np.ndarray) -> np.ndarray:
    """Reference profile psi(x)/psi0 the reconstruction converges to."""
    psi = np.asarray(psi, dtype=complex)
    return psi / zero_frequency_amplitude(psi)


def reconstruct_profile(
    psi: np.ndarray,
    phi: float,
    mode: str = "linearized",
    p_min: float = P_MIN,
) -> np.ndarray:
    """Scan the sliver over every grid point and reconstruct psi/psi0."""
    psi = np.asarray(psi, dtype=complex)
    out = np.empty(len(psi), dtype=complex)
    for x0 in range(len(psi)):
        joint = apply_sliver(psi, SliverCoupling(x0=x0, phi=phi, mode=mode))
        pointer, _ = postselect_zero_momentum(joint, p_min=p_min)
        out[x0] = reconstruct_weak_value(pointer, phi)
    return out


def convergence_order(phis: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of log(error) against log(phi)."""
    phis = np.asarray(phis, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(phis) < 2:
        raise ValueError("need at least two coupling angles")
    if np.any(errors <= 0):
        raise ValueError("errors must be positive to measure an order")
    slope, _ = np.polyfit(np.log(phis), np.log(errors), 1)
    return float(slope)
