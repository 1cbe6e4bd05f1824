"""Visibility/predictability measures, conditional and averaged variants.

For a single OAM qubit with density matrix rho (basis |l>, |-l>):

    visibility      V = |Tr[(sigma_x + i sigma_y) rho]| = 2 |rho_01|
    predictability  P = |Tr[sigma_z rho]| = |rho_00 - rho_11|

Both lie in [0, 1] and satisfy V^2 + P^2 <= 1 for any physical state.
Conditional variants apply the same measures to the OAM state obtained
after postselecting the polarization qubit; because different
postselections yield different conditional states, mixing the visibility
of one with the predictability of another can push the sum of squares
anywhere up to 2.  Weighting each conditional measure by its
postselection probability restores the single-qubit bound.

Closed forms (in the preparation angles theta, alpha):

    V              = |sin(alpha/2) sin(theta)|
    P              = |cos(theta)|
    V given |V><V| = |sin(theta) sin(alpha/2)|
                     / (cos^2(theta/2) + sin^2(theta/2) sin^2(alpha/2))
    P given |H><H| = 1
    V averaged     = |sin(theta) sin(alpha/2)|
    P averaged     = sin^2(theta/2) cos^2(alpha/2)
                     + |cos^2(theta/2) - sin^2(theta/2) sin^2(alpha/2)|

All closed forms are validated against the density-matrix pipeline in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import P_MIN, ZeroProbabilityPostselection
from .qubit import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    StateParams,
    density_matrix,
    partial_trace_env,
    postselect_env,
    projector_h,
    projector_v,
    state_vector,
)


@dataclass(frozen=True)
class DualityReport:
    """Visibility/predictability pair for one measurement configuration.

    ``probability`` is the postselection probability that produced the
    state (1 for the unconditional and averaged cases, where the whole
    ensemble is used).  ``label`` names the configuration.
    """

    visibility: float
    predictability: float
    probability: float
    label: str

    @property
    def sum_of_squares(self) -> float:
        return self.visibility**2 + self.predictability**2


def visibility(rho: np.ndarray) -> float:
    """Fringe contrast of a qubit state: twice the coherence magnitude."""
    rho = np.asarray(rho, dtype=complex)
    return float(abs(np.trace((SIGMA_X + 1j * SIGMA_Y) @ rho)))


def predictability(rho: np.ndarray) -> float:
    """Which-alternative information of a qubit state: |<sigma_z>|."""
    rho = np.asarray(rho, dtype=complex)
    return float(abs(np.trace(SIGMA_Z @ rho).real))


def unconditional_duality(params: StateParams) -> DualityReport:
    """Measures of the reduced OAM state, environment ignored."""
    rho = partial_trace_env(density_matrix(state_vector(params)))
    return DualityReport(
        visibility=visibility(rho),
        predictability=predictability(rho),
        probability=1.0,
        label="unconditional",
    )


def conditional_duality(
    params: StateParams,
    projector: np.ndarray,
    label: str = "projector",
    p_min: float = P_MIN,
) -> DualityReport:
    """Measures of the OAM state conditioned on one polarization outcome."""
    rho, probability = postselect_env(state_vector(params), projector, p_min=p_min)
    return DualityReport(
        visibility=visibility(rho),
        predictability=predictability(rho),
        probability=probability,
        label=label,
    )


def postselection_probabilities(theta, alpha):
    """(p_H, p_V) for the {|H><H|, |V><V|} decomposition; broadcasts."""
    theta = np.asarray(theta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    p_h = np.sin(theta / 2) ** 2 * np.cos(alpha / 2) ** 2
    p_v = np.cos(theta / 2) ** 2 + np.sin(theta / 2) ** 2 * np.sin(alpha / 2) ** 2
    return p_h, p_v


def conditional_visibility_v(theta, alpha):
    """Closed-form visibility after postselecting |V><V|; broadcasts.

    Undefined entries (vanishing postselection probability) come back as
    NaN rather than raising, so grid sweeps stay total.
    """
    theta = np.asarray(theta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    _, p_v = postselection_probabilities(theta, alpha)
    num = np.abs(np.sin(theta) * np.sin(alpha / 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(p_v >= P_MIN, num / np.where(p_v > 0, p_v, 1.0), np.nan)
    if out.ndim == 0:
        return float(out)
    return out


def closed_form_conditional(
    params: StateParams, p_min: float = P_MIN
) -> tuple[float, float]:
    """(V given |V><V|, P given |H><H|) in closed form.

    P given |H><H| is identically 1: the horizontal output contains a
    single OAM mode whenever it contains anything at all.

    Raises:
        ZeroProbabilityPostselection: when the vertical postselection
            probability (the denominator of the visibility) is below
            ``p_min``.
    """
    _, p_v = postselection_probabilities(params.theta, params.alpha)
    if p_v < p_min:
        raise ZeroProbabilityPostselection(
            f"vertical postselection probability {p_v:.3e} below {p_min:.1e}"
        )
    num = abs(np.sin(params.theta) * np.sin(params.alpha / 2))
    return float(num / p_v), 1.0


def closed_form_averaged(theta, alpha):
    """(V averaged, P averaged) over the {H, V} decomposition; broadcasts."""
    theta = np.asarray(theta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    v_bar = np.abs(np.sin(theta) * np.sin(alpha / 2))
    p_bar = np.sin(theta / 2) ** 2 * np.cos(alpha / 2) ** 2 + np.abs(
        np.cos(theta / 2) ** 2 - np.sin(theta / 2) ** 2 * np.sin(alpha / 2) ** 2
    )
    if v_bar.ndim == 0:
        return float(v_bar), float(p_bar)
    return v_bar, p_bar


def averaged_duality(params: StateParams, p_min: float = P_MIN) -> DualityReport:
    """Probability-weighted measures over the complete {H, V} postselection.

    A branch whose postselection probability vanishes carries no ensemble
    members and contributes zero to each sum, so the averages are total
    functions of the preparation angles.
    """
    psi = state_vector(params)
    v_sum = 0.0
    p_sum = 0.0
    for proj in (projector_h(), projector_v()):
        try:
            rho, prob = postselect_env(psi, proj, p_min=p_min)
        except ZeroProbabilityPostselection:
            continue
        v_sum += prob * visibility(rho)
        p_sum += prob * predictability(rho)
    return DualityReport(
        visibility=v_sum,
        predictability=p_sum,
        probability=1.0,
        label="averaged",
    )


def conditional_sum_of_squares(theta, alpha):
    """V(given V)^2 + P(given H)^2 in closed form; broadcasts, NaN-safe."""
    v = conditional_visibility_v(theta, alpha)
    return v**2 + 1.0


def averaged_sum_of_squares(theta, alpha):
    """V averaged^2 + P averaged^2 in closed form; broadcasts."""
    v_bar, p_bar = closed_form_averaged(theta, alpha)
    return v_bar**2 + p_bar**2
