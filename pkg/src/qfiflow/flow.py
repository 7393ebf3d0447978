"""QFI flow, per-channel decomposition, and non-Markovianity classification.

The full flow at a grid point is Tr{L [2 d/dt(drho_dtheta) - L drho/dt]}
with both time derivatives taken from the generator, so it includes every
contribution: the channel subflows gamma_i * J_i, the Hamiltonian-derivative
term, and the lumped remainder produced by theta-dependent rates or Lindblad
operators.  The remainder is reported as a residual rather than expanded in
closed form; an independent finite-difference derivative of the QFI series
validates the whole assembly.

Sign convention: J_i = -Tr{rho [L,A_i]† [L,A_i]} is nonpositive for any
valid state, so the sign of the subflow I_i = gamma_i * J_i follows the sign
of the decay rate -- negative rates show up as positive subflows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .estimation import DEFAULT_EPS_RANK, sld
from .model import ModelSpec, apply_generator, apply_generator_theta_derivative
from .operators import DimensionMismatchError, commutator, dagger
from .propagation import StatePair, Trajectory

__all__ = [
    "ChannelFlow",
    "FlowRecord",
    "IntervalReport",
    "SIGN_THRESHOLD",
    "subflow_J",
    "channel_decomposition",
    "hamiltonian_term",
    "full_flow",
    "residual_T",
    "fd_flow_oracle",
    "flow_records",
    "classify_intervals",
]

# Sign classification threshold: separates genuine sign changes of gamma / I
# from rounding noise near their zeros.
SIGN_THRESHOLD = 1e-10

_IMAG_WARN = 1e-10


@dataclass(frozen=True)
class ChannelFlow:
    """Rate, subflow factor, and subflow I = gamma * J for one channel."""

    label: str
    gamma: float
    J: float
    I: float


@dataclass(frozen=True, eq=False)
class FlowRecord:
    """All flow quantities at one grid point."""

    t: float
    qfi: float
    flow_fd: float
    subflows: tuple[ChannelFlow, ...]
    ham_term: float
    full_flow: float
    residual_T: float


@dataclass(frozen=True)
class IntervalReport:
    """Where a channel's rate is negative, where its subflow is positive, and
    how much of the former the latter covers (None when the rate never goes
    negative)."""

    channel: str
    negative_rate_intervals: tuple[tuple[float, float], ...]
    positive_subflow_intervals: tuple[tuple[float, float], ...]
    overlap_fraction: float | None


def _real_trace(m: np.ndarray, what: str) -> float:
    val = complex(np.trace(m))
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > _IMAG_WARN * scale:
        warnings.warn(
            f"{what} has imaginary residue {val.imag:.3e}; "
            "likely Hermiticity loss upstream",
            RuntimeWarning,
            stacklevel=3,
        )
    return val.real


def subflow_J(rho: np.ndarray, L: np.ndarray, A: np.ndarray) -> float:
    """-Tr{rho [L,A]† [L,A]}; nonpositive because rho and [L,A]†[L,A] are PSD."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != np.shape(L) or rho.shape != np.shape(A):
        raise DimensionMismatchError(
            f"incompatible shapes {rho.shape}, {np.shape(L)}, {np.shape(A)}"
        )
    C = commutator(np.asarray(L, dtype=complex), np.asarray(A, dtype=complex))
    return -_real_trace(rho @ dagger(C) @ C, "subflow")


def channel_decomposition(
    model: ModelSpec,
    theta: float,
    t: float,
    rho: np.ndarray,
    L: np.ndarray,
) -> tuple[tuple[ChannelFlow, ...], float]:
    """Per-channel (gamma_i, J_i, I_i = gamma_i * J_i) and the subflow sum."""
    flows = []
    total = 0.0
    for ch in model.channels:
        g = ch.gamma(t, theta)
        J = subflow_J(rho, L, ch.A.evaluate(t, theta))
        I = g * J
        total += I
        flows.append(ChannelFlow(label=ch.label, gamma=g, J=J, I=I))
    return tuple(flows), total


def hamiltonian_term(
    model: ModelSpec,
    theta: float,
    t: float,
    rho: np.ndarray,
    L: np.ndarray,
) -> float:
    """-2i Tr(L [dH/dtheta, rho]); exactly zero for theta-independent H."""
    if model.dH_dtheta.is_zero:
        return 0.0
    dH = model.dH_dtheta.evaluate(t, theta)
    return _real_trace(-2.0j * (L @ commutator(dH, np.asarray(rho, dtype=complex))), "hamiltonian term")


def full_flow(
    model: ModelSpec,
    theta: float,
    t: float,
    state: StatePair,
    L: np.ndarray,
) -> float:
    """Complete flow Tr{L [2 d/dt(drho_dtheta) - L drho/dt]} from the generator."""
    rhodot = apply_generator(model, theta, t, state.rho)
    sigdot = apply_generator_theta_derivative(model, theta, t, state.rho, state.drho_dtheta)
    return _real_trace(L @ (2.0 * sigdot - L @ rhodot), "full flow")


def residual_T(full_flow_value: float, ham_term_value: float, sum_subflows: float) -> float:
    """Lumped remainder of the flow beyond the Hamiltonian term and the subflows."""
    return full_flow_value - ham_term_value - sum_subflows


def fd_flow_oracle(qfi_series, dt: float, k: int) -> float:
    """Second-order finite-difference time derivative of the QFI series at index k.

    Central difference at interior points, one-sided three-point stencils at
    the endpoints.  Independent of the generator-based flow computation.
    """
    n = len(qfi_series)
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")
    if not 0 <= k < n:
        raise IndexError(f"index {k} outside series of length {n}")
    f = qfi_series
    if k == 0:
        return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt)
    if k == n - 1:
        return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt)
    return (f[k + 1] - f[k - 1]) / (2.0 * dt)


def flow_records(
    traj: Trajectory,
    eps_rank: float = DEFAULT_EPS_RANK,
) -> list[FlowRecord]:
    """SLD, QFI, and all flow quantities at every grid point of a trajectory."""
    model = traj.model
    theta = traj.theta
    qfis = []
    partials = []
    for state in traj.states:
        res = sld(state.rho, state.drho_dtheta, eps_rank=eps_rank, tol=traj.tolerances)
        subflows, subflow_sum = channel_decomposition(model, theta, state.t, state.rho, res.L)
        ham = hamiltonian_term(model, theta, state.t, state.rho, res.L)
        full = full_flow(model, theta, state.t, state, res.L)
        qfis.append(res.qfi)
        partials.append((state.t, res.qfi, subflows, ham, full))
    records = []
    for k, (t, F, subflows, ham, full) in enumerate(partials):
        flow_fd = fd_flow_oracle(qfis, traj.dt, k)
        subflow_sum = sum(cf.I for cf in subflows)
        records.append(
            FlowRecord(
                t=t,
                qfi=F,
                flow_fd=flow_fd,
                subflows=subflows,
                ham_term=ham,
                full_flow=full,
                residual_T=residual_T(full, ham, subflow_sum),
            )
        )
    return records


def _mask_intervals(times: np.ndarray, mask: np.ndarray) -> tuple[tuple[float, float], ...]:
    """Maximal runs of True in mask, as (t_start, t_end) pairs."""
    intervals = []
    start = None
    for k, flag in enumerate(mask):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            intervals.append((float(times[start]), float(times[k - 1])))
            start = None
    if start is not None:
        intervals.append((float(times[start]), float(times[-1])))
    return tuple(intervals)


def classify_intervals(
    records: list[FlowRecord],
    threshold: float = SIGN_THRESHOLD,
) -> list[IntervalReport]:
    """Per-channel negative-rate and positive-subflow intervals with overlap.

    The overlap fraction is the share of grid points with gamma < 0 where the
    subflow is also positive; it is None (not applicable) when the rate never
    goes negative.  Values within ``threshold`` of zero are treated as zero.
    """
    if not records:
        raise ValueError("empty record list")
    times = np.array([r.t for r in records])
    reports = []
    for idx, cf in enumerate(records[0].subflows):
        gammas = np.array([r.subflows[idx].gamma for r in records])
        subflows = np.array([r.subflows[idx].I for r in records])
        neg = gammas < -threshold
        pos = subflows > threshold
        n_neg = int(np.count_nonzero(neg))
        overlap = float(np.count_nonzero(neg & pos) / n_neg) if n_neg else None
        reports.append(
            IntervalReport(
                channel=cf.label,
                negative_rate_intervals=_mask_intervals(times, neg),
                positive_subflow_intervals=_mask_intervals(times, pos),
                overlap_fraction=overlap,
            )
        )
    return reports
