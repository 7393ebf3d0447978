"""Time-local master-equation models and their parameter derivatives.

A model bundles the generator ingredients H(theta;t), the dissipative
channels {gamma_i(theta;t), A_i(theta;t)}, the analytic theta-derivatives of
all three, and a parametric initial-state family rho0(theta).  Operator
time/theta dependence is restricted to sums of (scalar function) x (constant
matrix), which keeps configurations serializable and derivative rules exact.

``apply_generator`` evaluates the generator K(t) acting on a state;
``apply_generator_theta_derivative`` evaluates the theta-derivative of K rho
using the product rule with the declared derivative fields.  Units are
dimensionless with hbar = 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .operators import (
    DEFAULT_TOLERANCES,
    SIGMA_MINUS,
    SIGMA_Y,
    SIGMA_Z,
    DimensionMismatchError,
    ToleranceConfig,
    anticommutator,
    as_operator,
    commutator,
    dagger,
    hermiticity_defect,
    validate_density,
)

__all__ = [
    "ScalarPoleError",
    "ConstantScalar",
    "SinusoidalScalar",
    "JcLorentzianScalar",
    "ThetaScaledScalar",
    "TimeDependentScalar",
    "scan_scalar_poles",
    "scalar_is_zero",
    "scalar_from_config",
    "scalar_to_config",
    "OperatorTerm",
    "TimeDependentOperator",
    "constant_operator",
    "zero_operator",
    "modulated_operator",
    "Channel",
    "RyStateFamily",
    "FixedRyStateFamily",
    "LinearStateFamily",
    "StateFamily",
    "ModelSpec",
    "apply_generator",
    "apply_generator_theta_derivative",
    "builtin_model",
    "BUILTIN_MODEL_NAMES",
    "ThetaDependence",
    "probe_theta_dependence",
    "validate_model",
    "ry_rotation",
]


class ScalarPoleError(ArithmeticError):
    """A time-dependent rate was evaluated too close to a pole of its closed form."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class ConstantScalar:
    """t |-> c."""

    c: float

    def __call__(self, t: float, theta: float = 0.0) -> float:
        return self.c


@dataclass(frozen=True)
class SinusoidalScalar:
    """t |-> c0 * (1 + a * sin(omega * t + phi))."""

    c0: float
    a: float
    omega: float
    phi: float = 0.0

    def __call__(self, t: float, theta: float = 0.0) -> float:
        return self.c0 * (1.0 + self.a * math.sin(self.omega * t + self.phi))


@dataclass(frozen=True)
class JcLorentzianScalar:
    """Exact decay rate of a damped qubit coupled to a Lorentzian reservoir.

    t |-> 2*gamma0*lam*sinh(d*t/2) / (d*cosh(d*t/2) + lam*sinh(d*t/2)) with
    d = sqrt(lam^2 - 2*gamma0*lam).  For lam < 2*gamma0 the root is imaginary
    and the rate oscillates (sinh(ix) = i sin x), diverging at finite times;
    evaluation raises :class:`ScalarPoleError` when the denominator is below
    1e-9 in the pole-free normal form.
    """

    gamma0: float
    lam: float

    def _pieces(self, t: float) -> tuple[complex, complex]:
        d = cmath.sqrt(complex(self.lam * self.lam - 2.0 * self.gamma0 * self.lam))
        z = 0.5 * d * t
        # sinh(z)/z, series near z=0 so the critically-damped point lam = 2*gamma0 stays finite
        if abs(z) < 1e-8:
            sinhc = 1.0 + z * z / 6.0
        else:
            sinhc = cmath.sinh(z) / z
        half_t_sinhc = 0.5 * t * sinhc
        return half_t_sinhc, cmath.cosh(z) + self.lam * half_t_sinhc

    def denominator(self, t: float) -> float:
        """Pole-free normal form of the denominator; real for real parameters and
        vanishing exactly at the true poles of the rate."""
        return self._pieces(t)[1].real

    def __call__(self, t: float, theta: float = 0.0) -> float:
        half_t_sinhc, den = self._pieces(t)
        if abs(den) < 1e-9:
            raise ScalarPoleError(
                f"lorentzian rate denominator |{abs(den):.3e}| < 1e-9 at t={t!r}", t
            )
        val = 2.0 * self.gamma0 * self.lam * half_t_sinhc / den
        return float(val.real)


@dataclass(frozen=True)
class ThetaScaledScalar:
    """(theta, t) |-> theta * base(t); the analytic derivative in theta is base."""

    base: "TimeDependentScalar"

    def __call__(self, t: float, theta: float = 0.0) -> float:
        return theta * self.base(t)


TimeDependentScalar = Union[
    ConstantScalar, SinusoidalScalar, JcLorentzianScalar, ThetaScaledScalar
]


def scalar_is_zero(s: TimeDependentScalar) -> bool:
    """Structurally identically zero (used for declared-derivative bookkeeping)."""
    if isinstance(s, ConstantScalar):
        return s.c == 0.0
    if isinstance(s, SinusoidalScalar):
        return s.c0 == 0.0
    if isinstance(s, JcLorentzianScalar):
        return s.gamma0 == 0.0 or s.lam == 0.0
    if isinstance(s, ThetaScaledScalar):
        return scalar_is_zero(s.base)
    raise TypeError(f"unknown scalar form {type(s).__name__}")


def scan_scalar_poles(scalar: TimeDependentScalar, times) -> None:
    """Reject a run interval containing a pole of a lorentzian-form rate.

    A pole strictly between samples shows up as a sign change of the
    normal-form denominator; a near-zero value at a sample is caught
    directly.  Other scalar forms are pole-free.
    """
    if isinstance(scalar, ThetaScaledScalar):
        scan_scalar_poles(scalar.base, times)
        return
    if not isinstance(scalar, JcLorentzianScalar):
        return
    prev: float | None = None
    for t in times:
        den = scalar.denominator(float(t))
        if abs(den) < 1e-9 or (prev is not None and den * prev < 0.0):
            raise ScalarPoleError(
                f"run interval contains a pole of the lorentzian rate near t={t!r}",
                float(t),
            )
        prev = den


_SCALAR_FIELDS = {
    "constant": ("c",),
    "sinusoidal": ("c0", "a", "omega", "phi"),
    "jc_lorentzian": ("gamma0", "lambda"),
    "theta_scaled": ("base",),
}

_SCALAR_OPTIONAL = {"phi"}


def scalar_from_config(obj) -> TimeDependentScalar:
    """Build a scalar form from its JSON representation (a bare number means constant)."""
    if isinstance(obj, bool):
        raise ValueError("scalar must be a number or an object with a 'form' key")
    if isinstance(obj, (int, float)):
        return ConstantScalar(float(obj))
    if not isinstance(obj, dict):
        raise ValueError("scalar must be a number or an object with a 'form' key")
    form = obj.get("form")
    if form not in _SCALAR_FIELDS:
        raise ValueError(
            f"unknown scalar form {form!r}; expected one of {sorted(_SCALAR_FIELDS)}"
        )
    allowed = set(_SCALAR_FIELDS[form]) | {"form"}
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ValueError(f"unknown key(s) {unknown} for scalar form {form!r}")
    missing = [
        k for k in _SCALAR_FIELDS[form] if k not in obj and k not in _SCALAR_OPTIONAL
    ]
    if missing:
        raise ValueError(f"missing key(s) {missing} for scalar form {form!r}")
    if form == "theta_scaled":
        base = scalar_from_config(obj["base"])
        if isinstance(base, ThetaScaledScalar):
            raise ValueError("theta_scaled base must itself be theta-independent")
        return ThetaScaledScalar(base)
    vals = {}
    for k in _SCALAR_FIELDS[form]:
        if k in _SCALAR_OPTIONAL and k not in obj:
            continue
        v = obj[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ValueError(f"scalar field {k!r} must be a finite number")
        vals[k] = float(v)
    if form == "constant":
        return ConstantScalar(vals["c"])
    if form == "sinusoidal":
        return SinusoidalScalar(vals["c0"], vals["a"], vals["omega"], vals.get("phi", 0.0))
    return JcLorentzianScalar(vals["gamma0"], vals["lambda"])


def scalar_to_config(s: TimeDependentScalar) -> dict:
    """Inverse of :func:`scalar_from_config`."""
    if isinstance(s, ConstantScalar):
        return {"form": "constant", "c": s.c}
    if isinstance(s, SinusoidalScalar):
        return {"form": "sinusoidal", "c0": s.c0, "a": s.a, "omega": s.omega, "phi": s.phi}
    if isinstance(s, JcLorentzianScalar):
        return {"form": "jc_lorentzian", "gamma0": s.gamma0, "lambda": s.lam}
    if isinstance(s, ThetaScaledScalar):
        return {"form": "theta_scaled", "base": scalar_to_config(s.base)}
    raise TypeError(f"unknown scalar form {type(s).__name__}")


@dataclass(frozen=True, eq=False)
class OperatorTerm:
    base: np.ndarray
    modulation: TimeDependentScalar


@dataclass(frozen=True, eq=False)
class TimeDependentOperator:
    """Sum of (scalar modulation) x (constant matrix) terms sharing one dimension."""

    dim: int
    terms: tuple[OperatorTerm, ...] = ()

    def __post_init__(self):
        for term in self.terms:
            if term.base.shape != (self.dim, self.dim):
                raise DimensionMismatchError(
                    f"operator term has shape {term.base.shape}, expected ({self.dim}, {self.dim})"
                )

    def evaluate(self, t: float, theta: float = 0.0) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for term in self.terms:
            out += term.modulation(t, theta) * term.base
        return out

    @property
    def is_zero(self) -> bool:
        return all(
            scalar_is_zero(term.modulation) or not np.any(term.base)
            for term in self.terms
        )


def constant_operator(matrix) -> TimeDependentOperator:
    m = as_operator(matrix)
    return TimeDependentOperator(m.shape[0], (OperatorTerm(m, ConstantScalar(1.0)),))


def zero_operator(dim: int) -> TimeDependentOperator:
    return TimeDependentOperator(dim, ())


def modulated_operator(matrix, scalar: TimeDependentScalar) -> TimeDependentOperator:
    m = as_operator(matrix)
    return TimeDependentOperator(m.shape[0], (OperatorTerm(m, scalar),))


@dataclass(frozen=True, eq=False)
class Channel:
    """One dissipative channel: rate gamma(theta;t), Lindblad operator A(theta;t),
    and their analytic theta-derivatives."""

    label: str
    A: TimeDependentOperator
    gamma: TimeDependentScalar
    dA_dtheta: TimeDependentOperator
    dgamma_dtheta: TimeDependentScalar


def ry_rotation(angle: float) -> np.ndarray:
    """exp(-i * angle * sigma_y / 2)."""
    c = math.cos(0.5 * angle)
    s = math.sin(0.5 * angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class RyStateFamily:
    """Pure qubit family R_y(theta)|0><0|R_y(theta)†; theta is the estimated angle."""

    name: str = field(default="ry", init=False)

    def rho0(self, theta: float) -> np.ndarray:
        ket = ry_rotation(theta)[:, :1]
        return ket @ dagger(ket)

    def drho0_dtheta(self, theta: float) -> np.ndarray:
        return -0.5j * commutator(SIGMA_Y, self.rho0(theta))

    def dim(self) -> int:
        return 2

    def to_config(self) -> dict:
        return {"family": "ry"}


@dataclass(frozen=True)
class FixedRyStateFamily:
    """Theta-independent qubit state R_y(angle)|0><0|R_y(angle)†."""

    angle: float
    name: str = field(default="ry_fixed", init=False)

    def rho0(self, theta: float) -> np.ndarray:
        ket = ry_rotation(self.angle)[:, :1]
        return ket @ dagger(ket)

    def drho0_dtheta(self, theta: float) -> np.ndarray:
        return np.zeros((2, 2), dtype=complex)

    def dim(self) -> int:
        return 2

    def to_config(self) -> dict:
        return {"family": "ry_fixed", "angle": self.angle}


@dataclass(frozen=True, eq=False)
class LinearStateFamily:
    """First-order family rho0(theta) = base + (theta - theta_ref) * slope.

    Escape hatch for arbitrary dimensions; valid as a density matrix in a
    neighbourhood of theta_ref wide enough for finite-difference probes.
    """

    base: np.ndarray
    slope: np.ndarray
    theta_ref: float
    name: str = field(default="linear", init=False)

    def rho0(self, theta: float) -> np.ndarray:
        return self.base + (theta - self.theta_ref) * self.slope

    def drho0_dtheta(self, theta: float) -> np.ndarray:
        return np.array(self.slope, dtype=complex)

    def dim(self) -> int:
        return self.base.shape[0]

    def to_config(self) -> dict:
        from .cli import matrix_to_config  # deferred import: cli depends on this module

        return {
            "family": "linear",
            "rho0": matrix_to_config(self.base),
            "drho0_dtheta": matrix_to_config(self.slope),
            "theta_ref": self.theta_ref,
        }


StateFamily = Union[RyStateFamily, FixedRyStateFamily, LinearStateFamily]


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Generator ingredients, their theta-derivatives, and the initial-state family."""

    dim: int
    H: TimeDependentOperator
    dH_dtheta: TimeDependentOperator
    channels: tuple[Channel, ...]
    rho0_family: StateFamily
    theta: float

    def __post_init__(self):
        ops = [("H", self.H), ("dH_dtheta", self.dH_dtheta)]
        for ch in self.channels:
            ops.append((f"channel {ch.label!r} A", ch.A))
            ops.append((f"channel {ch.label!r} dA_dtheta", ch.dA_dtheta))
        for what, op in ops:
            if op.dim != self.dim:
                raise DimensionMismatchError(
                    f"{what} has dimension {op.dim}, model has {self.dim}"
                )
        if self.rho0_family.dim() != self.dim:
            raise DimensionMismatchError(
                f"initial-state family has dimension {self.rho0_family.dim()}, "
                f"model has {self.dim}"
            )


def _check_state_dim(model: ModelSpec, rho: np.ndarray) -> None:
    if rho.shape != (model.dim, model.dim):
        raise DimensionMismatchError(
            f"state has shape {rho.shape}, model dimension is {model.dim}"
        )


def apply_generator(model: ModelSpec, theta: float, t: float, rho: np.ndarray) -> np.ndarray:
    """K(t) rho = -i[H, rho] + sum_i gamma_i (A_i rho A_i† - 1/2 {A_i†A_i, rho}).

    Hermitian and traceless output for Hermitian input.
    """
    rho = np.asarray(rho, dtype=complex)
    _check_state_dim(model, rho)
    H = model.H.evaluate(t, theta)
    out = -1j * commutator(H, rho)
    for ch in model.channels:
        g = ch.gamma(t, theta)
        A = ch.A.evaluate(t, theta)
        Ad = dagger(A)
        AdA = Ad @ A
        out += g * (A @ rho @ Ad - 0.5 * anticommutator(AdA, rho))
    return out


def apply_generator_theta_derivative(
    model: ModelSpec,
    theta: float,
    t: float,
    rho: np.ndarray,
    drho_dtheta: np.ndarray,
) -> np.ndarray:
    """Product-rule derivative of K rho in theta.

    Returns d/dtheta (K rho) assembled from the declared derivative fields:
    -i[dH, rho] - i[H, drho] plus, per channel, the dgamma term on the plain
    dissipator and the gamma term with A and rho derivatives distributed.
    """
    rho = np.asarray(rho, dtype=complex)
    sig = np.asarray(drho_dtheta, dtype=complex)
    _check_state_dim(model, rho)
    _check_state_dim(model, sig)
    H = model.H.evaluate(t, theta)
    out = -1j * commutator(H, sig)
    if not model.dH_dtheta.is_zero:
        out = out - 1j * commutator(model.dH_dtheta.evaluate(t, theta), rho)
    for ch in model.channels:
        g = ch.gamma(t, theta)
        A = ch.A.evaluate(t, theta)
        Ad = dagger(A)
        AdA = Ad @ A
        dg = ch.dgamma_dtheta(t, theta)
        if dg != 0.0:
            out += dg * (A @ rho @ Ad - 0.5 * anticommutator(AdA, rho))
        out += g * (A @ sig @ Ad - 0.5 * anticommutator(AdA, sig))
        if not ch.dA_dtheta.is_zero:
            dA = ch.dA_dtheta.evaluate(t, theta)
            dAd = dagger(dA)
            dAdA = dAd @ A + Ad @ dA
            out += g * (
                dA @ rho @ Ad + A @ rho @ dAd - 0.5 * anticommutator(dAdA, rho)
            )
    return out


_ZERO_SCALAR = ConstantScalar(0.0)


def _number(params: dict, key: str, default: float) -> float:
    v = params.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValueError(f"parameter {key!r} must be a finite number, got {v!r}")
    return float(v)


def _reject_unknown(params: dict, allowed: set[str], name: str) -> None:
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ValueError(f"unknown parameter(s) {unknown} for model {name!r}")


def _amplitude_damping_channel(gamma: TimeDependentScalar, dgamma: TimeDependentScalar) -> Channel:
    return Channel(
        label="ad",
        A=constant_operator(SIGMA_MINUS),
        gamma=gamma,
        dA_dtheta=zero_operator(2),
        dgamma_dtheta=dgamma,
    )


def _build_ad_nm(params: dict) -> ModelSpec:
    _reject_unknown(params, {"gamma0", "a", "omega", "phi", "omega0", "theta"}, "ad-nm")
    gamma0 = _number(params, "gamma0", 1.0)
    a = _number(params, "a", 1.5)
    omega = _number(params, "omega", 2.0)
    phi = _number(params, "phi", 0.0)
    omega0 = _number(params, "omega0", 1.0)
    theta = _number(params, "theta", math.pi / 4)
    return ModelSpec(
        dim=2,
        H=constant_operator(0.5 * omega0 * SIGMA_Z),
        dH_dtheta=zero_operator(2),
        channels=(
            _amplitude_damping_channel(
                SinusoidalScalar(gamma0, a, omega, phi), _ZERO_SCALAR
            ),
        ),
        rho0_family=RyStateFamily(),
        theta=theta,
    )


def _build_ad_jc(params: dict) -> ModelSpec:
    _reject_unknown(params, {"gamma0", "lambda", "omega0", "theta"}, "ad-jc")
    gamma0 = _number(params, "gamma0", 1.0)
    lam = _number(params, "lambda", 3.0)
    omega0 = _number(params, "omega0", 1.0)
    theta = _number(params, "theta", math.pi / 4)
    return ModelSpec(
        dim=2,
        H=constant_operator(0.5 * omega0 * SIGMA_Z),
        dH_dtheta=zero_operator(2),
        channels=(
            _amplitude_damping_channel(JcLorentzianScalar(gamma0, lam), _ZERO_SCALAR),
        ),
        rho0_family=RyStateFamily(),
        theta=theta,
    )


def _build_phase_dephasing(params: dict) -> ModelSpec:
    _reject_unknown(params, {"theta", "gamma0", "a", "omega", "phi"}, "phase-dephasing")
    theta = _number(params, "theta", 0.3)
    gamma0 = _number(params, "gamma0", 0.2)
    a = _number(params, "a", 0.5)
    omega = _number(params, "omega", 2.0)
    phi = _number(params, "phi", 0.0)
    channels: tuple[Channel, ...] = ()
    if gamma0 != 0.0:
        channels = (
            Channel(
                label="dz",
                A=constant_operator(SIGMA_Z),
                gamma=SinusoidalScalar(gamma0, a, omega, phi),
                dA_dtheta=zero_operator(2),
                dgamma_dtheta=_ZERO_SCALAR,
            ),
        )
    return ModelSpec(
        dim=2,
        H=modulated_operator(0.5 * SIGMA_Z, ThetaScaledScalar(ConstantScalar(1.0))),
        dH_dtheta=constant_operator(0.5 * SIGMA_Z),
        channels=channels,
        rho0_family=FixedRyStateFamily(angle=math.pi / 2),
        theta=theta,
    )


def _build_rate_estimation(params: dict) -> ModelSpec:
    _reject_unknown(params, {"theta", "g", "omega0", "alpha"}, "rate-estimation")
    theta = _number(params, "theta", 1.0)
    omega0 = _number(params, "omega0", 1.0)
    alpha = _number(params, "alpha", math.pi / 2)
    g_param = params.get("g", 1.0)
    try:
        g = scalar_from_config(g_param)
    except ValueError as exc:
        raise ValueError(f"parameter 'g': {exc}") from exc
    if isinstance(g, ThetaScaledScalar):
        raise ValueError("parameter 'g' must be theta-independent (theta scaling is implied)")
    return ModelSpec(
        dim=2,
        H=constant_operator(0.5 * omega0 * SIGMA_Z),
        dH_dtheta=zero_operator(2),
        channels=(_amplitude_damping_channel(ThetaScaledScalar(g), g),),
        rho0_family=FixedRyStateFamily(angle=alpha),
        theta=theta,
    )


_BUILTIN_BUILDERS = {
    "ad-nm": _build_ad_nm,
    "ad-jc": _build_ad_jc,
    "phase-dephasing": _build_phase_dephasing,
    "rate-estimation": _build_rate_estimation,
}

BUILTIN_MODEL_NAMES = tuple(sorted(_BUILTIN_BUILDERS))


def builtin_model(name: str, params: dict | None = None) -> ModelSpec:
    """Instantiate one of the built-in demonstration models by name."""
    if name not in _BUILTIN_BUILDERS:
        raise ValueError(f"unknown model {name!r}; expected one of {BUILTIN_MODEL_NAMES}")
    return _BUILTIN_BUILDERS[name](dict(params or {}))


@dataclass(frozen=True)
class ThetaDependence:
    """Finite-difference probe of one generator ingredient's theta dependence."""

    fd_magnitude: float
    declared_zero: bool
    defect: float


def probe_theta_dependence(
    model: ModelSpec,
    theta: float,
    times: tuple[float, ...],
    delta: float = 1e-4,
) -> dict[str, ThetaDependence]:
    """Central-difference check of the declared theta-derivatives.

    Returns probes keyed by ingredient ("hamiltonian", "decay_rates",
    "lindblad_operators"); channel results are aggregated by maximum.
    ``fd_magnitude`` is the measured theta dependence, ``defect`` the
    disagreement between the finite difference and the declared derivative.
    """
    h_mag = 0.0
    h_defect = 0.0
    for t in times:
        fd = (model.H.evaluate(t, theta + delta) - model.H.evaluate(t, theta - delta)) / (
            2.0 * delta
        )
        h_mag = max(h_mag, float(np.max(np.abs(fd))) if fd.size else 0.0)
        diff = fd - model.dH_dtheta.evaluate(t, theta)
        h_defect = max(h_defect, float(np.max(np.abs(diff))) if diff.size else 0.0)
    g_mag = 0.0
    g_defect = 0.0
    a_mag = 0.0
    a_defect = 0.0
    for ch in model.channels:
        for t in times:
            fd_g = (ch.gamma(t, theta + delta) - ch.gamma(t, theta - delta)) / (2.0 * delta)
            g_mag = max(g_mag, abs(fd_g))
            g_defect = max(g_defect, abs(fd_g - ch.dgamma_dtheta(t, theta)))
            fd_a = (ch.A.evaluate(t, theta + delta) - ch.A.evaluate(t, theta - delta)) / (
                2.0 * delta
            )
            a_mag = max(a_mag, float(np.max(np.abs(fd_a))) if fd_a.size else 0.0)
            diff_a = fd_a - ch.dA_dtheta.evaluate(t, theta)
            a_defect = max(a_defect, float(np.max(np.abs(diff_a))) if diff_a.size else 0.0)
    return {
        "hamiltonian": ThetaDependence(h_mag, model.dH_dtheta.is_zero, h_defect),
        "decay_rates": ThetaDependence(
            g_mag,
            all(scalar_is_zero(ch.dgamma_dtheta) for ch in model.channels),
            g_defect,
        ),
        "lindblad_operators": ThetaDependence(
            a_mag, all(ch.dA_dtheta.is_zero for ch in model.channels), a_defect
        ),
    }


def validate_model(
    model: ModelSpec,
    theta: float | None = None,
    times: tuple[float, ...] = (0.0, 0.37, 1.0),
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
    delta_theta: float = 1e-4,
) -> None:
    """Spot-check model invariants: Hermitian H and dH at sampled (theta, t),
    a valid initial density matrix at theta and theta +/- delta_theta, and a
    Hermitian, traceless initial-state derivative."""
    if theta is None:
        theta = model.theta
    for t in times:
        for what, op in (("H", model.H), ("dH_dtheta", model.dH_dtheta)):
            defect = hermiticity_defect(op.evaluate(t, theta))
            if defect > tol.herm:
                raise ValueError(
                    f"{what} not Hermitian at (theta={theta}, t={t}): defect {defect:.3e}"
                )
    for probe in (theta, theta + delta_theta, theta - delta_theta):
        validate_density(model.rho0_family.rho0(probe), tol)
    d0 = model.rho0_family.drho0_dtheta(theta)
    if hermiticity_defect(d0) > tol.herm:
        raise ValueError("initial-state theta-derivative is not Hermitian")
    if abs(np.trace(d0)) > tol.trace:
        raise ValueError("initial-state theta-derivative is not traceless")
