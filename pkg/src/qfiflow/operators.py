"""Dense complex-matrix algebra and density-operator validation.

Everything downstream (generators, propagation, SLD computation, flow
decomposition) is built on the small set of operations in this module.
Matrices are plain ``numpy`` arrays of complex dtype; dimensions stay at
desk scale (tensor products of a few qubits), so there are no sparse or
structured paths.

Basis convention for the qubit helpers: index 0 is the ground state |0>,
index 1 the excited state |1>, and ``SIGMA_MINUS`` = |0><1| generates the
decay |1> -> |0>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "IDENTITY_2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "ToleranceConfig",
    "DEFAULT_TOLERANCES",
    "DimensionMismatchError",
    "DensityValidationError",
    "NotHermitianError",
    "TraceDeviationError",
    "NegativeEigenvalueError",
    "dagger",
    "commutator",
    "anticommutator",
    "hermitize",
    "hermiticity_defect",
    "trace_deviation",
    "min_eigenvalue",
    "validate_density",
    "hermitian_eigensystem",
    "as_operator",
]

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class ToleranceConfig:
    """Shared numerical tolerances for density-operator validation.

    ``positivity`` is deliberately looser than machine precision: runs with
    negative decay rates legitimately push eigenvalues slightly below zero.
    """

    herm: float = 1e-10
    trace: float = 1e-9
    positivity: float = 1e-9


DEFAULT_TOLERANCES = ToleranceConfig()


class DimensionMismatchError(ValueError):
    """Operands do not share one square dimension."""


class DensityValidationError(ValueError):
    """A density-matrix invariant failed; ``deviation`` is the measured size."""

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


class NotHermitianError(DensityValidationError):
    pass


class TraceDeviationError(DensityValidationError):
    pass


class NegativeEigenvalueError(DensityValidationError):
    pass


def as_operator(data) -> np.ndarray:
    """Coerce to a square complex matrix with finite entries."""
    m = np.asarray(data, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix contains non-finite entries")
    return m


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"incompatible shapes {a.shape} and {b.shape}")


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[a, b] = ab - ba."""
    _check_same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """{a, b} = ab + ba."""
    _check_same_dim(a, b)
    return a @ b + b @ a


def hermitize(m: np.ndarray) -> np.ndarray:
    """(m + m†)/2; the result is exactly Hermitian and idempotent under repeats."""
    return 0.5 * (m + m.conj().T)


def hermiticity_defect(m: np.ndarray) -> float:
    """max |m - m†| entrywise."""
    return float(np.max(np.abs(m - m.conj().T)))


def trace_deviation(m: np.ndarray) -> float:
    """|Tr m - 1|."""
    return float(abs(np.trace(m) - 1.0))


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of the hermitized input."""
    return float(np.linalg.eigvalsh(hermitize(m))[0])


def validate_density(m: np.ndarray, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Check the density-matrix invariants; return the matrix unchanged.

    Raises the matching :class:`DensityValidationError` subclass with the
    measured deviation when Hermiticity, unit trace, or positivity (within
    ``tol``) fails.
    """
    m = as_operator(m)
    herm = hermiticity_defect(m)
    if herm > tol.herm:
        raise NotHermitianError(f"hermiticity defect {herm:.3e} > {tol.herm:.3e}", herm)
    tr = trace_deviation(m)
    if tr > tol.trace:
        raise TraceDeviationError(f"trace deviation {tr:.3e} > {tol.trace:.3e}", tr)
    lam_min = min_eigenvalue(m)
    if lam_min < -tol.positivity:
        raise NegativeEigenvalueError(
            f"minimum eigenvalue {lam_min:.3e} < {-tol.positivity:.3e}", lam_min
        )
    return m


def hermitian_eigensystem(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    The only matrix decomposition used repo-wide.  Columns of the returned
    matrix are the eigenvectors.
    """
    vals, vecs = np.linalg.eigh(m)
    return vals, vecs
