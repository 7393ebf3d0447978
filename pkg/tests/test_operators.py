import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from qfiflow.operators import (
    IDENTITY_2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DimensionMismatchError,
    NegativeEigenvalueError,
    NotHermitianError,
    ToleranceConfig,
    TraceDeviationError,
    anticommutator,
    commutator,
    hermitian_eigensystem,
    hermitize,
    validate_density,
)


def _square(dim, scale=5.0):
    elements = st.complex_numbers(max_magnitude=scale, allow_nan=False, allow_infinity=False)
    return hnp.arrays(np.complex128, (dim, dim), elements=elements)


def matrix_pairs(max_dim=5):
    return st.integers(1, max_dim).flatmap(lambda n: st.tuples(_square(n), _square(n)))


def matrices(max_dim=5):
    return st.integers(1, max_dim).flatmap(_square)


class TestCommutator:
    def test_self_commutator_vanishes(self):
        npt.assert_array_equal(commutator(SIGMA_Z, SIGMA_Z), np.zeros((2, 2)))

    def test_pauli_algebra(self):
        npt.assert_allclose(commutator(SIGMA_X, SIGMA_Y), 2j * SIGMA_Z, atol=1e-15)

    def test_sigma_x_with_lowering(self):
        # direct 2x2 arithmetic with sigma_minus = |0><1| gives -sigma_z
        npt.assert_allclose(commutator(SIGMA_X, SIGMA_MINUS), -SIGMA_Z, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            commutator(SIGMA_X, np.eye(3, dtype=complex))


class TestAnticommutator:
    def test_pauli_squares_to_identity(self):
        npt.assert_allclose(anticommutator(SIGMA_X, SIGMA_X), 2 * IDENTITY_2, atol=1e-15)

    def test_pauli_anticommutation(self):
        npt.assert_allclose(anticommutator(SIGMA_X, SIGMA_Y), np.zeros((2, 2)), atol=1e-15)

    def test_number_operator_with_excited_projector(self):
        excited = np.diag([0.0, 1.0]).astype(complex)
        npt.assert_allclose(
            anticommutator(SIGMA_PLUS @ SIGMA_MINUS, excited), 2 * excited, atol=1e-15
        )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            anticommutator(np.eye(2, dtype=complex), np.eye(4, dtype=complex))


class TestHermitize:
    def test_definition(self):
        m = np.array([[1.0, 1j], [0.0, 1.0]], dtype=complex)
        npt.assert_allclose(hermitize(m), np.array([[1.0, 0.5j], [-0.5j, 1.0]]), atol=1e-15)

    def test_hermitian_fixed_point(self):
        npt.assert_array_equal(hermitize(SIGMA_Y), SIGMA_Y)

    def test_upper_triangular(self):
        m = np.array([[0.0, 2.0], [0.0, 0.0]], dtype=complex)
        npt.assert_allclose(hermitize(m), SIGMA_X, atol=1e-15)


class TestValidateDensity:
    def test_maximally_mixed_qubit(self):
        validate_density(IDENTITY_2 / 2)

    def test_diagonal_mixture(self):
        validate_density(np.diag([0.6, 0.4]).astype(complex))

    def test_negative_eigenvalue_reported(self):
        with pytest.raises(NegativeEigenvalueError) as err:
            validate_density(np.diag([1.1, -0.1]).astype(complex))
        assert err.value.deviation == pytest.approx(-0.1)

    def test_not_hermitian_reported(self):
        m = np.array([[0.5, 0.1], [0.0, 0.5]], dtype=complex)
        with pytest.raises(NotHermitianError) as err:
            validate_density(m)
        assert err.value.deviation == pytest.approx(0.1)

    def test_trace_deviation_reported(self):
        with pytest.raises(TraceDeviationError) as err:
            validate_density(np.diag([0.7, 0.7]).astype(complex))
        assert err.value.deviation == pytest.approx(0.4)

    def test_tolerances_are_configurable(self):
        loose = ToleranceConfig(herm=1e-10, trace=0.5, positivity=1e-9)
        validate_density(np.diag([0.7, 0.7]).astype(complex), loose)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            validate_density(np.array([[np.nan, 0.0], [0.0, 1.0]], dtype=complex))


class TestEigensystem:
    def test_sorted_ascending_and_orthonormal(self):
        rng = np.random.default_rng(7)
        g = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        h = hermitize(g)
        vals, vecs = hermitian_eigensystem(h)
        assert np.all(np.diff(vals) >= 0)
        npt.assert_allclose(vecs.conj().T @ vecs, np.eye(5), atol=1e-12)
        npt.assert_allclose(vecs @ np.diag(vals) @ vecs.conj().T, h, atol=1e-12)


@given(matrix_pairs())
@settings(max_examples=200)
def test_commutator_antisymmetry(pair):
    a, b = pair
    npt.assert_array_equal(commutator(a, b), -commutator(b, a))


@given(matrix_pairs())
@settings(max_examples=200)
def test_commutator_trace_cyclicity(pair):
    a, b = pair
    bound = 1e-12 * max(np.linalg.norm(a) * np.linalg.norm(b), 1e-300)
    assert abs(np.trace(commutator(a, b))) <= max(bound, 1e-13)


@given(matrices())
@settings(max_examples=200)
def test_hermitize_idempotent_exactly(m):
    once = hermitize(m)
    npt.assert_array_equal(hermitize(once), once)


@given(matrix_pairs(max_dim=4))
@settings(max_examples=200)
def test_hermitian_pair_symmetry_classes(pair):
    a, b = hermitize(pair[0]), hermitize(pair[1])
    c = commutator(a, b)
    ac = anticommutator(a, b)
    scale = max(1.0, float(np.max(np.abs(a))) * float(np.max(np.abs(b))))
    assert np.max(np.abs(c + c.conj().T)) <= 1e-12 * scale
    assert np.max(np.abs(ac - ac.conj().T)) <= 1e-12 * scale
