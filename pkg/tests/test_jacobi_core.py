import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobi_ncft.jacobi_core import (
    InvalidCoefficientsError, JacobiCoefficients, SparseVector, TridiagonalTruncation, apply,
    chebyshev_u_coefficients, norm_bound, shifted_chebyshev_coefficients, symmetry_residual,
    truncate,
)

coef = st.floats(0.05, 2.0)
diag = st.floats(-2.0, 2.0)


@st.composite
def families(draw, n=12):
    a = draw(st.lists(coef, min_size=n, max_size=n))
    b = draw(st.lists(diag, min_size=n, max_size=n))
    return JacobiCoefficients.from_sequences(a, b)


def test_apply_basis_vector_chebyshev():
    J = chebyshev_u_coefficients()
    out = apply(J, SparseVector.basis(3))
    assert out.entries == {2: 0.5, 4: 0.5}


def test_apply_at_edge_uses_no_minus_one():
    J = shifted_chebyshev_coefficients()
    out = apply(J, SparseVector.basis(0))
    assert out.entries == {0: -2.0, 1: 1.0}


def test_truncate_shape_and_entries():
    T = truncate(shifted_chebyshev_coefficients(), 3)
    assert np.array_equal(T.to_dense(), [[-2, 1, 0], [1, -2, 1], [0, 1, -2]])
    with pytest.raises(ValueError):
        truncate(shifted_chebyshev_coefficients(), 0)


def test_nonpositive_a_rejected():
    J = JacobiCoefficients.from_sequences([1.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    with pytest.raises(InvalidCoefficientsError):
        truncate(J, 3)


def test_bound_violation_rejected():
    J = JacobiCoefficients.constant(1.0, 1.0, bound_M=1.5)
    with pytest.raises(InvalidCoefficientsError):
        J.coefficient_pair(0)


def test_reading_past_table_raises():
    J = JacobiCoefficients.from_sequences([1.0], [0.0])
    with pytest.raises(IndexError):
        J.arrays(2)


def test_truncation_validates_shapes():
    with pytest.raises(ValueError):
        TridiagonalTruncation([1.0, 2.0], [1.0, 1.0])


def test_norm_bound_values():
    assert norm_bound(chebyshev_u_coefficients()) == 1.0
    assert norm_bound(shifted_chebyshev_coefficients()) == 6.0


def test_sparse_vector_ops():
    v = SparseVector({0: 1.0, 3: 0.0, 2: 2.0})
    assert v.support == [0, 2]
    w = 2.0 * v + SparseVector.basis(1)
    assert np.allclose(w.to_dense(), [2, 1, 4])
    assert np.isclose(v.norm(), np.sqrt(5))
    with pytest.raises(IndexError):
        SparseVector({-1: 1.0})


@settings(max_examples=50, deadline=None)
@given(families(), st.integers(1, 12), st.data())
def test_truncation_is_symmetric(fam, N, data):
    T = truncate(fam, N)
    u = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=N, max_size=N)))
    v = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=N, max_size=N)))
    assert symmetry_residual(T, u, v) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(families(), st.integers(1, 12))
def test_operator_norm_within_2M(fam, N):
    T = truncate(fam, N)
    assert np.linalg.norm(T.to_dense(), 2) <= norm_bound(fam) * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(families(), st.lists(st.floats(-1, 1), min_size=1, max_size=10))
def test_apply_matches_dense_window(fam, vals):
    v = SparseVector.from_dense(vals)
    n = len(vals) + 1
    dense = truncate(fam, n).to_dense() @ np.append(vals, 0.0)
    assert np.allclose(apply(fam, v).to_dense(n), dense, atol=1e-14)
