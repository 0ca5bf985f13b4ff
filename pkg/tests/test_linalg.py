from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from frameforge.errors import NonFiniteEntry, NotSymmetric
from frameforge.linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    canonical_sign,
    full_rank_mask,
    iter_combinations,
    line_angle,
    min_eig_sym,
    nullspace_basis,
    numerical_rank,
    orth_projector,
    range_basis,
    singular_values,
    stack_rows,
    unit,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(1, 7), st.integers(1, 7)).flatmap(lambda s: arrays(float, s, elements=finite))
small_int = st.tuples(st.integers(1, 6), st.integers(1, 5)).flatmap(
    lambda s: arrays(float, s, elements=st.integers(-2, 2).map(float))
)


def test_tolerance_bounds():
    assert DEFAULT_TOL.rank_rel == 1e-10 and DEFAULT_TOL.cert_abs == 1e-8
    for bad in (0.0, 1.0, -1e-3):
        with pytest.raises(ValueError):
            Tolerance(rank_rel=bad)
        with pytest.raises(ValueError):
            Tolerance(cert_abs=bad)


def test_as_matrix_rejects_non_finite():
    with pytest.raises(NonFiniteEntry):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(NonFiniteEntry):
        as_matrix([[np.inf]])


@given(matrices)
def test_rank_nullity(A):
    assert numerical_rank(A) + nullspace_basis(A).shape[1] == A.shape[1]


@given(small_int)
def test_rank_matches_exact_rank_on_integer_matrices(A):
    assert numerical_rank(A) == oracles.exact_rank(A.astype(int).tolist())


@given(matrices)
def test_nullspace_is_annihilated_and_orthonormal(A):
    N = nullspace_basis(A)
    scale = max(1.0, float(np.abs(A).max()))
    assert np.allclose(A @ N, 0, atol=1e-8 * scale)
    assert np.allclose(N.T @ N, np.eye(N.shape[1]), atol=1e-10)


def test_zero_matrix():
    Z = np.zeros((3, 4))
    assert numerical_rank(Z) == 0
    assert nullspace_basis(Z).shape == (4, 4)
    assert range_basis(Z).shape == (0, 4)


def test_rank_is_scale_invariant():
    A = np.array([[1.0, 2.0], [2.0, 4.0000001]])
    for c in (1e-6, 1.0, 1e6):
        assert numerical_rank(c * A) == 2
    B = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert numerical_rank(1e-9 * B) == 1


def test_rank_examples():
    assert numerical_rank([[1, 0], [0, 1], [1, 1]]) == 2
    assert numerical_rank([[1, 2], [2, 4]]) == 1


@given(st.integers(1, 50), st.integers(1, 50), st.integers(0, 2**31))
def test_orth_projector_is_idempotent_and_symmetric(n, k, seed):
    V = np.random.default_rng(seed).standard_normal((min(k, n), n))
    P = orth_projector(V)
    c = DEFAULT_TOL.cert_abs
    assert np.linalg.norm(P @ P - P) <= 10 * c
    assert np.linalg.norm(P - P.T) <= 10 * c
    assert round(np.trace(P)) == numerical_rank(V)


@given(st.integers(1, 30), st.integers(0, 2**31))
def test_orthogonal_singular_values(n, seed):
    Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    assert np.all(np.abs(singular_values(Q) - 1) <= DEFAULT_TOL.cert_abs)


@given(st.integers(1, 8), st.integers(0, 2**31))
def test_min_eig_sym_residual(n, seed):
    B = np.random.default_rng(seed).standard_normal((n, n))
    S = B + B.T
    lam, v = min_eig_sym(S)
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    assert np.linalg.norm(S @ v - lam * v) <= 1e-8 * max(1.0, np.abs(S).max())
    assert lam <= np.linalg.eigvalsh(S).min() + 1e-10


def test_min_eig_sym_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        min_eig_sym([[0.0, 1.0], [0.0, 0.0]])


@given(matrices)
def test_range_basis_spans_rows(A):
    B = range_basis(A)
    assert B.shape[0] == numerical_rank(A)
    if B.shape[0]:
        scale = max(1.0, float(np.abs(A).max()))
        assert np.allclose(A - (A @ B.T) @ B, 0, atol=1e-8 * scale)


def test_full_rank_mask_matches_matrix_rank():
    rng = np.random.default_rng(3)
    A = rng.integers(-1, 2, (7, 3)).astype(float)
    subsets = np.concatenate(list(iter_combinations(7, 3, chunk=5)))
    assert subsets.shape == (35, 3)
    mask = full_rank_mask(stack_rows(A, subsets))
    expected = [np.linalg.matrix_rank(A[s]) == 3 for s in subsets]
    assert mask.tolist() == expected


def test_unit_and_sign_helpers():
    assert np.allclose(unit([3.0, 4.0]), [0.6, 0.8])
    with pytest.raises(ValueError):
        unit([0.0, 0.0])
    assert canonical_sign(np.array([0.0, -2.0, 1.0])).tolist() == [0.0, 2.0, -1.0]
    assert line_angle(np.array([1.0, 0.0]), np.array([-3.0, 0.0])) == 0.0
    assert abs(line_angle(np.array([1.0, 0.0]), np.array([1.0, 1.0])) - np.pi / 4) < 1e-15
    assert abs(line_angle(np.array([1.0, 0.0]), np.array([1.0, 1e-9])) - 1e-9) < 1e-20
