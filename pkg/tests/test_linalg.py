"""Dense linear algebra kernel: factorization, minors, M-matrix classification."""

import numpy as np
import pytest

from delaystab import (
    ConvergenceError,
    LinalgInputError,
    SingularMatrixError,
    condition_estimate,
    determinant,
    dominance_screen,
    invert,
    is_m_matrix,
    leading_principal_minors,
    solve_linear,
    spectral_radius,
)


def test_determinant_matches_numpy_on_random_matrices():
    rng = np.random.default_rng(101)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        a = rng.normal(0.0, 2.0, (n, n))
        d = determinant(a)
        ref = np.linalg.det(a)
        assert abs(d - ref) < 1e-9 * max(1.0, abs(ref))


def test_determinant_triangular_is_diagonal_product():
    a = np.triu(np.arange(1.0, 17.0).reshape(4, 4))
    assert abs(determinant(a) - 1.0 * 6.0 * 11.0 * 16.0) < 1e-12


def test_leading_minors_of_triangular_matrix():
    a = np.array([[2.0, 0.0, 0.0], [5.0, 3.0, 0.0], [-1.0, 7.0, 0.5]])
    minors = leading_principal_minors(a)
    assert np.allclose(minors, [2.0, 6.0, 3.0], atol=1e-13)


def test_leading_minors_match_numpy_dets():
    rng = np.random.default_rng(77)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        a = rng.normal(0.0, 1.0, (n, n))
        minors = leading_principal_minors(a)
        for k in range(1, n + 1):
            ref = np.linalg.det(a[:k, :k])
            assert abs(minors[k - 1] - ref) < 1e-9 * max(1.0, abs(ref))


def test_solve_linear_matches_numpy():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        a = rng.normal(0.0, 1.0, (n, n)) + 3.0 * np.eye(n)
        b = rng.normal(0.0, 1.0, n)
        x = solve_linear(a, b)
        assert np.max(np.abs(a @ x - b)) < 1e-10


def test_invert_round_trip():
    rng = np.random.default_rng(6)
    a = rng.normal(0.0, 1.0, (5, 5)) + 4.0 * np.eye(5)
    assert np.max(np.abs(invert(a) @ a - np.eye(5))) < 1e-10


def test_singular_matrix_raises_with_pivot_info():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError) as exc:
        solve_linear(a, np.ones(2))
    assert exc.value.pivot_index in (0, 1)


def test_non_square_input_rejected():
    with pytest.raises(LinalgInputError):
        determinant(np.ones((2, 3)))
    with pytest.raises(LinalgInputError):
        is_m_matrix(np.ones((1, 2)))


def test_condition_estimate_of_identity():
    assert abs(condition_estimate(np.eye(4)) - 1.0) < 1e-12


def test_known_m_matrix_with_witness():
    a = np.array([[2.0, -1.0], [-1.0, 2.0]])
    rep = is_m_matrix(a)
    assert rep.is_m_matrix
    assert rep.off_diagonal_ok
    assert np.allclose(rep.minors, [2.0, 3.0], atol=1e-13)
    # witness solves A xi = 1 and must be strictly positive
    assert np.max(np.abs(a @ rep.witness_xi - 1.0)) < 1e-12
    assert (rep.witness_xi > 0).all()


def test_positive_off_diagonal_disqualifies():
    rep = is_m_matrix(np.array([[2.0, 0.5], [-1.0, 2.0]]))
    assert not rep.is_m_matrix
    assert not rep.off_diagonal_ok


def test_boundary_minor_zero_is_not_m_matrix():
    # det = 0: nonsingularity fails even though the sign pattern holds
    rep = is_m_matrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert not rep.is_m_matrix
    assert rep.off_diagonal_ok


def test_m_matrix_agrees_with_inverse_positivity():
    rng = np.random.default_rng(42)
    seen_pos = seen_neg = 0
    for _ in range(400):
        n = int(rng.integers(2, 6))
        a = -rng.uniform(0.0, 2.0, (n, n))
        np.fill_diagonal(a, rng.uniform(0.0, 4.0, n))
        rep = is_m_matrix(a)
        if np.min(np.abs(rep.minors)) <= 1e-8:
            continue
        try:
            inv_ok = bool((np.linalg.inv(a) >= -1e-9).all())
        except np.linalg.LinAlgError:
            inv_ok = False
        assert rep.is_m_matrix == inv_ok
        if rep.is_m_matrix:
            seen_pos += 1
        else:
            seen_neg += 1
    assert seen_pos > 20 and seen_neg > 20


def test_m_property_invariant_under_symmetric_permutation():
    rng = np.random.default_rng(1234)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        a = -rng.uniform(0.0, 1.0, (n, n))
        np.fill_diagonal(a, rng.uniform(0.5, 3.0, n))
        perm = rng.permutation(n)
        b = a[np.ix_(perm, perm)]
        assert is_m_matrix(a).is_m_matrix == is_m_matrix(b).is_m_matrix


def test_row_dominance_screen():
    a = np.array([[3.0, -1.0, -1.0], [-0.5, 2.0, -0.5], [0.0, -1.0, 4.0]])
    assert dominance_screen(a) == "row-dominance"


def test_column_dominance_screen():
    # row sums fail in row 0 but every column is dominant
    a = np.array([[1.0, -0.6, -0.6], [-0.2, 2.0, -0.5], [-0.2, -0.5, 2.0]])
    assert dominance_screen(a) == "column-dominance"


def test_weighted_screen_from_inverse_witness():
    # row 0 is not dominant and column 1 is not, yet the matrix is an
    # M-matrix (det 0.76); the inverse-derived weights have to settle it
    a = np.array([[1.0, -1.5, 0.0], [0.0, 1.0, -0.4], [-0.4, 0.0, 1.0]])
    assert dominance_screen(a) in ("weighted-row", "weighted-column")
    assert is_m_matrix(a).is_m_matrix


def test_explicit_weights_vector():
    a = np.array([[1.0, -1.2], [-0.5, 1.0]])
    # equal weights reproduce the failing plain sums
    assert dominance_screen(a, weights=[1.0, 1.0]) == "none"
    # the inverse-based weights certify it
    assert dominance_screen(a) in ("weighted-row", "weighted-column")
    with pytest.raises(LinalgInputError):
        dominance_screen(a, weights=[1.0, -1.0])


def test_screen_pass_implies_m_matrix():
    rng = np.random.default_rng(4242)
    passes = 0
    for _ in range(500):
        n = int(rng.integers(2, 7))
        a = -rng.uniform(0.0, 2.0, (n, n))
        np.fill_diagonal(a, rng.uniform(0.0, 3.0, n))
        rep = is_m_matrix(a)
        if rep.screen_passed not in (None, "none"):
            passes += 1
            assert rep.is_m_matrix
    assert passes > 30


def test_screen_rejects_positive_off_diagonal():
    with pytest.raises(LinalgInputError):
        dominance_screen(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_spectral_radius_matches_eigvals():
    rng = np.random.default_rng(88)
    for _ in range(60):
        n = int(rng.integers(1, 7))
        a = rng.uniform(0.0, 1.0, (n, n))
        r = spectral_radius(a, tol=1e-12)
        ref = np.max(np.abs(np.linalg.eigvals(a)))
        assert abs(r - ref) < 1e-8 * max(1.0, ref)


def test_spectral_radius_antidiagonal_pair():
    # eigenvalues +-sqrt(6): plain power iteration two-cycles on this one
    a = np.array([[0.0, 2.0], [3.0, 0.0]])
    assert abs(spectral_radius(a) - np.sqrt(6.0)) < 1e-8


def test_spectral_radius_zero_matrix():
    assert spectral_radius(np.zeros((3, 3))) < 1e-9


def test_spectral_radius_rejects_negative_entries():
    with pytest.raises(LinalgInputError):
        spectral_radius(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_convergence_error_carries_estimate():
    try:
        raise ConvergenceError("no convergence", last_estimate=0.5)
    except ConvergenceError as exc:
        assert abs(exc.last_estimate - 0.5) < 1e-15
