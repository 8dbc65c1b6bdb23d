import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lanfa import (
    Norm,
    SymmetricOperator,
    Tridiagonal,
    dense_sym_eigh,
    det_ratio,
    lanczos,
    read_matrix_market,
    tridiag_eigvals,
    weighted_norm,
    write_matrix_market,
)
from lanfa.errors import DomainError, MatrixMarketError, SingularShiftError, ValidationError
from lanfa.linalg import log_det_shifted
from lanfa.problems import rng_for


def random_sym(n, seed):
    X = rng_for(seed).standard_normal((n, n))
    return (X + X.T) / 2


# --- dense_sym_eigh

def test_eigh_identity():
    lam, V = dense_sym_eigh(np.eye(3))
    assert np.allclose(lam, 1)
    assert np.allclose(V.T @ V, np.eye(3))


def test_eigh_diagonal_sorted():
    lam, _ = dense_sym_eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(lam, [1, 2, 3])


@pytest.mark.parametrize("n", [20, 200, 500])
def test_eigh_reconstruction(n):
    M = random_sym(n, n)
    lam, V = dense_sym_eigh(M)
    assert np.linalg.norm(V * lam @ V.T - M) <= 1e-10 * np.linalg.norm(M)
    assert np.linalg.norm(V.T @ V - np.eye(n)) <= 1e-10
    assert np.all(np.diff(lam) >= 0)


def test_eigh_rejects_bad_input():
    with pytest.raises(ValidationError):
        dense_sym_eigh(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        dense_sym_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


# --- operators

def test_operator_hermitian_and_kinds():
    M = random_sym(30, 1)
    lam, V = dense_sym_eigh(M)
    dense = SymmetricOperator.dense(M)
    sparse = SymmetricOperator.sparse(M)
    diag = SymmetricOperator.diagonal(lam[::-1])
    assert np.all(np.diff(diag.data) >= 0)
    rng = rng_for(2)
    u, v = rng.standard_normal(30), rng.standard_normal(30)
    est = dense.norm_estimate
    assert abs((dense @ u) @ v - u @ (dense @ v)) <= 1e-12 * est
    assert np.allclose(dense @ u, sparse @ u, atol=1e-13)
    assert np.allclose(diag @ u, lam * u)


# --- tridiagonal eigenvalues

def test_tridiag_small_closed_forms():
    assert np.allclose(tridiag_eigvals(Tridiagonal([5.0])), [5.0])
    assert np.allclose(tridiag_eigvals(Tridiagonal([0.0, 0.0], [1.0])), [-1.0, 1.0])


def test_tridiag_matches_dense():
    rng = rng_for(3)
    T = Tridiagonal(rng.standard_normal(40), rng.uniform(0.1, 1, 39))
    assert np.allclose(tridiag_eigvals(T), np.linalg.eigvalsh(T.to_dense()), atol=1e-12)
    lam, S = T.eigh
    assert np.linalg.norm(S * lam @ S.T - T.to_dense()) <= 1e-12 * np.linalg.norm(T.to_dense())


def test_ritz_values_interlace():
    lam = np.linspace(0, 1, 100) ** 2
    A = SymmetricOperator.diagonal(lam)
    fact = lanczos(A, np.ones(100), 10)
    theta = tridiag_eigvals(fact.T)
    assert np.all(np.diff(theta) > 0)
    for lo, hi in zip(theta[:-1], theta[1:]):
        assert np.any((lam >= lo) & (lam <= hi))


# --- determinant ratio

def test_det_ratio_trivial_cases():
    T = Tridiagonal([1.0, 2.0], [0.0])
    assert det_ratio(T, 0.0, 3.0) == pytest.approx(1.0, rel=1e-14)
    assert det_ratio(T, 0.7, 0.7) == pytest.approx(1.0)


def test_det_ratio_against_ritz_product():
    rng = rng_for(4)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 16))
        T = Tridiagonal(rng.standard_normal(k), rng.uniform(0.1, 1, k - 1))
        theta = np.linalg.eigvalsh(T.to_dense())
        spread = theta[-1] - theta[0]
        w = rng.uniform(-3, 3)
        while True:
            z = complex(rng.uniform(-3, 3), rng.uniform(-1, 1))
            if np.min(np.abs(theta - z)) >= 1e-3 * spread:
                break
        ref = np.prod((theta - w) / (theta - z))
        worst = max(worst, abs(det_ratio(T, w, z) - ref) / abs(ref))
    assert worst <= 1e-10


def test_det_ratio_large_k_no_overflow():
    T = Tridiagonal(np.full(400, 100.0), np.full(399, 1.0))
    assert np.isfinite(log_det_shifted(T, -1000.0))
    assert np.isfinite(det_ratio(T, -1000.0, -900.0 + 5j))


def test_det_ratio_singular_names_ritz_value():
    T = Tridiagonal([1.0, 2.0], [0.0])
    with pytest.raises(SingularShiftError) as exc:
        det_ratio(T, 0.0, 2.0)
    assert exc.value.ritz_value == pytest.approx(2.0)


# --- Matrix Market

def test_mm_coordinate_2x2(tmp_path):
    p = tmp_path / "a.mtx"
    p.write_text("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n2 1 1\n2 2 2\n")
    A = read_matrix_market(p)
    assert np.allclose(A.to_dense(), [[2, 1], [1, 2]])


def test_mm_array_matches_coordinate(tmp_path):
    M = random_sym(3, 5)
    arr = tmp_path / "arr.mtx"
    arr.write_text("%%MatrixMarket matrix array real general\n3 3\n"
                   + "\n".join(repr(float(x)) for x in M.T.ravel()) + "\n")
    coo = tmp_path / "coo.mtx"
    write_matrix_market(SymmetricOperator.dense(M), coo)
    v = rng_for(6).standard_normal(3)
    assert np.allclose(read_matrix_market(arr) @ v, read_matrix_market(coo) @ v, atol=1e-15)


def test_mm_errors(tmp_path):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
    with pytest.raises(ValidationError):
        read_matrix_market(bad)
    hdr = tmp_path / "hdr.mtx"
    hdr.write_text("%%MatrixMarket matrix coordinate complex hermitian\n1 1 1\n1 1 1 0\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(hdr)
    rng_ = tmp_path / "range.mtx"
    rng_.write_text("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(rng_)


# --- norms

def test_weighted_norm_examples():
    e1 = np.array([1.0, 0.0])
    assert weighted_norm(e1, SymmetricOperator.dense(np.eye(2)), "two") == 1.0
    assert weighted_norm(e1, SymmetricOperator.diagonal([4.0, 9.0]), "A") == pytest.approx(2.0)


def test_weighted_norm_a2shift_oracle():
    M = random_sym(20, 7)
    A = SymmetricOperator.dense(M)
    v = rng_for(8).standard_normal(20)
    w = 0.3
    ref = np.sqrt(v @ (M - w * np.eye(20)) @ (M - w * np.eye(20)) @ v)
    assert weighted_norm(v, A, Norm("A2shift", w)) == pytest.approx(ref, rel=1e-12)


def test_a_norm_rejects_indefinite():
    with pytest.raises(DomainError):
        weighted_norm(np.ones(2), SymmetricOperator.diagonal([-1.0, 1.0]), "A")


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.floats(-5, 5), st.integers(0, 10_000))
def test_det_ratio_real_shift_property(k, w, seed):
    rng = rng_for(seed)
    T = Tridiagonal(rng.standard_normal(k), rng.uniform(0.1, 1, k - 1))
    theta = np.linalg.eigvalsh(T.to_dense())
    z = complex(rng.uniform(-3, 3), 0.5)
    ref = np.prod((theta - w) / (theta - z))
    assert abs(det_ratio(T, w, z) - ref) <= 1e-10 * max(abs(ref), 1e-300)
