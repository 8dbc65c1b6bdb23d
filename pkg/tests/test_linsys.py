import math

import numpy as np
import pytest

from lanfa import (
    SymmetricOperator,
    cg_apriori_bound,
    galerkin_from_minres,
    indefinite_iteration_bound,
    lanczos,
    minres_residual_norms,
    shifted_err_res,
)
from lanfa.errors import ValidationError
from lanfa.linsys import cg_apriori_bound_exp, lanczos_residual_norms, minres_two_cluster_bound
from lanfa.problems import gen_uniform, rng_for


def indefinite(n, seed):
    rng = rng_for(seed)
    lam = np.concatenate([-rng.uniform(1, 3, n // 2), rng.uniform(0.5, 4, n - n // 2)])
    return SymmetricOperator.diagonal(np.sort(lam))


def test_minres_exhausts_space():
    A = indefinite(30, 0)
    b = rng_for(1).standard_normal(30)
    m = minres_residual_norms(lanczos(A, b, 30), 0.0)
    assert m[-1] <= 1e-8 * np.linalg.norm(b)


def test_minres_brute_force_small():
    A = SymmetricOperator.diagonal(np.array([1.0, 2.0]))
    b = np.array([1.0, 1.0]) / math.sqrt(2)
    m = minres_residual_norms(lanczos(A, b, 2), 0.0)
    K = np.column_stack([b])
    AK = np.column_stack([A.matvec(K[:, 0])])
    y, *_ = np.linalg.lstsq(AK, b, rcond=None)
    assert m[1] == pytest.approx(np.linalg.norm(b - AK @ y), rel=1e-12)
    assert m[2] == pytest.approx(0.0, abs=1e-14)


def test_minres_brute_force_krylov():
    A = indefinite(40, 2)
    b = rng_for(3).standard_normal(40)
    fact = lanczos(A, b, 6)
    m = minres_residual_norms(fact, 0.3)
    Aw = A.to_dense() - 0.3 * np.eye(40)
    K = np.empty((40, 6))
    v = b / np.linalg.norm(b)
    for j in range(6):
        K[:, j] = v
        v = Aw @ v
        v /= np.linalg.norm(v)
    for k in range(1, 7):
        y, *_ = np.linalg.lstsq(Aw @ K[:, :k], b, rcond=None)
        assert m[k] == pytest.approx(np.linalg.norm(b - Aw @ K[:, :k] @ y), rel=1e-8)


def test_minres_non_increasing():
    A = indefinite(80, 4)
    m = minres_residual_norms(lanczos(A, rng_for(5).standard_normal(80), 40), 0.0)
    assert np.all(np.diff(m) <= 1e-12 * m[0])


def test_galerkin_from_minres_limits():
    m = np.array([1.0, 1e-8, 1e-8])
    g = galerkin_from_minres(m)
    assert g[0] == 1.0
    assert g[1] == pytest.approx(1e-8, rel=1e-12)
    assert np.isnan(g[2])


def test_galerkin_prediction_matches_measurement():
    A = indefinite(100, 6)
    b = rng_for(7).standard_normal(100)
    fact = lanczos(A, b, 30)
    w = 0.2
    pred = galerkin_from_minres(minres_residual_norms(fact, w))
    for k in range(1, 31):
        meas = np.linalg.norm(shifted_err_res(fact.prefix(k), A, b, w, with_err=False).res)
        rel = meas / np.linalg.norm(b)
        if np.isfinite(pred[k]):
            assert pred[k] == pytest.approx(rel, rel=1e-6)


def test_lanczos_residuals_match_definition():
    A = gen_uniform(50, 1, 10)
    b = rng_for(8).standard_normal(50)
    fact = lanczos(A, b, 10)
    ln = lanczos_residual_norms(fact, 0.5)
    for k in (1, 5, 10):
        res = shifted_err_res(fact.prefix(k), A, b, 0.5, with_err=False).res
        assert ln[k] == pytest.approx(np.linalg.norm(res), rel=1e-9)


def test_cg_bound():
    assert cg_apriori_bound(1, 3) == 0
    assert cg_apriori_bound(9, 3) == pytest.approx(0.25)
    assert cg_apriori_bound_exp(9, 3) >= cg_apriori_bound(9, 3)
    with pytest.raises(ValidationError):
        cg_apriori_bound(0.5, 1)


@pytest.mark.parametrize("seed", range(3))
def test_cg_bound_dominates_measured(seed):
    rng = rng_for(seed)
    lam = np.sort(rng.uniform(1, 50, 120))
    A = SymmetricOperator.diagonal(lam)
    b = rng.standard_normal(120)
    fact = lanczos(A, b, 30)
    x = b / lam
    e0 = math.sqrt(np.sum(lam * x ** 2))
    kappa = lam[-1] / lam[0]
    for k in range(1, 31):
        e = shifted_err_res(fact.prefix(k), A, b, 0.0).err.real
        assert math.sqrt(np.sum(lam * e ** 2)) / e0 <= cg_apriori_bound(kappa, k) * (1 + 1e-10)


def test_indefinite_iteration_bound():
    out = indefinite_iteration_bound(-2, -1, 1, 2, 0.01)
    assert out["gamma"] == pytest.approx(2.0)
    assert out["k_bound"] == pytest.approx(4 * math.log(200 * math.sqrt(2)))
    with pytest.raises(ValidationError):
        indefinite_iteration_bound(-2, -1, 1, 3, 0.01)
    with pytest.raises(ValidationError):
        indefinite_iteration_bound(-2, -1, 1, 2, 0.6)
    with pytest.raises(ValidationError):
        indefinite_iteration_bound(1, 2, 3, 4, 0.01)


def test_two_interval_spectrum_reaches_tolerance():
    n = 400
    lam = np.concatenate([np.linspace(-2, -1, n // 2), np.linspace(1, 2, n // 2)])
    A = SymmetricOperator.diagonal(lam)
    b = rng_for(9).standard_normal(n)
    kb = math.ceil(indefinite_iteration_bound(-2, -1, 1, 2, 0.01)["k_bound"])
    fact = lanczos(A, b, kb)
    ln = lanczos_residual_norms(fact, 0.0)
    assert np.nanmin(ln[1:] / ln[0]) < 0.01
    m = minres_residual_norms(fact, 0.0)
    for j in range(1, kb + 1):
        assert m[j] / m[0] <= minres_two_cluster_bound(2.0, j) * (1 + 1e-10)
    finite = np.isfinite(ln)
    assert np.all(m[finite] <= ln[finite] * (1 + 1e-10))
