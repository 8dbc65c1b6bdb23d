"""Linear-system facts used by the bounds: CG, MINRES and the Galerkin residual."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lanczos import LanczosFactorization

__all__ = [
    "ResidualHistory",
    "minres_residual_norms",
    "lanczos_residual_norms",
    "galerkin_from_minres",
    "residual_history",
    "cg_apriori_bound",
    "cg_apriori_bound_exp",
    "indefinite_iteration_bound",
    "minres_two_cluster_bound",
    "STAGNATION_RTOL",
]

STAGNATION_RTOL = 1e-12


@dataclass(frozen=True)
class ResidualHistory:
    """Residual norms for ``(A - wI) x = b``; index ``k`` is iteration ``k`` (0 is the start)."""

    w: float
    lanczos_res_2norms: np.ndarray
    minres_res_2norms: np.ndarray


def _extended_tridiag(fact: LanczosFactorization, k, w):
    Tb = np.zeros((k + 1, k))
    a = fact.alphas[:k] - w
    Tb[np.arange(k), np.arange(k)] = a
    if k > 1:
        Tb[np.arange(k - 1), np.arange(1, k)] = fact.betas[: k - 1]
        Tb[np.arange(1, k), np.arange(k - 1)] = fact.betas[: k - 1]
    Tb[k, k - 1] = fact.betas[k - 1]
    return Tb


def minres_residual_norms(fact: LanczosFactorization, w=0.0) -> np.ndarray:
    """``||r_k^M||_2`` for ``k = 0 .. fact.k``.

    Each entry solves the ``(k+1) x k`` least-squares problem with the
    extended tridiagonal of ``A - wI`` and right-hand side ``||b|| e_1``.
    """
    out = np.empty(fact.k + 1)
    out[0] = fact.b_norm
    for k in range(1, fact.k + 1):
        Tb = _extended_tridiag(fact, k, w)
        rhs = np.zeros(k + 1)
        rhs[0] = fact.b_norm
        y, *_ = np.linalg.lstsq(Tb, rhs, rcond=None)
        out[k] = np.linalg.norm(rhs - Tb @ y)
    return out


def lanczos_residual_norms(fact: LanczosFactorization, w=0.0) -> np.ndarray:
    """Galerkin residual norms ``||res_k(w)||_2 = beta_k |e_k^T (T_k - wI)^{-1} e_1| ||b||``.

    Entries where ``T_k - wI`` is singular are NaN.
    """
    out = np.empty(fact.k + 1)
    out[0] = fact.b_norm
    for k in range(1, fact.k + 1):
        Tk = fact.prefix(k).T.shift(w).to_dense()
        e1 = np.zeros(k)
        e1[0] = 1.0
        try:
            y = np.linalg.solve(Tk, e1)
        except np.linalg.LinAlgError:
            out[k] = np.nan
            continue
        out[k] = fact.betas[k - 1] * abs(y[-1]) * fact.b_norm
    return out


def galerkin_from_minres(minres_norms) -> np.ndarray:
    """Predicted Galerkin relative residuals from MINRES residual norms.

    ``||res_k|| / ||res_0|| = (m_k / m_0) / sqrt(1 - (m_k / m_{k-1})^2)``.
    Entry 0 is 1; entries with ``m_k / m_{k-1} >= 1 - 1e-12`` are NaN.
    """
    m = np.asarray(minres_norms, dtype=float)
    out = np.full(m.size, np.nan)
    if m.size == 0:
        return out
    out[0] = 1.0
    for k in range(1, m.size):
        if m[k - 1] == 0:
            continue
        ratio = m[k] / m[k - 1]
        if ratio >= 1 - STAGNATION_RTOL:
            continue
        out[k] = (m[k] / m[0]) / math.sqrt(1 - ratio * ratio)
    return out


def residual_history(fact: LanczosFactorization, w=0.0) -> ResidualHistory:
    return ResidualHistory(float(w), lanczos_residual_norms(fact, w), minres_residual_norms(fact, w))


def cg_apriori_bound(kappa, k) -> float:
    """``2 ((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^k``, the CG bound on ``||err_k||_A / ||err_0||_A``."""
    if kappa < 1:
        raise ValidationError(f"need kappa >= 1, got {kappa}")
    s = math.sqrt(kappa)
    return 2.0 * ((s - 1) / (s + 1)) ** k


def cg_apriori_bound_exp(kappa, k) -> float:
    """The weaker ``2 exp(-2k / sqrt(kappa))`` form."""
    if kappa < 1:
        raise ValidationError(f"need kappa >= 1, got {kappa}")
    return 2.0 * math.exp(-2.0 * k / math.sqrt(kappa))


def indefinite_iteration_bound(a, b, c, d, eps):
    """For spectra in ``[a,b] U [c,d]`` with ``a < b < 0 < c < d`` and equal widths.

    Returns ``{"gamma": sqrt(|ad| / |bc|), "k_bound": 2 gamma log(sqrt(2) gamma / eps)}``;
    some ``k <= k_bound`` has Lanczos relative residual below ``eps``.
    """
    if not (a < b < 0 < c < d):
        raise ValidationError(f"need a < b < 0 < c < d, got {a}, {b}, {c}, {d}")
    if not math.isclose(b - a, d - c, rel_tol=1e-12, abs_tol=1e-14):
        raise ValidationError(f"intervals must have equal widths, got {b - a} and {d - c}")
    gamma = math.sqrt(abs(a * d) / abs(b * c))
    if not 0 < eps < gamma / 4:
        raise ValidationError(f"need 0 < eps < gamma/4 = {gamma / 4}, got {eps}")
    return {"gamma": gamma, "k_bound": 2 * gamma * math.log(math.sqrt(2) * gamma / eps)}


def minres_two_cluster_bound(gamma, j) -> float:
    """``2 ((gamma - 1) / (gamma + 1))^floor(j/2)``."""
    return 2.0 * ((gamma - 1) / (gamma + 1)) ** (j // 2)
