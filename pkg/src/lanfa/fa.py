"""Lanczos-FA, shifted-system errors and residuals, quadratic forms, and exact oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularShiftError, ValidationError
from .functions import ScalarFunction
from .lanczos import LanczosFactorization
from .linalg import SymmetricOperator, Tridiagonal, det_ratio, log_det_shifted

__all__ = [
    "ShiftedSolveRecord",
    "lanczos_fa",
    "fa_coefficients",
    "ground_truth",
    "shifted_err_res",
    "galerkin_coefficients",
    "quadform",
    "true_quadform",
]


@dataclass(frozen=True)
class ShiftedSolveRecord:
    """Error and residual of the Galerkin iterate for ``(A - zI) x = b``.

    ``res`` is computed from the definition; ``res_formula`` is the scalar
    multiple of ``q_{k+1}`` predicted from the determinant of ``T_k - zI``.
    """

    z: complex
    err: np.ndarray | None
    res: np.ndarray
    res_formula: np.ndarray


def _ritz_domain_check(f: ScalarFunction, T: Tridiagonal):
    bad = f.real_domain_violation(T.eigvals)
    if bad is not None:
        raise DomainError(f"{f.label} is undefined at Ritz value {bad!r}")


def fa_coefficients(T: Tridiagonal, f: ScalarFunction):
    """``f(T) e_1`` via the eigendecomposition of ``T``."""
    _ritz_domain_check(f, T)
    theta, S = T.eigh
    return S @ (np.asarray(f(theta), dtype=float).reshape(-1) * S[0, :])


def lanczos_fa(fact: LanczosFactorization, f: ScalarFunction):
    """``Q_k f(T_k) e_1 ||b||``."""
    return fact.Qk @ fa_coefficients(fact.T, f) * fact.b_norm


def quadform(fact: LanczosFactorization, f: ScalarFunction) -> float:
    """``||b||^2 e_1^T f(T_k) e_1``; uses only ``T_k`` and ``||b||``."""
    T = fact.T
    _ritz_domain_check(f, T)
    theta, S = T.eigh
    return float(fact.b_norm ** 2 * np.sum(S[0, :] ** 2 * np.asarray(f(theta)).reshape(-1)))


def ground_truth(A: SymmetricOperator, b, f: ScalarFunction):
    """Exact ``f(A) b`` from the eigendecomposition of ``A``."""
    if not A.oracle_available:
        raise ValidationError(f"no eigendecomposition oracle for n={A.n}")
    lam = A.spectrum.eigenvalues
    bad = f.real_domain_violation(lam)
    if bad is not None:
        raise DomainError(f"{f.label} is undefined at eigenvalue {bad!r} of A")
    c = A.to_eigbasis(np.asarray(b, dtype=float))
    return A.from_eigbasis(np.asarray(f(lam)).reshape(-1) * c)


def true_quadform(A: SymmetricOperator, b, f: ScalarFunction) -> float:
    b = np.asarray(b, dtype=float)
    return float(b @ ground_truth(A, b, f))


def galerkin_coefficients(T: Tridiagonal, z):
    """``(T - zI)^{-1} e_1`` for a complex shift ``z`` not in the spectrum of ``T``."""
    det_ratio(T, 0.0, z)  # singular-shift check only
    theta, S = T.eigh
    return S @ (S[0, :] / (theta - z))


def shifted_err_res(fact: LanczosFactorization, A: SymmetricOperator, b, z,
                    with_err=True) -> ShiftedSolveRecord:
    """Error and residual of the Lanczos iterate for ``(A - zI) x = b``."""
    z = complex(z)
    b = np.asarray(b, dtype=float)
    T = fact.T
    y = galerkin_coefficients(T, z)
    x = fact.Qk @ y * fact.b_norm
    res = b - (A.matvec(x) - z * x)

    k = fact.k
    with np.errstate(divide="ignore"):
        log_prod = np.sum(np.log(fact.betas))
    scale = (-1) ** k * np.exp(log_prod - log_det_shifted(T, z)) * fact.b_norm
    res_formula = complex(scale) * fact.q_next

    err = None
    if with_err:
        if not A.oracle_available:
            raise ValidationError(f"no eigendecomposition oracle for n={A.n}")
        lam = A.spectrum.eigenvalues
        gap = np.abs(lam - z)
        if gap.min() < 1e-14 * (lam[-1] - lam[0] + 1.0):
            raise SingularShiftError(f"shift {z} is an eigenvalue of A",
                                     ritz_value=float(lam[np.argmin(gap)]))
        exact = A.from_eigbasis(A.to_eigbasis(b) / (lam - z))
        err = exact - x
    return ShiftedSolveRecord(z, err, res, res_formula)
