"""The Lanczos iteration and its recurrence residual."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .linalg import SymmetricOperator, Tridiagonal

__all__ = ["LanczosFactorization", "lanczos", "recurrence_residual"]

BREAKDOWN_RTOL = 1e-13


class LanczosFactorization:
    """Output of ``lanczos``: basis ``Q`` (n x (k+1)) and the recurrence coefficients.

    ``betas`` has length k; ``betas[:-1]`` is the off-diagonal of ``T`` and
    ``betas[-1]`` is ``beta_k``, which couples ``T`` to ``q_{k+1} = Q[:, k]``.
    The leading ``j`` steps of a factorization are themselves a valid
    factorization and are available through ``prefix(j)``.
    """

    def __init__(self, Q, alphas, betas, b_norm, reorthogonalized, precision,
                 terminated_early=False):
        Q = np.array(Q, dtype=float)
        alphas = np.array(alphas, dtype=float)
        betas = np.array(betas, dtype=float)
        if Q.shape[1] != alphas.size + 1 or betas.size != alphas.size:
            raise ValidationError("inconsistent Lanczos factorization shapes")
        for arr in (Q, alphas, betas):
            arr.setflags(write=False)
        self.Q = Q
        self.alphas = alphas
        self.betas = betas
        self.b_norm = float(b_norm)
        self.reorthogonalized = bool(reorthogonalized)
        self.precision = precision
        self.terminated_early = bool(terminated_early)
        self._prefixes = {}
        self._T = Tridiagonal(alphas, betas[:-1])

    def __repr__(self):
        return (f"LanczosFactorization(n={self.n}, k={self.k}, precision={self.precision!r}, "
                f"reorth={self.reorthogonalized}, terminated_early={self.terminated_early})")

    @property
    def n(self):
        return self.Q.shape[0]

    @property
    def k(self):
        return self.alphas.size

    @property
    def T(self) -> Tridiagonal:
        return self._T

    @property
    def beta_k(self):
        return float(self.betas[-1])

    @property
    def Qk(self):
        return self.Q[:, : self.k]

    @property
    def q_next(self):
        return self.Q[:, self.k]

    @property
    def ritz_values(self):
        return self.T.eigvals

    def prefix(self, j) -> "LanczosFactorization":
        """The factorization after ``j`` steps (1 <= j <= k)."""
        if not 1 <= j <= self.k:
            raise ValidationError(f"prefix length {j} outside 1..{self.k}")
        if j == self.k:
            return self
        if j not in self._prefixes:
            self._prefixes[j] = LanczosFactorization(
                self.Q[:, : j + 1], self.alphas[:j], self.betas[:j], self.b_norm,
                self.reorthogonalized, self.precision, False)
        return self._prefixes[j]


def lanczos(A: SymmetricOperator, b, k, reorth=True, precision="fp64") -> LanczosFactorization:
    """Run ``k`` steps of Lanczos on ``(A, b)``.

    With ``reorth`` each new vector is orthogonalised against all previous
    basis vectors by classical Gram-Schmidt, applied twice. With
    ``precision="fp32"`` the recurrence state is rounded to single precision
    after every step while each matvec accumulates in double and is then
    rounded. A breakdown (``beta_j <= 1e-13 ||A||``) stops the iteration with
    ``beta_j = 0`` and ``q_{j+1} = 0``.
    """
    if precision not in ("fp64", "fp32"):
        raise ValidationError(f"precision must be 'fp64' or 'fp32', got {precision!r}")
    b = np.asarray(b, dtype=float).ravel()
    n = A.n
    if b.size != n:
        raise ValidationError(f"b has length {b.size}, operator has n={n}")
    k = int(k)
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    if k > n:
        raise ValidationError(f"k={k} exceeds the dimension n={n}")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0:
        raise ValidationError("starting vector b is zero")

    dt = np.float32 if precision == "fp32" else np.float64
    tol = BREAKDOWN_RTOL * A.norm_estimate

    Q = np.zeros((n, k + 1), dtype=dt)
    alphas = np.zeros(k, dtype=dt)
    betas = np.zeros(k, dtype=dt)
    Q[:, 0] = (b / b_norm).astype(dt)
    beta_prev = dt(0)
    terminated = False
    steps = k
    for j in range(k):
        q = Q[:, j]
        v = A.matvec(q.astype(np.float64)).astype(dt)
        if j > 0:
            v = v - beta_prev * Q[:, j - 1]
        alpha = dt(v @ q)
        v = v - alpha * q
        if reorth:
            basis = Q[:, : j + 1]
            for _ in range(2):
                v = v - basis @ (basis.T @ v)
        beta = dt(np.linalg.norm(v))
        alphas[j] = alpha
        if beta <= tol:
            betas[j] = 0
            terminated = True
            steps = j + 1
            break
        betas[j] = beta
        Q[:, j + 1] = v / beta
        beta_prev = beta

    return LanczosFactorization(
        Q[:, : steps + 1].astype(np.float64), alphas[:steps].astype(np.float64),
        betas[:steps].astype(np.float64), b_norm, reorth, precision, terminated)


def recurrence_residual(A: SymmetricOperator, fact: LanczosFactorization):
    """``F = A Q_k - Q_k T_k - beta_k q_{k+1} e_k^T`` in double precision.

    Returns ``(F, ||F||_F)``.
    """
    if A.n != fact.n:
        raise ValidationError(f"operator n={A.n} does not match factorization n={fact.n}")
    Qk = fact.Qk
    F = A.matvec(Qk) - Qk @ fact.T.to_dense()
    F[:, -1] -= fact.beta_k * fact.q_next
    return F, float(np.linalg.norm(F))
