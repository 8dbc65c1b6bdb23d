"""Dense and tridiagonal symmetric linear algebra, Matrix Market I/O, norms.

Everything here is a pure function of its inputs. ``SymmetricOperator`` and
``Tridiagonal`` are immutable after construction; the eigendecompositions they
cache are derived data and never change once computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, MatrixMarketError, SingularShiftError, ValidationError

__all__ = [
    "SymmetricOperator",
    "Tridiagonal",
    "EighResult",
    "Norm",
    "dense_sym_eigh",
    "tridiag_eigvals",
    "tridiag_eigh",
    "det_ratio",
    "log_det_shifted",
    "read_matrix_market",
    "write_matrix_market",
    "weighted_norm",
]

SYMMETRY_RTOL = 1e-12
DENSIFY_MAX_N = 2000
ORACLE_MAX_N = 5000


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _check_symmetric(M, what="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise ValidationError(
            f"{what} is not symmetric: max |M - M^T| = {asym:.3e} (scale {scale:.3e})"
        )
    return M


@dataclass(frozen=True)
class EighResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))


def dense_sym_eigh(M) -> EighResult:
    """Eigendecomposition of a dense real symmetric matrix, ascending order."""
    M = _check_symmetric(M)
    lam, V = np.linalg.eigh(0.5 * (M + M.T))
    return EighResult(_readonly(lam), _readonly(V))


class SymmetricOperator:
    """A real symmetric linear map.

    Three storage kinds are supported: ``"dense"`` (a full array),
    ``"diagonal"`` (a spectrum; the eigenvectors are the standard basis) and
    ``"sparse"`` (a CSR matrix with both triangles stored).
    """

    KINDS = ("dense", "diagonal", "sparse")

    def __init__(self, kind, data):
        if kind not in self.KINDS:
            raise ValidationError(f"unknown operator kind {kind!r}")
        self.kind = kind
        if kind == "dense":
            M = _check_symmetric(data)
            self._data = _readonly(0.5 * (M + M.T))
            self.n = M.shape[0]
        elif kind == "diagonal":
            lam = np.asarray(data, dtype=float).ravel()
            if not np.all(np.isfinite(lam)):
                raise ValidationError("spectrum contains non-finite values")
            self._data = _readonly(np.sort(lam))
            self.n = lam.size
        else:
            S = sp.csr_matrix(data, dtype=float)
            if S.shape[0] != S.shape[1]:
                raise ValidationError(f"sparse matrix must be square, got {S.shape}")
            diff = abs(S - S.T)
            scale = abs(S).max() if S.nnz else 0.0
            if diff.nnz and diff.max() > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
                raise ValidationError("sparse matrix is not symmetric")
            self._data = S
            self.n = S.shape[0]

    @classmethod
    def dense(cls, M):
        return cls("dense", M)

    @classmethod
    def diagonal(cls, eigenvalues):
        return cls("diagonal", eigenvalues)

    @classmethod
    def sparse(cls, M):
        return cls("sparse", M)

    def __repr__(self):
        return f"SymmetricOperator(kind={self.kind!r}, n={self.n})"

    @property
    def data(self):
        return self._data

    @property
    def shape(self):
        return (self.n, self.n)

    def matvec(self, v):
        """Apply the operator to a vector or to the columns of a 2-D array."""
        v = np.asarray(v)
        if v.shape[0] != self.n:
            raise ValidationError(f"dimension mismatch: operator n={self.n}, vector {v.shape}")
        if self.kind == "diagonal":
            lam = self._data if v.ndim == 1 else self._data[:, None]
            return lam * v
        return self._data @ v

    __matmul__ = matvec

    def to_dense(self):
        if self.kind == "dense":
            return np.array(self._data)
        if self.kind == "diagonal":
            return np.diag(self._data)
        return self._data.toarray()

    def shifted(self, w):
        """The operator A - w I, in the same storage kind."""
        if self.kind == "diagonal":
            return SymmetricOperator.diagonal(self._data - w)
        if self.kind == "dense":
            return SymmetricOperator.dense(self._data - w * np.eye(self.n))
        return SymmetricOperator.sparse(self._data - w * sp.identity(self.n, format="csr"))

    @property
    def oracle_available(self):
        return self.kind == "diagonal" or self.n <= ORACLE_MAX_N

    @cached_property
    def spectrum(self) -> EighResult:
        """Full eigendecomposition (ascending), computed once.

        For the diagonal kind the eigenvector matrix is not materialised and
        ``eigenvectors`` is ``None``.
        """
        if self.kind == "diagonal":
            return EighResult(self._data, None)
        if self.n > ORACLE_MAX_N:
            raise ValidationError(
                f"dense eigendecomposition oracle limited to n <= {ORACLE_MAX_N}, got {self.n}"
            )
        return dense_sym_eigh(self.to_dense())

    def to_eigbasis(self, v):
        V = self.spectrum.eigenvectors
        return np.asarray(v) if V is None else V.T @ v

    def from_eigbasis(self, c):
        V = self.spectrum.eigenvectors
        return np.asarray(c) if V is None else V @ c

    @cached_property
    def norm_estimate(self) -> float:
        """Estimate of ||A||_2: exact for the diagonal kind, else a 10-step probe."""
        if self.kind == "diagonal":
            return float(np.max(np.abs(self._data))) if self.n else 0.0
        rng = np.random.Generator(np.random.Philox(0))
        q = rng.standard_normal(self.n)
        q /= np.linalg.norm(q)
        q_prev = np.zeros(self.n)
        alphas, betas = [], []
        beta = 0.0
        for _ in range(min(10, self.n)):
            v = self.matvec(q) - beta * q_prev
            a = float(v @ q)
            v -= a * q
            alphas.append(a)
            beta = float(np.linalg.norm(v))
            if beta <= 1e-14 * max(abs(a), 1.0):
                break
            betas.append(beta)
            q_prev, q = q, v / beta
        ritz = tridiag_eigvals(Tridiagonal(alphas, betas[: len(alphas) - 1]))
        est = float(np.max(np.abs(ritz)))
        return est if est > 0 else 1.0


# --------------------------------------------------------------------------
# tridiagonal matrices


@dataclass(frozen=True)
class Tridiagonal:
    """Real symmetric tridiagonal matrix, diagonal ``alphas`` and off-diagonal ``betas``."""

    alphas: np.ndarray
    betas: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float).ravel()
        b = np.asarray(self.betas, dtype=float).ravel()
        if a.size == 0:
            raise ValidationError("tridiagonal matrix must have at least one row")
        if b.size != a.size - 1:
            raise ValidationError(
                f"need len(betas) == len(alphas) - 1, got {b.size} and {a.size}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("tridiagonal entries must be finite")
        object.__setattr__(self, "alphas", _readonly(a))
        object.__setattr__(self, "betas", _readonly(b))

    @property
    def k(self):
        return self.alphas.size

    def to_dense(self):
        return np.diag(self.alphas) + np.diag(self.betas, 1) + np.diag(self.betas, -1)

    def shift(self, w):
        return Tridiagonal(self.alphas - w, self.betas)

    def leading(self, j):
        return Tridiagonal(self.alphas[:j], self.betas[: j - 1])

    @cached_property
    def eigh(self):
        lam, S = _tql_implicit(self.alphas, self.betas, vectors=True)
        return EighResult(_readonly(lam), _readonly(S))

    @cached_property
    def eigvals(self):
        if "eigh" in self.__dict__:
            return self.eigh.eigenvalues
        lam, _ = _tql_implicit(self.alphas, self.betas, vectors=False)
        return _readonly(lam)

    @property
    def spread(self):
        lam = self.eigvals
        return float(lam[-1] - lam[0])


def _tql_implicit(alphas, betas, vectors=True, max_iter=60):
    # Implicit-shift QL on a symmetric tridiagonal matrix, with Wilkinson-type
    # shifts and optional accumulation of the rotations into an identity.
    d = np.array(alphas, dtype=float)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = betas
    Z = np.eye(n) if vectors else None
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it >= max_iter:
                raise ArithmeticError("implicit QL failed to converge")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if Z is not None:
                    zi1 = Z[:, i + 1].copy()
                    Z[:, i + 1] = s * Z[:, i] + c * zi1
                    Z[:, i] = c * Z[:, i] - s * zi1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d, kind="stable")
    d = d[order]
    if Z is not None:
        Z = Z[:, order]
    return d, Z


def tridiag_eigvals(T: Tridiagonal) -> np.ndarray:
    """Ascending eigenvalues of a symmetric tridiagonal matrix (implicit QL)."""
    return T.eigvals


def tridiag_eigh(T: Tridiagonal) -> EighResult:
    return T.eigh


def singular_shift_tol(T: Tridiagonal) -> float:
    return 1e-14 * (T.spread + 1.0)


def log_det_shifted(T: Tridiagonal, z):
    """Complex ``log det(T - zI)`` for scalar or array ``z``.

    Uses the LDL^T pivot recurrence ``d_j = (alpha_j - z) - beta_{j-1}^2 / d_{j-1}``
    and accumulates ``log d_j``, so no intermediate determinant can overflow.
    The branch of the imaginary part is arbitrary; only ``exp`` of differences
    is meaningful.
    """
    z = np.asarray(z, dtype=complex)
    a, b = T.alphas, T.betas
    tiny = np.finfo(float).eps * (np.max(np.abs(a)) + (np.max(b) if b.size else 0.0) + 1.0)
    logdet = np.zeros(z.shape, dtype=complex)
    d = None
    for j in range(T.k):
        dj = a[j] - z
        if j > 0:
            dj = dj - b[j - 1] ** 2 / d
        dj = np.where(dj == 0, tiny, dj)
        logdet = logdet + np.log(dj)
        d = dj
    return logdet


def det_ratio(T: Tridiagonal, w, z, check=True):
    """``det(T - wI) / det(T - zI)``, i.e. ``det(h_{w,z}(T))``.

    Raises ``SingularShiftError`` when ``z`` lies within the singular-shift
    tolerance of an eigenvalue of ``T``.
    """
    z_arr = np.asarray(z, dtype=complex)
    if check:
        theta = T.eigvals
        tol = singular_shift_tol(T)
        dist = np.abs(z_arr.ravel()[:, None] - theta[None, :]) if z_arr.size else np.zeros((0, 1))
        if dist.size and dist.min() < tol:
            idx = np.unravel_index(np.argmin(dist), dist.shape)
            ritz = float(theta[idx[1]])
            raise SingularShiftError(
                f"shift z={complex(z_arr.ravel()[idx[0]])} is within {tol:.1e} of Ritz value {ritz!r}",
                ritz_value=ritz,
            )
    out = np.exp(log_det_shifted(T, w) - log_det_shifted(T, z_arr))
    return complex(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Matrix Market


def read_matrix_market(path) -> SymmetricOperator:
    """Read a symmetric matrix from a Matrix Market file.

    Supported headers are ``coordinate real symmetric`` (lower or upper
    triangle; entries are mirrored) and ``array real general`` (dense,
    column-major, must be symmetric to 1e-12 relative). Matrices with
    ``n <= 2000`` are densified; larger ones stay sparse.
    """
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise MatrixMarketError(f"{path}: empty file")
    header = lines[0].strip().lower().split()
    if len(header) != 5 or header[0] != "%%matrixmarket" or header[1] != "matrix":
        raise MatrixMarketError(f"{path}: not a Matrix Market header: {lines[0]!r}")
    layout, field_, symmetry = header[2:]
    if (layout, field_, symmetry) not in {
        ("coordinate", "real", "symmetric"),
        ("array", "real", "general"),
    }:
        raise MatrixMarketError(f"{path}: unsupported format {layout} {field_} {symmetry}")
    body = [ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError(f"{path}: missing size line")
    size = body[0].split()
    try:
        if layout == "coordinate":
            nrows, ncols, nnz = (int(t) for t in size)
        else:
            nrows, ncols = (int(t) for t in size)
    except ValueError as exc:
        raise MatrixMarketError(f"{path}: bad size line {body[0]!r}") from exc
    if nrows != ncols:
        raise MatrixMarketError(f"{path}: matrix is {nrows}x{ncols}, not square")
    n = nrows
    entries = body[1:]

    if layout == "array":
        try:
            vals = np.array([float(t) for ln in entries for t in ln.split()])
        except ValueError as exc:
            raise MatrixMarketError(f"{path}: non-numeric entry ({exc})") from exc
        if vals.size != n * n:
            raise MatrixMarketError(f"{path}: expected {n * n} values, found {vals.size}")
        M = vals.reshape((n, n), order="F")
        try:
            M = _check_symmetric(M, what=f"{path} payload")
        except ValidationError as exc:
            raise MatrixMarketError(str(exc)) from exc
        return SymmetricOperator.dense(M)

    if len(entries) != nnz:
        raise MatrixMarketError(f"{path}: header declares {nnz} entries, found {len(entries)}")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    for t, ln in enumerate(entries):
        parts = ln.split()
        if len(parts) != 3:
            raise MatrixMarketError(f"{path}: malformed entry line {ln!r}")
        try:
            i, j, x = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise MatrixMarketError(f"{path}: malformed entry line {ln!r}") from exc
        if not (1 <= i <= n and 1 <= j <= n):
            raise MatrixMarketError(f"{path}: index ({i}, {j}) out of range for n={n}")
        rows[t], cols[t], vals[t] = i - 1, j - 1, x
    off = rows != cols
    r = np.concatenate([rows, cols[off]])
    c = np.concatenate([cols, rows[off]])
    v = np.concatenate([vals, vals[off]])
    S = sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
    if n <= DENSIFY_MAX_N:
        return SymmetricOperator.dense(S.toarray())
    return SymmetricOperator.sparse(S)


def write_matrix_market(A: SymmetricOperator, path, comment=None):
    """Write ``A`` as ``coordinate real symmetric`` (lower triangle)."""
    if A.kind == "diagonal":
        idx = np.flatnonzero(A.data)
        rows, cols, vals = idx, idx, A.data[idx]
    else:
        L = sp.tril(sp.csr_matrix(A.data) if A.kind == "dense" else A.data).tocoo()
        order = np.lexsort((L.row, L.col))
        rows, cols, vals = L.row[order], L.col[order], L.data[order]
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        if comment:
            for ln in str(comment).splitlines():
                fh.write(f"% {ln}\n")
        fh.write(f"{A.n} {A.n} {len(vals)}\n")
        for i, j, v in zip(rows, cols, vals):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


# --------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class Norm:
    """A norm induced by a function of A: the 2-norm, the A-norm, or the (A - wI)^2-norm."""

    kind: str = "two"
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in ("two", "A", "A2shift"):
            raise ValidationError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def parse(cls, name, w=0.0):
        key = str(name).lower()
        if key in ("2", "two"):
            return cls("two")
        if key in ("a", "a-norm"):
            return cls("A")
        if key in ("a2", "a2shift"):
            return cls("A2shift", float(w))
        raise ValidationError(f"unknown norm {name!r}; expected one of 2, a, a2")

    @property
    def label(self):
        return {"two": "2", "A": "a", "A2shift": "a2"}[self.kind]

    def weights(self, eigenvalues):
        """Square-root weights g(lambda) with ||v|| = ||g(Lambda) V^T v||_2."""
        lam = np.asarray(eigenvalues, dtype=float)
        if self.kind == "two":
            return np.ones_like(lam)
        if self.kind == "A":
            if lam.size and lam.min() <= 0:
                raise DomainError(
                    f"A-norm requires positive definite A; smallest eigenvalue is {lam.min():.3e}"
                )
            return np.sqrt(lam)
        return np.abs(lam - self.shift)

    def of_coefficients(self, c, eigenvalues):
        """Norm of the vector whose eigenbasis coefficients are ``c``."""
        return float(np.linalg.norm(self.weights(eigenvalues) * np.asarray(c)))


def weighted_norm(v, A: SymmetricOperator, norm="two") -> float:
    """``||v||`` in the 2-norm, the A-norm, or the (A - wI)^2-norm."""
    if not isinstance(norm, Norm):
        if isinstance(norm, tuple):
            norm = Norm(*norm)
        else:
            norm = Norm(norm) if norm in ("two", "A", "A2shift") else Norm.parse(norm)
    v = np.asarray(v)
    if norm.kind == "two":
        return float(np.linalg.norm(v))
    if norm.kind == "A2shift":
        return float(np.linalg.norm(A.matvec(v) - norm.shift * v))
    if A.oracle_available:
        lam_min = float(A.spectrum.eigenvalues[0])
        if lam_min <= 0:
            raise DomainError(f"A-norm requires positive definite A; lambda_min = {lam_min:.3e}")
    val = float(np.real(np.vdot(v, A.matvec(v))))
    if val < 0:
        raise DomainError("A-norm requested but v^H A v < 0")
    return math.sqrt(val)
