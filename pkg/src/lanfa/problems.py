"""Synthetic test problems and right-hand sides.

Random draws use numpy's Philox counter-based generator keyed by the seed,
so a given (generator, parameters, seed) always yields the same problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .linalg import SymmetricOperator

__all__ = [
    "ProblemSpec",
    "rng_for",
    "gen_uniform",
    "gen_strakos",
    "gen_wishart",
    "gen_outlier",
    "gen_rhs",
    "GENERATORS",
]

RHS_POLICIES = ("equal", "gaussian")


def rng_for(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def gen_uniform(n, lmin, lmax) -> SymmetricOperator:
    """Evenly spaced spectrum ``lmin + (i-1)/(n-1) (lmax - lmin)``."""
    n = int(n)
    if n < 2 or not lmin < lmax:
        raise ValidationError(f"need n >= 2 and lmin < lmax, got n={n}, [{lmin}, {lmax}]")
    lam = lmin + np.arange(n) / (n - 1) * (lmax - lmin)
    lam[-1] = lmax
    return SymmetricOperator.diagonal(lam)


def gen_strakos(n, lambda1, lambdan, rho) -> SymmetricOperator:
    """``lambda_i = lambda_n + (n-i)/(n-1) (lambda_1 - lambda_n) rho^(i-1)``, i = 1..n."""
    n = int(n)
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    if not lambdan < lambda1:
        raise ValidationError(f"need lambda_n < lambda_1, got {lambdan}, {lambda1}")
    if not 0 < rho <= 1:
        raise ValidationError(f"need 0 < rho <= 1, got {rho}")
    i = np.arange(1, n + 1)
    lam = lambdan + (n - i) / (n - 1) * (lambda1 - lambdan) * rho ** (i - 1)
    lam[0] = lambda1
    return SymmetricOperator.diagonal(lam)


def gen_wishart(n, m=None, seed=0) -> SymmetricOperator:
    """``X X^T`` with ``X`` of shape ``n x m`` and i.i.d. ``N(0, 1/m)`` entries."""
    n = int(n)
    m = 2 * n if m is None else int(m)
    if n < 1 or m < n:
        raise ValidationError(f"need m >= n >= 1, got n={n}, m={m}")
    X = rng_for(seed).standard_normal((n, m)) / np.sqrt(m)
    return SymmetricOperator.dense(X @ X.T)


def gen_outlier(n, kappa) -> SymmetricOperator:
    """``n - 1`` evenly spaced points on ``[0, 1]`` plus one eigenvalue at ``kappa``."""
    n = int(n)
    if n < 3 or not kappa > 1:
        raise ValidationError(f"need n >= 3 and kappa > 1, got n={n}, kappa={kappa}")
    return SymmetricOperator.diagonal(np.append(np.linspace(0.0, 1.0, n - 1), float(kappa)))


GENERATORS = {
    "uniform": (gen_uniform, ("n", "lmin", "lmax")),
    "strakos": (gen_strakos, ("n", "lambda1", "lambdan", "rho")),
    "wishart": (gen_wishart, ("n", "m", "seed")),
    "outlier": (gen_outlier, ("n", "kappa")),
}

DEFAULTS = {
    "uniform": {"n": 1000, "lmin": 1e-2, "lmax": 1e2},
    "strakos": {"n": 50, "lambda1": 1.0, "lambdan": 1e-3, "rho": 0.8},
    "wishart": {"n": 300, "m": 600},
    "outlier": {"n": 200, "kappa": 5.0},
}


@dataclass(frozen=True)
class ProblemSpec:
    """A generator name, its parameters, a seed and a right-hand-side policy."""

    generator: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    rhs: str = "equal"

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValidationError(f"unknown problem {self.generator!r}; choose from {sorted(GENERATORS)}")
        if self.rhs not in RHS_POLICIES:
            raise ValidationError(f"unknown rhs policy {self.rhs!r}; choose from {RHS_POLICIES}")

    def full_params(self):
        p = dict(DEFAULTS[self.generator])
        p.update({k: v for k, v in self.params.items() if v is not None})
        if self.generator == "wishart":
            p.setdefault("m", 2 * int(p["n"]))
            p["seed"] = self.seed
        return p

    def operator(self) -> SymmetricOperator:
        fn, names = GENERATORS[self.generator]
        p = self.full_params()
        return fn(**{k: p[k] for k in names})

    def build(self):
        A = self.operator()
        return A, gen_rhs(self, A)


def gen_rhs(spec: ProblemSpec, A: SymmetricOperator) -> np.ndarray:
    """Unit right-hand side: equal projection onto every eigenvector, or seeded Gaussian."""
    if spec.rhs == "gaussian":
        b = rng_for(spec.seed + 1_000_003).standard_normal(A.n)
        return b / np.linalg.norm(b)
    if A.kind == "diagonal":
        return np.full(A.n, 1.0 / np.sqrt(A.n))
    if not A.oracle_available:
        raise ValidationError("equal eigen-projection needs an eigendecomposition oracle")
    V = A.spectrum.eigenvectors
    b = V @ np.full(A.n, 1.0 / np.sqrt(A.n))
    return b / np.linalg.norm(b)
