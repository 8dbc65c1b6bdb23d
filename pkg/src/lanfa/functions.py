"""Scalar functions with real and complex evaluation.

Each ``ScalarFunction`` knows how to evaluate itself on real points (with a
domain check) and on complex contour nodes (using a fixed analytic
continuation), plus where it is singular and how fast it grows. The piecewise
functions are continued piece by piece: the left piece is used for
``Re z < a`` and the right piece for ``Re z >= a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, ValidationError

__all__ = ["ScalarFunction", "parse_function"]

_INF = math.inf


@dataclass(frozen=True)
class ScalarFunction:
    """A named scalar function.

    ``cuts`` lists closed real intervals ``(lo, hi)`` where the continuation is
    singular (a pole is ``(p, p)``); ``poles`` lists non-real poles.
    ``growth = (C, p)`` certifies ``|f(z)| <= C |z|^p`` for ``|z| >= 1`` on the
    principal sheet, or is ``None`` when no such bound exists.
    For piecewise functions ``breakpoint`` is ``a`` and ``cuts``/``poles``
    refer to the right piece; the left piece is entire for every bundled case.
    """

    name: str
    params: tuple = ()
    cuts: tuple = ()
    poles: tuple = ()
    growth: tuple | None = None
    breakpoint: float | None = None
    degree: int | None = None
    _coeffs: tuple = field(default=(), repr=False)
    _den: tuple = field(default=(), repr=False)

    # ------------------------------------------------------------ constructors
    @classmethod
    def sqrt(cls):
        return cls("sqrt", cuts=((-_INF, 0.0),), growth=(1.0, 0.5))

    @classmethod
    def log(cls):
        # |log z| <= ln|z| + pi and ln y <= (4/e) y^(1/4) for y >= 1
        return cls("log", cuts=((-_INF, 0.0),), growth=(4.0 / math.e + math.pi, 0.25))

    @classmethod
    def inv(cls):
        return cls.inv_power(1)

    @classmethod
    def inv_power(cls, q=1):
        q = float(q)
        if q <= 0:
            raise ValidationError(f"inverse power needs q > 0, got {q}")
        name = "inv" if q == 1 else "inv_power"
        if q == int(q):
            cuts = ((0.0, 0.0),)
        else:
            cuts = ((-_INF, 0.0),)
        return cls(name, params=(q,), cuts=cuts, growth=(1.0, 0.0))

    @classmethod
    def exp(cls, scale=1.0):
        return cls("exp", params=(float(scale),))

    @classmethod
    def polynomial(cls, coeffs):
        """Polynomial with coefficients in ascending order, ``c0 + c1 x + ...``."""
        c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        deg = c.size - 1
        return cls(
            "polynomial",
            params=tuple(c),
            growth=(float(np.sum(np.abs(c))), float(deg)),
            degree=deg,
            _coeffs=tuple(c),
        )

    @classmethod
    def constant(cls, c=1.0):
        return cls.polynomial([c])

    @classmethod
    def identity(cls):
        return cls.polynomial([0.0, 1.0])

    @classmethod
    def rational(cls, num, den):
        num = np.asarray(num, dtype=float)
        den = np.trim_zeros(np.asarray(den, dtype=float), "b")
        if den.size == 0:
            raise ValidationError("rational function with zero denominator")
        roots = P.polyroots(den) if den.size > 1 else np.zeros(0)
        real = tuple((float(r.real), float(r.real)) for r in roots if abs(r.imag) < 1e-14)
        cplx = tuple(complex(r) for r in roots if abs(r.imag) >= 1e-14)
        return cls("rational", params=(tuple(num), tuple(den)), cuts=real, poles=cplx,
                   _coeffs=tuple(num), _den=tuple(den))

    @classmethod
    def step(cls, a):
        return cls("step", params=(float(a),), breakpoint=float(a), growth=(1.0, 0.0))

    @classmethod
    def abs_shift(cls, a):
        a = float(a)
        return cls("abs", params=(a,), breakpoint=a, growth=(1.0 + abs(a), 1.0))

    @classmethod
    def step_over_x(cls, a):
        a = float(a)
        if a <= 0:
            raise ValidationError(f"step(x-a)/x needs a > 0, got {a}")
        return cls("step_over_x", params=(a,), breakpoint=a, cuts=((0.0, 0.0),),
                   growth=(1.0, 0.0))

    # --------------------------------------------------------------- metadata
    @property
    def is_piecewise(self):
        return self.breakpoint is not None

    @property
    def label(self):
        if self.name in ("sqrt", "log", "inv", "exp"):
            return self.name
        if self.name == "inv_power":
            return f"x^-{self.params[0]:g}"
        if self.name == "polynomial":
            return f"poly(deg={self.degree})"
        if self.name == "step":
            return f"step(x-{self.breakpoint:g})"
        if self.name == "abs":
            return f"|x-{self.breakpoint:g}|"
        if self.name == "step_over_x":
            return f"step(x-{self.breakpoint:g})/x"
        return self.name

    def real_domain_violation(self, x):
        """Return the first point of ``x`` outside the real domain, or None."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.name == "sqrt":
            bad = x < 0
        elif self.name == "log":
            bad = x <= 0
        elif self.name in ("inv", "inv_power"):
            q = self.params[0]
            bad = (x == 0) if q == int(q) else (x <= 0)
        elif self.name == "rational":
            bad = P.polyval(x, np.asarray(self._den)) == 0
        elif self.name == "step_over_x":
            bad = (x >= self.breakpoint) & (x == 0)
        else:
            bad = np.zeros(x.shape, dtype=bool)
        if np.any(bad):
            return float(x[np.argmax(bad)])
        return None

    def check_domain(self, x, what="point"):
        bad = self.real_domain_violation(x)
        if bad is not None:
            raise DomainError(f"{self.label} is undefined at {what} {bad!r}")

    def singular_in_disk(self, center, radius, piece=None):
        """True when the continuation of the selected piece is singular on the closed disk."""
        if self.is_piecewise and piece == "left":
            return False
        for lo, hi in self.cuts:
            nearest = min(max(center, lo), hi)
            if abs(nearest - center) <= radius:
                return True
        return any(abs(p - center) <= radius for p in self.poles)

    # ------------------------------------------------------------- evaluation
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        self.check_domain(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._eval_real(x)
        return float(out) if out.ndim == 0 else out

    def _eval_real(self, x):
        n = self.name
        if n == "sqrt":
            return np.sqrt(x)
        if n == "log":
            return np.log(x)
        if n in ("inv", "inv_power"):
            return x ** (-self.params[0])
        if n == "exp":
            return np.exp(self.params[0] * x)
        if n == "polynomial":
            return P.polyval(x, np.asarray(self._coeffs))
        if n == "rational":
            return P.polyval(x, np.asarray(self._coeffs)) / P.polyval(x, np.asarray(self._den))
        a = self.breakpoint
        if n == "step":
            return np.where(x >= a, 1.0, 0.0)
        if n == "abs":
            return np.abs(x - a)
        if n == "step_over_x":
            safe = np.where(x >= a, x, 1.0)
            return np.where(x >= a, 1.0 / safe, 0.0)
        raise ValidationError(f"unknown function {n!r}")

    def complex_eval(self, z):
        """Evaluate the analytic continuation at complex ``z`` (principal branches)."""
        z = np.asarray(z, dtype=complex)
        n = self.name
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if n == "sqrt":
                out = np.sqrt(z)
            elif n == "log":
                out = np.log(z)
            elif n in ("inv", "inv_power"):
                q = self.params[0]
                out = 1.0 / z if q == 1 else (z ** (-int(q)) if q == int(q) else np.exp(-q * np.log(z)))
            elif n == "exp":
                out = np.exp(self.params[0] * z)
            elif n == "polynomial":
                out = P.polyval(z, np.asarray(self._coeffs))
            elif n == "rational":
                out = P.polyval(z, np.asarray(self._coeffs)) / P.polyval(z, np.asarray(self._den))
            else:
                a = self.breakpoint
                right = z.real >= a
                if n == "step":
                    out = np.where(right, 1.0 + 0j, 0j)
                elif n == "abs":
                    out = np.where(z.real > a, z - a, a - z)
                elif n == "step_over_x":
                    safe = np.where(right, z, 1.0)
                    out = np.where(right, 1.0 / safe, 0j)
                else:
                    raise ValidationError(f"unknown function {n!r}")
        return complex(out) if out.ndim == 0 else out

    def abs_complex(self, z):
        return np.abs(self.complex_eval(z))


def parse_function(name, a=None, q=None, coeffs=None):
    """Build a ``ScalarFunction`` from a short name used by the CLI and configs.

    Recognised names: sqrt, log, inv, xq (needs q), exp, step, abs, stepx
    (these three need a), poly (needs coeffs, ascending), one.
    """
    key = str(name).lower()
    simple = {"sqrt": ScalarFunction.sqrt, "log": ScalarFunction.log,
              "inv": ScalarFunction.inv, "exp": ScalarFunction.exp,
              "one": ScalarFunction.constant}
    if key in simple:
        return simple[key]()
    if key in ("xq", "inv_power"):
        return ScalarFunction.inv_power(2 if q is None else q)
    if key in ("step", "abs", "stepx", "step_over_x"):
        if a is None:
            raise ValidationError(f"function {name!r} needs a breakpoint a")
        ctor = {"step": ScalarFunction.step, "abs": ScalarFunction.abs_shift}.get(
            key, ScalarFunction.step_over_x)
        return ctor(a)
    if key in ("poly", "polynomial"):
        if coeffs is None:
            raise ValidationError("polynomial needs coefficients")
        return ScalarFunction.polynomial(coeffs)
    raise ValidationError(f"unknown function {name!r}")
