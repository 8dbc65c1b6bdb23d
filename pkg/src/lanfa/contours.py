"""Contours, contour quadrature, and sup-norms of the rational weights h.

Two rational weights appear in the bounds:

* ``h_{w,z}(x) = (x - w) / (x - z)``, whose sup over a real interval has a
  closed form (endpoints plus one interior critical point);
* ``h_z(x) = 1 / (x - z)``, whose sup over an interval is one over the
  distance from ``z`` to the interval.

All norm helpers are vectorised over ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EnclosureError, SingularIntegrandError, ValidationError

__all__ = [
    "Arc",
    "Line",
    "Contour",
    "IntervalSet",
    "SpectrumSets",
    "make_circle",
    "make_pacman",
    "make_double_circle",
    "make_custom",
    "contour_integral",
    "h_norm_interval",
    "h_norm_sets",
    "hz_norm_interval",
    "hz_norm_sets",
    "region_membership",
    "split_interval_at",
]

GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


# --------------------------------------------------------------------------
# segments


@dataclass(frozen=True)
class Arc:
    """Circular arc ``center + radius * exp(i theta)``, theta from ``theta0`` to ``theta1``."""

    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, t):
        th = self.theta0 + np.asarray(t) * (self.theta1 - self.theta0)
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, t):
        th = self.theta0 + np.asarray(t) * (self.theta1 - self.theta0)
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * th)

    @property
    def start(self):
        return complex(self.point(0.0))

    @property
    def end(self):
        return complex(self.point(1.0))

    @property
    def length(self):
        return abs(self.radius * (self.theta1 - self.theta0))


@dataclass(frozen=True)
class Line:
    start: complex
    end: complex

    def point(self, t):
        return self.start + np.asarray(t) * (self.end - self.start)

    def deriv(self, t):
        return np.full(np.shape(t), self.end - self.start, dtype=complex)

    @property
    def length(self):
        return abs(self.end - self.start)


# --------------------------------------------------------------------------
# contour


class Contour:
    """A union of oriented closed curves built from arcs and lines.

    ``components`` groups segment indices into closed curves. Base
    quadrature nodes are ``panels[i]`` Gauss-Legendre panels on segment ``i``.
    A truncated Pac-Man (``R = inf``) keeps only its rays and small arc and is
    not closed; ``closed`` is False for it and ``meta['R_trunc']`` records the
    truncation point.
    """

    def __init__(self, segments, kind, meta=None, panels=None, components=None, closed=True):
        self.segments = tuple(segments)
        if not self.segments:
            raise ValidationError("contour needs at least one segment")
        self.kind = kind
        self.meta = dict(meta or {})
        if panels is None:
            panels = [1] * len(self.segments)
        self.panels = tuple(int(p) for p in panels)
        self.components = tuple(tuple(c) for c in (components or [range(len(self.segments))]))
        self.closed = closed
        if closed:
            for comp in self.components:
                segs = [self.segments[i] for i in comp]
                for s, nxt in zip(segs, segs[1:] + segs[:1]):
                    if abs(complex(s.end) - complex(nxt.start)) > 1e-12 * max(1.0, abs(s.end)):
                        raise ValidationError(f"{kind} contour is not closed at {s.end}")
        self._base = None

    def __repr__(self):
        return f"Contour(kind={self.kind!r}, segments={len(self.segments)}, meta={self.meta})"

    @property
    def length(self):
        return float(sum(s.length for s in self.segments))

    def component_lengths(self):
        return [float(sum(self.segments[i].length for i in comp)) for comp in self.components]

    def _base_nodes(self):
        if self._base is None:
            seg, t0, t1 = _initial_panels(self)
            z, dz = _panel_nodes(self, seg, t0, t1)
            self._base = (z.ravel(), np.abs(dz).ravel(), dz.ravel())
        return self._base

    @property
    def nodes(self):
        return self._base_nodes()[0]

    @property
    def arclength_weights(self):
        return self._base_nodes()[1]

    @property
    def signed_weights(self):
        return self._base_nodes()[2]

    # ---------------------------------------------------------- enclosure
    def encloses_interval(self, lo, hi):
        """Whether the real interval ``[lo, hi]`` lies strictly inside the contour."""
        lo, hi = float(lo), float(hi)
        m = self.meta
        if self.kind == "circle":
            c, rad = m["center"], m["radius"]
            return abs(lo - c) < rad and abs(hi - c) < rad
        if self.kind == "pacman":
            c = m["center"]
            return lo > c + m["r"] and hi < c + m["R"]
        if self.kind == "double_circle":
            return any(abs(lo - c) < rad and abs(hi - c) < rad for c, rad in m["disks"])
        # custom: numerical winding number at a few points of the interval
        pts = np.linspace(lo, hi, 5) if hi > lo else np.array([lo])
        return all(abs(self.winding_number(p) - 1) < 1e-6 for p in pts)

    def winding_number(self, p):
        val, _ = contour_integral(self, lambda z: 1.0 / (z - p), mode="signed", tol=1e-10)
        return (val / (2j * math.pi)).real

    def check_encloses(self, sets):
        """Raise ``EnclosureError`` unless every component of ``sets`` is enclosed."""
        for lo, hi in sets.intervals:
            if not self.encloses_interval(lo, hi):
                raise EnclosureError(f"{self.kind} contour does not enclose [{lo:.6g}, {hi:.6g}]")


def _initial_panels(contour):
    seg, t0, t1 = [], [], []
    for i, p in enumerate(contour.panels):
        edges = np.linspace(0.0, 1.0, p + 1)
        seg.extend([i] * p)
        t0.extend(edges[:-1])
        t1.extend(edges[1:])
    return np.array(seg), np.array(t0), np.array(t1)


def _panel_nodes(contour, seg, t0, t1):
    """Nodes and weighted differentials for panels, shape (P, GL_ORDER)."""
    P = seg.size
    z = np.empty((P, GL_ORDER), dtype=complex)
    dz = np.empty((P, GL_ORDER), dtype=complex)
    half = 0.5 * (t1 - t0)
    t = t0[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
    for i in np.unique(seg):
        sel = seg == i
        s = contour.segments[i]
        z[sel] = s.point(t[sel])
        dz[sel] = s.deriv(t[sel]) * half[sel, None] * _GL_W[None, :]
    return z, dz


def make_circle(center, radius, n_nodes=256) -> Contour:
    """Counterclockwise circle, starting and ending at the leftmost point."""
    if not radius > 0:
        raise ValidationError(f"circle radius must be positive, got {radius}")
    arc = Arc(complex(center), float(radius), -math.pi, math.pi)
    panels = max(1, math.ceil(n_nodes / GL_ORDER))
    return Contour([arc], "circle", {"center": float(center), "radius": float(radius)}, [panels])


def make_double_circle(w, lambda_min, lambda_max, eps, n_nodes=512) -> Contour:
    """Boundaries of ``D(lambda_min, w - lambda_min - eps)`` and ``D(lambda_max, lambda_max - w - eps)``."""
    if not lambda_min < w < lambda_max:
        raise ValidationError(f"need lambda_min < w < lambda_max, got {lambda_min}, {w}, {lambda_max}")
    if eps < 0:
        raise ValidationError(f"eps must be non-negative, got {eps}")
    r1 = w - lambda_min - eps
    r2 = lambda_max - w - eps
    if r1 <= 0 or r2 <= 0:
        raise ValidationError(f"eps={eps} too large for gaps {w - lambda_min}, {lambda_max - w}")
    arcs = [Arc(complex(lambda_min), r1, -math.pi, math.pi),
            Arc(complex(lambda_max), r2, -math.pi, math.pi)]
    panels = max(1, math.ceil(n_nodes / (2 * GL_ORDER)))
    meta = {"w": float(w), "eps": float(eps), "lambda_min": float(lambda_min),
            "lambda_max": float(lambda_max),
            "disks": ((float(lambda_min), r1), (float(lambda_max), r2))}
    return Contour(arcs, "double_circle", meta, [panels, panels], components=[[0], [1]])


def _ray_breaks(r, X, ratio=4.0):
    # geometric breakpoints in distance-from-center along a ray, 0 .. X
    lo = max(r, X * 1e-14)
    m = max(1, math.ceil(math.log(X / lo) / math.log(ratio)))
    return np.concatenate([[0.0], np.geomspace(lo, X, m + 1)])


def make_pacman(w, r, R=math.inf, n_nodes=None, R_trunc=None) -> Contour:
    """Boundary of ``D(w,R)`` minus ``{Re(z-w) <= 0, |Im z| < r}`` and ``D(w,r)``.

    Orientation: big arc counterclockwise, top ray rightwards, small arc
    clockwise, bottom ray leftwards. With ``R = inf`` the big arc is dropped
    and the rays are truncated at distance ``R_trunc`` from ``w``; the caller
    is responsible for bounding the neglected tail (see
    ``pacman_tail_bound``).
    """
    w = float(w)
    r = float(r)
    if not r > 0:
        raise ValidationError(f"Pac-Man inner radius must be positive, got {r}")
    infinite = math.isinf(R)
    if not infinite and not R > r:
        raise ValidationError(f"need R > r, got R={R}, r={r}")
    X = float(R_trunc if infinite else math.sqrt(R * R - r * r))
    if infinite and (R_trunc is None or not R_trunc > r):
        raise ValidationError("R = inf needs a truncation point R_trunc > r")
    breaks = _ray_breaks(r, X)
    segs = []
    panels = []
    if not infinite:
        phi = math.pi - math.asin(r / R)
        segs.append(Arc(complex(w), float(R), -phi, phi))
        panels.append(8)
    # top ray: from w - X + ir rightwards to w + ir
    for x0, x1 in zip(breaks[::-1][:-1], breaks[::-1][1:]):
        segs.append(Line(complex(w - x0, r), complex(w - x1, r)))
        panels.append(1)
    segs.append(Arc(complex(w), r, math.pi / 2, -math.pi / 2))
    panels.append(2)
    for x0, x1 in zip(breaks[:-1], breaks[1:]):
        segs.append(Line(complex(w - x0, -r), complex(w - x1, -r)))
        panels.append(1)
    meta = {"center": w, "r": r, "R": float(R), "R_trunc": X if infinite else None}
    return Contour(segs, "pacman", meta, panels, closed=not infinite)


def make_custom(segments, components=None, panels=None, kind="custom") -> Contour:
    return Contour(segments, kind, {}, panels, components)


# --------------------------------------------------------------------------
# quadrature


def contour_integral(contour: Contour, integrand, mode="arclength", tol=1e-8,
                     adaptive=True, max_panels=40000):
    """Integrate ``integrand`` over ``contour``.

    ``mode="arclength"`` computes ``oint g(z) |dz|`` and ``mode="signed"``
    computes ``oint g(z) dz``. The integrand is called with a 1-D complex
    array of nodes and must return an array of the same length.

    Each panel is evaluated with a 16-point Gauss-Legendre rule and with the
    same rule on its two halves; the difference is the panel's error
    estimate. Panels carrying the largest errors are bisected until the total
    estimate is at most ``tol`` times the magnitude of the integral. Returns
    ``(value, err_estimate)``.
    """
    if mode not in ("arclength", "signed"):
        raise ValidationError(f"mode must be 'arclength' or 'signed', got {mode!r}")

    def evaluate(seg, t0, t1):
        z, dz = _panel_nodes(contour, seg, t0, t1)
        g = np.asarray(integrand(z.ravel())).reshape(z.shape)
        bad = ~np.isfinite(g)
        if np.any(bad):
            node = complex(z[bad][0])
            raise SingularIntegrandError(f"integrand is not finite at z = {node}", node=node)
        wts = np.abs(dz) if mode == "arclength" else dz
        return np.sum(g * wts, axis=1)

    def split(seg, t0, t1):
        mid = 0.5 * (t0 + t1)
        return np.concatenate([seg, seg]), np.concatenate([t0, mid]), np.concatenate([mid, t1])

    seg, t0, t1 = _initial_panels(contour)
    coarse = evaluate(seg, t0, t1)
    if not adaptive:
        total = np.sum(coarse)
        return (float(total.real) if mode == "arclength" else complex(total)), float("nan")

    hs, h0, h1 = split(seg, t0, t1)
    fine = evaluate(hs, h0, h1)
    P = seg.size
    est = fine[:P] + fine[P:]
    err = np.abs(coarse - est)
    # each panel keeps its two half values so refinement reuses them
    left, right = fine[:P], fine[P:]

    while True:
        total = np.sum(est)
        E = float(np.sum(err))
        if E <= tol * abs(total) or E == 0.0:
            break
        if seg.size >= max_panels:
            break
        order = np.argsort(err)[::-1]
        csum = np.cumsum(err[order])
        nsel = int(np.searchsorted(csum, 0.5 * E)) + 1
        pick = order[:nsel]
        pick = pick[(t1[pick] - t0[pick]) > 1e-13]
        if pick.size == 0:
            break
        keep = np.ones(seg.size, dtype=bool)
        keep[pick] = False
        # children: two halves of each picked panel; their coarse values are known
        cs, c0, c1 = split(seg[pick], t0[pick], t1[pick])
        ccoarse = np.concatenate([left[pick], right[pick]])
        gs, g0, g1 = split(cs, c0, c1)
        gfine = evaluate(gs, g0, g1)
        C = cs.size
        cl, cr = gfine[:C], gfine[C:]
        cest = cl + cr
        cerr = np.abs(ccoarse - cest)
        seg = np.concatenate([seg[keep], cs])
        t0 = np.concatenate([t0[keep], c0])
        t1 = np.concatenate([t1[keep], c1])
        est = np.concatenate([est[keep], cest])
        err = np.concatenate([err[keep], cerr])
        left = np.concatenate([left[keep], cl])
        right = np.concatenate([right[keep], cr])

    total = np.sum(est)
    value = float(total.real) if mode == "arclength" else complex(total)
    return value, float(np.sum(err))


# --------------------------------------------------------------------------
# interval sets and h-norms


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of closed real intervals; a point is an interval ``(p, p)``."""

    intervals: tuple = ()

    def __post_init__(self):
        iv = []
        for lo, hi in self.intervals:
            lo, hi = float(lo), float(hi)
            if hi < lo:
                raise ValidationError(f"interval [{lo}, {hi}] has hi < lo")
            iv.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(sorted(iv)))

    @classmethod
    def interval(cls, lo, hi):
        return cls(((lo, hi),))

    @classmethod
    def points(cls, pts):
        return cls(tuple((p, p) for p in np.ravel(pts)))

    @classmethod
    def parse(cls, text):
        """Parse ``"l:u[,l:u]"``."""
        try:
            parts = [p.split(":") for p in str(text).split(",") if p.strip()]
            return cls(tuple((float(a), float(b)) for a, b in parts))
        except ValueError as exc:
            raise ValidationError(f"cannot parse interval set {text!r}; expected l:u[,l:u]") from exc

    @property
    def lo(self):
        return self.intervals[0][0]

    @property
    def hi(self):
        return max(h for _, h in self.intervals)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (x >= lo - tol) & (x <= hi + tol)
        return out

    def __str__(self):
        return ",".join(f"{lo:.17g}:{hi:.17g}" for lo, hi in self.intervals)


def _on_interval(z, a, b):
    scale = max(abs(a), abs(b), 1.0)
    return (np.abs(z.imag) <= 1e-14 * scale) & (z.real >= a) & (z.real <= b)


def h_norm_interval(w, z, a, b, check=True):
    """``sup_{x in [a,b]} |x - w| / |x - z|``.

    The candidates are the two endpoints and the interior critical point
    ``x* = (Re(z)^2 + Im(z)^2 - Re(z) w) / (Re(z) - w)``, where the value is
    ``|z - w| / |Im z|``. When ``Re(z) = w`` there is no interior critical
    point. With ``check=False`` points on the interval give ``inf`` instead of
    raising.
    """
    z = np.asarray(z, dtype=complex)
    a, b, w = float(a), float(b), float(w)
    if b < a:
        raise ValidationError(f"need a <= b, got [{a}, {b}]")
    on = _on_interval(z, a, b)
    if check and np.any(on):
        raise DomainError(f"z = {complex(z[on].ravel()[0])} lies on the interval [{a}, {b}]")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        va = np.abs(a - w) / np.abs(a - z)
        vb = np.abs(b - w) / np.abs(b - z)
        va = np.where(np.abs(a - w) == 0, 0.0, va)
        vb = np.where(np.abs(b - w) == 0, 0.0, vb)
        u, v = z.real, z.imag
        denom = u - w
        xs = np.where(denom != 0, (u * u + v * v - u * w) / np.where(denom != 0, denom, 1.0), np.nan)
        inside = (denom != 0) & (v != 0) & (xs >= a) & (xs <= b)
        vx = np.where(inside, np.abs(z - w) / np.where(v != 0, np.abs(v), 1.0), 0.0)
    out = np.maximum(np.maximum(va, vb), vx)
    out = np.where(on, np.inf, out)
    return float(out) if out.ndim == 0 else out


def h_norm_sets(w, z, S, check=True):
    """Max of ``h_norm_interval`` over the components of ``S`` (points evaluated directly)."""
    if not isinstance(S, IntervalSet):
        S = IntervalSet(S)
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape)
    for lo, hi in S.intervals:
        out = np.maximum(out, h_norm_interval(w, z, lo, hi, check=check))
    return float(out) if out.ndim == 0 else out


def hz_norm_interval(z, a, b, check=True):
    """``sup_{x in [a,b]} 1/|x - z|``, i.e. one over the distance from ``z`` to ``[a,b]``."""
    z = np.asarray(z, dtype=complex)
    a, b = float(a), float(b)
    if b < a:
        raise ValidationError(f"need a <= b, got [{a}, {b}]")
    on = _on_interval(z, a, b)
    if check and np.any(on):
        raise DomainError(f"z = {complex(z[on].ravel()[0])} lies on the interval [{a}, {b}]")
    nearest = np.clip(z.real, a, b)
    with np.errstate(divide="ignore"):
        out = 1.0 / np.abs(nearest - z)
    out = np.where(on, np.inf, out)
    return float(out) if out.ndim == 0 else out


def hz_norm_sets(z, S, check=True):
    if not isinstance(S, IntervalSet):
        S = IntervalSet(S)
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape)
    for lo, hi in S.intervals:
        out = np.maximum(out, hz_norm_interval(z, lo, hi, check=check))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SpectrumSets:
    """The sets ``S_0`` and ``S_1 .. S_k`` of the error bound.

    A priori sets share one interval set ``common`` for every ``S_i``; a
    posteriori sets are the Ritz values ``ritz`` as singletons.
    """

    S0: IntervalSet
    k: int
    common: IntervalSet | None = None
    ritz: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.common is None) == (self.ritz is None):
            raise ValidationError("give exactly one of common (a priori) or ritz (a posteriori)")
        if self.ritz is not None:
            r = np.array(self.ritz, dtype=float)
            r.setflags(write=False)
            object.__setattr__(self, "ritz", r)
            object.__setattr__(self, "k", r.size)

    @classmethod
    def apriori(cls, S0, k, S=None):
        S0 = S0 if isinstance(S0, IntervalSet) else IntervalSet(S0)
        return cls(S0, int(k), common=S0 if S is None else S)

    @classmethod
    def aposteriori(cls, S0, ritz):
        S0 = S0 if isinstance(S0, IntervalSet) else IntervalSet(S0)
        return cls(S0, len(ritz), ritz=ritz)

    @property
    def policy(self):
        return "apriori" if self.common is not None else "aposteriori"

    @property
    def intervals(self):
        """Every interval or point that a contour has to enclose."""
        iv = list(self.S0.intervals)
        if self.common is not None:
            iv += list(self.common.intervals)
        else:
            iv += [(t, t) for t in self.ritz]
        return iv

    def log_h_product(self, w, z, power=1.0):
        """``power * sum_i log ||h_{w,z}||_{S_i}`` over ``i = 1..k``."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            if self.common is not None:
                return power * self.k * np.log(h_norm_sets(w, z, self.common, check=False))
            th = self.ritz
            tot = np.zeros(z.shape)
            for t in th:
                tot += np.log(np.abs(t - w)) - np.log(np.abs(t - z))
            return power * tot


def split_interval_at(w, lam_left, lam_right, lambda_min, lambda_max, margin=None):
    """``[lambda_min, lam_left] U [lam_right, lambda_max]`` around ``w``.

    With ``margin="gamma"`` returns the approximate variant
    ``[lambda_min/2, w - gamma] U [w + gamma, 1.5 lambda_max]`` where
    ``gamma = min(w - lam_left, lam_right - w) / 100``.
    """
    if not (lambda_min <= lam_left < w < lam_right <= lambda_max):
        raise ValidationError(
            f"need lambda_min <= lam_left < w < lam_right <= lambda_max, got "
            f"{lambda_min}, {lam_left}, {w}, {lam_right}, {lambda_max}")
    if margin is None:
        return IntervalSet(((lambda_min, lam_left), (lam_right, lambda_max)))
    if margin != "gamma":
        raise ValidationError(f"unknown margin {margin!r}")
    gamma = min(w - lam_left, lam_right - w) / 100.0
    return IntervalSet(((lambda_min / 2, w - gamma), (w + gamma, 1.5 * lambda_max)))


# --------------------------------------------------------------------------
# level-set regions


def _golden_min(fun, lo, hi, iters=200, tol=1e-15):
    g = (math.sqrt(5) - 1) / 2
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = fun(x2)
    return min(f1, f2, fun(lo), fun(hi))


def region_membership(w, r, a, b, z) -> bool:
    """Whether ``z`` lies in the union of discs ``D(x, |x - w| / r)`` over ``x in [a,b]``.

    Minimises ``phi(x) = r|z - x| - |x - w|``, which is convex on each side of
    ``w``, by golden-section search on each piece; ``z`` is in the region
    (closed) iff the minimum is at most zero up to rounding.
    """
    if not r > 0:
        raise ValidationError(f"r must be positive, got {r}")
    z = complex(z)
    a, b, w = float(a), float(b), float(w)

    def phi(x):
        return r * abs(z - x) - abs(x - w)

    pieces = []
    if a < w:
        pieces.append((a, min(b, w)))
    if b > w:
        pieces.append((max(a, w), b))
    if not pieces:
        pieces.append((a, b))
    best = min(_golden_min(phi, lo, hi) for lo, hi in pieces)
    scale = r * (abs(z) + max(abs(a), abs(b))) + abs(w) + max(abs(a), abs(b))
    return bool(best <= 1e-12 * scale)
