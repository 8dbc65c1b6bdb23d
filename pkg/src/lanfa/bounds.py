"""Error bounds for Lanczos-FA built from contour integrals.

The central quantity is the integral term

    I_k = (1/2pi) oint |f(z)| prod_i ||h_{w,z}||_{S_i} ||h_{w,z}||_{S_0} |dz|

which multiplies the error ``||err_k(w)||`` of the Lanczos iterate for the
single shifted system ``(A - wI) x = b``. The quadratic-form variant squares
the ``S_i`` factors, replaces the last factor by ``||h_z||_{S_0}`` and
multiplies ``||res_k(w)||_2^2`` instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from .contours import (
    Contour,
    IntervalSet,
    SpectrumSets,
    contour_integral,
    h_norm_sets,
    hz_norm_sets,
    make_circle,
    make_double_circle,
    make_pacman,
    _initial_panels,
    _panel_nodes,
)
from .errors import DomainError, EnclosureError, SingularShiftError, ValidationError
from .fa import fa_coefficients, galerkin_coefficients, ground_truth
from .functions import ScalarFunction
from .lanczos import LanczosFactorization, lanczos, recurrence_residual
from .linalg import Norm, SymmetricOperator
from .linsys import cg_apriori_bound

__all__ = [
    "BoundRow",
    "BoundReport",
    "QuadformRow",
    "BoundSetup",
    "integral_term",
    "integral_term_with_error",
    "bound_curve",
    "bound_disk",
    "bound_xq_relative",
    "sqrt_pacman_constant",
    "table1_constant",
    "double_circle_factor",
    "bound_quadform",
    "quadform_integral_with_error",
    "quadform_bound_curve",
    "fp_correction",
    "rational_discretization_report",
    "uniform_poly_bound",
    "default_setup",
    "check_contour",
]

TAIL_FRACTION = 1e-3


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class BoundRow:
    k: int
    true_err: float
    err_w: float
    res_w: float
    integral_term: float
    bound: float
    fp_term: float | None
    quad_err: float

    @property
    def holds(self):
        return self.true_err <= self.bound + self.quad_err


@dataclass(frozen=True)
class QuadformRow:
    k: int
    true_qf_err: float
    res_w_sq: float
    integral_term: float
    bound: float
    quad_err: float

    @property
    def holds(self):
        return self.true_qf_err <= self.bound + self.quad_err


@dataclass
class BoundReport:
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.rows], dtype=float)

    @property
    def violations(self):
        return [r for r in self.rows if not r.holds]


# --------------------------------------------------------------------------
# contour checks and integrands


def check_contour(f: ScalarFunction, contour: Contour, sets: SpectrumSets):
    """Enclosure of every set and analyticity of ``f`` inside ``contour``."""
    contour.check_encloses(sets)
    m = contour.meta
    shrink = 1.0 - 1e-12
    if contour.kind == "circle":
        if f.is_piecewise:
            raise EnclosureError(f"{f.label} is not analytic inside a single circle")
        if f.singular_in_disk(m["center"], m["radius"] * shrink):
            raise EnclosureError(f"{f.label} is singular inside the circle {m}")
    elif contour.kind == "double_circle":
        (c1, r1), (c2, r2) = m["disks"]
        if f.is_piecewise:
            if not math.isclose(f.breakpoint, m["w"], rel_tol=0, abs_tol=1e-12 * max(1, abs(m["w"]))):
                raise EnclosureError("double circle must be split at the breakpoint of f")
            bad = f.singular_in_disk(c1, r1 * shrink, "left") or f.singular_in_disk(c2, r2 * shrink, "right")
        else:
            bad = f.singular_in_disk(c1, r1 * shrink) or f.singular_in_disk(c2, r2 * shrink)
        if bad:
            raise EnclosureError(f"{f.label} is singular inside the double circle")
    elif contour.kind == "pacman":
        if f.is_piecewise:
            raise EnclosureError(f"{f.label} is not analytic inside a Pac-Man contour")
        c, r, R = m["center"], m["r"], m["R"]
        for lo, hi in f.cuts:
            if hi > c:
                raise EnclosureError(f"singular set [{lo}, {hi}] of {f.label} is not excluded by the slit")
        for p in f.poles:
            inside = abs(p - c) < R and abs(p - c) > r and not (p.real <= c and abs(p.imag) < r)
            if inside:
                raise EnclosureError(f"pole {p} of {f.label} lies inside the Pac-Man contour")


def _log_abs_f(f, z):
    with np.errstate(divide="ignore"):
        return np.log(f.abs_complex(z))


def _combine(logs):
    total = sum(logs)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.exp(total)
    # a vanishing f kills the node even where an h factor is unbounded
    return np.where(np.isneginf(logs[0]), 0.0, out)


def _main_integrand(f, w, sets):
    def g(z):
        with np.errstate(divide="ignore"):
            s0 = np.log(h_norm_sets(w, z, sets.S0, check=False))
        return _combine([_log_abs_f(f, z), sets.log_h_product(w, z, 1.0), s0])
    return g


def _quadform_integrand(f, w, sets):
    def g(z):
        with np.errstate(divide="ignore"):
            s0 = np.log(hz_norm_sets(z, sets.S0, check=False))
        return _combine([_log_abs_f(f, z), sets.log_h_product(w, z, 2.0), s0])
    return g


# --------------------------------------------------------------------------
# Pac-Man tails


def _set_extent(S: IntervalSet, w):
    M = max(max(abs(lo - w), abs(hi - w)) for lo, hi in S.intervals)
    return M, S.lo


def _tail_terms(w, sets, quadform):
    """(log coefficient, decay exponent) pairs and the minima of the sets involved.

    On a ray point at distance ``y`` from the centre, for ``y`` large enough,
    ``||h_{w,z}||_S <= M_S c / y`` with ``M_S = max_{s in S} |s - w|``.
    """
    power = 2.0 if quadform else 1.0
    logc = 0.0
    K = 0.0
    mins = []
    if sets.common is not None:
        M, m = _set_extent(sets.common, w)
        logc += power * sets.k * math.log(M) if M > 0 else -math.inf
        K += power * sets.k
        mins.append(m)
    else:
        for t in sets.ritz:
            d = abs(t - w)
            logc += power * (math.log(d) if d > 0 else -math.inf)
            K += power
        if sets.ritz.size:
            mins.append(float(sets.ritz.min()))
    if quadform:
        mins.append(sets.S0.lo)
        K += 1.0
    else:
        M0, m0 = _set_extent(sets.S0, w)
        logc += math.log(M0) if M0 > 0 else -math.inf
        K += 1.0
        mins.append(m0)
    nfac = (sets.k * power if sets.common is not None else len(sets.ritz) * power) + 1.0
    return [(logc, K, nfac)], mins


def _tail_start(contour, mins):
    c, r = contour.meta["center"], contour.meta["r"]
    Y0 = max(1.0 + abs(c) + r, 10.0 * (abs(c) + r))
    for m in mins:
        Y0 = max(Y0, 10.0 * max(c - m, 0.0))
    return Y0


def _tail_value(f, terms, Y, any_left):
    """Certified bound on both ray tails beyond distance ``Y``, including 1/2pi."""
    if f.growth is None:
        raise ValidationError(f"{f.label} has no growth bound; use a finite Pac-Man radius")
    Cf, p = f.growth
    p = max(p, 0.0)
    cfac = math.log(10.0 / 9.0) if any_left else 0.0
    tot = 0.0
    for logc, K, nfac in terms:
        if K <= p + 1:
            raise ValidationError(
                f"integrand decays too slowly on the rays (exponent {K} vs growth {p}); "
                "use a finite Pac-Man radius")
        if logc == -math.inf:
            continue
        lt = (math.log(Cf / math.pi) + p * math.log(1.1) + logc + nfac * cfac
              + (p + 1 - K) * math.log(Y) - math.log(K - 1 - p))
        tot += math.exp(lt)
    return tot


def _required_Y(f, terms, target, any_left, Y):
    # smallest Y (within a factor 2) with tail <= target
    for _ in range(200):
        if _tail_value(f, terms, Y, any_left) <= target:
            return Y
        Y *= 2.0
    return Y


def _integrate(f, contour, integrand, tail_terms, tol):
    """Integral (already divided by 2 pi) and error estimate, handling R = inf Pac-Man."""
    if not (contour.kind == "pacman" and math.isinf(contour.meta["R"])):
        val, err = contour_integral(contour, integrand, "arclength", tol=tol)
        return val / (2 * math.pi), err / (2 * math.pi), contour
    terms, mins = tail_terms
    c, r = contour.meta["center"], contour.meta["r"]
    any_left = any(m < c for m in mins)
    Y = max(contour.meta["R_trunc"], _tail_start(contour, mins))
    cont = contour if Y == contour.meta["R_trunc"] else make_pacman(c, r, math.inf, R_trunc=Y)
    for _ in range(8):
        val, err = contour_integral(cont, integrand, "arclength", tol=tol)
        val /= 2 * math.pi
        err /= 2 * math.pi
        tail = _tail_value(f, terms, Y, any_left)
        if tail <= TAIL_FRACTION * val or (val == 0 and tail == 0):
            break
        target = TAIL_FRACTION * max(val, 1e-300)
        Y = 2.0 * _required_Y(f, terms, target, any_left, Y)
        cont = make_pacman(c, r, math.inf, R_trunc=Y)
    return val, err + tail, cont


def integral_term_with_error(f, contour, w, sets: SpectrumSets, tol=1e-8, check=True):
    """``(I, err)``: the integral term and an error estimate that includes any Pac-Man tail."""
    if check:
        check_contour(f, contour, sets)
    val, err, _ = _integrate(f, contour, _main_integrand(f, w, sets),
                             _tail_terms(w, sets, False), tol)
    return val, err


def integral_term(f, contour, w, sets: SpectrumSets, tol=1e-8) -> float:
    return integral_term_with_error(f, contour, w, sets, tol)[0]


def quadform_integral_with_error(f, contour, w, sets: SpectrumSets, tol=1e-8, check=True):
    if check:
        check_contour(f, contour, sets)
    val, err, _ = _integrate(f, contour, _quadform_integrand(f, w, sets),
                             _tail_terms(w, sets, True), tol)
    return val, err


def bound_quadform(f, contour, w, sets: SpectrumSets, res_w_norm_2, tol=1e-8) -> float:
    """Quadratic-form bound: the squared-h integral times ``||res_k(w)||_2^2``."""
    val, _ = quadform_integral_with_error(f, contour, w, sets, tol)
    return val * float(res_w_norm_2) ** 2


# --------------------------------------------------------------------------
# closed forms


def bound_disk(f: ScalarFunction, w, lambda_max, err_w_norm, n_nodes=1024) -> float:
    """``(lambda_max - w) max_{z on circle} |f(z)| ||err_k(w)||`` for the circle
    centred at ``lambda_max`` through ``w``."""
    radius = float(lambda_max) - float(w)
    if not radius > 0:
        raise ValidationError(f"need w < lambda_max, got w={w}, lambda_max={lambda_max}")
    if f.is_piecewise or f.singular_in_disk(float(lambda_max), radius * (1 - 1e-12)):
        raise DomainError(f"{f.label} is not analytic on the disk D({lambda_max}, {radius})")
    z = make_circle(lambda_max, radius, n_nodes).nodes
    return radius * float(np.max(f.abs_complex(z))) * float(err_w_norm)


def bound_xq_relative(q, c, kappa_A, kappa_shift, err_ratio) -> float:
    """Relative-error bound ``c^-q kappa(A)^q kappa(A - wI) err_ratio`` for ``f = x^-q``, ``w = c lambda_min``."""
    if not q > 1:
        raise ValidationError(f"need q > 1, got {q}")
    if not 0 < c < 1:
        raise ValidationError(f"need c in (0, 1), got {c}")
    if kappa_A < 1 or kappa_shift < 1:
        raise ValidationError("condition numbers must be at least 1")
    if err_ratio < 0:
        raise ValidationError("error ratio must be non-negative")
    return c ** (-q) * kappa_A ** q * kappa_shift * err_ratio


def sqrt_pacman_constant(k, lambda_max) -> float:
    """``lambda_max^{3/2} / (2 sqrt(pi)) * Gamma(k - 1/2) / Gamma(k + 1)``."""
    if k < 1:
        raise ValidationError(f"need k >= 1, got {k}")
    logv = 1.5 * math.log(lambda_max) - math.log(2 * math.sqrt(math.pi)) \
        + math.lgamma(k - 0.5) - math.lgamma(k + 1)
    return math.exp(logv)


def table1_constant(f_kind, a, lambda_min, lambda_max) -> float:
    """``(1/2pi) sum_j |Gamma_j| max_{Gamma_j} |f|`` for the double circle with ``eps -> 0``."""
    if not lambda_min < a < lambda_max:
        raise ValidationError(f"need lambda_min < a < lambda_max, got {lambda_min}, {a}, {lambda_max}")
    if f_kind == "abs":
        return 2 * (a - lambda_min) ** 2 + 2 * (lambda_max - a) ** 2
    if f_kind == "step":
        return lambda_max - a
    if f_kind == "step_over_x":
        if a <= 0:
            raise ValidationError(f"step_over_x needs a > 0, got {a}")
        return (lambda_max - a) / a
    raise ValidationError(f"unknown kind {f_kind!r}; expected abs, step or step_over_x")


def double_circle_factor(f: ScalarFunction, contour: Contour, form="max", tol=1e-10) -> float:
    """Contour factor of the double-circle bound for ``||h_{w,z}|| = 1``.

    ``form="max"`` gives ``(1/2pi) sum_j |Gamma_j| max_{Gamma_j} |f|`` with
    the max taken on quadrature nodes; ``form="integral"`` gives
    ``(1/2pi) oint |f(z)| |dz|``, which is never larger.
    """
    if contour.kind != "double_circle":
        raise ValidationError("double_circle_factor needs a double_circle contour")
    if form == "integral":
        val, _ = contour_integral(contour, f.abs_complex, mode="arclength", tol=tol)
        return float(val) / (2 * math.pi)
    if form != "max":
        raise ValidationError(f"form must be max or integral, got {form!r}")
    total = 0.0
    for c, rad in contour.meta["disks"]:
        circ = make_circle(c, rad, 1024)
        total += circ.length * float(np.max(f.abs_complex(circ.nodes)))
    return total / (2 * math.pi)


def uniform_poly_bound(f: ScalarFunction, interval, k, b_norm=1.0) -> float:
    """``2 E_k(f) ||b||`` with ``E_k`` estimated by Chebyshev interpolation.

    The interpolant has degree ``k - 1``; its error is measured on ``4k``
    Chebyshev points plus the endpoints. This is a near-best estimate, not a
    certified bound.
    """
    lo, hi = map(float, interval)
    if not hi > lo:
        raise ValidationError(f"need l < u, got [{lo}, {hi}]")
    if k < 1:
        raise ValidationError(f"need k >= 1, got {k}")
    grid = np.concatenate([[lo, hi], 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(
        (2 * np.arange(4 * k) + 1) * math.pi / (8 * k))])
    f.check_domain(grid)
    fv = f(grid)
    if not np.all(np.isfinite(fv)):
        raise DomainError(f"{f.label} is not finite on [{lo}, {hi}]")

    def fmapped(t):
        return f(0.5 * (lo + hi) + 0.5 * (hi - lo) * t)

    coef = C.chebinterpolate(fmapped, k - 1)
    t = (2 * grid - lo - hi) / (hi - lo)
    err = float(np.max(np.abs(fv - C.chebval(t, coef))))
    return 2.0 * err * float(b_norm)


# --------------------------------------------------------------------------
# finite precision


def sqrt_resolvent_interval(z, a, b):
    """``sup_{x in [a,b]} sqrt(x) / |x - z|`` for ``0 <= a <= b``.

    ``x / |x - z|^2`` is stationary only at ``x = |z|``, so the sup is at an
    endpoint or there.
    """
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        va = np.sqrt(a) / np.abs(a - z)
        vb = np.sqrt(b) / np.abs(b - z)
        m = np.abs(z)
        vm = np.where((m >= a) & (m <= b), np.sqrt(m) / np.abs(m - z), 0.0)
    return np.maximum(np.maximum(va, vb), vm)


def resolvent_norm_sets(norm: Norm, w, z, S0: IntervalSet):
    """``sup_{x in S0} g(x) / |x - z|`` where ``||v|| = ||g(A) v||_2`` is the chosen norm."""
    if norm.kind == "two":
        return hz_norm_sets(z, S0, check=False)
    if norm.kind == "A2shift":
        return h_norm_sets(w, z, S0, check=False)
    if S0.lo < 0:
        raise DomainError("A-norm needs S0 inside [0, inf)")
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape)
    for lo, hi in S0.intervals:
        out = np.maximum(out, sqrt_resolvent_interval(z, lo, hi))
    return out


def _norm_extent(norm: Norm, w, S0: IntervalSet):
    if norm.kind == "two":
        return 1.0
    if norm.kind == "A":
        return math.sqrt(S0.hi)
    return _set_extent(S0, w)[0]


def fp_correction(f, contour, w, S0, fact: LanczosFactorization, F, tol=1e-8, check=True,
                  norm=None):
    """Finite-precision correction and its error estimate, ``(value, err)``.

    ``(1/2pi) oint |f(z)| ||h_{w,z}||_{S0} ||b|| ||f_k(w,z)||_2 |dz|`` with
    ``f_k(w,z) = F_k ((T_k - zI)^{-1} - det(h_{w,z}(T_k)) (T_k - wI)^{-1}) e_1``,
    which is the correction in the ``(A - wI)^2``-norm. For another norm
    ``||v|| = ||g(A) v||_2`` the factor ``||h_{w,z}||_{S0}`` becomes
    ``sup_{x in S0} g(x) / |x - z|``.
    """
    S0 = S0 if isinstance(S0, IntervalSet) else IntervalSet(S0)
    norm = Norm("A2shift", w) if norm is None else norm
    F = np.asarray(F, dtype=float)
    k = fact.k
    if F.shape != (fact.n, k):
        raise ValidationError(f"F has shape {F.shape}, expected {(fact.n, k)}")
    theta, S = fact.T.eigh
    u = S[0, :]
    if np.min(np.abs(theta - w)) < 1e-14 * (fact.T.spread + 1.0):
        raise SingularShiftError(f"w={w} is a Ritz value",
                                 ritz_value=float(theta[np.argmin(np.abs(theta - w))]))
    G = F @ S
    if np.linalg.norm(G) == 0:
        return 0.0, 0.0
    H = G.T @ G
    log_tw = np.log((theta - w).astype(complex))
    bn = fact.b_norm
    if check:
        check_contour(f, contour, SpectrumSets.aposteriori(S0, theta))

    def g(z):
        D = np.exp(np.sum(log_tw[None, :] - np.log(theta[None, :] - z[:, None]), axis=1))
        Cm = u[None, :] / (theta[None, :] - z[:, None]) - D[:, None] * (u / (theta - w))[None, :]
        q = np.einsum("ni,ij,nj->n", Cm.conj(), H, Cm).real
        with np.errstate(divide="ignore"):
            parts = [_log_abs_f(f, z),
                     np.log(resolvent_norm_sets(norm, w, z, S0)),
                     np.log(bn * np.sqrt(np.maximum(q, 0.0)))]
        return _combine(parts)

    # Pac-Man tail: sup g/|x - z| <= M0 c / y, ||(T - z)^{-1} e1|| <= c / y,
    # |det h_{w,z}(T)| <= prod |t - w| c / y
    M0 = _norm_extent(norm, w, S0)
    G2 = float(np.linalg.norm(G, 2))
    vw = float(np.linalg.norm(u / (theta - w)))
    base = math.log(M0 * bn * G2)
    terms = [(base, 2.0, 2.0),
             (base + math.log(vw) + float(np.sum(np.log(np.abs(theta - w)))), k + 2.0, k + 2.0)]
    val, err, _ = _integrate(f, contour, g, (terms, [S0.lo, float(theta.min())]), tol)
    return val, err


def _delta_terms(A: SymmetricOperator, f, w, fact, b, norm: Norm):
    """Norms of ``(A - wI)^{-1} delta`` and ``f(A) delta`` with ``delta = b - ||b|| q_1``.

    ``delta`` is the rounding of the stored starting vector; it is zero in
    double precision up to the last bit and of order 1e-8 in single precision.
    """
    delta = np.asarray(b, dtype=float) - fact.b_norm * fact.Q[:, 0]
    lam = A.spectrum.eigenvalues
    d = A.to_eigbasis(delta)
    gw = norm.weights(lam)
    return (float(np.linalg.norm(gw * d / (lam - w))),
            float(np.linalg.norm(gw * np.asarray(f(lam)) * d)))


# --------------------------------------------------------------------------
# setups


@dataclass
class BoundSetup:
    f: ScalarFunction
    contour: Contour
    w: float
    norm: Norm
    S0: IntervalSet
    S_apriori: IntervalSet
    description: str = ""


def _bracket(lam, a):
    left = lam[lam < a]
    right = lam[lam > a]
    if left.size == 0 or right.size == 0:
        raise ValidationError(f"breakpoint a={a} must lie strictly inside the spectrum")
    return float(left.max()), float(right.min())


def snap_breakpoint(lam, frac):
    """Midpoint of the two consecutive eigenvalues bracketing ``frac * lambda_max``."""
    lam = np.sort(np.asarray(lam, dtype=float))
    target = frac * lam[-1]
    idx = int(np.searchsorted(lam, target))
    idx = min(max(idx, 1), lam.size - 1)
    lo, hi = lam[idx - 1], lam[idx]
    while hi == lo and idx < lam.size - 1:
        idx += 1
        lo, hi = lam[idx - 1], lam[idx]
    return 0.5 * (lo + hi)


def default_setup(A: SymmetricOperator, f: ScalarFunction, contour=None, w=None, norm=None,
                  r=None, eps=None, S0=None, R_trunc=None, n_nodes=None) -> BoundSetup:
    """The default contour, shift, norm and sets for ``f`` on ``A``.

    sqrt: Pac-Man centred at 0 with r = 1e-8 spread, R = inf, A-norm.
    log: Pac-Man centred at 0 with r = lambda_min / 100, R = inf, 2-norm.
    x^-q and other analytic f: circle centred at lambda_max through w, with
    w = lambda_min / 2 (x^-q) or lambda_min - spread / 2.
    piecewise f: double circle split at w = a with eps = gap / 100 and
    S0 = I_w(A); step(x-a)/x uses the (A - wI)^2-norm, the rest the 2-norm.
    """
    lam = A.spectrum.eigenvalues
    f.check_domain(lam, "eigenvalue")
    lmin, lmax = float(lam[0]), float(lam[-1])
    spread = lmax - lmin
    name = f.name
    if f.is_piecewise:
        a = f.breakpoint
        w = a if w is None else float(w)
        left, right = _bracket(lam, w)
        S0 = S0 or IntervalSet(((lmin, left), (right, lmax)))
        kind = contour or "double_circle"
        if kind != "double_circle":
            raise ValidationError(f"{f.label} needs a double_circle contour")
        gap = min(w - left, right - w)
        eps = gap / 100 if eps is None else float(eps)
        cont = make_double_circle(w, lmin, lmax, eps, **({"n_nodes": n_nodes} if n_nodes else {}))
        default_norm = Norm("A2shift", w) if name == "step_over_x" else Norm("two")
    elif name in ("sqrt", "log") and (contour in (None, "pacman")):
        w = 0.0 if w is None else float(w)
        if name == "sqrt":
            r = 1e-8 * spread if r is None else float(r)
            default_norm = Norm("A")
        else:
            r = lmin / 100 if r is None else float(r)
            default_norm = Norm("two")
        if lmin <= w + r:
            raise DomainError(f"{f.label} needs the spectrum right of the Pac-Man cut-out; "
                              f"lambda_min = {lmin:.3e}")
        cont = make_pacman(w, r, math.inf, R_trunc=R_trunc or 1e3 * max(lmax, 1.0))
        S0 = S0 or IntervalSet.interval(lmin, lmax)
    else:
        if w is None:
            w = lmin / 2 if name in ("inv", "inv_power") else lmin - max(spread, 1.0) / 2
        w = float(w)
        if contour not in (None, "circle"):
            raise ValidationError(f"unsupported contour {contour!r} for {f.label}")
        cont = make_circle(lmax, lmax - w, **({"n_nodes": n_nodes} if n_nodes else {}))
        S0 = S0 or IntervalSet.interval(lmin, lmax)
        default_norm = Norm("A") if name == "sqrt" else Norm("two")
    if norm is None:
        norm = default_norm
    elif not isinstance(norm, Norm):
        norm = Norm.parse(norm, w)
    if norm.kind == "A2shift" and norm.shift != w:
        norm = Norm("A2shift", w)
    return BoundSetup(f, cont, float(w), norm, S0, S0, description=f"{f.label} on {cont.kind}")


# --------------------------------------------------------------------------
# curves


def _cg_err_bound(lam, w, k, norm: Norm, b_norm):
    lmin, lmax = float(lam[0]), float(lam[-1])
    if not w < lmin:
        raise ValidationError("the CG substitute needs w < lambda_min")
    kappa = (lmax - w) / (lmin - w)
    ends = np.array([lmin, lmax])
    conv = float(np.max(norm.weights(ends) / np.sqrt(ends - w)))
    return conv * cg_apriori_bound(kappa, k) * b_norm / math.sqrt(lmin - w)


def _posterior_contour(contour: Contour, theta):
    """Shrink the gap of a double circle so that every Ritz value is enclosed.

    Returns ``(contour, adapted)``. A Ritz value inside the gap around the
    breakpoint is otherwise outside both disks and the contour representation
    of ``f(T_k)`` fails.
    """
    if contour.kind != "double_circle":
        return contour, False
    m = contour.meta
    d = float(np.min(np.abs(np.asarray(theta) - m["w"])))
    if d > m["eps"] or d == 0.0:
        return contour, False
    n_nodes = sum(contour.panels) * 16
    return make_double_circle(m["w"], m["lambda_min"], m["lambda_max"], d / 2, n_nodes), True


def bound_curve(A: SymmetricOperator, b, f: ScalarFunction, contour: Contour, w, sets_policy,
                norm, k_max, S0=None, S_apriori=None, fact=None, reorth=True, precision="fp64",
                err_source="oracle", fp_term=False, tol=1e-8, jobs=1) -> BoundReport:
    """Evaluate the bound and the true error for ``k = 1 .. k_max``.

    ``sets_policy`` is ``"apriori"`` (every ``S_i`` equals ``S_apriori``,
    default ``S0``) or ``"aposteriori"`` (``S_i`` are the Ritz values of
    ``T_k``). The shifted-system error comes from the exact oracle, or from
    the CG a priori bound with ``err_source="cg"``. With ``fp_term`` the
    finite-precision correction (recurrence residual plus the rounding of
    the starting vector) is added to every row.
    """
    if sets_policy not in ("apriori", "aposteriori"):
        raise ValidationError(f"sets policy must be apriori or aposteriori, got {sets_policy!r}")
    if err_source not in ("oracle", "cg"):
        raise ValidationError(f"err_source must be oracle or cg, got {err_source!r}")
    w = float(w)
    norm = norm if isinstance(norm, Norm) else Norm.parse(norm, w)
    b = np.asarray(b, dtype=float)
    lam = A.spectrum.eigenvalues
    S0 = S0 if S0 is not None else IntervalSet.interval(lam[0], lam[-1])
    S0 = S0 if isinstance(S0, IntervalSet) else IntervalSet(S0)
    S_apriori = S_apriori if S_apriori is not None else S0
    if not np.all(S0.contains(lam, tol=1e-12 * (abs(lam).max() + 1))):
        raise ValidationError("S0 must contain every eigenvalue of A")
    if fact is None:
        fact = lanczos(A, b, k_max, reorth=reorth, precision=precision)
    k_eff = min(int(k_max), fact.k)
    gw = norm.weights(lam)

    fAb_c = A.to_eigbasis(ground_truth(A, b, f))
    b_c = A.to_eigbasis(b)
    W = A.to_eigbasis(fact.Q)
    F = recurrence_residual(A, fact)[0] if fp_term else None
    delta_I = delta_f = 0.0
    if fp_term:
        delta_I, delta_f = _delta_terms(A, f, w, fact, b, norm)
    with np.errstate(divide="ignore"):
        exact_w = b_c / (lam - w)
    # forward error of forming Q_k f(T_k) e_1 ||b|| and of the reference f(A) b
    u = float(np.finfo(fact.Q.dtype).eps) / 2
    gmax = float(np.max(gw))
    gfb = float(np.linalg.norm(gw * fAb_c))

    adapted = []

    def row(k):
        pk = fact.prefix(k)
        Tk = pk.T
        y = fa_coefficients(Tk, f)
        true_err = float(np.linalg.norm(gw * (fAb_c - W[:, :k] @ y * fact.b_norm)))
        if sets_policy == "apriori":
            sets = SpectrumSets.apriori(S0, k, S_apriori)
            cont = contour
        else:
            sets = SpectrumSets.aposteriori(S0, Tk.eigvals)
            cont, moved = _posterior_contour(contour, Tk.eigvals)
            if moved:
                adapted.append(k)
        try:
            yw = galerkin_coefficients(Tk, w).real
            xw = W[:, :k] @ yw * fact.b_norm
            res_w = float(np.linalg.norm(b_c - (lam - w) * xw))
            if err_source == "oracle":
                err_w = float(np.linalg.norm(gw * (exact_w - xw)))
            else:
                err_w = _cg_err_bound(lam, w, k, norm, fact.b_norm)
        except SingularShiftError:
            # T_k - wI is singular: no Galerkin iterate, the bound is vacuous
            try:
                I = integral_term_with_error(f, cont, w, sets, tol)[0]
            except (EnclosureError, SingularShiftError):
                I = math.nan
            return BoundRow(k, true_err, math.inf, math.inf, I, math.inf, None, 0.0)
        I, Ierr = integral_term_with_error(f, cont, w, sets, tol)
        bound = I * err_w
        fpv = None
        qerr = Ierr * err_w
        if fp_term:
            corr, cerr = fp_correction(f, cont, w, S0, pk, F[:, :k], tol, check=False,
                                       norm=norm)
            theta = Tk.eigvals
            fmax = float(np.max(np.abs(f(theta))))
            evalv = 8 * u * k * (gmax * fmax * fact.b_norm + gfb)
            fpv = corr + I * delta_I + delta_f + evalv
            bound += fpv
            qerr += cerr + Ierr * delta_I
        return BoundRow(k, true_err, err_w, res_w, I, bound, fpv, qerr)

    ks = list(range(1, k_eff + 1))
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as ex:
            rows = list(ex.map(row, ks))
    else:
        rows = [row(k) for k in ks]
    meta = {"f": f.label, "contour": contour.kind, "w": w, "norm": norm.label,
            "sets": sets_policy, "precision": fact.precision,
            "reorth": fact.reorthogonalized, "err_source": err_source,
            "terminated_early": fact.terminated_early,
            "contour_adapted": sorted(adapted)}
    return BoundReport(rows, meta)


def quadform_bound_curve(A: SymmetricOperator, b, f: ScalarFunction, contour: Contour, w,
                         sets_policy, k_max, S0=None, S_apriori=None, fact=None, reorth=True,
                         precision="fp64", tol=1e-8, jobs=1, fp_term=False) -> BoundReport:
    """Quadratic-form error ``|b^T f(A) b - ||b||^2 e_1^T f(T_k) e_1|`` and its bound per k.

    With ``fp_term`` the rounding of the two computed quadratic forms,
    ``8 u k (max |f(theta)| ||b||^2 + sum |f(lambda_i)| c_i^2)``, is added to
    the bound.
    """
    if sets_policy not in ("apriori", "aposteriori"):
        raise ValidationError(f"sets policy must be apriori or aposteriori, got {sets_policy!r}")
    w = float(w)
    b = np.asarray(b, dtype=float)
    lam = A.spectrum.eigenvalues
    S0 = S0 if S0 is not None else IntervalSet.interval(lam[0], lam[-1])
    S0 = S0 if isinstance(S0, IntervalSet) else IntervalSet(S0)
    S_apriori = S_apriori if S_apriori is not None else S0
    if fact is None:
        fact = lanczos(A, b, k_max, reorth=reorth, precision=precision)
    k_eff = min(int(k_max), fact.k)
    b_c = A.to_eigbasis(b)
    exact = float(b_c @ (np.asarray(f(lam)) * b_c))
    abs_exact = float(np.sum(np.abs(np.asarray(f(lam))) * b_c ** 2))
    u = float(np.finfo(fact.Q.dtype).eps) / 2
    W = A.to_eigbasis(fact.Q)
    adapted = []

    def row(k):
        pk = fact.prefix(k)
        Tk = pk.T
        theta, S = Tk.eigh
        f.check_domain(theta, "Ritz value")
        approx = fact.b_norm ** 2 * float(np.sum(S[0, :] ** 2 * f(theta)))
        err = abs(exact - approx)
        if sets_policy == "apriori":
            sets = SpectrumSets.apriori(S0, k, S_apriori)
            cont = contour
        else:
            sets = SpectrumSets.aposteriori(S0, theta)
            cont, moved = _posterior_contour(contour, theta)
            if moved:
                adapted.append(k)
        try:
            yw = galerkin_coefficients(Tk, w).real
        except SingularShiftError:
            return QuadformRow(k, err, math.inf, math.nan, math.inf, 0.0)
        xw = W[:, :k] @ yw * fact.b_norm
        res_sq = float(np.linalg.norm(b_c - (lam - w) * xw)) ** 2
        I, Ierr = quadform_integral_with_error(f, cont, w, sets, tol)
        bound = I * res_sq
        if fp_term:
            fmax = float(np.max(np.abs(f(theta))))
            bound += 8 * u * k * (fmax * fact.b_norm ** 2 + abs_exact)
        return QuadformRow(k, err, res_sq, I, bound, Ierr * res_sq)

    ks = list(range(1, k_eff + 1))
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as ex:
            rows = list(ex.map(row, ks))
    else:
        rows = [row(k) for k in ks]
    meta = {"f": f.label, "contour": contour.kind, "w": w, "sets": sets_policy,
            "precision": fact.precision, "reorth": fact.reorthogonalized,
            "fp_term": bool(fp_term), "contour_adapted": sorted(adapted)}
    return BoundReport(rows, meta)


# --------------------------------------------------------------------------
# fixed-node discretisation


def _fixed_sum(contour, integrand, node_count):
    base = sum(contour.panels)
    m = max(1, math.ceil(node_count / (16 * base)))
    seg, t0, t1 = _initial_panels(contour)
    edges = np.linspace(0, 1, m + 1)
    seg = np.repeat(seg, m)
    span = np.repeat(t1 - t0, m)
    start = np.repeat(t0, m)
    frac0 = np.tile(edges[:-1], t0.size)
    frac1 = np.tile(edges[1:], t0.size)
    z, dz = _panel_nodes(contour, seg, start + span * frac0, start + span * frac1)
    g = np.asarray(integrand(z.ravel())).reshape(z.shape)
    return float(np.sum(g * np.abs(dz))) / (2 * math.pi), z.size


def rational_discretization_report(f, contour, w, sets: SpectrumSets, node_count, tol=1e-8):
    """Fixed-node quadrature of the integral term next to the adaptive value.

    Replacing the contour integral by a fixed rule turns the Cauchy integral
    into a rational function of ``A``; the discrete sum below is the integral
    term for that rule. ``refinement_gap`` is the change when the node count
    is doubled and serves as the estimate of the rational-approximation gap.
    """
    check_contour(f, contour, sets)
    g = _main_integrand(f, w, sets)
    s1, n1 = _fixed_sum(contour, g, node_count)
    s2, n2 = _fixed_sum(contour, g, 2 * n1)
    adaptive, aerr = integral_term_with_error(f, contour, w, sets, tol, check=False)
    return {
        "discrete_sum": s1,
        "node_count": n1,
        "discrete_sum_refined": s2,
        "refinement_gap": abs(s2 - s1),
        "adaptive_value": adaptive,
        "adaptive_err": aerr,
        "note": "discrete_sum is the integral term of the rational function defined by the fixed nodes",
    }
