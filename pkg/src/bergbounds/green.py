"""Pluricomplex Green functions on disc and ball, and sublevel-set checks.

The Green function with pole w is the upper envelope of negative psh
functions with a logarithmic pole at w.  On the models here it is exact:

* disc:   G(z, w) = log |(z - w) / (1 - conj(w) z)|
* ball:   G(z, w) = log ||phi_w(z)|| with phi_w the involutive automorphism
          exchanging 0 and w.

Sublevel sets {G(., w) < -t} are automorphism images of the ball of radius
e^{-t}; the checks below verify the two-sided distance localization

    (e^t - 1)/(e^t + 1) delta(w) <= delta(.) <= (e^t + 1)/(e^t - 1) delta(w)

on those sets, the concentration lower bound

    int_{G < -t} |f|^2 dV >= e^{-2nt} |f(w)|^2 / K(w, w),

and the sublevel-kernel comparison K(w,w) >= e^{-2nt} K_sub(w,w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import geometry, kernel
from .geometry import DomainModel, DomainError, aspoint
from .quadrature import gauss_legendre, mapped, pairwise_sum, periodic_trapezoid
from .reports import VerificationReport, make_report


@dataclass(frozen=True)
class GreenEvaluator:
    domain: DomainModel
    pole: np.ndarray

    def __post_init__(self):
        if self.domain.kind not in ("disc", "ball"):
            raise DomainError("Green evaluator supports disc and ball only")
        w = aspoint(self.domain, self.pole)
        if not geometry.contains(self.domain, w):
            raise DomainError("pole must be interior")
        object.__setattr__(self, "pole", w)


@dataclass(frozen=True)
class SublevelReport:
    """Distance extremes over {G(., w) < -t} against the convex annulus bounds."""
    t: float
    delta_min: float
    delta_max: float
    annulus_lo: float
    annulus_hi: float
    included: bool


def ball_automorphism(w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """phi_w(z): the ball automorphism with phi_w(0) = w, phi_w(w) = 0.

    Acts on an (N, n) array of points.
    """
    w = np.atleast_1d(w)
    z = np.atleast_2d(z)
    x2 = float(np.sum(np.abs(w) ** 2))
    if x2 == 0.0:
        return -z
    s = math.sqrt(1.0 - x2)
    zw = z @ np.conj(w)               # <z, w>
    proj = (zw / x2)[:, None] * w[None, :]
    orth = z - proj
    return (w[None, :] - proj - s * orth) / (1.0 - zw)[:, None]


def green_eval(g: GreenEvaluator, z) -> float:
    """Exact closed-form value of G(z, w); negative on the domain, pole at w."""
    zp = aspoint(g.domain, z)
    if not geometry.contains(g.domain, zp):
        raise DomainError("Green function evaluated at a non-interior point")
    if np.array_equal(zp, g.pole):
        raise DomainError("z coincides with the pole")
    if g.domain.complex_dim == 1:
        w = g.pole[0]
        val = abs((zp[0] - w) / (1.0 - np.conj(w) * zp[0]))
    else:
        val = float(np.linalg.norm(ball_automorphism(g.pole, zp[None, :])[0]))
    if val == 0.0:
        raise DomainError("z coincides with the pole")
    return float(np.log(val))


# ---------------------------------------------------------------------------
# sublevel geometry
# ---------------------------------------------------------------------------

def disc_sublevel_disc(w: complex, t: float) -> tuple[complex, float]:
    """Euclidean center and radius of {G(., w) < -t} in the disc.

    The set is the Moebius image of {|zeta| < e^{-t}} under zeta ->
    (zeta + w)/(1 + conj(w) zeta).
    """
    rho = math.exp(-t)
    x2 = abs(w) ** 2
    denom = 1.0 - rho ** 2 * x2
    center = w * (1.0 - rho ** 2) / denom
    radius = rho * (1.0 - x2) / denom
    return complex(center), float(radius)


def sublevel_extremes(g: GreenEvaluator, t: float) -> SublevelReport:
    """Exact (disc) or scan-refined (ball) extremes of delta over {G < -t}."""
    if t <= 0:
        raise ValueError("t must be positive")
    x = float(np.linalg.norm(g.pole))
    rho = math.exp(-t)
    if g.domain.complex_dim == 1:
        center, radius = disc_sublevel_disc(complex(g.pole[0]), t)
        rmax = abs(center) + radius
        rmin = max(abs(center) - radius, 0.0)
    else:
        rmax = math.sqrt(_ball_extreme(x, rho, want_max=True))
        rmin = 0.0 if x < rho else math.sqrt(_ball_extreme(x, rho, want_max=False))
    delta_min = 1.0 - rmax
    delta_max = 1.0 - rmin
    delta_w = 1.0 - x
    lo = (math.exp(t) - 1.0) / (math.exp(t) + 1.0) * delta_w
    hi = (math.exp(t) + 1.0) / (math.exp(t) - 1.0) * delta_w
    slack = 1e-12 * (1.0 + delta_w)
    included = (delta_min >= lo - slack) and (delta_max <= hi + slack)
    return SublevelReport(t, delta_min, delta_max, lo, hi, included)


def _ball_extreme(x: float, rho: float, want_max: bool) -> float:
    """Extreme of ||phi_w(zeta)||^2 over zeta in rho S^{2n-1}, w = (x, 0,..).

    With a = Re zeta_1, b = Im zeta_1, the square norm is
    (A + x^2 b^2)/(B + x^2 b^2) with A, B independent of b, so it is monotone
    in b^2 at fixed a: extremes lie on b = 0 or on |zeta_1| = rho.  Both
    candidates are 1-D scans refined by bounded minimization.
    """
    s2 = 1.0 - x ** 2

    def on_segment(a):   # b = 0, |zeta'|^2 = rho^2 - a^2
        return ((x - a) ** 2 + s2 * (rho ** 2 - a ** 2)) / (1.0 - x * a) ** 2

    def on_circle(a):    # |zeta_1| = rho, zeta' = 0
        return ((x - a) ** 2 + (rho ** 2 - a ** 2)) / ((1.0 - x * a) ** 2 + x ** 2 * (rho ** 2 - a ** 2))

    best = None
    sign = -1.0 if want_max else 1.0
    for fn in (on_segment, on_circle):
        grid = np.linspace(-rho, rho, 4097)
        vals = fn(grid)
        i = int(np.argmin(sign * vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(lambda a: sign * fn(a), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-13})
        for v in (sign * res.fun, vals[i], fn(-rho), fn(rho)):
            if best is None or (v > best if want_max else v < best):
                best = v
    return float(best)


# ---------------------------------------------------------------------------
# integral checks
# ---------------------------------------------------------------------------

def herbort_check(g: GreenEvaluator, t: float, f: dict,
                  resolution: int = 24) -> VerificationReport:
    """Mass concentration on the sublevel set against e^{-2nt} |f(w)|^2/K(w,w)."""
    if kernel.poly_degree(f) > 10:
        raise ValueError("herbort_check expects polynomial degree <= 10")
    n = g.domain.complex_dim
    lhs = _sublevel_square_mass(g, t, f, resolution)
    e = kernel.closed_form_evaluator(g.domain)
    fw = abs(kernel.eval_poly(f, g.pole[None, :])[0]) ** 2
    rhs = math.exp(-2 * n * t) * fw / kernel.kernel_diag(e, g.pole)
    margin = lhs - rhs
    tol = 1e-9 * (1.0 + abs(rhs))
    return make_report("prop3.1.herbo1", g.domain.label,
                       {"w": _pt_str(g.pole), "t": t, "deg": kernel.poly_degree(f)},
                       lhs, rhs, margin, tol,
                       est_numerical_error=1e-12 * (1.0 + abs(lhs)))


def _sublevel_square_mass(g: GreenEvaluator, t: float, f: dict, res: int) -> float:
    """int_{G < -t} |f|^2 dV via a chart fitted to the sublevel body."""
    rho = math.exp(-t)
    if g.domain.complex_dim == 1:
        center, radius = disc_sublevel_disc(complex(g.pole[0]), t)
        rad = mapped(gauss_legendre(max(res, 12)), 0.0, radius)
        ang = periodic_trapezoid(max(4 * res, 48))
        R, T = np.meshgrid(rad.nodes, ang.nodes, indexing="ij")
        pts = (center + R * np.exp(1j * T)).reshape(-1, 1)
        wts = (np.multiply.outer(rad.weights, ang.weights) * R).ravel()
        vals = np.abs(kernel.eval_poly(f, pts)) ** 2
        return float(pairwise_sum(wts * vals))
    # ball: pull back through phi_w; |det_R J phi_w| = (1-|w|^2)^{n+1}/|1-<z,w>|^{2(n+1)}
    n = g.domain.complex_dim
    w = g.pole
    if n == 2 and np.all(w[1:] == 0):
        # rotate the first coordinate so the pole is real: z1 -> u z1 sends
        # f to the polynomial with coefficients a_{jk} u^j
        u = w[0] / abs(w[0]) if w[0] != 0 else 1.0
        f_rot = {a: c * u ** a[0] for a, c in f.items()}
        return _ball2_axis_square_mass(float(abs(w[0])), rho, f_rot, res)
    x2 = float(np.sum(np.abs(w) ** 2))
    pts, wts = _ball_volume_points(n, rho, res)
    zw = pts @ np.conj(w)
    jac = (1.0 - x2) ** (n + 1) / np.abs(1.0 - zw) ** (2 * (n + 1))
    z = ball_automorphism(w, pts)
    vals = np.abs(kernel.eval_poly(f, z)) ** 2
    return float(pairwise_sum(wts * jac * vals))


def _ball2_axis_square_mass(x: float, rho: float, f: dict, res: int) -> float:
    """int_{phi_w(rho B)} |f|^2 dV for w = (x, 0) via exact fibre integration.

    Writing zeta = (zeta1, zeta2), the angular and radial integrals in zeta2
    reduce in closed form: only like powers of zeta2 survive, and
    int_0^R r^{2k+1} dr = R^{2k+2}/(2k+2) with R^2 = rho^2 - |zeta1|^2.
    The remaining 2-D zeta1 integral is a smooth polar rule.
    """
    s = math.sqrt(1.0 - x * x)
    kmax = max((a[1] for a in f), default=0)
    jmax = max((a[0] for a in f), default=0)
    rad = mapped(gauss_legendre(max(res, 8 + jmax)), 0.0, rho)
    ang = periodic_trapezoid(max(4 * res, 16 + 4 * (jmax + kmax)))
    R, T = np.meshgrid(rad.nodes, ang.nodes, indexing="ij")
    W = np.multiply.outer(rad.weights, ang.weights) * R
    z1 = (R * np.exp(1j * T)).ravel()
    W = W.ravel()
    den = 1.0 - x * z1
    phi1 = (x - z1) / den
    jac = (1.0 - x * x) ** 3 / np.abs(den) ** 6
    cap = rho ** 2 - np.abs(z1) ** 2
    total = np.zeros_like(W)
    for k in range(kmax + 1):
        hk = np.zeros_like(z1)
        for (j, kk), c in f.items():
            if kk == k:
                hk = hk + c * phi1 ** j
        hk = hk * (-s) ** k / den ** k
        total = total + np.abs(hk) ** 2 * cap ** (k + 1) / (2 * k + 2)
    return float(pairwise_sum(W * jac * total * 2.0 * np.pi))


def _ball_volume_points(n: int, radius: float, res: int) -> tuple[np.ndarray, np.ndarray]:
    if n != 2:
        raise DomainError("sublevel integration implemented for ball(2)")
    pts, wts = geometry.volume_rule(geometry.ball(2), res)
    return pts * radius, wts * radius ** 4


def sublevel_kernel_check(g: GreenEvaluator, t: float) -> VerificationReport:
    """K(w,w) against e^{-2nt} K_sub(w,w); disc only, both sides closed form.

    The sublevel set is a Euclidean disc D(c, R) whose kernel on the diagonal
    is R^2 / (pi (R^2 - |w - c|^2)^2).
    """
    if g.domain.complex_dim != 1:
        raise DomainError("sublevel_kernel_check supports the disc only")
    w = complex(g.pole[0])
    center, radius = disc_sublevel_disc(w, t)
    k_sub = radius ** 2 / (np.pi * (radius ** 2 - abs(w - center) ** 2) ** 2)
    e = kernel.closed_form_evaluator(g.domain)
    lhs = kernel.kernel_diag(e, w)
    rhs = math.exp(-2 * t) * k_sub
    return make_report("prop3.1.herbo2", g.domain.label,
                       {"w": _pt_str(g.pole), "t": t},
                       lhs, rhs, lhs - rhs, 1e-12 * (1.0 + rhs),
                       est_numerical_error=1e-15 * (1.0 + lhs))


def log_inclusion_check(d: DomainModel, delta_w: float, t: float = 1.0,
                        cap: float = 3.0) -> VerificationReport:
    """Log-corrected inclusion of {G < -t} for poles close to the boundary.

    Checks {G < -t} inside { delta(w)|log delta(w)|^{-1}/C <= delta(.) <=
    C delta(w) |log delta(w)|^{n} } and reports the smallest workable C; also
    verifies the convex annulus bound already implies the inclusion for that C.
    The pass criterion compares the empirical C against ``cap``.
    """
    w = np.zeros(d.complex_dim, dtype=complex)
    w[0] = 1.0 - delta_w
    g = GreenEvaluator(d, w)
    rep = sublevel_extremes(g, t)
    n = d.complex_dim
    logfac = abs(math.log(delta_w))
    c_lo = (delta_w / logfac) / rep.delta_min if rep.delta_min > 0 else math.inf
    c_hi = rep.delta_max / (delta_w * logfac ** n)
    c_req = max(c_lo, c_hi, 1.0)
    # the convex annulus bounds imply the inclusion whenever they are tighter
    annulus_implies = (rep.annulus_lo >= (delta_w / logfac) / c_req - 1e-15 and
                       rep.annulus_hi <= c_req * delta_w * logfac ** n + 1e-15)
    return make_report("prop3.2.bneww2", d.label,
                       {"delta_w": delta_w, "t": t,
                        "c_required": c_req,
                        "annulus_implies": annulus_implies},
                       c_req, cap, cap - c_req, 0.0,
                       est_numerical_error=1e-12)


def _pt_str(p: np.ndarray) -> str:
    return ";".join(format(v, ".12g") for v in np.ravel(p).astype(complex).view(float))
