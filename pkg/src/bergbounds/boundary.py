"""Boundary L^2 norms of K(., w), the distance-weighted ratio, and the
related desk checks: the Szego/Bergman comparison, the limit identity
relating delta^{-r}-weighted volume integrals to boundary integrals, and the
infimum constant (e^t + 1) e^{2nt} / (e^t - 1).

Surface quadrature of |K(., w)|^2 near the boundary is done on charts fitted
to w.  Disc and ball charts are pushed through the automorphism exchanging
0 and w: the transformed integrand is a low-degree trigonometric polynomial,
so the rule is exact to rounding at any delta(w).  The ellipsoid has no such
automorphism; there the angular integrals collapse by Reinhardt orthogonality
and only the chart parameter is quadratured, on panels graded toward the
boundary point nearest to w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import geometry, green, kernel
from .geometry import DomainModel, DomainError
from .quadrature import (composite_rule, gauss_legendre, geometric_panels,
                         jacobi_endpoint_rule, mapped, pairwise_sum,
                         periodic_trapezoid)
from .reports import VerificationReport, make_report


def upper_bound_constant(n: int) -> float:
    """C_2^2 = 4 e n + 1 for the squared boundary-norm ratio."""
    return 4.0 * math.e * n + 1.0


@dataclass
class RatioReport:
    """One point of the boundary-norm ratio sweep.

    ratio = delta(w) * ||K(., w)||^2_{L^2(boundary)} / K(w, w); the upper
    bound is 4 e n + 1, the lower-bound constant is domain-dependent and only
    its empirical floor is tracked.
    """

    w: tuple
    delta_w: float
    boundary_norm_sq: float
    diag: float
    ratio: float
    upper_bound: float
    pass_upper: bool
    empirical_floor: float = math.nan
    est_numerical_error: float = 0.0


class ConvergenceError(RuntimeError):
    """Self-convergence estimate exceeded the acceptance threshold."""


# ---------------------------------------------------------------------------
# boundary norm
# ---------------------------------------------------------------------------

def boundary_norm_sq(d: DomainModel, w, resolution: int = 64,
                     with_error: bool = False):
    """int_{boundary} |K(z, w)|^2 dsigma(z) with a self-convergence estimate.

    Computed at ``resolution`` and 2x resolution; the difference must stay
    below 1e-6 relative.
    """
    if not d.has_c2_boundary:
        raise DomainError("polydisc boundary norms are outside the C^2 scope")
    wp = geometry.aspoint(d, w)
    if not geometry.contains(d, wp):
        raise DomainError("w must be interior")
    coarse = _norm_sq_at(d, wp, resolution)
    fine = _norm_sq_at(d, wp, 2 * resolution)
    err = abs(fine - coarse) / abs(fine)
    if err > 1e-6:
        raise ConvergenceError(
            f"boundary norm did not self-converge on {d.label}: rel diff {err:.2e}")
    return (fine, err) if with_error else fine


def _norm_sq_at(d: DomainModel, w: np.ndarray, resolution: int) -> float:
    if d.kind in ("disc", "ball"):
        return _warped_norm_sq(d, w, resolution)
    return _ellipsoid_norm_sq(d, w, resolution)


def _warped_norm_sq(d: DomainModel, w: np.ndarray, resolution: int) -> float:
    """Exact-chart surface quadrature for disc/ball.

    Nodes zeta of the plain atlas map to z = phi_w(zeta); the surface measure
    transforms with ((1-|w|^2)/|1-<zeta,w>|^2)^n.  Together with the closed
    form of K the integrand becomes |1 - <zeta, w>|^2 up to constants, which
    the product trapezoid/Gauss chart integrates exactly.
    """
    atlas = geometry.boundary_atlas(d, resolution)
    n = d.complex_dim
    zeta = atlas.points
    x2 = float(np.sum(np.abs(w) ** 2))
    zw = zeta @ np.conj(w)
    z = green.ball_automorphism(w, zeta)
    jac = ((1.0 - x2) / np.abs(1.0 - zw) ** 2) ** n
    e = kernel.closed_form_evaluator(d)
    vals = np.abs(kernel.bergman_many(e, w, z)) ** 2
    return float(pairwise_sum(atlas.weights * jac * vals))


def _ellipsoid_norm_sq(d: DomainModel, w: np.ndarray, resolution: int) -> float:
    """Reinhardt-reduced surface quadrature for the ellipsoid.

    The angular integrals of |K|^2 vanish off the diagonal, leaving
    (2 pi)^2 int Phi(rho1(tau), rho2(tau)) dens(tau) dtau over the two chart
    regions, with Phi(r1, r2) = sum (r1 |w1|)^{2j} (r2 |w2|)^{2k} / c_{jk}^2.
    Panels grade toward the chart location of the boundary point nearest w.
    """
    m = d.param
    y1, y2 = float(abs(w[0])), float(abs(w[1]))
    delta_w, peak = geometry.nearest_boundary_moduli(d, w)
    r_star, s_star = geometry._ellipsoid_split(m)
    # the profile peaks on the complex-tangential scale sqrt(delta), not delta
    min_scale = max(math.sqrt(delta_w) / 32.0, 1e-7)
    nodes_per_panel = max(resolution // 4, 8)
    total = 0.0
    regions = (
        ("A", s_star, peak[1],
         lambda s: (np.sqrt(1.0 - s ** (2 * m)), s),
         lambda s: _dens_a(s, m)),
        ("B", r_star, peak[0],
         lambda r: (r, (1.0 - r ** 2) ** (1.0 / (2 * m))),
         lambda r: _dens_b(r, m)),
    )
    for _, hi, peak_par, coords, dens in regions:
        p = min(max(peak_par, 0.0), hi)
        panels = []
        if p > 0:
            panels += geometric_panels(0.0, p, p, min_scale)
        if p < hi:
            panels += geometric_panels(p, hi, p, min_scale)
        rule = composite_rule(panels, nodes_per_panel)
        r1, r2 = coords(rule.nodes)
        phi = _ellipsoid_profile(m, r1 * y1, r2 * y2, 1e-10)
        total += pairwise_sum(rule.weights * phi * dens(rule.nodes))
    return float((2.0 * np.pi) ** 2 * total)


def _dens_a(s, m):
    r = np.sqrt(1.0 - s ** (2 * m))
    rp = -m * s ** (2 * m - 1) / r
    return r * s * np.sqrt(1.0 + rp ** 2)


def _dens_b(r, m):
    s = (1.0 - r ** 2) ** (1.0 / (2 * m))
    sp = -(r / m) * (1.0 - r ** 2) ** (1.0 / (2 * m) - 1.0)
    return r * s * np.sqrt(1.0 + sp ** 2)


_PROFILE_CAP_2INDEX = 3000


def _ellipsoid_profile(m: int, v1: np.ndarray, v2: np.ndarray, tol: float) -> np.ndarray:
    """Phi(v1, v2) = sum_{j,k} v1^{2j} v2^{2k} / c_{jk}^2 with certified tails."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if np.max(v1) == 0.0:
        return _profile_1index(m, v2, tol, axis="k")
    if np.max(v2) == 0.0:
        return _profile_1index(m, v1, tol, axis="j")
    return _profile_2index(m, v1, v2, tol)


def _profile_1index(m: int, v: np.ndarray, tol: float, axis: str) -> np.ndarray:
    """Single-index profile with a ratio-test geometric tail.

    The term ratio t_{i+1}/t_i = v^2 (c_i / c_{i+1})^2 decreases to v^2, so
    once it drops below 1 the remainder is dominated by a geometric series.
    Truncation degree is chosen per node chunk, so only nodes in the peak
    panels pay for the long series.
    """
    if float(np.max(v)) >= 1.0:
        raise kernel.TailBoundError("ellipsoid profile requires v < 1")
    order = np.argsort(v)
    out = np.empty_like(v)
    lv = np.log(np.maximum(v, 1e-300))
    chunk = 64
    with np.errstate(under="ignore"):
        for i0 in range(0, len(v), chunk):
            sel = order[i0: i0 + chunk]
            vmax = float(np.max(v[sel]))
            if vmax == 0.0:
                out[sel] = math.exp(-2.0 * _axis_log_moments(m, 1, axis)[0])
                continue
            n_terms = _truncation_1index(m, vmax, tol, axis)
            logc = _axis_log_moments(m, n_terms, axis)
            idx = np.arange(n_terms, dtype=float)
            mat = np.exp(2.0 * lv[sel][:, None] * idx[None, :] - 2.0 * logc[None, :])
            out[sel] = mat.sum(axis=1)  # nonnegative terms; numpy sums pairwise
    return out


def _truncation_1index(m: int, vmax: float, tol: float, axis: str) -> int:
    lvmax = math.log(vmax)
    n_terms = 64
    while True:
        logc = _axis_log_moments(m, n_terms, axis)
        i = n_terms - 1
        log_t = 2 * i * lvmax - 2 * logc[i]
        ratio = vmax ** 2 * math.exp(2 * (logc[i - 1] - logc[i]))
        if ratio < 1.0 - 1e-9 and log_t - math.log(1 - ratio) < math.log(tol) - 2 * logc[0]:
            return n_terms
        n_terms *= 2
        if n_terms > 1_500_000:
            raise kernel.TailBoundError("ellipsoid profile truncation out of range")


_axis_moment_cache: dict = {}


def _axis_log_moments(m: int, count: int, axis: str) -> np.ndarray:
    """log c_{j0} (axis 'j') or log c_{0k} (axis 'k'), cached per axis."""
    from scipy.special import gammaln
    key = (m, axis)
    cached = _axis_moment_cache.get(key)
    if cached is None or len(cached) < count:
        size = max(count, 1024)
        if cached is not None:
            size = max(size, 2 * len(cached))
        idx = np.arange(size, dtype=float)
        if axis == "k":
            a = (idx + 1.0) / m
            table = (np.log(4 * np.pi ** 2) - np.log(2.0) - np.log(2.0 * m)
                     + gammaln(a) + gammaln(2.0) - gammaln(a + 2.0))
        else:
            a = 1.0 / m
            table = (np.log(4 * np.pi ** 2) - np.log(2.0 * (idx + 1.0)) - np.log(2.0 * m)
                     + gammaln(a) + gammaln(idx + 2.0) - gammaln(a + idx + 2.0))
        _axis_moment_cache[key] = table
        cached = table
    return cached[:count]


def _profile_2index(m: int, v1: np.ndarray, v2: np.ndarray, tol: float) -> np.ndarray:
    """Generic profile via a shell certificate against the diagonal kernel.

    sum over {j+k > N} of the squared terms is at most (gamma^2)^{N+1} times
    K(P,P)^2 for the interior comparison point P built from (v^2/gamma^2),
    using sum of squares <= (sum)^2 and ball monotonicity for K(P,P).
    """
    q1, q2 = float(np.max(v1)) ** 2, float(np.max(v2)) ** 2
    Q = q1 + q2 ** m
    if Q >= 1.0 - 1e-14:
        raise kernel.TailBoundError("ellipsoid profile points too close to the boundary")
    g2 = kernel._shell_factor(q1, q2, m, Q)
    P = np.array([math.sqrt(q1 / g2), math.sqrt(q2 / g2)], dtype=complex)
    delta_P = geometry.boundary_distance(geometry.ellipsoid(m), P)
    log_m = 2.0 * math.log(2.0 / (np.pi ** 2 * delta_P ** 4))
    t00 = -2.0 * float(kernel._ellipsoid_log_moments(m, 0, 0)[0, 0])
    n_cut = max(8, math.ceil((math.log(tol) + t00 - log_m) / math.log(g2)) - 1)
    if n_cut > _PROFILE_CAP_2INDEX:
        raise kernel.TailBoundError(
            "generic-direction ellipsoid boundary norms support moderate delta only; "
            "use an axis ray for near-boundary sweeps")
    logc = kernel._ellipsoid_log_moments(m, n_cut, n_cut)
    j = np.arange(n_cut + 1)
    mask = (j[:, None] + j[None, :]) <= n_cut
    out = np.empty_like(v1)
    l1 = np.log(np.maximum(v1, 1e-300))
    l2 = np.log(np.maximum(v2, 1e-300))
    with np.errstate(under="ignore"):
        for i in range(len(v1)):
            logmag = 2.0 * j[:, None] * l1[i] + 2.0 * j[None, :] * l2[i] - 2.0 * logc
            out[i] = pairwise_sum(np.where(mask, np.exp(logmag), 0.0))
    return out


# ---------------------------------------------------------------------------
# ratio and sweeps
# ---------------------------------------------------------------------------

def kernel_diag_value(d: DomainModel, w) -> float:
    if d.kind == "ellipsoid":
        e = kernel.KernelEvaluator(d, "series", 1e-12)
    else:
        e = kernel.closed_form_evaluator(d)
    return kernel.kernel_diag(e, w)


def ratio_R(d: DomainModel, w, resolution: int = 64) -> RatioReport:
    """The distance-weighted boundary-norm ratio at one interior point."""
    wp = geometry.aspoint(d, w)
    delta_w = geometry.boundary_distance(d, wp)
    if d.kind == "ellipsoid" and delta_w < 1e-4 * (1.0 - 1e-6):
        raise DomainError("ellipsoid ratio supported for delta(w) >= 1e-4 "
                          "(certified series tails degenerate closer to the boundary)")
    norm_sq, err = boundary_norm_sq(d, wp, resolution, with_error=True)
    diag = kernel_diag_value(d, wp)
    ratio = delta_w * norm_sq / diag
    bound = upper_bound_constant(d.complex_dim)
    return RatioReport(tuple(wp.tolist()), delta_w, norm_sq, diag, ratio, bound,
                       bool(ratio <= bound + 1e-9),
                       est_numerical_error=err)


def sweep_point(d: DomainModel, delta: float, direction=None) -> np.ndarray:
    """Interior point at boundary distance delta along a model ray."""
    n = d.complex_dim
    if d.kind in ("disc", "ball"):
        u = np.zeros(n, dtype=complex)
        u[0] = 1.0
        if direction is not None:
            u = geometry.aspoint(d, direction)
            u = u / np.linalg.norm(u)
        return (1.0 - delta) * u
    if d.kind == "ellipsoid":
        if direction is None or tuple(np.abs(np.asarray(direction))) == (0.0, 1.0):
            return np.array([0.0, 1.0 - delta], dtype=complex)
        if tuple(np.abs(np.asarray(direction))) == (1.0, 0.0):
            return np.array([1.0 - delta, 0.0], dtype=complex)
        # generic ray toward a boundary point p: solve the scale for delta
        p = geometry.aspoint(d, direction)
        from scipy.optimize import brentq
        s = brentq(lambda t: geometry.boundary_distance(d, t * p) - delta,
                   1e-9, 1.0 - 1e-12, xtol=1e-14)
        return s * p
    raise DomainError(f"no sweep ray for {d.label}")


def theorem1_sweep(d: DomainModel, deltas, resolution: int = 64,
                   direction=None) -> list[RatioReport]:
    """Ratio reports along a ray w -> boundary, with the running floor."""
    reports = []
    floor = math.inf
    for delta in deltas:
        rep = ratio_R(d, sweep_point(d, float(delta), direction), resolution)
        floor = min(floor, rep.ratio)
        rep.empirical_floor = floor
        reports.append(rep)
    return reports


def szego_bergman_ratio(d: DomainModel, w) -> VerificationReport:
    """S(w,w)/K(w,w) >= delta(w)/(4 e n + 1), all quantities closed form."""
    if d.kind not in ("disc", "ball"):
        raise DomainError("Szego comparison supports disc and ball only")
    wp = geometry.aspoint(d, w)
    e = kernel.closed_form_evaluator(d)
    lhs = kernel.szego_diag(d, wp) / kernel.kernel_diag(e, wp)
    rhs = geometry.boundary_distance(d, wp) / upper_bound_constant(d.complex_dim)
    return make_report("szego.ratio", d.label, {"w": green._pt_str(wp)},
                       lhs, rhs, lhs - rhs, 1e-12,
                       est_numerical_error=1e-15 * (1.0 + lhs))


# ---------------------------------------------------------------------------
# the limit identity for boundary integrals
# ---------------------------------------------------------------------------

def weighted_volume_integral(w: complex, r: float, n_rad: int = 120,
                             n_ang: int = 16) -> float:
    """(1-r) int_D |K(z, w)|^2 (1-|z|)^{-r} dV(z) on the disc.

    Radial Gauss-Jacobi absorbs the delta^{-r} endpoint weight; per radius
    the angular integral uses the circle chart warped at x rho, where the
    transformed integrand is a degree-1 trigonometric polynomial.
    """
    x = abs(complex(w))
    rule = jacobi_endpoint_rule(n_rad, -r, 0.0, 1.0, singular_at="hi")
    tau = periodic_trapezoid(n_ang)
    zeta = np.exp(1j * tau.nodes)
    acc = 0.0
    for rho, wt in zip(rule.nodes, rule.weights):
        s = x * rho
        zb = (zeta + s) / (1.0 + s * zeta)
        jac = (1.0 - s * s) / np.abs(1.0 + s * zeta) ** 2
        kv = 1.0 / (np.pi * (1.0 - x * rho * np.conj(zb)) ** 2)
        ang = pairwise_sum(tau.weights * jac * np.abs(kv) ** 2)
        acc += wt * ang * rho
    return float((1.0 - r) * acc)


def hardy_identity_check(w, r_schedule=(0.9, 0.99, 0.999, 0.9999),
                         resolution: int = 64) -> VerificationReport:
    """Richardson limit of the weighted volume integrals vs the boundary norm.

    The weighted integrals approach the boundary integral linearly in (1-r);
    Neville extrapolation over the schedule must land within 1e-4 relative.
    """
    d = geometry.unit_disc()
    wp = geometry.aspoint(d, w)
    eps = [1.0 - r for r in r_schedule]
    vals = [weighted_volume_integral(complex(wp[0]), r) for r in r_schedule]
    # Neville extrapolation to eps = 0
    tab = list(vals)
    for level in range(1, len(vals)):
        tab = _neville_step(tab, eps, level)
    extr = tab[0]
    norm_sq = boundary_norm_sq(d, wp, resolution)
    rel = abs(extr - norm_sq) / norm_sq
    inputs = {"w": green._pt_str(wp),
              "rs": ";".join(format(r, "g") for r in r_schedule),
              "values": ";".join(format(v, ".12g") for v in vals)}
    return make_report("lemma4.1", d.label, inputs, extr, norm_sq,
                       1e-4 - rel, 0.0, est_numerical_error=rel)


def _neville_step(tab, eps, level):
    out = []
    for i in range(len(tab) - 1):
        e0, e1 = eps[i], eps[i + level]
        out.append(tab[i + 1] + (tab[i + 1] - tab[i]) * e1 / (e0 - e1))
    return out


# ---------------------------------------------------------------------------
# the infimum constant
# ---------------------------------------------------------------------------

def infimum_constant(n: int) -> tuple[float, float]:
    """Minimize g(t) = (e^t + 1) e^{2nt} / (e^t - 1) over t > 0.

    g is strictly log-convex, so the bounded search is safe; the stationary
    point satisfies e^{t*} = (1 + sqrt(1 + 4 n^2)) / (2n) and is used as a
    cross-check.  The minimum lies strictly below 4 e n + 1.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")

    def g(t):
        return (math.exp(t) + 1.0) * math.exp(2 * n * t) / (math.exp(t) - 1.0)

    res = minimize_scalar(g, bounds=(1e-10, 10.0), method="bounded",
                          options={"xatol": 1e-14})
    u_star = (1.0 + math.sqrt(1.0 + 4.0 * n * n)) / (2.0 * n)
    t_closed = math.log(u_star)
    if abs(res.x - t_closed) > 1e-7 or abs(g(t_closed) - res.fun) > 1e-9 * res.fun:
        raise RuntimeError("1-D search disagrees with the stationary point")
    return float(t_closed), float(g(t_closed))
