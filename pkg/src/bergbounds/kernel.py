"""Bergman and Szego kernel evaluation with certified series truncation.

Closed forms:

* disc:        K(z,w) = 1 / (pi (1 - z conj(w))^2)
* polydisc:    product of disc kernels
* ball(n):     K(z,w) = n! / (pi^n (1 - <z,w>)^{n+1}),  <z,w> = sum z_j conj(w_j)
* Szego disc:  S(z,w) = 1 / (2 pi (1 - z conj(w)))
* Szego ball:  S(z,w) = (n-1)! / (2 pi^n) (1 - <z,w>)^{-n}

Every complete Reinhardt model also has the monomial-moment series
K(z,w) = sum_alpha z^alpha conj(w)^alpha / c_alpha.  Truncation is certified,
not heuristic: the tail is dominated by a geometric factor times a diagonal
kernel value, which is itself bounded by domain monotonicity against the
largest ball inscribed at the comparison point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import DomainModel, DomainError, aspoint
from .quadrature import pairwise_sum

_N_MAX = 2_000_000


class TailBoundError(ValueError):
    """The certified truncation bound cannot reach tail_tol for these points."""


@dataclass(frozen=True)
class KernelEvaluator:
    """Kernel evaluator for one model domain.

    mode "closed" uses the exact rational formulas (disc, polydisc, ball);
    mode "series" sums the monomial-moment expansion to within tail_tol.
    """

    domain: DomainModel
    mode: str = "closed"
    tail_tol: float = 1e-12

    def __post_init__(self):
        if self.mode not in ("closed", "series"):
            raise ValueError(f"unknown kernel mode {self.mode!r}")
        if self.mode == "closed" and self.domain.kind == "ellipsoid":
            raise DomainError("no closed-form Bergman kernel for the ellipsoid; use mode='series'")
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")


def closed_form_evaluator(d: DomainModel) -> KernelEvaluator:
    if d.kind == "ellipsoid":
        return KernelEvaluator(d, "series")
    return KernelEvaluator(d, "closed")


# ---------------------------------------------------------------------------
# polynomials as {multi-index: coefficient} dictionaries
# ---------------------------------------------------------------------------

def eval_poly(p: dict, pts: np.ndarray) -> np.ndarray:
    """Evaluate a holomorphic polynomial at an (N, n) array of points."""
    pts = np.atleast_2d(pts)
    out = np.zeros(pts.shape[0], dtype=complex)
    for alpha, coeff in p.items():
        term = np.full(pts.shape[0], coeff, dtype=complex)
        for j, a in enumerate(np.atleast_1d(alpha)):
            if a:
                term = term * pts[:, j] ** int(a)
        out += term
    return out


def poly_degree(p: dict) -> int:
    return max((int(np.sum(a)) for a in p), default=0)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def bergman_eval(e: KernelEvaluator, z, w) -> complex:
    """K(z, w).  Both points must be interior."""
    zp = aspoint(e.domain, z)
    wp = aspoint(e.domain, w)
    for p in (zp, wp):
        if not geometry.contains(e.domain, p):
            raise DomainError("kernel evaluation requires interior points")
    return complex(bergman_many(e, zp, wp[None, :])[0])


def kernel_diag(e: KernelEvaluator, w) -> float:
    """K(w, w) as a guaranteed-real positive value.

    In series mode the diagonal is summed as |w^alpha|^2 / c_alpha, all terms
    nonnegative, so positivity is structural.
    """
    wp = aspoint(e.domain, w)
    if not geometry.contains(e.domain, wp):
        raise DomainError("kernel evaluation requires interior points")
    if e.mode == "closed":
        val = _closed_eval(e.domain, wp, wp[None, :])[0]
        return float(val.real)
    t = (np.abs(wp) ** 2).astype(float)
    if e.domain.kind == "ellipsoid":
        return float(_ellipsoid_series(e, t[0], t[1], np.array([1.0]))[0].real)
    return float(_series_eval(e, wp, wp[None, :])[0].real)


def bergman_many(e: KernelEvaluator, z, W: np.ndarray) -> np.ndarray:
    """K(z, w_i) for a fixed z and an (N, n) array of points w_i."""
    zp = aspoint(e.domain, z)
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    if e.mode == "closed":
        return _closed_eval(e.domain, zp, W)
    return _series_eval(e, zp, W)


def szego_eval(d: DomainModel, z, w) -> complex:
    """Szego kernel of the disc or ball (Hardy-space reproducing kernel)."""
    if d.kind not in ("disc", "ball"):
        raise DomainError(f"Szego kernel unsupported for {d.label}")
    zp = aspoint(d, z)
    wp = aspoint(d, w)
    n = d.complex_dim
    u = np.sum(zp * np.conj(wp))
    if n == 1:
        return complex(1.0 / (2 * np.pi * (1.0 - u)))
    return complex(math.factorial(n - 1) / (2 * np.pi ** n) * (1.0 - u) ** (-n))


def szego_diag(d: DomainModel, w) -> float:
    return float(szego_eval(d, w, w).real)


def _closed_eval(d: DomainModel, z: np.ndarray, W: np.ndarray) -> np.ndarray:
    if d.kind == "disc":
        return 1.0 / (np.pi * (1.0 - z[0] * np.conj(W[:, 0])) ** 2)
    if d.kind == "polydisc":
        out = np.ones(W.shape[0], dtype=complex)
        for j in range(d.param):
            out = out / (np.pi * (1.0 - z[j] * np.conj(W[:, j])) ** 2)
        return out
    if d.kind == "ball":
        n = d.param
        u = W.conj() @ z
        return math.factorial(n) / np.pi ** n * (1.0 - u) ** (-(n + 1))
    raise DomainError(f"no closed form for {d.label}")


# ---------------------------------------------------------------------------
# moment series with certified tails
# ---------------------------------------------------------------------------

def _series_eval(e: KernelEvaluator, z: np.ndarray, W: np.ndarray) -> np.ndarray:
    d = e.domain
    t = z[None, :] * np.conj(W)  # (N, n) products z_j conj(w_j)
    if d.kind == "disc":
        return _disc_series(t[:, 0], e.tail_tol)
    if d.kind == "polydisc":
        bound = 1.0 / (np.pi * (1.0 - np.max(np.abs(t), axis=0)) ** 2)
        out = np.ones(W.shape[0], dtype=complex)
        for j in range(d.param):
            other = np.prod(np.delete(bound, j)) if d.param > 1 else 1.0
            tol_j = e.tail_tol / (d.param * max(other, 1.0))
            out = out * _disc_series(t[:, j], tol_j)
        return out
    if d.kind == "ball":
        return _ball_series(np.sum(t, axis=1), d.param, e.tail_tol)
    return _ellipsoid_series(e, t[:, 0], t[:, 1])


def _disc_series(t: np.ndarray, tol: float) -> np.ndarray:
    """sum (k+1) t^k / pi with tail q^M ((M+1) - M q) / (pi (1-q)^2) <= tol."""
    q = float(np.max(np.abs(t)))
    if q >= 1.0 - 1e-14:
        raise TailBoundError("series point too close to the boundary for the tail bound")
    M = 1
    while _disc_tail(q, M) > tol:
        M *= 2
        if M > _N_MAX:
            raise TailBoundError(f"disc series needs more than {_N_MAX} terms for tol={tol}")
    k = np.arange(M + 1)
    powers = t[:, None] ** k[None, :] if len(t) else np.zeros((0, M + 1))
    return pairwise_sum_axis(powers * (k + 1.0) / np.pi, axis=1)


def _disc_tail(q: float, M: int) -> float:
    if q == 0.0:
        return 0.0
    return q ** M * ((M + 1) - M * q) / (np.pi * (1.0 - q) ** 2)


def _ball_series(u: np.ndarray, n: int, tol: float) -> np.ndarray:
    """sum_d binom(n+d, n) u^d * n!/pi^n, geometric tail via the term ratio."""
    q = float(np.max(np.abs(u)))
    if q >= 1.0 - 1e-14:
        raise TailBoundError("series point too close to the boundary for the tail bound")
    rbar = (1.0 + q) / 2.0
    scale = math.factorial(n) / np.pi ** n
    # term ratio binom(n+d+1,n)/binom(n+d,n) * q = (n+d+1)/(d+1) q <= rbar for d >= d0
    d0 = 0
    if q > 0:
        d0 = max(0, math.ceil((q * (n + 1) - rbar) / (rbar - q)) + 1)
    N = max(d0, 4)
    while True:
        log_term = (_log_binom(n + N + 1, n) + (N + 1) * np.log(max(q, 1e-300)))
        tail = scale * np.exp(log_term) / (1.0 - rbar)
        if tail <= tol or q == 0.0:
            break
        N *= 2
        if N > _N_MAX:
            raise TailBoundError(f"ball series needs more than {_N_MAX} terms for tol={tol}")
    ddeg = np.arange(N + 1)
    coeff = np.exp([_log_binom(n + dd, n) for dd in ddeg]) * scale
    powers = u[:, None] ** ddeg[None, :]
    return pairwise_sum_axis(powers * coeff[None, :], axis=1)


def _log_binom(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def _ellipsoid_series(e: KernelEvaluator, t1, t2, weights_only=None) -> np.ndarray:
    """Double moment series for the ellipsoid.

    Tail over {j + k > N} is bounded by gamma^{N+1} K(P, P) where the terms
    are rescaled by per-index factors q_i / gamma corresponding to an interior
    comparison point P, and K(P, P) <= n!/(pi^n delta(P)^{2n}) by monotonicity
    against the inscribed ball at P.
    """
    m = e.domain.param
    t1 = np.atleast_1d(np.asarray(t1, dtype=complex))
    t2 = np.atleast_1d(np.asarray(t2, dtype=complex))
    q1 = float(np.max(np.abs(t1)))
    q2 = float(np.max(np.abs(t2)))
    Q = q1 + q2 ** m
    if Q >= 1.0 - 1e-14:
        raise TailBoundError("series points too close to the boundary for the tail bound")
    if Q < 1e-12:
        N = 8
    else:
        gamma = _shell_factor(q1, q2, m, Q)
        P = (math.sqrt(q1 / gamma), math.sqrt(q2 / gamma))
        delta_P = geometry.boundary_distance(e.domain, np.array(P, dtype=complex))
        M = 2.0 / (np.pi ** 2 * delta_P ** 4)
        N = max(8, math.ceil(math.log(e.tail_tol / M) / math.log(gamma)) - 1)
        if N > _N_MAX:
            raise TailBoundError(f"ellipsoid series needs more than {_N_MAX} terms for tol={e.tail_tol}")
    jmax = N if q1 > 0 else 0
    kmax = N if q2 > 0 else 0
    j = np.arange(jmax + 1)
    k = np.arange(kmax + 1)
    log_inv_c = -_ellipsoid_log_moments(m, jmax, kmax)
    mask = (j[:, None] + k[None, :]) <= N
    out = np.zeros(t1.shape, dtype=complex)
    if max(jmax, kmax) <= 400:
        # linear-space bilinear form, vectorized over evaluation points
        coeff = np.where(mask, np.exp(log_inv_c), 0.0)
        for i0 in range(0, len(t1), 2048):
            sl = slice(i0, min(i0 + 2048, len(t1)))
            p1 = _power_matrix(t1[sl], jmax)
            p2 = _power_matrix(t2[sl], kmax)
            out[sl] = np.einsum("ij,jk,ik->i", p1, coeff, p2)
        return out
    # high truncation degree: term magnitudes stay representable only in log space
    l1 = np.where(t1 == 0, -1e300, np.log(np.maximum(np.abs(t1), 1e-300)))
    l2 = np.where(t2 == 0, -1e300, np.log(np.maximum(np.abs(t2), 1e-300)))
    a1, a2 = np.angle(t1), np.angle(t2)
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        for i in range(len(t1)):
            logmag = j[:, None] * l1[i] + k[None, :] * l2[i] + log_inv_c
            phase = np.exp(1j * (j[:, None] * a1[i] + k[None, :] * a2[i]))
            grid = np.exp(np.where(mask, logmag, -np.inf)) * phase
            out[i] = pairwise_sum(np.where(np.isfinite(grid), grid, 0.0))
    return out


def _power_matrix(t: np.ndarray, pmax: int) -> np.ndarray:
    """Columns 1, t, t^2, ..., t^pmax via cumulative products."""
    out = np.ones((len(t), pmax + 1), dtype=complex)
    if pmax:
        out[:, 1:] = np.cumprod(np.repeat(t[:, None], pmax, axis=1), axis=1)
    return out


def _shell_factor(q1: float, q2: float, m: int, Q: float) -> float:
    """gamma in (0,1) with q1/gamma + (q2/gamma)^m <= (1+Q)/2."""
    target = (1.0 + Q) / 2.0

    def excess(g):
        return q1 / g + (q2 / g) ** m - target

    lo, hi = None, 1.0
    g = 1.0
    for _ in range(200):
        g *= 0.5 if excess(g) < 0 else 1.0
        if excess(g) >= 0:
            lo = g
            break
        if g < 1e-8:
            return 0.5  # both q tiny; any modest shell works
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


_moment_cache: dict = {}


def _ellipsoid_log_moments(m: int, jmax: int, kmax: int) -> np.ndarray:
    key = (m, jmax, kmax)
    cached = _moment_cache.get(m)
    if cached is not None and cached.shape[0] > jmax and cached.shape[1] > kmax:
        return cached[: jmax + 1, : kmax + 1]
    from scipy.special import gammaln
    J = np.arange(max(jmax + 1, 16))[:, None].astype(float)
    K = np.arange(max(kmax + 1, 16))[None, :].astype(float)
    a = (K + 1.0) / m
    table = (np.log(4 * np.pi ** 2) - np.log(2.0 * (J + 1.0)) - np.log(2.0 * m)
             + gammaln(a) + gammaln(J + 2.0) - gammaln(a + J + 2.0))
    _moment_cache[m] = table
    return table[: jmax + 1, : kmax + 1]


def pairwise_sum_axis(a: np.ndarray, axis: int):
    """Pairwise reduction along one axis (deterministic order)."""
    a = np.moveaxis(a, axis, -1)
    while a.shape[-1] > 1:
        half = a.shape[-1] // 2
        head = a[..., : 2 * half]
        rest = head[..., 0::2] + head[..., 1::2]
        if a.shape[-1] % 2:
            rest = np.concatenate([rest, a[..., -1:]], axis=-1)
        a = rest
    return a[..., 0]


# ---------------------------------------------------------------------------
# reproducing-property residual
# ---------------------------------------------------------------------------

def reproduce_check(e: KernelEvaluator, p: dict, z, resolution: int = 32) -> float:
    """| int K(z, w) p(w) dV(w) - p(z) | by volume quadrature.

    For holomorphic polynomials the integral equals p(z) exactly, so the
    residual is pure quadrature/truncation error.
    """
    if poly_degree(p) > 10:
        raise ValueError("reproduce_check expects degree <= 10")
    zp = aspoint(e.domain, z)
    pts, wts = geometry.volume_rule(e.domain, resolution)
    vals = np.zeros(len(pts), dtype=complex)
    chunk = 1 << 16
    for i in range(0, len(pts), chunk):
        sl = slice(i, min(i + chunk, len(pts)))
        vals[sl] = bergman_many(e, zp, pts[sl]) * eval_poly(p, pts[sl])
    integral = pairwise_sum(wts * vals)
    target = complex(eval_poly(p, zp[None, :])[0])
    return abs(integral - target)
