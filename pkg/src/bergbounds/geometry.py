"""Model domains: membership, boundary distance, boundary charts, moments.

Four complete Reinhardt models are supported:

* ``disc``        -- the unit disc in C,
* ``polydisc(n)`` -- the unit polydisc in C^n (Lipschitz boundary: volume and
  kernel work only, no surface quadrature),
* ``ball(n)``     -- the Euclidean unit ball in C^n,
* ``ellipsoid(m)``-- { (z1, z2) : |z1|^2 + |z2|^{2m} < 1 }.

All are bounded, convex, contain the origin, and are invariant under
independent rotations of each coordinate, so monomials are orthogonal in
A^2 and volume moments have Beta/Gamma closed forms.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln

from .quadrature import (QuadratureError, composite_rule, gauss_legendre,
                         geometric_panels, mapped, pairwise_sum,
                         periodic_trapezoid)


class DomainError(ValueError):
    """Point/domain mismatch or an unsupported operation for the model."""


@dataclass(frozen=True)
class DomainModel:
    """Descriptor of a model domain.

    ``param`` is n for polydisc/ball and the exponent m for the ellipsoid;
    it is 1 for the disc.
    """

    kind: str
    param: int
    complex_dim: int

    def __post_init__(self):
        if self.kind not in ("disc", "polydisc", "ball", "ellipsoid"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.param < 1:
            raise DomainError("domain parameter must be a positive integer")

    @property
    def label(self) -> str:
        if self.kind == "disc":
            return "disc"
        return f"{self.kind}{self.param}"

    @property
    def has_c2_boundary(self) -> bool:
        return self.kind != "polydisc"


def unit_disc() -> DomainModel:
    return DomainModel("disc", 1, 1)


def polydisc(n: int) -> DomainModel:
    return DomainModel("polydisc", n, n)


def ball(n: int) -> DomainModel:
    return DomainModel("ball", n, n)


def ellipsoid(m: int) -> DomainModel:
    return DomainModel("ellipsoid", m, 2)


def domain_from_label(label: str) -> DomainModel:
    """Parse 'disc', 'ball2', 'polydisc3', 'ellipsoid2', ..."""
    if label == "disc":
        return unit_disc()
    for kind, mk in (("polydisc", polydisc), ("ball", ball), ("ellipsoid", ellipsoid)):
        if label.startswith(kind):
            try:
                return mk(int(label[len(kind):]))
            except ValueError:
                break
    raise DomainError(f"cannot parse domain label {label!r}")


def aspoint(d: DomainModel, z) -> np.ndarray:
    """Coerce z to a complex coordinate vector of the domain's dimension."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if arr.shape != (d.complex_dim,):
        raise DomainError(
            f"point has {arr.shape} coordinates, expected ({d.complex_dim},) for {d.label}")
    return arr


def defining_value(d: DomainModel, z) -> float:
    """Value of the defining function; negative inside, zero on the boundary."""
    p = aspoint(d, z)
    if d.kind in ("disc", "ball"):
        return float(np.sum(np.abs(p) ** 2) - 1.0)
    if d.kind == "polydisc":
        return float(np.max(np.abs(p)) - 1.0)
    m = d.param
    return float(abs(p[0]) ** 2 + abs(p[1]) ** (2 * m) - 1.0)


def contains(d: DomainModel, z) -> bool:
    """True iff the defining inequality holds strictly."""
    return defining_value(d, z) < 0.0


def diameter(d: DomainModel) -> float:
    if d.kind in ("disc", "ball", "ellipsoid"):
        return 2.0
    return 2.0 * math.sqrt(d.param)


def boundary_distance(d: DomainModel, z) -> float:
    """Euclidean distance from an interior point to the boundary.

    Closed form for disc/ball (1 - |z|) and polydisc (min_j 1 - |z_j|); the
    ellipsoid distance is solved numerically to 1e-12 absolute.
    """
    p = aspoint(d, z)
    if not contains(d, p):
        raise DomainError("boundary_distance requires an interior point")
    if d.kind in ("disc", "ball"):
        return float(1.0 - np.linalg.norm(p))
    if d.kind == "polydisc":
        return float(np.min(1.0 - np.abs(p)))
    return _ellipsoid_nearest(d.param, abs(p[0]), abs(p[1]))[0]


def nearest_boundary_moduli(d: DomainModel, z) -> tuple[float, tuple[float, ...]]:
    """Distance and the moduli of a nearest boundary point.

    For Reinhardt domains the nearest boundary point to z has the phases of
    z, so the search reduces to moduli space.
    """
    p = aspoint(d, z)
    if d.kind in ("disc", "ball"):
        r = np.linalg.norm(p)
        if r == 0:
            mods = np.zeros(d.complex_dim)
            mods[0] = 1.0
        else:
            mods = np.abs(p) / r
        return float(1.0 - r), tuple(mods)
    if d.kind == "polydisc":
        mods = np.abs(p).copy()
        j = int(np.argmin(1.0 - mods))
        out = mods.copy()
        out[j] = 1.0
        return float(1.0 - mods[j]), tuple(out)
    dist, uv = _ellipsoid_nearest(d.param, abs(p[0]), abs(p[1]))
    return dist, uv


def _ellipsoid_nearest(m: int, x: float, y: float) -> tuple[float, tuple[float, float]]:
    """Nearest point on {u^2 + v^{2m} = 1, u,v >= 0} to (x, y), x,y >= 0.

    Dense sampling over two overlapping parametrizations (by v and by u,
    each smooth away from its own endpoint) seeds a bounded 1-D refinement;
    distance is converged to 1e-12.
    """
    def d2_of_v(v):
        u = np.sqrt(np.maximum(1.0 - v ** (2 * m), 0.0))
        return (u - x) ** 2 + (v - y) ** 2

    def d2_of_u(u):
        v = (np.maximum(1.0 - u ** 2, 0.0)) ** (1.0 / (2 * m))
        return (u - x) ** 2 + (v - y) ** 2

    best = None
    for fn in (d2_of_v, d2_of_u):
        grid = np.linspace(0.0, 1.0, 4097)
        vals = fn(grid)
        i = int(np.argmin(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(fn, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        for t, v in ((res.x, res.fun), (grid[i], vals[i]), (0.0, fn(0.0)), (1.0, fn(1.0))):
            if best is None or v < best[1]:
                best = (t, v, fn is d2_of_v)
    t, v, by_v = best
    if by_v:
        uv = (float(np.sqrt(max(1.0 - t ** (2 * m), 0.0))), float(t))
    else:
        uv = (float(t), float((max(1.0 - t ** 2, 0.0)) ** (1.0 / (2 * m))))
    return float(np.sqrt(v)), uv


# ---------------------------------------------------------------------------
# boundary atlas and surface quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryChart:
    box: tuple[tuple[float, float], ...]
    embed: Callable
    density: Callable
    name: str = ""


@dataclass(frozen=True)
class BoundaryAtlas:
    """Charts covering the boundary plus a materialized surface rule.

    ``points``/``weights`` integrate smooth functions against the surface
    measure; ``total_area`` is the closed-form area where known, otherwise a
    high-resolution reference value.
    """

    domain: DomainModel
    charts: tuple[BoundaryChart, ...]
    total_area: float
    points: np.ndarray
    weights: np.ndarray


def boundary_atlas(d: DomainModel, resolution: int) -> BoundaryAtlas:
    """Surface quadrature atlas for the C^2 models (disc, ball, ellipsoid).

    The ellipsoid boundary is split where |z1| = |z2| and each half is
    parametrized by the coordinate whose derivative stays bounded, removing
    the dr/ds singularity at the poles of the chart.
    """
    if not d.has_c2_boundary:
        raise DomainError("polydisc has no C^2 boundary; surface quadrature unsupported")
    if resolution < 4:
        raise DomainError("resolution must be at least 4")
    if d.kind == "disc" or (d.kind == "ball" and d.param == 1):
        return _disc_atlas(d, resolution)
    if d.kind == "ball":
        return _ball_atlas(d, resolution)
    return _ellipsoid_atlas(d, resolution)


def _disc_atlas(d: DomainModel, resolution: int) -> BoundaryAtlas:
    rule = periodic_trapezoid(resolution)
    chart = BoundaryChart(((0.0, 2 * np.pi),),
                          embed=lambda th: np.exp(1j * th)[..., None],
                          density=lambda th: np.ones_like(th),
                          name="circle")
    pts = np.exp(1j * rule.nodes)[:, None]
    return BoundaryAtlas(d, (chart,), 2 * np.pi, pts, rule.weights.copy())


def _ball_atlas(d: DomainModel, resolution: int) -> BoundaryAtlas:
    """Polar-type chart of S^{2n-1}.

    z_j = r_j e^{i th_j} with the modulus vector r on the positive orthant of
    the real sphere S^{n-1}, parametrized by spherical angles; the surface
    measure factors as (prod_j r_j) dth_1..dth_n x dS(r).  Area 2 pi^n/(n-1)!.
    """
    n = d.param
    if n < 2:
        raise DomainError("ball atlas chart requires n >= 2 (n = 1 is the disc)")
    nphi = max(resolution // 2, 4)
    phis = [mapped(gauss_legendre(nphi), 0.0, np.pi / 2) for _ in range(n - 1)]
    thetas = [periodic_trapezoid(resolution) for _ in range(n)]

    def radial(phi_coords):
        r = []
        s = np.ones_like(phi_coords[0]) if phi_coords else np.array(1.0)
        for k in range(n - 1):
            r.append(s * np.cos(phi_coords[k]))
            s = s * np.sin(phi_coords[k])
        r.append(s)
        return r

    def embed(*coords):
        phi_coords, th_coords = coords[: n - 1], coords[n - 1:]
        r = radial(list(phi_coords))
        return np.stack([r[j] * np.exp(1j * th_coords[j]) for j in range(n)], axis=-1)

    def density(*coords):
        phi_coords = coords[: n - 1]
        r = radial(list(phi_coords))
        dens = np.prod(np.stack(r), axis=0)
        for k in range(n - 2):
            dens = dens * np.sin(phi_coords[k]) ** (n - 2 - k)
        return dens

    box = tuple([(0.0, np.pi / 2)] * (n - 1) + [(0.0, 2 * np.pi)] * n)
    chart = BoundaryChart(box, embed, density, name="polar")
    grids = np.meshgrid(*[r.nodes for r in phis + thetas], indexing="ij")
    w = phis[0].weights
    for r in (phis + thetas)[1:]:
        w = np.multiply.outer(w, r.weights)
    pts = embed(*grids).reshape(-1, n)
    wts = (w * density(*grids)).ravel()
    area = 2.0 * np.pi ** n / math.factorial(n - 1)
    return BoundaryAtlas(d, (chart,), area, pts, wts)


def _ellipsoid_split(m: int) -> tuple[float, float]:
    """Split moduli (r*, s*) where r(s) = s on {r^2 + s^{2m} = 1}."""
    u = brentq(lambda t: t + t ** m - 1.0, 0.0, 1.0, xtol=1e-15)  # u = s*^2
    s_star = math.sqrt(u)
    r_star = math.sqrt(1.0 - u ** m)
    return r_star, s_star


def _ellipsoid_atlas(d: DomainModel, resolution: int) -> BoundaryAtlas:
    m = d.param
    r_star, s_star = _ellipsoid_split(m)

    def embed_a(s, t1, t2):
        r = np.sqrt(1.0 - s ** (2 * m))
        return np.stack([r * np.exp(1j * t1), s * np.exp(1j * t2)], axis=-1)

    def dens_a(s, t1=None, t2=None):
        r = np.sqrt(1.0 - s ** (2 * m))
        rp = -m * s ** (2 * m - 1) / r
        return r * s * np.sqrt(1.0 + rp ** 2)

    def embed_b(r, t1, t2):
        s = (1.0 - r ** 2) ** (1.0 / (2 * m))
        return np.stack([r * np.exp(1j * t1), s * np.exp(1j * t2)], axis=-1)

    def dens_b(r, t1=None, t2=None):
        s = (1.0 - r ** 2) ** (1.0 / (2 * m))
        sp = -(r / m) * (1.0 - r ** 2) ** (1.0 / (2 * m) - 1.0)
        return r * s * np.sqrt(1.0 + sp ** 2)

    charts = (
        BoundaryChart(((0.0, s_star), (0.0, 2 * np.pi), (0.0, 2 * np.pi)),
                      embed_a, dens_a, name="|z2|-param"),
        BoundaryChart(((0.0, r_star), (0.0, 2 * np.pi), (0.0, 2 * np.pi)),
                      embed_b, dens_b, name="|z1|-param"),
    )

    def materialize(res):
        theta = periodic_trapezoid(res)
        pts, wts = [], []
        for chart, hi in ((charts[0], s_star), (charts[1], r_star)):
            rad = mapped(gauss_legendre(res), 0.0, hi)
            S, T1, T2 = np.meshgrid(rad.nodes, theta.nodes, theta.nodes, indexing="ij")
            W = np.multiply.outer(np.multiply.outer(rad.weights, theta.weights),
                                  theta.weights)
            pts.append(chart.embed(S, T1, T2).reshape(-1, 2))
            wts.append((W * chart.density(S)).ravel())
        return np.concatenate(pts), np.concatenate(wts)

    pts, wts = materialize(resolution)
    area = _ellipsoid_area(m, 4 * resolution)
    return BoundaryAtlas(d, charts, area, pts, wts)


@functools.lru_cache(maxsize=64)
def _ellipsoid_area(m: int, res: int) -> float:
    r_star, s_star = _ellipsoid_split(m)
    rule_a = mapped(gauss_legendre(res), 0.0, s_star)
    rule_b = mapped(gauss_legendre(res), 0.0, r_star)
    s = rule_a.nodes
    r = np.sqrt(1.0 - s ** (2 * m))
    rp = -m * s ** (2 * m - 1) / r
    part_a = pairwise_sum(rule_a.weights * r * s * np.sqrt(1.0 + rp ** 2))
    rr = rule_b.nodes
    ss = (1.0 - rr ** 2) ** (1.0 / (2 * m))
    sp = -(rr / m) * (1.0 - rr ** 2) ** (1.0 / (2 * m) - 1.0)
    part_b = pairwise_sum(rule_b.weights * rr * ss * np.sqrt(1.0 + sp ** 2))
    return float((2 * np.pi) ** 2 * (part_a + part_b))


def surface_integral(atlas: BoundaryAtlas, f: Callable) -> complex:
    """Integrate f(points) against the atlas surface rule."""
    vals = np.asarray(f(atlas.points))
    if np.any(~np.isfinite(vals)):
        raise QuadratureError("non-finite surface integrand")
    return pairwise_sum(atlas.weights * vals)


# ---------------------------------------------------------------------------
# monomial volume moments
# ---------------------------------------------------------------------------

def log_monomial_moment(d: DomainModel, alpha) -> float:
    """log of c_alpha = int_Omega |z^alpha|^2 dV, via log-Gamma identities.

    Stable for |alpha| far beyond 150 where the linear-space values under- or
    overflow.
    """
    a = np.atleast_1d(np.asarray(alpha, dtype=np.int64))
    if a.shape != (d.complex_dim,):
        raise DomainError(f"multi-index must have {d.complex_dim} entries")
    if np.any(a < 0):
        raise DomainError("multi-index entries must be nonnegative")
    if d.kind == "disc":
        return float(np.log(np.pi) - np.log(a[0] + 1.0))
    if d.kind == "polydisc":
        return float(d.param * np.log(np.pi) - np.sum(np.log(a + 1.0)))
    if d.kind == "ball":
        n = d.param
        return float(n * np.log(np.pi) + np.sum(gammaln(a + 1.0)) - gammaln(n + np.sum(a) + 1.0))
    m = d.param
    j, k = int(a[0]), int(a[1])
    return float(np.log(4 * np.pi ** 2) - np.log(2.0 * (j + 1)) - np.log(2.0 * m)
                 + gammaln((k + 1.0) / m) + gammaln(j + 2.0) - gammaln((k + 1.0) / m + j + 2.0))


def monomial_moment(d: DomainModel, alpha) -> float:
    """c_alpha = int_Omega |z^alpha|^2 dV (disc: pi/(k+1), etc.)."""
    return float(np.exp(log_monomial_moment(d, alpha)))


def volume(d: DomainModel) -> float:
    return monomial_moment(d, (0,) * d.complex_dim)


# ---------------------------------------------------------------------------
# volume quadrature rules (node clouds with weights)
# ---------------------------------------------------------------------------

def volume_rule(d: DomainModel, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes (N, n) and weights for smooth integrands over the domain."""
    if d.kind == "disc" or (d.kind in ("ball", "polydisc") and d.param == 1):
        return _disc_volume(resolution)
    if d.kind == "polydisc":
        pts, wts = _disc_volume(resolution)
        P, W = pts, wts
        for _ in range(d.param - 1):
            q, v = _disc_volume(resolution)
            P = np.concatenate(
                [np.repeat(P, len(q), axis=0), np.tile(q, (len(P), 1))], axis=1)
            W = np.multiply.outer(W, v).ravel()
        return P, W
    if d.kind == "ball" and d.param == 2:
        return _ball2_volume(resolution)
    if d.kind == "ellipsoid":
        return _ellipsoid_volume(d.param, resolution)
    raise DomainError(f"no volume rule for {d.label}")


def _disc_volume(res: int) -> tuple[np.ndarray, np.ndarray]:
    rad = mapped(gauss_legendre(res), 0.0, 1.0)
    ang = periodic_trapezoid(2 * res)
    R, T = np.meshgrid(rad.nodes, ang.nodes, indexing="ij")
    W = np.multiply.outer(rad.weights, ang.weights) * R
    return (R * np.exp(1j * T)).reshape(-1, 1), W.ravel()


def _ball2_volume(res: int) -> tuple[np.ndarray, np.ndarray]:
    # |w| = rho, (|w1|,|w2|) = rho(cos b, sin b); dV = rho^3 cos b sin b drho db dth1 dth2
    rad = mapped(gauss_legendre(res), 0.0, 1.0)
    bet = mapped(gauss_legendre(res), 0.0, np.pi / 2)
    ang = periodic_trapezoid(2 * res)
    R, B, T1, T2 = np.meshgrid(rad.nodes, bet.nodes, ang.nodes, ang.nodes, indexing="ij")
    W = np.einsum("i,j,k,l->ijkl", rad.weights, bet.weights, ang.weights, ang.weights)
    W = W * R ** 3 * np.cos(B) * np.sin(B)
    pts = np.stack([R * np.cos(B) * np.exp(1j * T1), R * np.sin(B) * np.exp(1j * T2)], axis=-1)
    return pts.reshape(-1, 2), W.ravel()


def _ellipsoid_volume(m: int, res: int) -> tuple[np.ndarray, np.ndarray]:
    # rho2 in [0,1], rho1 = tau * R(rho2), R = sqrt(1-rho2^{2m}); rho1 drho1 = R^2 tau dtau
    r2 = mapped(gauss_legendre(res), 0.0, 1.0)
    tau = mapped(gauss_legendre(res), 0.0, 1.0)
    ang = periodic_trapezoid(2 * res)
    R2, TAU, T1, T2 = np.meshgrid(r2.nodes, tau.nodes, ang.nodes, ang.nodes, indexing="ij")
    Rcap2 = 1.0 - R2 ** (2 * m)
    W = np.einsum("i,j,k,l->ijkl", r2.weights, tau.weights, ang.weights, ang.weights)
    W = W * Rcap2 * TAU * R2
    pts = np.stack([np.sqrt(Rcap2) * TAU * np.exp(1j * T1), R2 * np.exp(1j * T2)], axis=-1)
    return pts.reshape(-1, 2), W.ravel()
