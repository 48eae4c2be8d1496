"""One-dimensional quadrature rules and a deterministic integration driver.

Rules are plain node/weight tables.  Gauss-Jacobi rules carry the singular
endpoint weight (1-x)^a (1+x)^b inside their weights, which is how the
delta^{-r} integrals with r close to 1 stay accurate.  All reductions go
through pairwise (cascade) summation so results do not depend on evaluation
order or thread count.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi


class QuadratureError(ValueError):
    """Invalid rule parameters or a non-finite integrand value."""


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights over an interval or the circle [0, 2pi).

    ``exactness`` is a human-readable claim checked by the test suite, not
    enforced at runtime.
    """

    nodes: np.ndarray
    weights: np.ndarray
    support: tuple[float, float]
    kind: str = "interval"  # "interval" or "circle"
    exactness: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if np.any(self.weights <= 0):
            raise QuadratureError("quadrature weights must be strictly positive")
        lo, hi = self.support
        if np.any(self.nodes <= lo) or np.any(self.nodes >= hi):
            raise QuadratureError("nodes must lie strictly inside the open support")

    @property
    def n(self) -> int:
        return len(self.nodes)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def pairwise_sum(values: np.ndarray):
    """Cascade summation with a fixed reduction tree.

    Deterministic for a given input order; accumulated rounding grows like
    O(log n) rather than O(n).
    """
    v = np.asarray(values).ravel()
    if v.size == 0:
        return 0.0
    while v.size > 1:
        half = v.size // 2
        head = v[: 2 * half]
        v = head[0::2] + head[1::2] if v.size % 2 == 0 else np.concatenate(
            [head[0::2] + head[1::2], v[-1:]]
        )
    return v[0]


@functools.lru_cache(maxsize=256)
def gauss_legendre(n: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1, 1], exact for polynomials of degree 2n-1.

    Nodes by Newton iteration on the three-term Legendre recurrence from
    Chebyshev initial guesses, converged below 1e-15.
    """
    if n < 1:
        raise QuadratureError("gauss_legendre requires n >= 1")
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]), (-1.0, 1.0),
                              exactness="polynomials up to degree 1")
    k = np.arange(n)
    x = np.cos(np.pi * (k + 0.75) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return QuadratureRule(x[order], w[order], (-1.0, 1.0),
                          exactness=f"polynomials up to degree {2 * n - 1}")


@functools.lru_cache(maxsize=1024)
def gauss_jacobi(n: int, a: float, b: float) -> QuadratureRule:
    """Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b on [-1, 1].

    The weight function is folded into the quadrature weights, so applying
    the rule to f computes int f(x) (1-x)^a (1+x)^b dx.
    """
    if n < 1:
        raise QuadratureError("gauss_jacobi requires n >= 1")
    if a <= -1 or b <= -1:
        raise QuadratureError("gauss_jacobi requires exponents a, b > -1")
    x, w = roots_jacobi(n, a, b)
    return QuadratureRule(np.asarray(x), np.asarray(w), (-1.0, 1.0),
                          exactness=f"(1-x)^{a}(1+x)^{b} * polynomials up to degree {2 * n - 1}")


@functools.lru_cache(maxsize=256)
def periodic_trapezoid(n: int) -> QuadratureRule:
    """n equispaced nodes on [0, 2pi) with equal weights 2pi/n.

    Integrates e^{ik theta} to machine zero for 0 < |k| < n; geometric
    accuracy for periodic analytic integrands.
    """
    if n < 1:
        raise QuadratureError("periodic_trapezoid requires n >= 1")
    nodes = 2.0 * np.pi * np.arange(n) / n
    # shift by half a step so nodes avoid the endpoint 0 of the open support
    nodes = nodes + np.pi / n
    weights = np.full(n, 2.0 * np.pi / n)
    return QuadratureRule(nodes, weights, (0.0, 2.0 * np.pi), kind="circle",
                          exactness=f"trigonometric polynomials of degree < {n}")


def mapped(rule: QuadratureRule, lo: float, hi: float) -> QuadratureRule:
    """Affine image of an interval rule on [lo, hi]."""
    if rule.kind != "interval":
        raise QuadratureError("only interval rules can be remapped")
    a, b = rule.support
    scale = (hi - lo) / (b - a)
    nodes = lo + (rule.nodes - a) * scale
    return QuadratureRule(nodes, rule.weights * scale, (lo, hi),
                          exactness=rule.exactness)


def jacobi_endpoint_rule(n: int, exponent: float, lo: float, hi: float,
                         singular_at: str = "hi") -> QuadratureRule:
    """Rule on [lo, hi] absorbing a weight (hi-x)^exponent (or (x-lo)^exponent).

    Applying it to f computes int f(x) * (singular factor) dx.
    """
    base = gauss_jacobi(n, exponent if singular_at == "hi" else 0.0,
                        exponent if singular_at == "lo" else 0.0)
    h = (hi - lo) / 2.0
    nodes = lo + (base.nodes + 1.0) * h
    # (1 -+ x)^exponent on [-1,1] maps to (h^-exponent) * (hi - x)^exponent
    weights = base.weights * h * h**exponent
    return QuadratureRule(nodes, weights, (lo, hi),
                          exactness=f"endpoint weight ^{exponent} at {singular_at}")


def geometric_panels(lo: float, hi: float, toward: float, min_scale: float) -> list[tuple[float, float]]:
    """Split [lo, hi] into panels geometrically refined toward ``toward``.

    ``toward`` must be one of the endpoints.  Panel widths halve until they
    reach min_scale, which keeps fixed-order Gauss panels uniformly accurate
    for integrands with a singularity just beyond ``toward``.
    """
    if min_scale <= 0:
        raise QuadratureError("min_scale must be positive")
    width = hi - lo
    if width <= min_scale:
        return [(lo, hi)]
    offsets = [width]
    while offsets[-1] / 2 > min_scale:
        offsets.append(offsets[-1] / 2)
    offsets.append(0.0)
    if toward == hi:
        return [(hi - a, hi - b) for a, b in zip(offsets[:-1], offsets[1:])]
    if toward == lo:
        return [(lo + b, lo + a) for a, b in zip(offsets[:-1], offsets[1:])][::-1]
    raise QuadratureError("toward must be an endpoint of the panel range")


def composite_rule(panels: Sequence[tuple[float, float]], n: int) -> QuadratureRule:
    """Gauss-Legendre with n nodes on each panel, concatenated."""
    base = gauss_legendre(n)
    nodes, weights = [], []
    for lo, hi in panels:
        r = mapped(base, lo, hi)
        nodes.append(r.nodes)
        weights.append(r.weights)
    lo = min(p[0] for p in panels)
    hi = max(p[1] for p in panels)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), (lo, hi),
                          exactness=f"composite Gauss-Legendre({n}) on {len(panels)} panels")


def integrate(rule, f: Callable):
    """Integrate f against a rule or a tensor product of rules.

    For a single rule, f is called once with the node array.  For a sequence
    of rules, f is called with 'ij'-indexed meshgrid coordinate arrays.  The
    weighted values are reduced by pairwise summation, so the result is
    deterministic and independent of any evaluation parallelism.
    """
    if isinstance(rule, QuadratureRule):
        vals = np.asarray(f(rule.nodes))
        _check_finite(vals, rule.nodes)
        return pairwise_sum(rule.weights * vals)
    rules = list(rule)
    grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    vals = np.asarray(f(*grids))
    _check_finite(vals, grids)
    w = rules[0].weights
    for r in rules[1:]:
        w = np.multiply.outer(w, r.weights)
    return pairwise_sum(w * vals)


def _check_finite(vals, nodes):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = tuple(np.argwhere(bad)[0])
        if isinstance(nodes, np.ndarray):
            where = nodes[idx[0]]
        else:
            where = tuple(g[idx] for g in nodes)
        raise QuadratureError(f"non-finite integrand value at node {where}")
