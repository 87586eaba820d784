"""Moments of section profiles and their polynomial range structure.

The k-th moment M_k(xi) = integral of A(xi, t) t^k dt equals the integral of
(x.xi)^k over the body, so as a function of the direction it must extend to a
homogeneous polynomial of degree k.  This module computes the moments by
quadrature and tests that polynomial structure by least squares over a
direction sample; the residual is the diagnostic quantity.

Moments are implemented for k <= 4; the verification pipeline only leans on
k <= 2 (volume, center, quadratic form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .bodies import (
    Direction,
    Ellipsoid,
    InfiniteSupportError,
    Polytope,
    QuadricDomain,
    as_direction,
    sample_directions,
)
from .sections import SectionProfile, section_volume

__all__ = [
    "MAX_MOMENT_ORDER",
    "MomentReport",
    "CenteredMomentReport",
    "moment",
    "range_test",
    "centered_moment_identity_check",
    "homogeneous_exponents",
    "monomial_design_matrix",
]

MAX_MOMENT_ORDER = 4
_RESIDUAL_GUARD = 1e-300


def _quadrature_rule_ellipsoid(body, v, order):
    # The integrand carries a (1 - s^2)^{(n-1)/2} factor that kills plain
    # Gauss-Legendre accuracy in even dimensions, so use the Gauss-Jacobi rule
    # with the matching endpoint weight; polynomial moments then come out
    # exactly.  Weights are folded back so the caller can still see the rule
    # as "sum w_i * A(t_i) * t_i^k".
    n = body.n
    alpha = (n - 1) / 2.0
    s, w = roots_jacobi(order, alpha, alpha)
    hbar = body.centered_support(v)
    t_mid = float(body.center @ v)
    nodes = t_mid + hbar * s
    weights = w * hbar / (1.0 - s**2) ** alpha
    return nodes, weights


def _polytope_breakpoints(body, v):
    tau = np.sort(body.vertices @ v)
    keep = [tau[0]]
    scale = max(tau[-1] - tau[0], 1.0)
    for t in tau[1:]:
        if t - keep[-1] > 1e-12 * scale:
            keep.append(t)
    return np.asarray(keep)


def _quadrature_rule_polytope(body, v, order):
    # A(xi, .) is piecewise polynomial with kinks where the plane crosses a
    # vertex; Gauss-Legendre applied piecewise between those breakpoints is
    # then exact up to roundoff.
    s, w = roots_legendre(order)
    brk = _polytope_breakpoints(body, v)
    nodes, weights = [], []
    for lo, hi in zip(brk[:-1], brk[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes.append(mid + half * s)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _clenshaw_curtis_weights(num):
    # weights for Chebyshev-Lobatto nodes -cos(pi*j/n) on [-1, 1]
    n = num - 1
    if n <= 0:
        raise ValueError("need at least two nodes")
    theta = np.pi * np.arange(num) / n
    w = np.zeros(num)
    ii = np.arange(1, n)
    vv = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n**2 - 1)
        for k in range(1, n // 2):
            vv -= 2.0 * np.cos(2.0 * k * theta[ii]) / (4.0 * k**2 - 1)
        vv -= np.cos(n * theta[ii]) / (n**2 - 1)
    else:
        w[0] = w[n] = 1.0 / n**2
        for k in range(1, (n - 1) // 2 + 1):
            vv -= 2.0 * np.cos(2.0 * k * theta[ii]) / (4.0 * k**2 - 1)
    w[ii] = 2.0 * vv / n
    return w


def moment(target, xi, k, quad_order=64):
    """k-th t-moment of the section profile along xi.

    ``target`` may be a bounded body (the exact section engine is integrated
    with a rule adapted to the body family) or a SectionProfile (integrated
    over its own grid with Clenshaw-Curtis weights, which are exact for the
    Chebyshev-Lobatto grids produced by :func:`tomoslice.sections.profile`).
    """
    if not 0 <= k <= MAX_MOMENT_ORDER:
        raise ValueError(f"moment order must lie in [0, {MAX_MOMENT_ORDER}]")
    if quad_order < 2:
        raise ValueError("quad_order must be at least 2")
    if isinstance(target, SectionProfile):
        grid, values = target.grid, target.values
        half = 0.5 * (grid[-1] - grid[0])
        w = _clenshaw_curtis_weights(grid.size) * half
        return float(np.sum(w * values * grid**k))
    d = as_direction(xi)
    if d.n != target.n:
        raise ValueError("direction dimension does not match the body")
    v = d.components
    if isinstance(target, Ellipsoid):
        nodes, weights = _quadrature_rule_ellipsoid(target, v, quad_order)
    elif isinstance(target, Polytope):
        nodes, weights = _quadrature_rule_polytope(target, v, quad_order)
    elif isinstance(target, QuadricDomain):
        raise InfiniteSupportError("moments of an unbounded body diverge")
    else:
        raise TypeError(f"no moment rule for {type(target).__name__}")
    values = np.array([section_volume(target, d, t) for t in nodes])
    return float(np.sum(weights * values * nodes**k))


def homogeneous_exponents(n, k):
    """Exponent multi-indices of the degree-k monomials in n variables,
    graded-lexicographic (within fixed degree: lexicographic, x_1 first)."""
    out = []
    for combo in combinations_with_replacement(range(n), k):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def monomial_design_matrix(directions, exponents):
    directions = np.asarray(directions, dtype=float)
    cols = [np.prod(directions**np.asarray(e), axis=1) for e in exponents]
    return np.column_stack(cols) if cols else np.empty((directions.shape[0], 0))


@dataclass(eq=False)
class MomentReport:
    """Outcome of a polynomial-range test at one moment order.

    fit_coefficients are indexed by ``exponents`` (graded-lex monomial basis).
    relative_residual divides by max(||moments||, 1e-300); absolute_residual
    is reported alongside because for centered bodies at odd k the moment
    vector itself vanishes and a ratio of roundoff terms means nothing.
    """

    k: int
    directions: np.ndarray
    moments: np.ndarray
    exponents: list
    fit_coefficients: np.ndarray
    relative_residual: float
    absolute_residual: float
    seed: int
    quad_order: int

    def to_dict(self):
        return {
            "k": self.k,
            "directions": self.directions.tolist(),
            "moments": self.moments.tolist(),
            "exponents": [list(e) for e in self.exponents],
            "fit_coefficients": self.fit_coefficients.tolist(),
            "relative_residual": self.relative_residual,
            "absolute_residual": self.absolute_residual,
            "seed": self.seed,
            "quad_order": self.quad_order,
        }

    def to_csv(self):
        n = self.directions.shape[1]
        header = ",".join([f"xi_{i + 1}" for i in range(n)] + [f"M_{self.k}"])
        lines = [header]
        for d, m in zip(self.directions, self.moments):
            lines.append(",".join(repr(float(x)) for x in d) + f",{float(m)!r}")
        return "\n".join(lines) + "\n"


def range_test(body, k, num_directions, seed=0, quad_order=64):
    """Fit M_k over a direction sample by a homogeneous degree-k polynomial.

    Directions come from the Fibonacci lattice for n = 3 and from a seeded
    uniform sample otherwise.  Requires at least twice as many directions as
    degree-k monomials; raises if the design matrix is rank deficient.
    """
    n = body.n
    exponents = homogeneous_exponents(n, k)
    if num_directions < 2 * len(exponents):
        raise ValueError(
            f"need at least {2 * len(exponents)} directions for degree {k} in dimension {n}"
        )
    dirs = sample_directions(n, num_directions, seed=seed)
    moments = np.array([moment(body, Direction(d), k, quad_order=quad_order) for d in dirs])
    design = monomial_design_matrix(dirs, exponents)
    if np.linalg.matrix_rank(design) < len(exponents):
        raise ValueError("direction set is rank deficient for this monomial basis")
    coef, *_ = np.linalg.lstsq(design, moments, rcond=None)
    resid = design @ coef - moments
    absolute = float(np.linalg.norm(resid))
    scale = float(np.linalg.norm(moments))
    if scale < 1e-12 * math.sqrt(num_directions):
        # all moments vanish at double precision (centered body, odd k);
        # the zero polynomial fits and a ratio would be meaningless
        relative = None
    else:
        relative = absolute / max(scale, _RESIDUAL_GUARD)
    return MomentReport(
        k=k,
        directions=dirs,
        moments=moments,
        exponents=exponents,
        fit_coefficients=coef,
        relative_residual=relative,
        absolute_residual=absolute,
        seed=seed,
        quad_order=quad_order,
    )


@dataclass(eq=False)
class CenteredMomentReport:
    num_directions: int
    max_abs_deviation: float
    max_rel_deviation: float
    tol: float

    @property
    def passed(self):
        return self.max_rel_deviation < self.tol

    def to_dict(self):
        return {
            "num_directions": self.num_directions,
            "max_abs_deviation": self.max_abs_deviation,
            "max_rel_deviation": self.max_rel_deviation,
            "tol": self.tol,
            "passed": self.passed,
        }


def centered_moment_identity_check(body, seed=0, num_directions=50, tol=1e-8, quad_order=64):
    """Check M_1(xi) = M_0 * (center.xi) across a direction sample.

    The first moment of a section profile is the integral of x.xi over the
    body, which for an ellipsoid is volume times center.xi.  Deviations are
    reported relative to M_0 * max(||center||, 1), so centered bodies are
    judged on an absolute scale instead of a 0/0 ratio.
    """
    if not isinstance(body, Ellipsoid):
        raise TypeError("the centered-moment identity is stated for ellipsoids")
    dirs = sample_directions(body.n, num_directions, seed=seed)
    m0 = np.array([moment(body, Direction(d), 0, quad_order=quad_order) for d in dirs])
    m1 = np.array([moment(body, Direction(d), 1, quad_order=quad_order) for d in dirs])
    predicted = m0 * (dirs @ body.center)
    dev = np.abs(m1 - predicted)
    scale = abs(float(np.mean(m0))) * max(float(np.linalg.norm(body.center)), 1.0)
    return CenteredMomentReport(
        num_directions=num_directions,
        max_abs_deviation=float(dev.max()),
        max_rel_deviation=float(dev.max()) / max(scale, _RESIDUAL_GUARD),
        tol=tol,
    )
