"""Algebraic structure of section profiles.

The organizing question: for which bodies does some integer power of the
section function A(xi, .) agree with a polynomial in the offset t?  For an
ellipsoid in odd ambient dimension A itself is a polynomial of degree n - 1;
in even dimension its square is one of degree 2(n - 1).  This module fits
A^m by polynomials (Chebyshev basis on a rescaled variable, never raw
monomials), searches for the smallest workable power m, checks the degree
cap m*(n-1), and tests the expected two-root factorization with all roots
piled at the chord endpoints.

It also estimates the boundary power law A ~ const * (t0 - t)^{(n-1)/2} near
the top of the chord and, independently, predicts the constant from principal
curvatures measured by finite differences on the membership test alone, so
the two routes can be compared without sharing any code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from .bodies import (
    Direction,
    Ellipsoid,
    InfiniteSupportError,
    Polytope,
    QuadricDomain,
    as_direction,
    chord_interval,
    unit_ball_volume,
)
from .sections import SectionProfile, section_volume

__all__ = [
    "AlgebraicFitReport",
    "RootStructureReport",
    "AsymptoticReport",
    "fit_power_polynomial",
    "detect_min_m",
    "degree_bound_check",
    "root_structure",
    "normalized_section_constant",
    "exponent_estimate",
    "principal_curvatures",
    "predicted_boundary_constant",
    "DEFAULT_ACCEPT_TOL",
    "EFFECTIVE_DEGREE_CUTOFF",
]

DEFAULT_ACCEPT_TOL = 1e-6
REJECT_FLOOR = 1e-3
EFFECTIVE_DEGREE_CUTOFF = 1e-9
CONFORM_TOL = 1e-8


@dataclass(eq=False)
class RootStructureReport:
    """Verdict on the two-endpoint root factorization of a fitted power.

    For a conforming body A^m is proportional to
    (h_plus - t)^{M/2} * (h_minus + t)^{M/2} with M = m*(n-1), so the fitted
    polynomial must vanish only at the chord endpoints, each with multiplicity
    M/2.  Odd M admits no such factorization and is reported as structurally
    infeasible rather than scored.
    """

    verdict: str  # "conforms" | "deviates" | "structurally-infeasible"
    scale: float | None
    mismatch: float | None
    roots: list  # [(location t, multiplicity)]
    h_plus: float
    h_minus: float

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "scale": self.scale,
            "mismatch": self.mismatch,
            "roots": [[r, mult] for r, mult in self.roots],
            "h_plus": self.h_plus,
            "h_minus": self.h_minus,
        }


@dataclass(eq=False)
class AlgebraicFitReport:
    """Least-squares polynomial model of A^m along one direction.

    coefficients are Chebyshev coefficients in s, where t = t_mid + t_half*s
    maps the sampled span to [-1, 1]; (t_lo, t_hi) pin that affine change of
    variable.  effective_degree ignores coefficients below 1e-9 of the largest
    one.  grid and power_samples are retained so later stages (root structure)
    can rescore the same data.
    """

    xi: Direction
    n: int
    m: int
    degree: int
    coefficients: np.ndarray
    t_lo: float
    t_hi: float
    relative_residual: float
    effective_degree: int
    degree_bound_ok: bool
    grid: np.ndarray = field(repr=False)
    power_samples: np.ndarray = field(repr=False)
    root_report: RootStructureReport | None = None

    def evaluate(self, t):
        s = (2.0 * np.asarray(t, dtype=float) - (self.t_lo + self.t_hi)) / (self.t_hi - self.t_lo)
        return C.chebval(s, self.coefficients)

    def to_dict(self):
        out = {
            "xi": self.xi.components.tolist(),
            "n": self.n,
            "m": self.m,
            "degree": self.degree,
            "coefficients": self.coefficients.tolist(),
            "t_lo": self.t_lo,
            "t_hi": self.t_hi,
            "relative_residual": self.relative_residual,
            "effective_degree": self.effective_degree,
            "degree_bound_ok": self.degree_bound_ok,
            "grid": self.grid.tolist(),
            "power_samples": self.power_samples.tolist(),
            "root_report": None if self.root_report is None else self.root_report.to_dict(),
        }
        return out


def _effective_degree(coefficients):
    mags = np.abs(coefficients)
    top = mags.max()
    if top == 0.0:
        return 0
    significant = np.nonzero(mags > EFFECTIVE_DEGREE_CUTOFF * top)[0]
    return int(significant.max())


def fit_power_polynomial(prof, m, degree):
    """Fit A^m on the profile grid by a degree-``degree`` Chebyshev series.

    Requires at least 2*(degree+1) sample points so the least-squares system
    stays comfortably overdetermined.  The residual is measured relative to
    the norm of the A^m samples.
    """
    if m < 1:
        raise ValueError("the power m must be a positive integer")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if len(prof) < 2 * (degree + 1):
        raise ValueError(
            f"profile has {len(prof)} points; degree {degree} needs at least {2 * (degree + 1)}"
        )
    y = prof.values**m
    y_norm = float(np.linalg.norm(y))
    if y_norm == 0.0:
        raise ValueError("profile is identically zero on its grid")
    t_lo, t_hi = float(prof.grid[0]), float(prof.grid[-1])
    s = (2.0 * prof.grid - (t_lo + t_hi)) / (t_hi - t_lo)
    V = C.chebvander(s, degree)
    coef, *_ = np.linalg.lstsq(V, y, rcond=None)
    residual = float(np.linalg.norm(V @ coef - y)) / y_norm
    eff = _effective_degree(coef)
    cap = m * (prof.n - 1)
    return AlgebraicFitReport(
        xi=prof.xi,
        n=prof.n,
        m=m,
        degree=degree,
        coefficients=coef,
        t_lo=t_lo,
        t_hi=t_hi,
        relative_residual=residual,
        effective_degree=eff,
        degree_bound_ok=eff <= cap,
        grid=prof.grid,
        power_samples=y,
    )


def detect_min_m(prof, m_max, tol=DEFAULT_ACCEPT_TOL):
    """Smallest power m <= m_max whose fit at degree m*(n-1) meets ``tol``.

    Returns the winning AlgebraicFitReport, or None when no power works
    (the honest negative: the body's sections are not polynomial-power along
    this direction at any tested m).
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    for m in range(1, m_max + 1):
        report = fit_power_polynomial(prof, m, m * (prof.n - 1))
        if report.relative_residual < tol:
            return report
    return None


def degree_bound_check(report, n=None):
    """True when the effective fitted degree respects the cap m*(n-1)."""
    n = report.n if n is None else n
    return _effective_degree(report.coefficients) <= report.m * (n - 1)


def root_structure(report, h_plus, h_minus, conform_tol=CONFORM_TOL):
    """Score the endpoint-root factorization of a fitted power.

    Fits the single scalar c in A^m ~ c*(h_plus - t)^{M/2}*(h_minus + t)^{M/2}
    over the report's own samples and reports the relative mismatch.  Root
    locations are recovered from the flattened samples (A^m)^{2/M}, which for
    a conforming body is exactly the quadratic (h_plus - t)(h_minus + t) up to
    scale; its simple roots are numerically stable where the multiple roots
    of the raw polynomial are not.  The report is attached to ``report`` as a
    side effect and also returned.
    """
    M = report.m * (report.n - 1)
    if M % 2 == 1:
        rr = RootStructureReport(
            verdict="structurally-infeasible",
            scale=None,
            mismatch=None,
            roots=[],
            h_plus=float(h_plus),
            h_minus=float(h_minus),
        )
        report.root_report = rr
        return rr
    half = M // 2
    t = report.grid
    y = report.power_samples
    g = ((h_plus - t) * (h_minus + t)) ** half
    gg = float(g @ g)
    if gg == 0.0:
        raise ValueError("degenerate chord data: factorization target vanishes on the grid")
    scale = float(y @ g) / gg
    mismatch = float(np.linalg.norm(y - scale * g)) / float(np.linalg.norm(y))
    mask = y > 0
    roots = []
    if np.count_nonzero(mask) >= 3:
        flat = y[mask] ** (1.0 / half)
        quad = C.Chebyshev.fit(t[mask], flat, 2)
        rts = np.sort(np.real(quad.roots()))
        if rts.size == 2:
            roots = [(float(rts[0]), half), (float(rts[1]), half)]
    rr = RootStructureReport(
        verdict="conforms" if mismatch < conform_tol else "deviates",
        scale=scale,
        mismatch=mismatch,
        roots=roots,
        h_plus=float(h_plus),
        h_minus=float(h_minus),
    )
    report.root_report = rr
    return rr


def normalized_section_constant(body, xi, t=None):
    """Direction-wise section coefficient, rescaled to be direction-free for
    quadratically supported bodies.

    Writing A(xi, t) = C(xi) * ((h_plus - t)(h_minus + t))^{(n-1)/2}, the raw
    coefficient C(xi) carries a factor (half-chord)^{-n}; multiplying it out
    leaves a constant that moment conditions force to be direction
    independent.  Evaluated at the chord midpoint unless t is given.
    """
    d = as_direction(xi)
    t_lo, t_hi = chord_interval(body, d)
    h_plus, h_minus = t_hi, -t_lo
    if t is None:
        t = 0.5 * (t_lo + t_hi)
    t = float(t)
    base = (h_plus - t) * (h_minus + t)
    if base <= 0.0:
        raise ValueError("evaluation point must lie strictly inside the chord interval")
    n = body.n
    a_val = section_volume(body, d, t)
    half_chord = 0.5 * (h_plus + h_minus)
    return a_val * base ** (-(n - 1) / 2.0) * half_chord**n


@dataclass(eq=False)
class AsymptoticReport:
    """Power-law summary of A near the top endpoint of the chord.

    estimated_exponent and estimated_constant come from a log-log regression
    of A(t0 - delta) over a log-spaced window of depths delta.  The exponent
    should be (n-1)/2 for smooth strictly convex bodies; the constant is to
    be compared against :func:`predicted_boundary_constant`.
    """

    xi: Direction
    t0: float
    estimated_exponent: float
    estimated_constant: float
    window: tuple
    num_points: int
    depths: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "xi": self.xi.components.tolist(),
            "t0": self.t0,
            "estimated_exponent": self.estimated_exponent,
            "estimated_constant": self.estimated_constant,
            "window": list(self.window),
            "num_points": self.num_points,
            "depths": self.depths.tolist(),
            "values": self.values.tolist(),
        }


def exponent_estimate(body, xi, window=(1e-4, 1e-2), num_points=16):
    """Log-log regression of the boundary decay of A along xi.

    ``window`` gives the depth range below t0 = h(xi) in units of the chord
    width; for unbounded bodies (no chord) the window is taken in absolute
    units.  At least 12 log-spaced depths are required for a stable slope.
    """
    if isinstance(body, Polytope):
        raise TypeError("boundary power laws need a strictly convex body")
    d = as_direction(xi)
    lo, hi = float(window[0]), float(window[1])
    if not 0.0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    if num_points < 12:
        raise ValueError("need at least 12 regression points")
    try:
        t_lo, t_hi = chord_interval(body, d)
    except InfiniteSupportError:
        # unbounded body: no chord to scale by, take the window in absolute units
        t_hi = body.support(d.components)
        if not math.isfinite(t_hi):
            raise
        width = 1.0
    else:
        width = t_hi - t_lo
        if hi > 0.1:
            raise ValueError("window exceeds 0.1 of the chord width")
    depths = np.geomspace(lo, hi, num_points) * width
    t0 = t_hi
    values = np.array([section_volume(body, d, t0 - dd) for dd in depths])
    if np.any(values < 1e-300):
        raise ValueError("section values underflow inside the regression window")
    slope, intercept = np.polyfit(np.log(depths), np.log(values), 1)
    return AsymptoticReport(
        xi=d,
        t0=float(t0),
        estimated_exponent=float(slope),
        estimated_constant=float(math.exp(intercept)),
        window=(lo, hi),
        num_points=num_points,
        depths=depths,
        values=values,
    )


def _tangent_frame(v):
    n = v.size
    basis = np.column_stack([v, np.eye(n)])
    Q, _ = np.linalg.qr(basis)
    return Q[:, 1:n]


def _entry_depth(body, base, inward, start=1e-14):
    """Smallest s >= 0 with base + s*inward inside the body (bisection on the
    membership test; assumes the ray does hit the body)."""
    if body.contains(base):
        return 0.0
    s = start
    for _ in range(256):
        if body.contains(base + s * inward):
            break
        s *= 2.0
    else:
        raise ValueError("ray from the tangent plane never entered the body")
    lo, hi = 0.0, s
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        if body.contains(base + mid * inward):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def principal_curvatures(body, xi, step=1e-4):
    """Principal curvatures of the boundary at the support touching point.

    Independent oracle: seats an orthonormal tangent frame at the maximizer of
    x.xi, measures the depth at which rays parallel to -xi re-enter the body
    for small tangential offsets, and differences those depths to a Hessian.
    Uses only membership queries, never the section formulas, so it can sit on
    the other side of a cross-check.
    """
    d = as_direction(xi)
    v = d.components
    x0 = body.argmax_support(v)
    U = _tangent_frame(v)
    k = U.shape[1]
    inward = -v

    def depth(y):
        return _entry_depth(body, x0 + U @ y, inward)

    H = np.empty((k, k))
    e = np.eye(k) * step
    for i in range(k):
        H[i, i] = (depth(e[i]) + depth(-e[i])) / step**2
    for i in range(k):
        for j in range(i + 1, k):
            val = (
                depth(e[i] + e[j])
                - depth(e[i] - e[j])
                - depth(-e[i] + e[j])
                + depth(-e[i] - e[j])
            ) / (4.0 * step**2)
            H[i, j] = H[j, i] = val
    kappa = np.linalg.eigvalsh(H)
    if np.any(kappa <= 0):
        raise ValueError("boundary contact is not elliptic: nonpositive curvature measured")
    return kappa


def predicted_boundary_constant(body, xi, step=1e-4):
    """Constant c in A ~ c * (t0 - t)^{(n-1)/2} from the curvature oracle.

    Near an elliptic boundary point the level sets of x.xi cut the body in
    nearly ellipsoidal slices with semi-axes sqrt(2*delta/kappa_j); the volume
    of such a slice is the unit-ball volume of dimension n-1 times
    (2*delta)^{(n-1)/2} / sqrt(prod kappa_j).
    """
    kappa = principal_curvatures(body, xi, step=step)
    k = kappa.size
    return unit_ball_volume(k) * 2.0 ** (k / 2.0) / math.sqrt(float(np.prod(kappa)))
