import math

import numpy as np
import pytest

from tomoslice.bodies import (
    Direction,
    Ellipsoid,
    Polytope,
    QuadricDomain,
    chord_interval,
    random_ellipsoid,
    random_rotation,
    unit_ball_volume,
)
from tomoslice.algfit import (
    AlgebraicFitReport,
    degree_bound_check,
    detect_min_m,
    exponent_estimate,
    fit_power_polynomial,
    normalized_section_constant,
    predicted_boundary_constant,
    principal_curvatures,
    root_structure,
)
from tomoslice.sections import profile


def rand_dir(n, seed):
    g = np.random.default_rng(seed).standard_normal(n)
    return Direction.from_vector(g)


def ellipsoid_profile(n, seed, num_points=96):
    body = random_ellipsoid(n, seed=seed)
    d = rand_dir(n, seed + 1)
    return body, d, profile(body, d, num_points=num_points, margin=0.0)


# minimal power law


def test_odd_dimension_needs_single_power():
    for n in (3, 5):
        body, d, prof = ellipsoid_profile(n, seed=n)
        win = detect_min_m(prof, m_max=4, tol=1e-9)
        assert win is not None and win.m == 1
        assert win.degree == n - 1
        assert win.relative_residual < 1e-9


def test_even_dimension_needs_square():
    for n in (2, 4):
        body, d, prof = ellipsoid_profile(n, seed=10 + n)
        # m = 1 cannot work at any modest degree
        rep1 = fit_power_polynomial(prof, 1, 2 * (n - 1))
        assert rep1.relative_residual > 1e-3
        win = detect_min_m(prof, m_max=4, tol=1e-9)
        assert win is not None and win.m == 2
        assert win.degree == 2 * (n - 1)
        assert win.relative_residual < 1e-9


def test_detect_min_m_none_for_cube():
    cube = Polytope.cube(3)
    d = Direction.from_vector([1.0, 1.0, 1.0])
    prof = profile(cube, d, num_points=96, margin=0.0)
    assert detect_min_m(prof, m_max=4, tol=1e-6) is None
    best = min(
        fit_power_polynomial(prof, m, m * 2).relative_residual for m in range(1, 5)
    )
    assert best > 1e-3


def test_degree_cannot_drop_below_bound():
    body, d, prof = ellipsoid_profile(3, seed=77)
    ok = fit_power_polynomial(prof, 1, 2)
    short = fit_power_polynomial(prof, 1, 1)
    assert ok.relative_residual < 1e-9
    assert short.relative_residual > 1e-3


def test_effective_degree_equals_bound():
    for n, m in ((3, 1), (2, 2), (4, 2), (5, 1)):
        body, d, prof = ellipsoid_profile(n, seed=100 * n + m)
        rep = fit_power_polynomial(prof, m, m * (n - 1) + 3)
        assert rep.effective_degree == m * (n - 1)
        assert degree_bound_check(rep)


def test_fit_residual_monotone_in_degree():
    body, d, prof = ellipsoid_profile(2, seed=55)
    res = [fit_power_polynomial(prof, 2, D).relative_residual for D in range(5)]
    for a, b in zip(res, res[1:]):
        assert b <= a + 1e-14


def test_fit_invariant_under_translation_and_scaling():
    body = random_ellipsoid(3, seed=91)
    d = rand_dir(3, 92)
    prof = profile(body, d, num_points=96, margin=0.0)
    base = fit_power_polynomial(prof, 1, 2).relative_residual
    moved = body.translated([0.7, -0.4, 0.2])
    prof_m = profile(moved, d, num_points=96, margin=0.0)
    assert fit_power_polynomial(prof_m, 1, 2).relative_residual == pytest.approx(
        base, abs=1e-10
    )
    prof_s = profile(body.scaled(2.5), d, num_points=96, margin=0.0)
    assert fit_power_polynomial(prof_s, 1, 2).relative_residual == pytest.approx(
        base, abs=1e-10
    )


def test_fit_report_evaluate_and_serialize():
    body, d, prof = ellipsoid_profile(3, seed=31)
    rep = fit_power_polynomial(prof, 1, 2)
    assert isinstance(rep, AlgebraicFitReport)
    idx = len(prof.grid) // 2
    assert rep.evaluate(prof.grid[idx]) == pytest.approx(prof.values[idx], rel=1e-9)
    d_ = rep.to_dict()
    assert d_["m"] == 1 and d_["degree"] == 2


def test_fit_needs_enough_samples():
    body = random_ellipsoid(3, seed=1)
    d = rand_dir(3, 2)
    prof = profile(body, d, num_points=16, margin=0.0)
    with pytest.raises(ValueError):
        fit_power_polynomial(prof, 1, 8)


# root structure


def test_root_structure_ellipsoid_conforms():
    for n in (2, 3, 4, 5):
        body = random_ellipsoid(n, seed=200 + n)
        d = rand_dir(n, 300 + n)
        prof = profile(body, d, num_points=96, margin=0.0)
        m = 1 if n % 2 else 2
        rep = fit_power_polynomial(prof, m, m * (n - 1))
        h_plus = body.support(d.components)
        h_minus = body.support(-d.components)
        rr = root_structure(rep, h_plus, h_minus)
        assert rr.verdict == "conforms"
        assert rr.mismatch < 1e-8
        width = h_plus + h_minus
        roots = sorted(r for r, _ in rr.roots)
        assert roots[0] == pytest.approx(-h_minus, abs=1e-8 * width)
        assert roots[-1] == pytest.approx(h_plus, abs=1e-8 * width)
        mult = {r: mu for r, mu in rr.roots}
        assert all(mu == m * (n - 1) // 2 for mu in mult.values())


def test_root_structure_odd_total_multiplicity_infeasible():
    body = random_ellipsoid(4, seed=7)
    d = rand_dir(4, 8)
    prof = profile(body, d, num_points=96, margin=0.0)
    rep = fit_power_polynomial(prof, 1, 3)
    rr = root_structure(rep, body.support(d.components), body.support(-d.components))
    assert rr.verdict == "structurally-infeasible"


def test_root_structure_flags_cube():
    cube = Polytope.cube(3)
    d = Direction.from_vector([1.0, 1.0, 1.0])
    prof = profile(cube, d, num_points=96, margin=0.0)
    rep = fit_power_polynomial(prof, 1, 2)
    rr = root_structure(rep, cube.support(d.components), cube.support(-d.components))
    assert rr.verdict == "deviates"
    assert rr.mismatch > 1e-3


def test_normalized_constant_direction_free():
    body = random_ellipsoid(3, seed=404)
    vals = [
        normalized_section_constant(body, rand_dir(3, s)) for s in range(20)
    ]
    vals = np.array(vals)
    assert np.ptp(vals) < 1e-8 * vals.mean()
    want = unit_ball_volume(2) / math.sqrt(np.linalg.det(body.shape))
    assert vals.mean() == pytest.approx(want, rel=1e-10)


def test_normalized_constant_raw_coefficient_varies():
    # the rescaling is what removes the direction dependence
    body = Ellipsoid.from_axes([2.0, 1.0, 1.0])
    d1 = Direction.from_vector([1.0, 0.0, 0.0])
    d2 = Direction.from_vector([0.0, 0.0, 1.0])
    def raw(d):
        lo, hi = chord_interval(body, d)
        t = 0.5 * (lo + hi)
        from tomoslice.sections import section_volume
        w = 0.5 * (hi - lo)
        return section_volume(body, d, t) / w ** (body.n - 1)
    assert abs(raw(d1) - raw(d2)) > 0.1 * abs(raw(d1))
    a = normalized_section_constant(body, d1)
    b = normalized_section_constant(body, d2)
    assert a == pytest.approx(b, rel=1e-10)


# boundary asymptotics


def test_ball_boundary_exponent_and_constant():
    ball = Ellipsoid.from_axes([1.0, 1.0, 1.0])
    d = Direction.from_vector([0.0, 0.0, 1.0])
    rep = exponent_estimate(ball, d)
    assert rep.estimated_exponent == pytest.approx(1.0, abs=0.05)
    # A = pi (1 - t^2) ~ 2 pi delta near t = 1
    rep2 = exponent_estimate(ball, d, window=(1e-4, 1e-3))
    assert rep2.estimated_constant == pytest.approx(2.0 * math.pi, rel=0.02)


def test_disk_boundary_exponent():
    disk = Ellipsoid.from_axes([1.0, 1.0])
    d = Direction.from_vector([0.3, 0.9])
    rep = exponent_estimate(disk, d)
    assert rep.estimated_exponent == pytest.approx(0.5, abs=0.05)


def test_principal_curvatures_sphere_and_spheroid():
    ball = Ellipsoid.from_axes([1.0, 1.0, 1.0])
    d = Direction.from_vector([0.0, 0.0, 1.0])
    ks = principal_curvatures(ball, d)
    assert ks == pytest.approx([1.0, 1.0], abs=1e-5)
    # spheroid pole with equatorial radius a, polar radius c: kappa = c / a^2
    oblate = Ellipsoid.from_axes([2.0, 2.0, 1.0])
    assert principal_curvatures(oblate, d) == pytest.approx([0.25, 0.25], abs=1e-5)
    prolate = Ellipsoid.from_axes([1.0, 1.0, 2.0])
    assert principal_curvatures(prolate, d) == pytest.approx([2.0, 2.0], abs=1e-4)


def test_boundary_constant_matches_curvature_prediction():
    body = random_ellipsoid(3, seed=888)
    d = rand_dir(3, 889)
    rep = exponent_estimate(body, d, window=(1e-4, 1e-3))
    want = predicted_boundary_constant(body, d)
    assert rep.estimated_constant == pytest.approx(want, rel=0.02)


def test_exponent_rotation_stability():
    body = random_ellipsoid(3, seed=17)
    Q = random_rotation(3, seed=18)
    d = rand_dir(3, 19)
    a = exponent_estimate(body, d).estimated_exponent
    b = exponent_estimate(body.rotated(Q), Direction.from_vector(Q @ d.components)).estimated_exponent
    assert a == pytest.approx(b, abs=5e-3)


def test_exponent_estimate_unbounded_body():
    par = QuadricDomain("paraboloid", np.array([1.0, 1.0]))
    d = Direction.from_vector([0.0, 0.0, -1.0])
    rep = exponent_estimate(par, d, window=(1e-4, 1e-2))
    assert rep.estimated_exponent == pytest.approx(1.0, abs=0.05)


def test_exponent_window_validation():
    ball = Ellipsoid.from_axes([1.0, 1.0, 1.0])
    d = Direction.from_vector([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        exponent_estimate(ball, d, window=(1e-2, 1e-4))
    with pytest.raises(ValueError):
        exponent_estimate(ball, d, window=(1e-3, 0.5))
