import numpy as np
import pytest

from tomoslice.bodies import (
    Direction,
    Ellipsoid,
    Polytope,
    chord_interval,
    random_ellipsoid,
    random_rotation,
    random_simplex,
)
from tomoslice.detect import (
    EllipsoidReport,
    SectionConstantError,
    estimate_e,
    is_ellipsoid,
    quadratic_fit,
    section_consistency_check,
)
from tomoslice.sections import section_volume


def test_support_difference_recovers_double_center():
    body = random_ellipsoid(3, seed=5)
    e, res = estimate_e(body, num_directions=40, seed=1)
    assert e == pytest.approx(2.0 * body.center, abs=1e-10)
    assert res < 1e-10


def test_quadratic_fit_recovers_inverse_shape():
    body = random_ellipsoid(3, seed=6)
    e, _ = estimate_e(body, num_directions=40, seed=1)
    S, res = quadratic_fit(body, e, num_directions=60, seed=2)
    assert res < 1e-10
    assert np.linalg.inv(S) == pytest.approx(body.shape, rel=1e-8)


def test_accepts_random_ellipsoids():
    for seed in range(8):
        body = random_ellipsoid(3, seed=seed)
        rep = is_ellipsoid(body, seed=seed)
        assert isinstance(rep, EllipsoidReport)
        assert rep.verdict == "accept"
        assert rep.recovered_center == pytest.approx(body.center, abs=1e-8)
        assert rep.recovered_shape == pytest.approx(body.shape, rel=1e-6)


def test_accepts_in_other_dimensions():
    for n in (2, 4):
        body = random_ellipsoid(n, seed=10 + n)
        rep = is_ellipsoid(body, seed=3)
        assert rep.accepted
        assert rep.recovered_shape == pytest.approx(body.shape, rel=1e-6)


def test_rejects_cube_and_simplex():
    cube = Polytope.cube(3)
    rep = is_ellipsoid(cube, seed=0)
    assert rep.verdict == "reject"
    assert rep.quadratic_residual > 1e-2
    assert rep.recovered_shape is None
    simplex = random_simplex(3, seed=3)
    rep2 = is_ellipsoid(simplex, seed=0)
    assert rep2.verdict == "reject"
    assert rep2.quadratic_residual > 1e-2


def test_detection_rotation_equivariance():
    body = random_ellipsoid(3, seed=44)
    Q = random_rotation(3, seed=45)
    rep = is_ellipsoid(body, seed=7)
    rot = is_ellipsoid(body.rotated(Q), seed=7)
    assert rot.accepted
    assert rot.recovered_center == pytest.approx(Q @ rep.recovered_center, abs=1e-8)
    assert rot.recovered_shape == pytest.approx(
        Q @ rep.recovered_shape @ Q.T, rel=1e-6
    )


def test_detection_translation_equivariance():
    body = random_ellipsoid(3, seed=46)
    shift = np.array([0.9, -0.2, 0.4])
    rep = is_ellipsoid(body, seed=7)
    moved = is_ellipsoid(body.translated(shift), seed=7)
    assert moved.accepted
    assert moved.recovered_center == pytest.approx(rep.recovered_center + shift, abs=1e-10)
    assert moved.recovered_shape == pytest.approx(rep.recovered_shape, rel=1e-8)


def test_detection_scaling_rule():
    body = random_ellipsoid(3, seed=47)
    rep = is_ellipsoid(body, seed=7)
    scaled = is_ellipsoid(body.scaled(2.0), seed=7)
    assert scaled.accepted
    assert scaled.recovered_center == pytest.approx(2.0 * rep.recovered_center, abs=1e-10)
    assert scaled.recovered_shape == pytest.approx(0.25 * rep.recovered_shape, rel=1e-8)


def test_verdict_stable_across_seeds():
    body = random_ellipsoid(3, seed=48)
    cube = Polytope.cube(3)
    for seed in range(20):
        assert is_ellipsoid(body, seed=seed).accepted
        assert not is_ellipsoid(cube, seed=seed).accepted


def test_direction_budget_validation():
    body = random_ellipsoid(3, seed=2)
    with pytest.raises(ValueError):
        estimate_e(body, num_directions=4, seed=0)
    with pytest.raises(ValueError):
        quadratic_fit(body, np.zeros(3), num_directions=8, seed=0)


def test_recovered_body_reproduces_sections():
    body = random_ellipsoid(3, seed=51)
    rep = is_ellipsoid(body, seed=4)
    err = section_consistency_check(body, rep, num_probes=50, seed=0)
    assert err < 1e-6
    clone = rep.recovered_body()
    d = Direction.from_vector([0.2, -0.7, 0.5])
    lo, hi = chord_interval(body, d)
    t = 0.3 * lo + 0.7 * hi
    assert section_volume(clone, d, t) == pytest.approx(
        section_volume(body, d, t), rel=1e-8
    )


def test_section_consistency_rejects_varying_constant():
    cube = Polytope.cube(3)
    fake = is_ellipsoid(random_ellipsoid(3, seed=1), seed=0)
    with pytest.raises(SectionConstantError):
        section_consistency_check(cube, fake, num_probes=30, seed=0)


def test_report_serialization():
    rep = is_ellipsoid(random_ellipsoid(3, seed=9), seed=2)
    d = rep.to_dict()
    assert d["verdict"] == "accept"
    assert len(d["recovered_center"]) == 3
    assert d["seed"] == 2
