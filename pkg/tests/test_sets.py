"""Projection, membership, and distance behavior of the set variants."""

import numpy as np
import pytest

from datacompat import Ball, Box, ConstraintFamily, Halfspace, Hyperplane, set_from_dict


def random_set(kind, rng, n):
    if kind == "halfspace":
        a = rng.normal(size=n)
        while np.linalg.norm(a) < 1e-6:
            a = rng.normal(size=n)
        return Halfspace(a, rng.normal())
    if kind == "box":
        lo = rng.uniform(-2, 0, size=n)
        return Box(lo, lo + rng.uniform(0, 3, size=n))
    if kind == "ball":
        return Ball(rng.normal(size=n), rng.uniform(0.2, 3.0))
    if kind == "hyperplane":
        a = rng.normal(size=n)
        while np.linalg.norm(a) < 1e-6:
            a = rng.normal(size=n)
        return Hyperplane(a, rng.normal())
    raise AssertionError(kind)


KINDS = ("halfspace", "box", "ball", "hyperplane")


def test_halfspace_projection_closed_form():
    hs = Halfspace([1.0, 0.0], 0.0)
    assert np.allclose(hs.project([2.0, 3.0]), [0.0, 3.0])
    # inside: unchanged bitwise
    x = np.array([-0.5, 7.0])
    assert hs.project(x) is not x
    assert np.array_equal(hs.project(x), x)


def test_box_projection_inside_identity():
    box = Box([0.0, 0.0], [1.0, 1.0])
    assert np.array_equal(box.project([0.4, 0.6]), [0.4, 0.6])
    assert np.allclose(box.project([2.0, -1.0]), [1.0, 0.0])


def test_ball_projection_radial():
    ball = Ball([0.0, 0.0], 1.0)
    assert np.allclose(ball.project([3.0, 4.0]), [0.6, 0.8])
    inner = np.array([0.3, -0.2])
    assert np.array_equal(ball.project(inner), inner)


def test_hyperplane_projection():
    hp = Hyperplane([1.0, 1.0], 0.0)
    assert np.allclose(hp.project([1.0, 1.0]), [0.0, 0.0])
    assert hp.distance([1.0, 1.0]) == pytest.approx(np.sqrt(2.0))


def test_contains_examples():
    assert Box([0.0, 0.0], [1.0, 1.0]).contains([1.0000000001, 0.5], tol=1e-9)
    assert not Halfspace([1.0, 1.0], 2.0).contains([2.0, 2.0], tol=0.0)
    assert Ball([0.0, 0.0], 1.0).contains([0.0, 0.0], tol=0.0)


def test_distance_examples():
    assert Box([0.0], [1.0]).distance([3.0]) == pytest.approx(2.0)
    assert Box([0.0], [1.0]).distance([0.5]) == 0.0


def test_batch_projection_matches_single():
    rng = np.random.default_rng(11)
    for kind in KINDS:
        for n in (1, 2, 3):
            s = random_set(kind, rng, n)
            pts = rng.uniform(-5, 5, size=(40, n))
            batch = s.project(pts)
            assert batch.shape == pts.shape
            for i in range(pts.shape[0]):
                assert np.allclose(batch[i], s.project(pts[i]), atol=1e-14)


def test_projection_idempotent():
    rng = np.random.default_rng(5)
    for kind in KINDS:
        s = random_set(kind, rng, 2)
        for _ in range(1000):
            x = rng.uniform(-6, 6, size=2)
            p = s.project(x)
            assert np.linalg.norm(s.project(p) - p) <= 1e-12


def test_projection_nonexpansive():
    rng = np.random.default_rng(6)
    for kind in KINDS:
        s = random_set(kind, rng, 3)
        for _ in range(500):
            x, y = rng.uniform(-6, 6, size=(2, 3))
            assert (np.linalg.norm(s.project(x) - s.project(y))
                    <= np.linalg.norm(x - y) + 1e-12)


def test_projection_variational_inequality():
    # <x - Px, z - Px> <= 0 for every member z characterizes the projection
    rng = np.random.default_rng(7)
    for kind in KINDS:
        s = random_set(kind, rng, 2)
        members = []
        while len(members) < 100:
            z = s.project(rng.uniform(-6, 6, size=2))
            members.append(z)
        for _ in range(50):
            x = rng.uniform(-6, 6, size=2)
            p = s.project(x)
            for z in members:
                assert float((x - p) @ (z - p)) <= 1e-9


def test_distance_zero_iff_contains():
    rng = np.random.default_rng(8)
    for kind in KINDS:
        s = random_set(kind, rng, 2)
        for _ in range(200):
            x = rng.uniform(-4, 4, size=2)
            assert (s.distance(x) == 0.0) == s.contains(x, tol=1e-12)


def test_degenerate_box_is_a_point():
    point = Box([0.5, -1.0], [0.5, -1.0])
    assert np.allclose(point.project([9.0, 9.0]), [0.5, -1.0])
    assert point.contains([0.5, -1.0], tol=0.0)


def test_invalid_constructions():
    with pytest.raises(ValueError):
        Halfspace([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        Box([1.0], [0.0])
    with pytest.raises(ValueError):
        Ball([0.0], 0.0)
    with pytest.raises(ValueError):
        Hyperplane([0.0], 1.0)
    with pytest.raises(ValueError):
        Box([0.0], [1.0]).project([1.0, 2.0])
    with pytest.raises(ValueError):
        Box([0.0], [1.0]).contains([0.5], tol=-1.0)


def test_family_weight_validation():
    sets = (Box([0.0], [1.0]), Box([2.0], [3.0]))
    fam = ConstraintFamily(sets, [0.5, 0.5])
    assert len(fam) == 2 and fam.dim == 1
    with pytest.raises(ValueError):
        ConstraintFamily(sets, [0.5, 0.4])
    with pytest.raises(ValueError):
        ConstraintFamily(sets, [1.5, -0.5])
    with pytest.raises(ValueError):
        ConstraintFamily((), [])
    with pytest.raises(ValueError):
        ConstraintFamily((Box([0.0], [1.0]), Box([0.0, 0.0], [1.0, 1.0])), [0.5, 0.5])
    uniform = ConstraintFamily.uniform(sets)
    assert np.allclose(uniform.weights, [0.5, 0.5])


def test_serialization_round_trip():
    rng = np.random.default_rng(9)
    for kind in KINDS:
        s = random_set(kind, rng, 2)
        clone = set_from_dict(s.to_dict())
        x = rng.uniform(-4, 4, size=2)
        assert np.array_equal(clone.project(x), s.project(x))
    with pytest.raises(ValueError):
        set_from_dict({"type": "cone"})


def test_box_corners():
    corners = Box([0.0, 0.0], [1.0, 2.0]).corners()
    assert corners.shape == (4, 2)
    assert {tuple(c) for c in corners} == {(0, 0), (0, 2), (1, 0), (1, 2)}
