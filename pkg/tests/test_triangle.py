import math
import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from opentri.errors import (GluingError, InvalidSidesError,
                            UnrealizableTriangleError)
from opentri.models.triangle import (TriangleSides, build_generalized_triangle,
                                     build_model_triangle, glue_triangles,
                                     theta, theta_lipschitz_probe)
from opentri.models.warping import WarpingFunction

EUCLIDEAN = WarpingFunction.euclidean()
HYPERBOLIC = WarpingFunction.hyperbolic()
GAUSS = WarpingFunction.gauss()


def _hyperbolic_theta(a: float, b: float, c: float) -> float:
    return math.acosh((math.cosh(b) + math.sinh(a) * math.sinh(c))
                      / (math.cosh(a) * math.cosh(c)))


@pytest.mark.parametrize('a, b, c', [
    (0.0, 1.0, 1.0),
    (1.0, 0.0, 1.0),
    (1.0, 1.0, 3.0),
])
def test_invalid_sides(a: float, b: float, c: float) -> None:
    with pytest.raises(InvalidSidesError):
        TriangleSides(a, b, c)


def test_flat_example() -> None:
    tri = build_model_triangle(TriangleSides(1.0, 5.0, 4.0), EUCLIDEAN)
    assert tri.base_gap == pytest.approx(4.0, abs=1e-8)
    assert tri.angle_p == pytest.approx(math.pi - math.atan(4.0 / 3.0),
                                        abs=1e-8)
    assert tri.angle_q == pytest.approx(math.acos(3.0 / 5.0), abs=1e-8)
    assert tri.opposite_side_clear_of_boundary
    assert not tri.degenerate
    record = tri.record()
    assert record.theta == tri.base_gap
    assert record.as_dict()['degenerate'] is False


def test_theta_example() -> None:
    assert theta(TriangleSides(3.0, 5.0, 6.0), EUCLIDEAN) == pytest.approx(
        4.0, abs=1e-8)


@given(a=st.floats(0.2, 3.0), c=st.floats(0.2, 3.0), extra=st.floats(0.05,
                                                                      3.0))
@settings(max_examples=50, deadline=None)
def test_euclidean_theta(a: float, c: float, extra: float) -> None:
    b = abs(a - c) + extra
    assume(b > 0.0)
    assert theta(TriangleSides(a, b, c), EUCLIDEAN) == pytest.approx(
        math.sqrt(b * b - (a - c) ** 2), abs=1e-8)


@pytest.mark.parametrize('a, b, c', [
    (1.0, 1.5, 1.2),
    (0.4, 2.0, 1.8),
    (2.0, 1.0, 1.5),
])
def test_hyperbolic_theta(a: float, b: float, c: float) -> None:
    assert theta(TriangleSides(a, b, c), HYPERBOLIC) == pytest.approx(
        _hyperbolic_theta(a, b, c), abs=1e-8)


@pytest.mark.parametrize('w', [EUCLIDEAN, HYPERBOLIC, GAUSS])
def test_theta_symmetry(w: WarpingFunction) -> None:
    sides = TriangleSides(0.5, 0.8, 0.9)
    assert theta(sides, w) == pytest.approx(theta(sides.reversed(), w),
                                            abs=1e-8)


@pytest.mark.parametrize('w', [EUCLIDEAN, HYPERBOLIC])
def test_theta_monotone_in_b(w: WarpingFunction) -> None:
    values = [theta(TriangleSides(1.0, b, 1.3), w) for b in (0.5, 1.0, 1.5)]
    assert values[0] < values[1] < values[2]


@pytest.mark.parametrize('a, c, angle_p, angle_q', [
    (1.0, 3.0, math.pi, 0.0),
    (3.0, 1.0, 0.0, math.pi),
])
def test_degenerate_triangle(a, c, angle_p, angle_q) -> None:
    tri = build_model_triangle(TriangleSides(a, 2.0, c), HYPERBOLIC)
    assert tri.degenerate
    assert tri.base_gap == 0.0
    assert tri.angle_p == angle_p
    assert tri.angle_q == angle_q


def test_unrealizable_in_window() -> None:
    w = WarpingFunction.euclidean(domain_max=5.0)
    with pytest.raises(UnrealizableTriangleError):
        build_model_triangle(TriangleSides(6.0, 1.0, 6.5), w)


def test_theta_lipschitz_probe() -> None:
    # Flat theta = sqrt(b^2 - (a - c)^2) has gradient norm b / theta.
    probe = theta_lipschitz_probe(TriangleSides(1.0, 2.0, 1.0), EUCLIDEAN,
                                  1e-4)
    assert probe == pytest.approx(1.0, abs=1e-3)


def test_glue_straight_triangles() -> None:
    t1 = build_model_triangle(TriangleSides(1.0, math.sqrt(2.0), 2.0),
                              EUCLIDEAN)
    t2 = build_model_triangle(TriangleSides(2.0, math.sqrt(2.0), 3.0),
                              EUCLIDEAN)
    glued = glue_triangles(t1, t2, EUCLIDEAN)
    assert glued.base_gap == pytest.approx(2.0, abs=1e-8)
    assert not glued.hypothesis_regime_exceeded


def test_glue_side_mismatch() -> None:
    t1 = build_model_triangle(TriangleSides(1.0, 1.5, 2.0), EUCLIDEAN)
    t2 = build_model_triangle(TriangleSides(2.5, 1.5, 3.0), EUCLIDEAN)
    with pytest.raises(GluingError):
        glue_triangles(t1, t2, EUCLIDEAN)


def test_generalized_single_piece() -> None:
    sides = TriangleSides(1.0, 2.0, 1.5)
    chain = build_generalized_triangle([sides], HYPERBOLIC)
    piece = build_model_triangle(sides, HYPERBOLIC)
    assert chain.shortcut_length == pytest.approx(2.0, abs=1e-8)
    assert chain.vertex_distance == pytest.approx(2.0, abs=1e-8)
    assert chain.foot_gap == pytest.approx(piece.base_gap, abs=1e-12)
    assert chain.angle_p == pytest.approx(piece.angle_p, abs=1e-7)
    assert chain.angle_q == pytest.approx(piece.angle_q, abs=1e-7)


def test_generalized_straight_chain() -> None:
    pieces = [TriangleSides(1.0, math.sqrt(2.0), 2.0),
              TriangleSides(2.0, math.sqrt(2.0), 3.0)]
    chain = build_generalized_triangle(pieces, EUCLIDEAN)
    assert len(chain.contacts) == 2
    assert chain.shortcut_length == pytest.approx(2.0 * math.sqrt(2.0),
                                                  abs=1e-8)
    assert chain.chain_length == pytest.approx(2.0 * math.sqrt(2.0))


def test_generalized_bent_chain() -> None:
    pieces = [TriangleSides(1.0, math.sqrt(2.0), 2.0),
              TriangleSides(2.0, math.sqrt(2.0), 1.0)]
    chain = build_generalized_triangle(pieces, EUCLIDEAN)
    assert chain.foot_gap == pytest.approx(2.0, abs=1e-8)
    assert chain.vertex_distance == pytest.approx(2.0, abs=1e-8)
    assert chain.shortcut_length <= chain.chain_length
    assert chain.shortcut_length >= chain.vertex_distance - 1e-9


def test_generalized_angle_violation() -> None:
    pieces = [TriangleSides(2.0, math.sqrt(2.0), 1.0),
              TriangleSides(1.0, math.sqrt(2.0), 2.0)]
    with pytest.raises(GluingError):
        build_generalized_triangle(pieces, EUCLIDEAN)


@pytest.mark.parametrize('a, c', [(0.3, 1.0), (1.0, 1.0), (2.0, 0.5),
                                  (1.5, 2.0)])
@pytest.mark.parametrize('extra', [0.1, 1.0, 3.0])
def test_theta_grid(a: float, c: float, extra: float) -> None:
    sides = TriangleSides(a, abs(a - c) + extra, c)
    assert theta(sides, EUCLIDEAN) == pytest.approx(
        math.sqrt(sides.b ** 2 - (a - c) ** 2), abs=1e-8)
    assert theta(sides, HYPERBOLIC) == pytest.approx(
        _hyperbolic_theta(a, sides.b, c), abs=1e-8)


def test_glue_hyperbolic_triangles() -> None:
    rng = random.Random(3)
    glued_any = False
    for _ in range(6):
        a, e = rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)
        # The shared vertex sits above both ends.
        c = rng.uniform(1.6, 2.0)
        b1 = abs(a - c) + rng.uniform(0.2, 1.0)
        b2 = abs(c - e) + rng.uniform(0.2, 1.0)
        t1 = build_model_triangle(TriangleSides(a, b1, c), HYPERBOLIC)
        t2 = build_model_triangle(TriangleSides(c, b2, e), HYPERBOLIC)
        if t1.angle_q + t2.angle_p > math.pi:
            continue
        glued = glue_triangles(t1, t2, HYPERBOLIC)
        assert glued.base_gap == pytest.approx(
            _hyperbolic_theta(a, b1 + b2, e), abs=1e-8)
        glued_any = True
    assert glued_any
