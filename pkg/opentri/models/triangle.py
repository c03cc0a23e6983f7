"""Open triangles of the model: two boundary segments and a chord."""
import math
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from opentri.errors import (GluingError, InvalidSidesError,
                            UnrealizableTriangleError)
from opentri.logger import init_logger
from opentri.models.model_surface import (ModelGeodesic, ModelPoint, distance,
                                          integrate_geodesic, shoot_batch)
from opentri.models.warping import WarpingFunction

logger = init_logger(__name__)

_FAN_SIZE = 64
_ROOT_XTOL = 1e-14
_DEGENERATE_TOL = 1e-12
_MATCH_TOL = 1e-7
_ANGLE_TOL = 1e-7
_MONOTONE_TOL = 1e-6
# Crossings this far above a vertex are solver noise, not a pin.
_PIN_TOL = 1e-9


class TriangleSides:

    def __init__(self, a: float, b: float, c: float) -> None:
        if not (a > 0.0 and c > 0.0):
            raise InvalidSidesError(
                f'vertices must be interior points, got a={a}, c={c}.')
        if not b > 0.0:
            raise InvalidSidesError(f'b must be positive, got {b}.')
        gap = b - abs(a - c)
        if gap < -_DEGENERATE_TOL * (1.0 + b):
            raise InvalidSidesError(
                f'|a - c| <= b violated: a={a}, b={b}, c={c}.')
        self.a = float(a)
        self.b = float(b)
        self.c = float(c)
        self.degenerate = gap <= _DEGENERATE_TOL * (1.0 + b)

    def reversed(self) -> 'TriangleSides':
        return TriangleSides(self.c, self.b, self.a)

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def __repr__(self) -> str:
        return f'TriangleSides(a={self.a}, b={self.b}, c={self.c})'


class TriangleRecord(NamedTuple):
    a: float
    b: float
    c: float
    angle_p: float
    angle_q: float
    theta: float
    degenerate: bool

    def as_dict(self) -> Dict[str, float]:
        return self._asdict()


class ModelOpenTriangle:

    def __init__(
        self,
        sides: TriangleSides,
        p: ModelPoint,
        q: ModelPoint,
        angle_p: float,
        angle_q: float,
        opposite_side: ModelGeodesic,
    ) -> None:
        self.sides = sides
        self.p = p
        self.q = q
        # Boundary coordinates of the feet of the two sides.
        self.foot_y1 = p.y
        self.foot_y2 = q.y
        self.angle_p = angle_p
        self.angle_q = angle_q
        self.base_gap = abs(q.y - p.y)
        self.opposite_side = opposite_side
        self.opposite_side_clear_of_boundary = (
            sides.degenerate or opposite_side.min_x() > 0.0)
        self.hypothesis_regime_exceeded = False

    @property
    def degenerate(self) -> bool:
        return self.sides.degenerate

    def record(self) -> TriangleRecord:
        return TriangleRecord(self.sides.a, self.sides.b, self.sides.c,
                              self.angle_p, self.angle_q, self.base_gap,
                              self.degenerate)

    def __repr__(self) -> str:
        return (f'ModelOpenTriangle(sides=({self.sides.a}, {self.sides.b}, '
                f'{self.sides.c}), theta={self.base_gap:.12g})')


def _degenerate_triangle(
    sides: TriangleSides,
    w: WarpingFunction,
) -> ModelOpenTriangle:
    a, b, c = sides
    p = ModelPoint(a, 0.0)
    # The chord runs along the ray through p.
    if a < c:
        angle_p, angle_q, heading = math.pi, 0.0, 0.0
    else:
        angle_p, angle_q, heading = 0.0, math.pi, math.pi
    chord = integrate_geodesic(p, heading, b, w)
    return ModelOpenTriangle(sides, p, ModelPoint(c, 0.0), angle_p, angle_q,
                             chord)


def build_model_triangle(
    sides: TriangleSides,
    w: WarpingFunction,
) -> ModelOpenTriangle:
    """Realize (a, b, c) with p = (a, 0) and q = (c, theta), theta >= 0.

    Geodesics of length b from p that end on the level x = c and stay in
    the half-plane land at distance <= b from p; the farthest landing point
    is the one at distance exactly b, by monotonicity of the distance along
    the level.
    """
    a, b, c = sides
    if max(a, c) > w.domain_max:
        raise UnrealizableTriangleError(
            f'unrealizable in window: {sides} exceeds {w.domain_max}.')
    if sides.degenerate:
        return _degenerate_triangle(sides, w)

    alphas = np.linspace(0.0, math.pi, _FAN_SIZE + 1)
    lengths = np.full(alphas.size, b)
    sol, _ = shoot_batch(a, alphas, lengths, w, dense=True)
    z = sol.sol(np.linspace(0.0, 1.0, 257)).reshape(6, alphas.size, -1)
    miss = z[0, :, -1] - c
    inside = np.abs(z[0]).max(axis=1) <= w.domain_max

    def residual(alpha: float) -> float:
        one, _ = shoot_batch(a, np.array([alpha]), np.array([b]), w)
        return float(one.y[0, -1]) - c

    best: Optional[ModelOpenTriangle] = None
    for i in range(alphas.size - 1):
        if not (inside[i] and inside[i + 1]):
            continue
        if miss[i] == 0.0:
            alpha = float(alphas[i])
        elif miss[i] * miss[i + 1] < 0.0:
            alpha = brentq(residual, alphas[i], alphas[i + 1],
                           xtol=_ROOT_XTOL)
        else:
            continue
        chord = integrate_geodesic(ModelPoint(a, 0.0), alpha, b, w)
        if chord.min_x() <= 0.0:
            continue
        end = chord.endpoint
        if best is None or end.y > best.q.y:
            q = ModelPoint(c, end.y)
            best = ModelOpenTriangle(sides, ModelPoint(a, 0.0), q,
                                     math.pi - alpha, chord.end_angle, chord)
    if best is None:
        raise UnrealizableTriangleError(
            f'unrealizable in window: no chord of length {b} from {a} '
            f'reaches the level {c}.')
    logger.debug(f'{sides} -> theta {best.base_gap:.12g}')
    return best


def theta(sides: TriangleSides, w: WarpingFunction) -> float:
    return build_model_triangle(sides, w).base_gap


def theta_lipschitz_probe(
    sides: TriangleSides,
    w: WarpingFunction,
    h: float,
) -> float:
    """Largest one-sided difference quotient of theta over steps of size h."""
    base = theta(sides, w)
    a, b, c = sides
    quotients = []
    for da, db, dc in ((h, 0, 0), (-h, 0, 0), (0, h, 0), (0, -h, 0),
                       (0, 0, h), (0, 0, -h)):
        moved = TriangleSides(a + da, b + db, c + dc)
        quotients.append(abs(theta(moved, w) - base) / h)
    return max(quotients)


def glue_triangles(
    t1: ModelOpenTriangle,
    t2: ModelOpenTriangle,
    w: WarpingFunction,
) -> ModelOpenTriangle:
    """Glue t1 and t2 along the shared boundary segment of q1 and p2."""
    if abs(t1.sides.c - t2.sides.a) > _MATCH_TOL:
        raise GluingError(
            f'side mismatch: d(q1)={t1.sides.c} but d(p2)={t2.sides.a}.')
    if t1.angle_q + t2.angle_p > math.pi + _ANGLE_TOL:
        raise GluingError(
            f'angle condition violated: {t1.angle_q} + {t2.angle_p} > pi.')
    glued = build_model_triangle(
        TriangleSides(t1.sides.a, t1.sides.b + t2.sides.b, t2.sides.c), w)
    slack_p = t1.angle_p - glued.angle_p
    slack_q = t2.angle_q - glued.angle_q
    if min(slack_p, slack_q) < -_MONOTONE_TOL:
        glued.hypothesis_regime_exceeded = True
        logger.warning(f'gluing enlarged an outer angle: slacks '
                       f'{slack_p:.3e}, {slack_q:.3e}; hypothesis regime '
                       f'exceeded')
    return glued


class GeneralizedOpenTriangle:

    def __init__(
        self,
        pieces: List[ModelOpenTriangle],
        offsets: List[float],
        contacts: List[ModelPoint],
        segments: List[ModelGeodesic],
        vertex_distance: float,
    ) -> None:
        self.pieces = pieces
        # Boundary coordinate of the left foot of each piece.
        self.offsets = offsets
        self.contacts = contacts
        self.segments = segments
        self.p_hat = contacts[0]
        self.q_hat = contacts[-1]
        self.shortcut_length = sum(g.total_length for g in segments)
        self.vertex_distance = vertex_distance
        self.chain_length = sum(t.sides.b for t in pieces)

    @property
    def angle_p(self) -> float:
        return math.pi - self.segments[0].angle

    @property
    def angle_q(self) -> float:
        return self.segments[-1].end_angle

    @property
    def foot_gap(self) -> float:
        return self.offsets[-1] - self.offsets[0]

    def __repr__(self) -> str:
        return (f'GeneralizedOpenTriangle(pieces={len(self.pieces)}, '
                f'shortcut={self.shortcut_length:.12g}, '
                f'chain={self.chain_length:.12g})')


def build_generalized_triangle(
    pieces: Sequence[TriangleSides],
    w: WarpingFunction,
) -> GeneralizedOpenTriangle:
    """Lay the pieces side by side and pull a string tight from p to q.

    The string starts as the geodesic from p to q; whenever a stretch
    passes above the top vertex of an interface it is pinned there, at the
    worst offender first, until every interface is crossed below its vertex.
    """
    if not pieces:
        raise ValueError('a chain needs at least one piece.')
    triangles = [build_model_triangle(s, w) for s in pieces]
    for i, (left, right) in enumerate(zip(triangles[:-1], triangles[1:])):
        if abs(left.sides.c - right.sides.a) > _MATCH_TOL:
            raise GluingError(f'interface {i + 1} mismatch: '
                              f'{left.sides.c} != {right.sides.a}.')
        if left.angle_q + right.angle_p > math.pi + _ANGLE_TOL:
            raise GluingError(f'angle-sum violation at interface {i + 1}.')

    offsets = [0.0]
    for t in triangles:
        offsets.append(offsets[-1] + t.base_gap)
    vertices = [ModelPoint(triangles[0].sides.a, 0.0)]
    vertices += [ModelPoint(t.sides.c, y) for t, y in
                 zip(triangles, offsets[1:])]

    pinned = [0, len(vertices) - 1]
    while True:
        segments: List[ModelGeodesic] = []
        worst, worst_index = 0.0, None
        for lo, hi in zip(pinned[:-1], pinned[1:]):
            _, g = distance(vertices[lo], vertices[hi], w)
            segments.append(g)
            for k in range(lo + 1, hi):
                s = g.first_crossing('y', vertices[k].y)
                if s is None:
                    continue
                excess = float(g.x_at(s)) - vertices[k].x
                if excess > max(worst, _PIN_TOL * max(1.0, vertices[k].x)):
                    worst, worst_index = excess, k
        if worst_index is None:
            break
        pinned = sorted(pinned + [worst_index])

    if len(pinned) == 2:
        vertex_distance = segments[0].total_length
    else:
        vertex_distance, _ = distance(vertices[0], vertices[-1], w)
    return GeneralizedOpenTriangle(triangles, offsets,
                                   [vertices[k] for k in pinned], segments,
                                   vertex_distance)
