"""Warped products dt^2 + f(t)^2 |du|^2 over a flat fiber.

The boundary is t = 0 (and t = slab_length for slabs). Every t-line is a
boundary segment, and the 2-plane spanned by d/dt and a fixed fiber
direction is totally geodesic, so distances reduce to the model surface
with m = f.
"""
import enum
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from opentri.errors import (DomainError, IntegrationError, PreconditionError,
                            WindowExitError)
from opentri.logger import init_logger
from opentri.models.model_surface import (GeodesicStatus, ModelPoint,
                                          distance, integrate_geodesic)
from opentri.models.triangle import TriangleSides
from opentri.models.warping import WarpingFunction
from opentri.report import SampleRecord, VerificationReport
from opentri.utils import clamped_arccos

logger = init_logger(__name__)

_RTOL = 1e-12
_ATOL = 1e-12
_CERTIFICATE_TOL = 1e-9
_MAX_VARIATION_STEP = 0.5


class Fiber(enum.Enum):
    LINE = 'line'
    PLANE = 'plane'
    SLAB = 'slab'


class ManifoldPoint(NamedTuple):
    t: float
    u: Tuple[float, ...]


class TestManifold:

    __test__ = False

    def __init__(
        self,
        f: WarpingFunction,
        dim: int,
        fiber: Fiber,
        model: WarpingFunction,
        slab_length: Optional[float] = None,
        name: Optional[str] = None,
    ) -> None:
        assert dim in (2, 3)
        if fiber == Fiber.LINE:
            assert dim == 2
        if fiber == Fiber.PLANE:
            assert dim == 3
        if fiber == Fiber.SLAB:
            if slab_length is None or slab_length <= 0.0:
                raise ValueError(f'slab needs a positive length, got '
                                 f'{slab_length}.')
            if slab_length > f.domain_max:
                raise ValueError(f'slab length {slab_length} exceeds the '
                                 f'window {f.domain_max}.')
        self.f = f
        self.dim = dim
        self.fiber = fiber
        self.model = model
        self.slab_length = slab_length
        self.name = name if name is not None else f'{f.name}{dim}'
        m0, dm0, _ = f.evaluate(0.0)
        self.boundary_shape_eigenvalue = float(-dm0 / m0) + 0.0
        assert self.boundary_shape_eigenvalue >= 0.0, 'boundary not convex'

    @property
    def fiber_dim(self) -> int:
        return self.dim - 1

    @property
    def t_max(self) -> float:
        if self.fiber == Fiber.SLAB:
            return self.slab_length
        return self.f.domain_max

    def point(self, t: float, *u: float) -> ManifoldPoint:
        if len(u) != self.fiber_dim:
            raise ValueError(f'{self.name} needs {self.fiber_dim} fiber '
                             f'coordinates, got {len(u)}.')
        return ManifoldPoint(float(t), tuple(float(x) for x in u))

    def metric(self, t: float) -> np.ndarray:
        m, _, _ = self.f.evaluate(t)
        return np.diag([1.0] + [float(m) ** 2] * self.fiber_dim)

    def radial_curvature(self, t):
        """Sectional curvature of planes containing d/dt: -f''/f."""
        return self.f.radial_curvature(t)

    def check_point(self, p: ManifoldPoint) -> None:
        if not 0.0 <= p.t <= self.t_max or len(p.u) != self.fiber_dim:
            raise DomainError(f'{p} is not a point of {self.name}.')

    def __repr__(self) -> str:
        return (f'TestManifold(name={self.name}, dim={self.dim}, '
                f'fiber={self.fiber.value}, model={self.model.name})')


class ManifoldGeodesic:

    def __init__(
        self,
        M: TestManifold,
        start: ManifoldPoint,
        velocity: np.ndarray,
        total_length: float,
        status: GeodesicStatus,
        sol,
    ) -> None:
        self.M = M
        self.start = start
        self.velocity = velocity
        self.total_length = total_length
        self.status = status
        # Dense solution s -> (t, u_1.., t', u_1'..).
        self.sol = sol

    def state_at(self, s):
        if self.sol is None:
            state = np.concatenate([[self.start.t], self.start.u,
                                    self.velocity])
            if np.ndim(s) == 0:
                return state
            return np.repeat(state[:, None], np.size(s), axis=1)
        return self.sol(np.clip(s, 0.0, self.total_length))

    def point_at(self, s: float) -> ManifoldPoint:
        state = self.state_at(s)
        k = self.M.fiber_dim
        return ManifoldPoint(float(state[0]),
                             tuple(float(x) for x in state[1:1 + k]))

    def velocity_at(self, s: float) -> np.ndarray:
        return np.asarray(self.state_at(s)[1 + self.M.fiber_dim:])

    @property
    def endpoint(self) -> ManifoldPoint:
        return self.point_at(self.total_length)

    def samples(self, num: int = 201):
        s = np.linspace(0.0, self.total_length, num)
        return s, self.state_at(s)

    def momenta(self, num: int = 201) -> np.ndarray:
        """Fiber momenta f(t)^2 u_i' along the path, one row per i."""
        _, state = self.samples(num)
        k = self.M.fiber_dim
        m, _, _ = self.M.f.evaluate_even(state[0])
        return np.square(m) * state[2 + k:2 + 2 * k]

    def momentum_drift(self, num: int = 201) -> float:
        mom = self.momenta(num)
        return float(np.max(np.abs(mom - mom[:, :1])))

    def speed_drift(self, num: int = 201) -> float:
        _, state = self.samples(num)
        k = self.M.fiber_dim
        m, _, _ = self.M.f.evaluate_even(state[0])
        speed = (np.square(state[1 + k])
                 + np.square(m) * np.sum(np.square(state[2 + k:]), axis=0))
        return float(np.max(np.abs(speed - 1.0)))

    def __repr__(self) -> str:
        return (f'ManifoldGeodesic(start={self.start}, '
                f'length={self.total_length:.6g}, status={self.status.name})')


def _unit_check(M: TestManifold, p: ManifoldPoint, v: np.ndarray) -> None:
    if v.size != M.dim:
        raise ValueError(f'tangent needs {M.dim} components, got {v.size}.')
    m, _, _ = M.f.evaluate(p.t)
    norm = v[0] ** 2 + float(m) ** 2 * float(np.sum(v[1:] ** 2))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f'tangent is not unit: |v|^2 = {norm:.12g}.')


def integrate_manifold_geodesic(
    M: TestManifold,
    p: ManifoldPoint,
    v: Sequence[float],
    length: float,
) -> ManifoldGeodesic:
    """t'' = f f' |u'|^2, u'' = -2 (f'/f) t' u'; stops at the boundary."""
    M.check_point(p)
    v = np.asarray(v, dtype=float)
    _unit_check(M, p, v)
    if length < 0.0:
        raise ValueError(f'length must be non-negative, got {length}.')
    k = M.fiber_dim
    on_lower = p.t == 0.0 and v[0] < -1e-12
    on_upper = (M.fiber == Fiber.SLAB and p.t == M.slab_length
                and v[0] > 1e-12)
    if length == 0.0 or on_lower or on_upper:
        status = (GeodesicStatus.BOUNDARY_HIT if length
                  else GeodesicStatus.COMPLETE)
        return ManifoldGeodesic(M, p, v, 0.0, status, None)

    def rhs(s, z):
        m, dm, _ = M.f.evaluate_even(z[0])
        du = z[2 + k:]
        return np.concatenate([[z[1 + k]], du,
                               [m * dm * float(np.dot(du, du))],
                               -2.0 * (dm / m) * z[1 + k] * du])

    def hits_lower(s, z):
        return z[0]
    hits_lower.terminal = True
    hits_lower.direction = -1

    def hits_upper(s, z):
        return z[0] - M.t_max
    hits_upper.terminal = True
    hits_upper.direction = 1

    state0 = np.concatenate([[p.t], p.u, v])
    if p.t == 0.0 and abs(v[0]) <= 1e-12:
        # Boundary-tangent start: the boundary is totally geodesic.
        state0[1 + k] = 0.0
        events = [hits_upper]
    else:
        events = [hits_lower, hits_upper]
    sol = solve_ivp(rhs, (0.0, length), state0, method='DOP853', rtol=_RTOL,
                    atol=_ATOL, dense_output=True, events=events)
    if not sol.success:
        raise IntegrationError(f'geodesic integration failed: {sol.message}')

    status = GeodesicStatus.COMPLETE
    total = length
    upper = sol.t_events[-1]
    lower = sol.t_events[0] if len(events) == 2 else np.empty(0)
    if upper.size:
        if M.fiber != Fiber.SLAB:
            raise WindowExitError(float(upper[0]), M.t_max)
        status = GeodesicStatus.BOUNDARY_HIT
        total = float(upper[0])
    if lower.size:
        status = GeodesicStatus.BOUNDARY_HIT
        total = min(total, float(lower[0]))
    return ManifoldGeodesic(M, p, v, total, status, sol.sol)


def boundary_feet(M: TestManifold, p: ManifoldPoint) -> List[ManifoldPoint]:
    """Every nearest boundary point of p."""
    M.check_point(p)
    lower = ManifoldPoint(0.0, p.u)
    if M.fiber != Fiber.SLAB:
        return [lower]
    upper = ManifoldPoint(M.slab_length, p.u)
    half = 0.5 * M.slab_length
    if abs(p.t - half) <= 1e-12 * max(1.0, half):
        return [lower, upper]
    return [upper] if p.t > half else [lower]


def boundary_segment(
    M: TestManifold,
    p: ManifoldPoint,
) -> Tuple[ManifoldPoint, float]:
    """The boundary segment to p is the t-line: (foot, d(boundary, p))."""
    foot = boundary_feet(M, p)[0]
    g = M.metric(foot.t)
    # d/dt is orthogonal to every fiber direction at the foot.
    assert np.all(np.abs(g[0, 1:]) < 1e-10)
    return foot, abs(p.t - foot.t)


def _normal_sign(M: TestManifold, p: ManifoldPoint) -> float:
    """+1 when d/dt points away from the nearest boundary component at p."""
    foot = boundary_feet(M, p)[0]
    return 1.0 if foot.t == 0.0 else -1.0


def manifold_distance(
    M: TestManifold,
    p: ManifoldPoint,
    q: ManifoldPoint,
) -> Tuple[float, ManifoldGeodesic]:
    M.check_point(p)
    M.check_point(q)
    du = np.asarray(q.u) - np.asarray(p.u)
    gap = float(np.linalg.norm(du))
    length, chord = distance(ModelPoint(p.t, 0.0), ModelPoint(q.t, gap),
                             M.f)
    m, _, _ = M.f.evaluate(p.t)
    if gap > 0.0:
        direction = du / gap
    else:
        direction = np.zeros(M.fiber_dim)
    v = np.concatenate([[math.cos(chord.angle)],
                        math.sin(chord.angle) / float(m) * direction])
    g = integrate_manifold_geodesic(M, p, v, length)
    return length, g


class ManifoldOpenTriangle:

    def __init__(
        self,
        p: ManifoldPoint,
        q: ManifoldPoint,
        a: float,
        b: float,
        c: float,
        angle_p: float,
        angle_q: float,
        foot_gap: float,
        opposite_side: ManifoldGeodesic,
    ) -> None:
        self.p = p
        self.q = q
        self.a = a
        self.b = b
        self.c = c
        self.angle_p = angle_p
        self.angle_q = angle_q
        self.foot_gap = foot_gap
        self.opposite_side = opposite_side

    def sides(self) -> TriangleSides:
        return TriangleSides(self.a, self.b, self.c)

    def __repr__(self) -> str:
        return (f'ManifoldOpenTriangle(a={self.a:.6g}, b={self.b:.6g}, '
                f'c={self.c:.6g}, foot_gap={self.foot_gap:.6g})')


def open_triangle(
    M: TestManifold,
    p: ManifoldPoint,
    q: ManifoldPoint,
) -> ManifoldOpenTriangle:
    if p == q:
        raise ValueError('an open triangle needs p != q.')
    foot_p, a = boundary_segment(M, p)
    foot_q, c = boundary_segment(M, q)
    if a <= 0.0 or c <= 0.0:
        raise ValueError('vertices must be interior points.')
    b, chord = manifold_distance(M, p, q)
    start = chord.velocity_at(0.0)
    end = chord.velocity_at(chord.total_length)
    # Angles against the reversed boundary segments; fiber parts drop out.
    angle_p = clamped_arccos(-_normal_sign(M, p) * float(start[0]))
    angle_q = clamped_arccos(_normal_sign(M, q) * float(end[0]))
    if foot_p.t == foot_q.t:
        foot_gap = float(np.linalg.norm(np.asarray(foot_q.u)
                                        - np.asarray(foot_p.u)))
    else:
        foot_gap = math.nan
    return ManifoldOpenTriangle(p, q, a, b, c, angle_p, angle_q, foot_gap,
                                chord)


def curvature_bound_certificate(
    M: TestManifold,
    horizon: float,
    samples: int = 201,
) -> VerificationReport:
    """Radial curvature -f''/f against the model's G on [0, horizon]."""
    horizon = min(horizon, M.t_max, M.model.domain_max)
    t = np.linspace(0.0, horizon, samples)
    K = np.asarray(M.radial_curvature(t), dtype=float) * np.ones_like(t)
    G = (np.asarray(M.model.radial_curvature(t), dtype=float)
         * np.ones_like(t))
    records = [SampleRecord(i, {'t': float(t[i]), 'K': float(K[i]),
                                'G': float(G[i])},
                            {'slack_curvature': float(K[i] - G[i])})
               for i in range(samples)]
    return VerificationReport('curvature_bound', records, _CERTIFICATE_TOL)


def _boundary_distance(M: TestManifold, t: float) -> float:
    if M.fiber == Fiber.SLAB:
        return min(t, M.slab_length - t)
    return t


def variational_length(
    M: TestManifold,
    p: ManifoldPoint,
    theta: float,
    s: float,
    max_step: float = _MAX_VARIATION_STEP,
) -> float:
    """d(boundary, exp_p(s xi)) with xi at angle theta from the outward
    normal at p, tilted toward the first fiber direction; s < 0 runs
    along -xi.
    """
    M.check_point(p)
    if abs(s) > max_step:
        raise PreconditionError(f'step too large: |s|={abs(s)} > '
                                f'{max_step}.')
    if s == 0.0:
        return _boundary_distance(M, p.t)
    m, _, _ = M.f.evaluate(p.t)
    sign = _normal_sign(M, p)
    xi = np.zeros(M.dim)
    xi[0] = sign * math.cos(theta)
    xi[1] = math.sin(theta) / float(m)
    if s < 0.0:
        xi = -xi
    g = integrate_manifold_geodesic(M, p, xi, abs(s))
    if g.status == GeodesicStatus.BOUNDARY_HIT:
        raise PreconditionError(f'step too large: the geodesic reaches the '
                                f'boundary at s={g.total_length:.6g}.')
    return _boundary_distance(M, g.endpoint.t)


def model_variational_length(
    w: WarpingFunction,
    t: float,
    theta: float,
    s: float,
) -> float:
    """The same construction on the model surface from (t, 0)."""
    if s == 0.0:
        return t
    angle = theta if s > 0.0 else math.pi - theta
    g = integrate_geodesic(ModelPoint(t, 0.0), angle, abs(s), w,
                           y_dir=1 if s > 0.0 else -1)
    if g.status == GeodesicStatus.BOUNDARY_HIT:
        raise PreconditionError('step too large: the model geodesic reaches '
                                'the boundary.')
    return g.endpoint.x
