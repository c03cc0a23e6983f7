"""Geodesics and distances on the model half-plane dx^2 + m(x)^2 dy^2.

Geodesics are integrated in second-order form on the even extension of m,
so the Clairaut square root never appears and shooting residuals stay
smooth across x = 0. Paths of the extension that dip below x = 0 are not
geodesics of the half-plane and are discarded by the distance solver.
"""
import csv
import enum
import math
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from opentri.errors import (DomainError, IntegrationError, NoGeodesicError,
                            TurningPointError, WindowExitError)
from opentri.logger import init_logger
from opentri.models.jacobi import first_zero, solve_jacobi
from opentri.models.profile import CurvatureProfile
from opentri.models.warping import WarpingFunction
from opentri.utils import Sign, clamped_arccos, format_float

logger = init_logger(__name__)

_RTOL = 1e-12
_ATOL = 1e-12
_FAN_SIZE = 32
_FAN_SAMPLES = 1024
_NEWTON_ITERS = 40
_NEWTON_TOL = 1e-11
_TIE_TOL = 1e-9
_DISTINCT_TOL = 1e-7
# Paths of the even extension below this level are rejected.
_BOUNDARY_SLACK = -1e-9


class ModelPoint(NamedTuple):
    x: float
    y: float


class ParallelArc(NamedTuple):
    """The arc of the level x = c, parametrized by y."""
    c: float
    s_start: float
    s_end: float

    def point_at(self, s: float) -> ModelPoint:
        return ModelPoint(self.c, s)

    def length(self, w: WarpingFunction) -> float:
        m, _, _ = w.evaluate(self.c)
        return float(m) * abs(self.s_end - self.s_start)


class GeodesicStatus(enum.Enum):
    COMPLETE = enum.auto()
    BOUNDARY_HIT = enum.auto()


class _Stationary:

    def __init__(self, state: np.ndarray) -> None:
        self.state = state

    def __call__(self, s):
        if np.ndim(s) == 0:
            return self.state.copy()
        return np.repeat(self.state[:, None], np.size(s), axis=1)


class _BoundaryLine:

    def __init__(self, y0: float, y_dir: int) -> None:
        self.y0 = y0
        self.y_dir = y_dir

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        zero = np.zeros_like(s)
        return np.stack([zero, zero, self.y0 + self.y_dir * s])


class ModelGeodesic:

    def __init__(
        self,
        start: ModelPoint,
        angle: float,
        clairaut: float,
        y_dir: int,
        total_length: float,
        status: GeodesicStatus,
        sol,
        turning_points: List[float],
        w: WarpingFunction,
    ) -> None:
        self.start = start
        self.angle = angle
        self.clairaut = clairaut
        self.y_dir = y_dir
        self.total_length = total_length
        self.status = status
        # Dense solution s -> (x, x', y).
        self.sol = sol
        self.turning_points = turning_points
        self.w = w

    def state_at(self, s):
        return self.sol(np.clip(s, 0.0, self.total_length))

    def x_at(self, s):
        return self.state_at(s)[0]

    def point_at(self, s: float) -> ModelPoint:
        x, _, y = self.state_at(s)
        return ModelPoint(float(x), float(y))

    @property
    def endpoint(self) -> ModelPoint:
        return self.point_at(self.total_length)

    def angle_at(self, s: float) -> float:
        """Angle of the tangent against +d/dx, in [0, pi]."""
        return clamped_arccos(float(self.state_at(s)[1]))

    @property
    def end_angle(self) -> float:
        return self.angle_at(self.total_length)

    def x_sign(self, s: Optional[float] = None) -> Sign:
        s = self.total_length if s is None else s
        v = float(self.state_at(s)[1])
        if abs(v) < 1e-14:
            return Sign.ZERO
        return Sign.UP if v > 0.0 else Sign.DOWN

    def samples(self, num: int = 201) -> Tuple[np.ndarray, np.ndarray]:
        s = np.linspace(0.0, self.total_length, num)
        return s, self.state_at(s)

    def path(self, num: int = 201):
        """(s, x, y, angle) along the geodesic."""
        s, state = self.samples(num)
        angle = np.arccos(np.clip(state[1], -1.0, 1.0))
        return s, state[0], state[2], angle

    def min_x(self, num: int = 513) -> float:
        _, state = self.samples(num)
        return float(np.min(state[0]))

    def clairaut_drift(self, num: int = 201) -> float:
        _, state = self.samples(num)
        m, _, _ = self.w.evaluate_even(state[0])
        sin = np.sqrt(np.maximum(0.0, 1.0 - np.square(state[1])))
        return float(np.max(np.abs(np.asarray(m) * sin - self.clairaut)))

    def speed_drift(self, num: int = 201) -> float:
        _, state = self.samples(num)
        m, _, _ = self.w.evaluate_even(state[0])
        speed = np.square(state[1]) + self.clairaut ** 2 / np.square(m)
        return float(np.max(np.abs(speed - 1.0)))

    def first_crossing(self, coord: str, level: float) -> Optional[float]:
        """First s > 0 where the x or y coordinate reaches level."""
        row = {'x': 0, 'y': 2}[coord]
        s, state = self.samples(max(201, int(50 * self.total_length) + 1))
        g = state[row] - level
        if g[0] == 0.0:
            return 0.0
        change = np.nonzero(g[:-1] * g[1:] <= 0.0)[0]
        if not change.size:
            return None
        i = int(change[0])
        if g[i + 1] == 0.0:
            return float(s[i + 1])
        return brentq(lambda t: float(self.state_at(t)[row]) - level,
                      s[i], s[i + 1], xtol=1e-13)

    def to_csv_rows(self, num: int = 201) -> List[Dict[str, str]]:
        s, x, y, angle = self.path(num)
        nu = format_float(self.clairaut)
        return [{'s': format_float(s_i), 'x': format_float(x_i),
                 'y': format_float(y_i), 'angle': format_float(a_i),
                 'nu': nu}
                for s_i, x_i, y_i, a_i in zip(s, x, y, angle)]

    def __repr__(self) -> str:
        return (f'ModelGeodesic(start={tuple(self.start)}, '
                f'angle={self.angle:.6g}, nu={self.clairaut:.6g}, '
                f'length={self.total_length:.6g}, status={self.status.name})')


def _check_point(p: ModelPoint, w: WarpingFunction) -> None:
    if not (0.0 <= p.x <= w.domain_max) or not math.isfinite(p.y):
        raise DomainError(f'{p} is outside the window of {w.name}.')


def clairaut_constant(x: float, angle: float, w: WarpingFunction) -> float:
    if not 0.0 <= angle <= math.pi:
        raise ValueError(f'angle must lie in [0, pi], got {angle}.')
    m, _, _ = w.evaluate(x)
    return float(m) * math.sin(angle)


def integrate_geodesic(
    p: ModelPoint,
    angle: float,
    length: float,
    w: WarpingFunction,
    y_dir: int = 1,
) -> ModelGeodesic:
    """Unit-speed geodesic from p leaving at angle against +d/dx.

    y_dir picks the side: y increases for +1 and decreases for -1. A
    transversal hit of x = 0 ends the geodesic with BOUNDARY_HIT.
    """
    p = ModelPoint(float(p[0]), float(p[1]))
    _check_point(p, w)
    if length < 0.0:
        raise ValueError(f'length must be non-negative, got {length}.')
    assert y_dir in (1, -1)
    nu = clairaut_constant(p.x, angle, w)
    v0 = math.cos(angle)
    state0 = np.array([p.x, v0, p.y])

    if length == 0.0 or (p.x == 0.0 and v0 < -1e-12):
        return ModelGeodesic(p, angle, nu, y_dir, 0.0,
                             GeodesicStatus.BOUNDARY_HIT if length else
                             GeodesicStatus.COMPLETE,
                             _Stationary(state0), [], w)
    if p.x == 0.0 and abs(v0) <= 1e-12:
        # Tangent to the boundary: the boundary line itself.
        return ModelGeodesic(p, angle, 1.0, y_dir, length,
                             GeodesicStatus.COMPLETE,
                             _BoundaryLine(p.y, y_dir), [], w)

    def rhs(s, z):
        m, dm, _ = w.evaluate_even(z[0])
        return [z[1], nu * nu * dm / m ** 3, y_dir * nu / m ** 2]

    def hits_boundary(s, z):
        return z[0]
    hits_boundary.terminal = True
    hits_boundary.direction = -1

    def turns(s, z):
        return z[1]

    def leaves_window(s, z):
        return z[0] - w.domain_max
    leaves_window.terminal = True
    leaves_window.direction = 1

    sol = solve_ivp(rhs, (0.0, length), state0, method='DOP853',
                    rtol=_RTOL, atol=_ATOL, dense_output=True,
                    events=[hits_boundary, turns, leaves_window])
    if not sol.success:
        raise IntegrationError(f'geodesic integration failed: {sol.message}')
    if sol.t_events[2].size:
        s_exit = float(sol.t_events[2][0])
        raise WindowExitError(s_exit, w.domain_max)

    status = GeodesicStatus.COMPLETE
    total = length
    if sol.t_events[0].size:
        status = GeodesicStatus.BOUNDARY_HIT
        total = float(sol.t_events[0][0])
    turning = [float(s) for s in sol.t_events[1] if s <= total]
    return ModelGeodesic(p, angle, nu, y_dir, total, status, sol.sol,
                         turning, w)


def length_between_parallels(
    nu: float,
    x1: float,
    x2: float,
    w: WarpingFunction,
) -> float:
    """Arclength of a monotone leg from level x1 to level x2."""
    lo, hi = min(x1, x2), max(x1, x2)
    if nu == 0.0 or hi == lo:
        return hi - lo
    t = np.linspace(lo, hi, 2001)[1:-1]
    m, _, _ = w.evaluate(t)
    if np.any(np.asarray(m) <= nu):
        raise TurningPointError(
            f'turning point inside leg [{lo}, {hi}] for nu={nu}')

    def integrand(t):
        m, _, _ = w.evaluate(t)
        return m / math.sqrt(max(m * m - nu * nu, 1e-300))

    value, _ = quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12,
                    limit=200)
    return float(value)


def length_lower_bound(
    nu: float,
    t1: float,
    t2: float,
    w: WarpingFunction,
) -> float:
    """t2 - t1 + (nu^2 / 2) * int_t1^t2 dt / (m sqrt(m^2 - nu^2))."""
    if t2 <= t1 or nu == 0.0:
        return t2 - t1
    t = np.linspace(t1, t2, 2001)
    m, _, _ = w.evaluate(t)
    if nu >= float(np.min(m)):
        return t2 - t1

    def integrand(t):
        m, _, _ = w.evaluate(t)
        return 1.0 / (m * math.sqrt(m * m - nu * nu))

    value, _ = quad(integrand, t1, t2, epsabs=1e-13, epsrel=1e-12,
                    limit=200)
    return t2 - t1 + 0.5 * nu * nu * float(value)


def shoot_batch(
    x0: float,
    alphas: np.ndarray,
    lengths: np.ndarray,
    w: WarpingFunction,
    dense: bool = False,
):
    """Integrate a batch of geodesics from (x0, 0) with the variational
    equations in alpha, on normalized time tau in [0, 1].

    Rows of the state: x, x', y, dx/da, dx'/da, dy/da.
    """
    n = alphas.size
    m0, _, _ = w.evaluate(x0)
    nu = m0 * np.sin(alphas)
    nu_a = m0 * np.cos(alphas)
    z0 = np.concatenate([np.full(n, x0), np.cos(alphas), np.zeros(n),
                         np.zeros(n), -np.sin(alphas), np.zeros(n)])

    def rhs(tau, flat):
        z = flat.reshape(6, n)
        m, dm, ddm = w.evaluate_even(z[0])
        inv = 1.0 / np.asarray(m, dtype=float)
        inv3 = inv ** 3
        f_x = nu * nu * (ddm * inv3 - 3.0 * dm * dm * inv3 * inv)
        f_nu = 2.0 * nu * dm * inv3
        out = np.stack([
            z[1],
            nu * nu * dm * inv3,
            nu * inv * inv,
            z[4],
            f_x * z[3] + f_nu * nu_a,
            -2.0 * nu * dm * inv3 * z[3] + nu_a * inv * inv,
        ])
        return (out * lengths).ravel()

    sol = solve_ivp(rhs, (0.0, 1.0), z0, method='DOP853', rtol=_RTOL,
                    atol=_ATOL, dense_output=dense)
    if not sol.success:
        raise IntegrationError(f'shooting failed: {sol.message}')
    return sol, nu


def _fan_seeds(
    x1: float,
    x2: float,
    dy: float,
    s_max: float,
    w: WarpingFunction,
) -> Tuple[List[float], List[float]]:
    alphas = (np.arange(_FAN_SIZE) + 0.5) * math.pi / _FAN_SIZE
    sol, _ = shoot_batch(x1, alphas, np.full(_FAN_SIZE, s_max), w,
                         dense=True)
    tau = np.linspace(0.0, 1.0, _FAN_SAMPLES + 1)
    z = sol.sol(tau).reshape(6, _FAN_SIZE, -1)
    x, y = z[0], z[2]

    miss = np.full(_FAN_SIZE, np.nan)
    s_hit = np.full(_FAN_SIZE, np.nan)
    for i in range(_FAN_SIZE):
        reached = np.nonzero(y[i] >= dy)[0]
        if not reached.size:
            continue
        j = int(reached[0])
        if np.any(np.abs(x[i, :j + 1]) > w.domain_max):
            continue
        frac = (dy - y[i, j - 1]) / (y[i, j] - y[i, j - 1])
        x_hit = x[i, j - 1] + frac * (x[i, j] - x[i, j - 1])
        miss[i] = x_hit - x2
        s_hit[i] = s_max * (tau[j - 1] + frac * (tau[j] - tau[j - 1]))

    seeds_a: List[float] = []
    seeds_s: List[float] = []
    for i in range(_FAN_SIZE - 1):
        g0, g1 = miss[i], miss[i + 1]
        if np.isnan(g0) or np.isnan(g1):
            continue
        if g0 * g1 <= 0.0:
            frac = 0.5 if g0 == g1 else g0 / (g0 - g1)
            seeds_a.append(alphas[i] + frac * (alphas[i + 1] - alphas[i]))
            seeds_s.append(s_hit[i] + frac * (s_hit[i + 1] - s_hit[i]))
    # Near-tangential misses can hide a pair of roots between fan members.
    scale = 0.05 * (1.0 + x2)
    for i in range(1, _FAN_SIZE - 1):
        g = abs(miss[i])
        if np.isnan(g) or g > scale:
            continue
        if g <= abs(miss[i - 1]) and g <= abs(miss[i + 1]):
            seeds_a.append(alphas[i])
            seeds_s.append(s_hit[i])
    return seeds_a, seeds_s


def _newton(
    x1: float,
    x2: float,
    dy: float,
    alphas: np.ndarray,
    lengths: np.ndarray,
    w: WarpingFunction,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Newton on (alpha, s) for the end condition (x2, dy), step-limited."""
    alphas = alphas.copy()
    lengths = lengths.copy()
    alive = np.ones(alphas.size, dtype=bool)
    converged = np.zeros(alphas.size, dtype=bool)
    for _ in range(_NEWTON_ITERS):
        sol, nu = shoot_batch(x1, alphas, lengths, w)
        z = sol.y[:, -1].reshape(6, alphas.size)
        m, _, _ = w.evaluate_even(z[0])
        r_x = z[0] - x2
        r_y = z[2] - dy
        converged = alive & (np.maximum(np.abs(r_x), np.abs(r_y))
                             < _NEWTON_TOL * (1.0 + lengths))
        todo = alive & ~converged
        if not np.any(todo):
            break
        a, b = z[3], z[1]
        c, d = z[5], nu / np.square(np.asarray(m, dtype=float))
        det = a * d - b * c
        with np.errstate(divide='ignore', invalid='ignore'):
            step_a = np.clip(-(d * r_x - b * r_y) / det, -0.25, 0.25)
            step_s = np.clip(-(a * r_y - c * r_x) / det,
                             -0.5 * lengths, 0.5 * lengths + 1.0)
        alphas[todo] += step_a[todo]
        lengths[todo] += step_s[todo]
        bad = todo & (~np.isfinite(alphas) | ~np.isfinite(lengths)
                      | (alphas <= 0.0) | (alphas >= math.pi)
                      | (lengths <= 0.0))
        alive &= ~bad
        # Dropped candidates ride along on a short, harmless geodesic.
        alphas[bad] = 0.5 * math.pi
        lengths[bad] = 1e-3
    return alphas, lengths, converged


def _path_bounds(
    x1: float,
    alphas: np.ndarray,
    lengths: np.ndarray,
    w: WarpingFunction,
) -> Tuple[np.ndarray, np.ndarray]:
    sol, _ = shoot_batch(x1, alphas, lengths, w, dense=True)
    z = sol.sol(np.linspace(0.0, 1.0, 513)).reshape(6, alphas.size, -1)
    return z[0].min(axis=1), np.abs(z[0]).max(axis=1)


def _shooting_candidates(
    x1: float,
    x2: float,
    dy: float,
    w: WarpingFunction,
) -> Tuple[np.ndarray, np.ndarray]:
    """(alphas, lengths) of every converged geodesic from (x1, 0) to
    (x2, dy) that stays in the half-plane and the window."""
    m1, _, _ = w.evaluate(x1)
    m2, _, _ = w.evaluate(x2)
    s_max = 1.05 * min(x1 + x2 + dy, abs(x1 - x2) + min(m1, m2) * dy)

    seeds_a, seeds_s = _fan_seeds(x1, x2, dy, s_max, w)
    m_mid, _, _ = w.evaluate(0.5 * (x1 + x2))
    seeds_a.append(math.atan2(m_mid * dy, x2 - x1))
    seeds_s.append(math.hypot(x2 - x1, m_mid * dy))

    alphas, lengths, ok = _newton(x1, x2, dy, np.array(seeds_a),
                                  np.array(seeds_s), w)
    diagnostics = {'x1': x1, 'x2': x2, 'dy': dy, 'seeds': len(seeds_a),
                   'converged': int(np.sum(ok))}
    if not np.any(ok):
        raise NoGeodesicError('shooting did not converge', diagnostics)
    alphas, lengths = alphas[ok], lengths[ok]
    min_x, max_x = _path_bounds(x1, alphas, lengths, w)
    valid = (min_x >= _BOUNDARY_SLACK) & (max_x <= w.domain_max)
    if not np.any(valid):
        diagnostics['min_x'] = float(np.max(min_x))
        raise NoGeodesicError('every candidate leaves the half-plane',
                              diagnostics)
    logger.debug(f'shooting ({x1}, {x2}, {dy}): {len(seeds_a)} seeds, '
                 f'{int(np.sum(valid))} valid')
    return alphas[valid], lengths[valid]


def _model_distance(
    x1: float,
    x2: float,
    dy: float,
    w: WarpingFunction,
) -> Tuple[float, float]:
    """(length, alpha) of the shortest geodesic from (x1, 0) to (x2, dy)."""
    alphas, lengths = _shooting_candidates(x1, x2, dy, w)
    best = float(np.min(lengths))
    tied = np.nonzero(lengths <= best + _TIE_TOL)[0]
    # Ties at the cut locus go to the smaller Clairaut constant.
    pick = tied[np.argmin(np.sin(alphas[tied]))]
    return float(lengths[pick]), float(alphas[pick])


def shooting_solutions(
    p: ModelPoint,
    q: ModelPoint,
    w: WarpingFunction,
) -> List[Tuple[float, float]]:
    """Distinct geodesics from p to q as (length, angle), shortest first.

    Angles are measured at p as in integrate_geodesic with y_dir pointing
    from p toward q.
    """
    _check_point(p, w)
    _check_point(q, w)
    dy = abs(q.y - p.y)
    if dy <= 1e-14 * max(1.0, abs(p.y)):
        return [(abs(q.x - p.x), 0.0 if q.x >= p.x else math.pi)]
    alphas, lengths = _shooting_candidates(p.x, q.x, dy, w)
    order = np.argsort(lengths, kind='stable')
    solutions: List[Tuple[float, float]] = []
    for i in order:
        alpha = float(alphas[i])
        if any(abs(alpha - other) < _DISTINCT_TOL
               for _, other in solutions):
            continue
        solutions.append((float(lengths[i]), alpha))
    return solutions


def distance(
    p: ModelPoint,
    q: ModelPoint,
    w: WarpingFunction,
) -> Tuple[float, ModelGeodesic]:
    p = ModelPoint(float(p[0]), float(p[1]))
    q = ModelPoint(float(q[0]), float(q[1]))
    _check_point(p, w)
    _check_point(q, w)
    dy = abs(q.y - p.y)
    y_dir = 1 if q.y >= p.y else -1
    if dy <= 1e-14 * max(1.0, abs(p.y)):
        length = abs(q.x - p.x)
        angle = 0.0 if q.x >= p.x else math.pi
        return length, integrate_geodesic(p, angle, length, w)

    length, alpha = _model_distance(p.x, q.x, dy, w)
    g = integrate_geodesic(p, alpha, length, w, y_dir=y_dir)
    end = g.endpoint
    miss = math.hypot(end.x - q.x, end.y - q.y)
    if miss > 1e-7 * (1.0 + length):
        logger.warning(f'geodesic from {tuple(p)} ends {miss:.3e} away '
                       f'from {tuple(q)}')
    return length, g


def distance_to_parallel(
    p: ModelPoint,
    c: float,
    s: float,
    w: WarpingFunction,
) -> float:
    """d(p, (c, s)): the distance to a point of the level x = c."""
    arc = ParallelArc(c, p.y, s)
    length, _ = distance(p, arc.point_at(s), w)
    return length


def conjugate_point_search(
    g: ModelGeodesic,
    w: WarpingFunction,
) -> Optional[float]:
    """First zero of the normal Jacobi field J(0) = 0, J'(0) = 1 along g."""
    if g.total_length == 0.0:
        return None
    K = CurvatureProfile(fn=lambda s: w.curvature_even(g.x_at(s)),
                         name='along-geodesic')
    return first_zero(solve_jacobi(K, 0.0, 1.0, g.total_length))


def geodesic_to_csv(g: ModelGeodesic, path: str, num: int = 201) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=['s', 'x', 'y', 'angle', 'nu'])
        writer.writeheader()
        writer.writerows(g.to_csv_rows(num))
