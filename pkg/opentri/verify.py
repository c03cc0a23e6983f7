"""Numerical certification of the comparison statements on test manifolds.

Every check draws its samples from per-sample random streams and runs them
through the scheduler. Sample functions take (M, params, sample_id,
**context) and return one SampleRecord; they stay at module level so that
worker processes can unpickle them.

All outputs are numerical evidence with explicit tolerances.
"""
import itertools
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from opentri.config import VerifyParams
from opentri.errors import (NoGeodesicError, PreconditionError, SamplingError,
                            WindowExitError)
from opentri.logger import init_logger
from opentri.master.scheduler import Scheduler
from opentri.models.manifold import (Fiber, ManifoldOpenTriangle,
                                     ManifoldPoint, TestManifold,
                                     boundary_feet, boundary_segment,
                                     curvature_bound_certificate,
                                     integrate_manifold_geodesic,
                                     manifold_distance,
                                     model_variational_length, open_triangle,
                                     variational_length)
from opentri.models.model_surface import (GeodesicStatus, ModelPoint,
                                          conjugate_point_search,
                                          integrate_geodesic,
                                          shooting_solutions)
from opentri.models.model_utils import get_manifold
from opentri.models.triangle import (TriangleSides, build_generalized_triangle,
                                     build_model_triangle, theta)
from opentri.models.warping import (SPLITTING_NOTE, SplittingClass,
                                    WarpingFunction, lambda_perturbed,
                                    sector_conditions, splitting_class)
from opentri.report import SampleRecord, VerificationReport
from opentri.utils import Counter, sample_rng
from opentri.worker.controller import Controller
from opentri.worker.worker import SampleTask

logger = init_logger(__name__)

HEURISTIC_NOTE = 'numerical heuristic'
NO_SPLITTING_NOTE = 'no splitting conclusion'
REGIME_NOTE = 'hypothesis regime exceeded'

# Geometric solves are converged to this level.
_GEOMETRIC_TOL = 1e-9
_DEGENERATE_ANGLE = 1e-3
_MIN_OFFSET = 0.1
_OFFSET_FRACTION = 0.8
_MAX_DRAWS = 50
_FD_STEP = 1e-4
_FD_TOL = 1e-5
_PHI_FD_TOL = 1e-4
_REFINEMENT_TOL = 1e-4
_LEVEL_TOL = 1e-8
_LEVEL_LENGTH = 5.0
_FOOT_FAN = 61
_FOOT_TOL = 1e-6
_SLAB_OFFSETS = (-0.5, 0.0, 0.5)
_SAME_WARPING_TOL = 1e-12


def _resolve(
    params: Optional[VerifyParams],
    n_samples: Optional[int],
    tol: Optional[float],
) -> VerifyParams:
    params = params if params is not None else VerifyParams()
    if n_samples is None and tol is None:
        return params
    values = vars(params).copy()
    if n_samples is not None:
        values['n'] = n_samples
    if tol is not None:
        values['tol'] = tol
    return VerifyParams(**values)


def _run(
    check: str,
    fn,
    subject,
    params: VerifyParams,
    context: Optional[Dict] = None,
    notes: Optional[List[str]] = None,
    n: Optional[int] = None,
) -> VerificationReport:
    task = SampleTask(fn, subject, params, context or {})
    scheduler = Scheduler(Controller(params.workers))
    return scheduler.run(check, task, params.n if n is None else n,
                         params.tol, notes=notes)


def _random_direction(k: int, rng: np.random.Generator) -> np.ndarray:
    if k == 1:
        return np.array([1.0])
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([math.cos(phi), math.sin(phi)])


def _draw_triangle(
    M: TestManifold,
    params: VerifyParams,
    rng: np.random.Generator,
    width: float,
) -> ManifoldOpenTriangle:
    """A non-degenerate open triangle with both feet on t = 0 and foot gap
    inside the certified sector."""
    lo, hi = params.t_range
    hi = min(hi, M.t_max)
    top = _OFFSET_FRACTION * width
    bottom = min(_MIN_OFFSET, 0.5 * top)
    for _ in range(_MAX_DRAWS):
        t_p, t_q = rng.uniform(lo, hi, size=2)
        offset = rng.uniform(bottom, top)
        direction = _random_direction(M.fiber_dim, rng)
        p = M.point(t_p, *np.zeros(M.fiber_dim))
        q = M.point(t_q, *(offset * direction))
        tri = open_triangle(M, p, q)
        margin = min(tri.angle_p, math.pi - tri.angle_p,
                     tri.angle_q, math.pi - tri.angle_q)
        if margin > _DEGENERATE_ANGLE:
            return tri
        logger.debug(f'rejected nearly degenerate triangle {tri}')
    raise SamplingError(f'no non-degenerate triangle after {_MAX_DRAWS} '
                       f'draws.')


def _triangle_values(tri: ManifoldOpenTriangle) -> Dict[str, float]:
    return {'a': tri.a, 'b': tri.b, 'c': tri.c}


def _require_open_half(M: TestManifold, check: str) -> None:
    if M.fiber == Fiber.SLAB:
        raise PreconditionError(f'{check} runs on half-space manifolds, '
                                f'not on {M.name}.')


def _require_curvature_bound(M: TestManifold, params: VerifyParams) -> None:
    certificate = curvature_bound_certificate(M, params.t_range[1])
    if not certificate.passed:
        worst = min(certificate.records, key=lambda r: r.min_slack())
        raise PreconditionError(
            f'K < G on {M.name} against {M.model.name} at '
            f't={worst.values["t"]:.6g}.')


def same_warping(f: WarpingFunction, m: WarpingFunction) -> bool:
    horizon = min(f.domain_max, m.domain_max)
    t = np.linspace(0.0, horizon, 2001)
    f_vals = np.asarray(f.evaluate(t)[0], dtype=float) * np.ones_like(t)
    m_vals = np.asarray(m.evaluate(t)[0], dtype=float) * np.ones_like(t)
    return bool(np.all(np.abs(f_vals - m_vals)
                       <= _SAME_WARPING_TOL * np.maximum(1.0, m_vals)))


# Sector surrogate.

def certify_sector(
    w: WarpingFunction,
    width: float,
    t_range: Tuple[float, float] = (0.2, 3.0),
    num_starts: int = 3,
    num_angles: int = 32,
    grid: int = 16,
) -> Tuple[float, VerificationReport]:
    """Largest width <= the requested one with no conjugate point along a
    fan of geodesics and a unique minimal geodesic on a sample grid.

    The fan is only searched when G takes positive values; Jacobi fields
    along geodesics of a non-positively curved model never vanish again.
    """
    lo, hi = t_range
    hi = min(hi, w.domain_max)
    certified = width
    records: List[SampleRecord] = []
    ids = Counter()

    G = np.asarray(w.radial_curvature(w.grid()), dtype=float)
    if float(np.max(G)) > 0.0:
        for x0 in np.linspace(lo, hi, num_starts):
            for alpha in np.linspace(0.0, math.pi, num_angles + 2)[1:-1]:
                start = ModelPoint(float(x0), 0.0)
                try:
                    g = integrate_geodesic(start, float(alpha),
                                           2.0 * (x0 + width), w)
                except WindowExitError as e:
                    logger.debug(f'fan geodesic from {x0} skipped: {e}')
                    continue
                s_cut = g.first_crossing('y', width)
                if s_cut is not None and s_cut < g.total_length:
                    g = integrate_geodesic(start, float(alpha), s_cut, w)
                s_star = conjugate_point_search(g, w)
                values = {'x1': float(x0), 'alpha': float(alpha),
                          'length': g.total_length}
                slack = 0.0
                if s_star is not None:
                    y_star = g.point_at(s_star).y
                    values['conjugate_y'] = y_star
                    certified = min(certified, y_star)
                    slack = y_star - width
                records.append(SampleRecord(next(ids), values,
                                            {'slack_conjugate': slack}))

    xs = np.linspace(lo, hi, grid)
    for x1 in xs:
        for x2 in xs:
            for frac in (0.5, 1.0):
                dy = frac * certified
                values = {'x1': float(x1), 'x2': float(x2), 'dy': dy}
                try:
                    sols = shooting_solutions(ModelPoint(float(x1), 0.0),
                                              ModelPoint(float(x2), dy), w)
                except NoGeodesicError as e:
                    logger.warning(f'sector grid point {values}: {e}')
                    certified = min(certified, 0.5 * dy)
                    records.append(SampleRecord(
                        next(ids), values, {'slack_unique': -1.0},
                        note='no geodesic on the sector grid'))
                    continue
                best = sols[0][0]
                minimal = [s for s, _ in sols
                           if s <= best + _GEOMETRIC_TOL * (1.0 + best)]
                values['solutions'] = len(sols)
                slack = 0.0
                if len(minimal) > 1:
                    certified = min(certified, 0.5 * dy)
                    slack = -1.0
                records.append(SampleRecord(next(ids), values,
                                            {'slack_unique': slack}))

    notes = [HEURISTIC_NOTE, f'certified sector width {certified:.6g}']
    if sector_conditions(w, hi):
        notes.append('monotone profile conditions hold')
    if certified < width:
        logger.info(f'sector of {w.name} narrowed from {width} to '
                    f'{certified:.6g}')
    report = VerificationReport('sector', records, _GEOMETRIC_TOL,
                                notes=notes)
    return certified, report


# Toponogov comparison and its equality case.

def toponogov_sample(
    M: TestManifold,
    params: VerifyParams,
    sample_id: int,
    width: float,
) -> SampleRecord:
    rng = sample_rng(params.seed, sample_id)
    tri = _draw_triangle(M, params, rng, width)
    model = build_model_triangle(tri.sides(), M.model)
    values = _triangle_values(tri)
    values.update({'angle_p': tri.angle_p, 'angle_p_model': model.angle_p,
                   'angle_q': tri.angle_q, 'angle_q_model': model.angle_q,
                   'foot_gap': tri.foot_gap, 'theta': model.base_gap})
    slacks = {'slack_angle_p': tri.angle_p - model.angle_p,
              'slack_angle_q': tri.angle_q - model.angle_q,
              'slack_gap': tri.foot_gap - model.base_gap}
    return SampleRecord(sample_id, values, slacks)


def _sector_width(M: TestManifold, params: VerifyParams) -> float:
    width, sector = certify_sector(M.model, params.sector_width,
                                   params.t_range,
                                   num_angles=params.sector_angles,
                                   grid=params.sector_grid)
    for note in sector.notes:
        logger.info(f'sector: {note}')
    return width


def toponogov_check(
    M: TestManifold,
    n_samples: Optional[int] = None,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
) -> VerificationReport:
    """Angles and foot gap of manifold triangles against their models."""
    params = _resolve(params, n_samples, tol)
    _require_open_half(M, 'toponogov')
    _require_curvature_bound(M, params)
    width = _sector_width(M, params)
    return _run('toponogov', toponogov_sample, M, params, {'width': width},
                notes=[HEURISTIC_NOTE,
                       f'certified sector width {width:.6g}'])


def equality_sample(
    M: TestManifold,
    params: VerifyParams,
    sample_id: int,
    width: float,
) -> SampleRecord:
    record = toponogov_sample(M, params, sample_id, width)
    record.slacks = {key: -abs(value) for key, value in
                     record.slacks.items()}
    return record


def equality_case_check(
    M: TestManifold,
    n_samples: Optional[int] = None,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
) -> VerificationReport:
    """Rigidity: with M equal to its model every comparison is an equality."""
    params = _resolve(params, n_samples, tol)
    _require_open_half(M, 'equality_case')
    if not same_warping(M.f, M.model):
        raise PreconditionError(f'{M.name} does not carry the warping of '
                                f'{M.model.name}.')
    width = _sector_width(M, params)
    return _run('equality_case', equality_sample, M, params,
                {'width': width},
                notes=[HEURISTIC_NOTE,
                       f'certified sector width {width:.6g}'])


# Weak form: chains of thin model triangles.

def subdivide(tri: ManifoldOpenTriangle, num_pieces: int) -> List[TriangleSides]:
    """Cut the opposite side into equal arcs; piece i is the open triangle
    over the i-th arc."""
    chord = tri.opposite_side
    s = np.linspace(0.0, chord.total_length, num_pieces + 1)
    t = np.array(chord.state_at(s)[0], dtype=float)
    t[0], t[-1] = tri.a, tri.c
    step = tri.b / num_pieces
    return [TriangleSides(float(t[i]), step, float(t[i + 1]))
            for i in range(num_pieces)]


def weak_form_sample(
    M: TestManifold,
    params: VerifyParams,
    sample_id: int,
    width: float,
    refine: bool = False,
) -> SampleRecord:
    rng = sample_rng(params.seed, sample_id)
    tri = _draw_triangle(M, params, rng, width)
    chain = build_generalized_triangle(subdivide(tri, params.num_pieces),
                                       M.model)
    values = _triangle_values(tri)
    values.update({'vertex_distance': chain.vertex_distance,
                   'shortcut_length': chain.shortcut_length,
                   'angle_p': tri.angle_p, 'angle_p_chain': chain.angle_p,
                   'angle_q': tri.angle_q, 'angle_q_chain': chain.angle_q})
    slacks = {
        'slack_lower': chain.vertex_distance - (tri.c - tri.a),
        'slack_order': chain.shortcut_length - chain.vertex_distance,
        'slack_upper': tri.b - chain.shortcut_length,
        'slack_angle_p': tri.angle_p - chain.angle_p,
        'slack_angle_q': tri.angle_q - chain.angle_q,
    }
    note = ''
    if any(piece.hypothesis_regime_exceeded for piece in chain.pieces):
        note = REGIME_NOTE
    if refine:
        finer = build_generalized_triangle(
            subdivide(tri, 2 * params.num_pieces), M.model)
        change = abs(finer.shortcut_length - chain.shortcut_length)
        values['refined_shortcut_length'] = finer.shortcut_length
        slacks['slack_refinement'] = _REFINEMENT_TOL - change
    return SampleRecord(sample_id, values, slacks, note=note)


def weak_form_check(
    M: TestManifold,
    n_samples: Optional[int] = None,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
    refine: bool = False,
) -> VerificationReport:
    """d(bd, q) - d(bd, p) <= d(p^, q^) <= L(shortcut) <= d(p, q) and the
    angle inequalities for chains of model pieces."""
    params = _resolve(params, n_samples, tol)
    _require_open_half(M, 'weak_form')
    _require_curvature_bound(M, params)
    width = _sector_width(M, params)
    return _run('weak_form', weak_form_sample, M, params,
                {'width': width, 'refine': refine},
                notes=[HEURISTIC_NOTE,
                       f'{params.num_pieces} pieces per triangle'])


# Alexandrov monotonicity of the scaled triangles.

class AlexandrovProfile:

    def __init__(
        self,
        ts: np.ndarray,
        phi: np.ndarray,
        D: np.ndarray,
        derivative_ts: List[float],
        derivative_devs: List[float],
    ) -> None:
        self.ts = ts
        # phi(t) = d(mu1(a t), mu2(c t)); D(t) = theta(a t, phi(t), c t).
        self.phi = phi
        self.D = D
        self.derivative_ts = derivative_ts
        self.derivative_devs = derivative_devs

    def increments(self) -> np.ndarray:
        """D(t_i) - D(t_{i+1}); non-negative where D does not increase."""
        return self.D[:-1] - self.D[1:]

    def max_derivative_dev(self) -> float:
        return max(self.derivative_devs, default=0.0)


def _scaled_points(
    tri: ManifoldOpenTriangle,
    t: float,
) -> Tuple[ManifoldPoint, ManifoldPoint]:
    return (ManifoldPoint(tri.a * t, tri.p.u),
            ManifoldPoint(tri.c * t, tri.q.u))


def alexandrov_profile(
    M: TestManifold,
    tri: ManifoldOpenTriangle,
    grid_n: int,
    num_derivatives: int = 3,
) -> AlexandrovProfile:
    ts = np.linspace(1.0 / grid_n, 1.0, grid_n)
    phi = np.empty(grid_n)
    D = np.empty(grid_n)
    for i, t in enumerate(ts):
        p_t, q_t = _scaled_points(tri, t)
        phi[i], _ = manifold_distance(M, p_t, q_t)
        D[i] = theta(TriangleSides(tri.a * t, phi[i], tri.c * t), M.model)

    derivative_ts: List[float] = []
    devs: List[float] = []
    h = _FD_STEP
    for k in range(1, num_derivatives + 1):
        t = float(ts[(k * grid_n) // (num_derivatives + 1)])
        if t + h > 1.0:
            t = 1.0 - h
        lo, hi = _scaled_points(tri, t - h), _scaled_points(tri, t + h)
        phi_lo, _ = manifold_distance(M, *lo)
        phi_hi, _ = manifold_distance(M, *hi)
        scaled = open_triangle(M, *_scaled_points(tri, t))
        expected = (tri.a * math.cos(scaled.angle_p)
                    + tri.c * math.cos(scaled.angle_q))
        derivative_ts.append(t)
        devs.append(abs((phi_hi - phi_lo) / (2.0 * h) - expected))
    return AlexandrovProfile(ts, phi, D, derivative_ts, devs)


def _alexandrov_records(profile: AlexandrovProfile) -> List[SampleRecord]:
    records = []
    steps = profile.increments()
    for i, t in enumerate(profile.ts):
        slacks = {} if i == 0 else {'slack_monotone': float(steps[i - 1])}
        records.append(SampleRecord(i, {'t': float(t),
                                        'phi': float(profile.phi[i]),
                                        'D': float(profile.D[i])}, slacks))
    offset = len(records)
    for j, (t, dev) in enumerate(zip(profile.derivative_ts,
                                     profile.derivative_devs)):
        records.append(SampleRecord(offset + j, {'t': t, 'derivative_dev':
                                                 dev},
                                    {'slack_derivative': _PHI_FD_TOL - dev}))
    return records


def alexandrov_check(
    M: TestManifold,
    triangle: ManifoldOpenTriangle,
    grid_n: int = 50,
    tol: float = 1e-6,
) -> VerificationReport:
    """D(t) non-increasing on (0, 1] and the first variation of phi."""
    _require_open_half(M, 'alexandrov')
    margin = min(triangle.angle_p, math.pi - triangle.angle_p,
                 triangle.angle_q, math.pi - triangle.angle_q)
    if margin <= _DEGENERATE_ANGLE:
        raise ValueError('alexandrov_check needs a non-degenerate triangle.')
    profile = alexandrov_profile(M, triangle, grid_n)
    notes = [HEURISTIC_NOTE]
    report = VerificationReport('alexandrov', _alexandrov_records(profile),
                                tol, notes=notes)
    if float(np.min(profile.increments())) < -tol:
        logger.info(f'monotonicity violation on {grid_n} points; refining')
        profile = alexandrov_profile(M, triangle, 2 * grid_n)
        notes.append(f'grid refined to {2 * grid_n} points')
        report = VerificationReport('alexandrov',
                                    _alexandrov_records(profile), tol,
                                    notes=notes)
    return report


def alexandrov_sample(
    M: TestManifold,
    params: VerifyParams,
    sample_id: int,
    width: float,
) -> SampleRecord:
    rng = sample_rng(params.seed, sample_id)
    tri = _draw_triangle(M, params, rng, width)
    profile = alexandrov_profile(M, tri, params.grid_n)
    if float(np.min(profile.increments())) < -params.tol:
        profile = alexandrov_profile(M, tri, 2 * params.grid_n)
    values = _triangle_values(tri)
    values.update({'D_first': float(profile.D[0]),
                   'D_last': float(profile.D[-1]),
                   'grid_n': len(profile.ts)})
    slacks = {'slack_monotone': float(np.min(profile.increments())),
              'slack_derivative': _PHI_FD_TOL - profile.max_derivative_dev()}
    return SampleRecord(sample_id, values, slacks)


def alexandrov_survey(
    M: TestManifold,
    n_samples: Optional[int] = None,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
) -> VerificationReport:
    """alexandrov_check over random triangles, one record per triangle."""
    params = _resolve(params, n_samples, tol)
    _require_open_half(M, 'alexandrov')
    width = _sector_width(M, params)
    return _run('alexandrov', alexandrov_sample, M, params, {'width': width},
                notes=[HEURISTIC_NOTE])


# Splitting.

def _boundary_hit(
    start: ModelPoint,
    alpha: float,
    reach: float,
    w: WarpingFunction,
) -> Tuple[float, float]:
    """(length, foot y) of the geodesic from start up to x = 0, or
    (inf, nan) when it stays off the boundary within reach."""
    try:
        g = integrate_geodesic(start, alpha, reach, w)
    except WindowExitError:
        return math.inf, math.nan
    if g.status != GeodesicStatus.BOUNDARY_HIT:
        return math.inf, math.nan
    return g.total_length, g.endpoint.y


def minimizing_feet(
    w: WarpingFunction,
    t: float,
    num_angles: int = _FOOT_FAN,
) -> List[Tuple[float, float]]:
    """Local minima of the length to the boundary over the directions from
    (t, 0) toward it, as (length, foot y) sorted by length.

    Each local minimum of the fan is refined by a bounded 1-D search; feet
    closer than the foot tolerance are merged. Only y >= 0 is searched, the
    other side is its mirror image.
    """
    start = ModelPoint(t, 0.0)
    reach = 3.0 * t + 1.0
    alphas = np.linspace(0.5 * math.pi, math.pi, num_angles)
    lengths = np.array([_boundary_hit(start, float(a), reach, w)[0]
                        for a in alphas])

    def hit_length(alpha: float) -> float:
        length, _ = _boundary_hit(start, alpha, reach, w)
        return length if math.isfinite(length) else 2.0 * reach

    feet: List[Tuple[float, float]] = []
    last = alphas.size - 1
    for i in range(alphas.size):
        if not math.isfinite(lengths[i]):
            continue
        left = lengths[i - 1] if i > 0 else math.inf
        right = lengths[i + 1] if i < last else math.inf
        if not (lengths[i] <= left and lengths[i] <= right):
            continue
        if i == last:
            # Straight down the t-line.
            feet.append(_boundary_hit(start, math.pi, reach, w))
            continue
        res = minimize_scalar(hit_length, method='bounded',
                              bounds=(float(alphas[max(i - 1, 0)]),
                                      float(alphas[i + 1])),
                              options={'xatol': 1e-10})
        length, y = _boundary_hit(start, float(res.x), reach, w)
        if math.isfinite(length):
            feet.append((length, y))
    merged: List[Tuple[float, float]] = []
    for length, y in sorted(feet):
        if all(abs(y - other) > _FOOT_TOL for _, other in merged):
            merged.append((length, y))
    return merged


def unique_foot_sample(
    M: TestManifold,
    params: VerifyParams,
    sample_id: int,
) -> SampleRecord:
    """Exactly one minimizing segment from p reaches the boundary, the
    t-line, with length d(boundary, p)."""
    rng = sample_rng(params.seed, sample_id)
    lo, hi = params.t_range
    t = float(rng.uniform(lo, min(hi, M.t_max)))
    # Distances in a warped product only see |u - u_p|.
    _, d = boundary_segment(M, M.point(t, *np.zeros(M.fiber_dim)))
    feet = minimizing_feet(M.f, t)
    if not feet:
        raise NoGeodesicError('no geodesic from p reaches the boundary',
                              {'t': t})
    best, foot = feet[0]
    minimal = [y for length, y in feet if length <= best + _FOOT_TOL]
    count = sum(1 if abs(y) <= _FOOT_TOL else 2 for y in minimal)
    values = {'t': t, 'd': d, 'shot_length': best, 'foot_offset': foot,
              'num_local_minima': len(feet), 'num_minimizing': count}
    slacks = {'slack_foot': -abs(best - d) - abs(foot),
              'slack_unique': -float(count - 1)}
    return SampleRecord(sample_id, values, slacks)


def _st1_records(M: TestManifold, params: VerifyParams) -> List[SampleRecord]:
    ids = Counter()
    records = [SampleRecord(next(ids),
                            {'eigenvalue': M.boundary_shape_eigenvalue},
                            {'slack_eigenvalue':
                             -abs(M.boundary_shape_eigenvalue)})]
    horizon = min(params.t_range[1], M.t_max, M.model.domain_max)
    for t in np.linspace(0.0, horizon, 201):
        K = float(M.radial_curvature(t))
        G = float(M.model.radial_curvature(t))
        m, _, _ = M.model.evaluate(t)
        metric = M.metric(t)
        expected = np.diag([1.0] + [float(m) ** 2] * M.fiber_dim)
        records.append(SampleRecord(
            next(ids), {'t': float(t), 'K': K, 'G': G},
            {'slack_curvature': -abs(K - G),
             'slack_metric': -float(np.max(np.abs(metric - expected)))}))
    return records


def splitting_check(
    M: TestManifold,
    n_samples: Optional[int] = None,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
) -> VerificationReport:
    """Rigidity of the warped structure (ST1) or unique feet (ST2)."""
    params = _resolve(params, n_samples, tol)
    _require_open_half(M, 'splitting')
    _require_curvature_bound(M, params)
    # Every t-line of a shipped warped product is a ray from the boundary.
    cls = splitting_class(M.model)
    notes = [SPLITTING_NOTE, f'model {M.model.name} classified {cls.value}']
    if cls == SplittingClass.ST1:
        return VerificationReport('splitting', _st1_records(M, params),
                                  params.tol, notes=notes)
    if cls == SplittingClass.ST2:
        return _run('splitting', unique_foot_sample, M, params, notes=notes)
    notes.append(NO_SPLITTING_NOTE)
    return VerificationReport('splitting', [], params.tol, notes=notes)


# Slabs.

def _boundary_scan(M: TestManifold, p: ManifoldPoint) -> Tuple[float, float]:
    """Nearest measured distance from p to a fiber grid of points around its
    feet on the lower and on the upper boundary component."""
    nearest = []
    for level in (0.0, M.slab_length):
        lengths = []
        for shift in itertools.product(_SLAB_OFFSETS, repeat=M.fiber_dim):
            x = ManifoldPoint(level, tuple(float(c) for c in
                                           np.add(p.u, shift)))
            length, _ = manifold_distance(M, p, x)
            lengths.append(length)
        nearest.append(min(lengths))
    return nearest[0], nearest[1]


def slab_sample(
    M: TestManifold,
    params: VerifyParams,
    sample_id: int,
) -> SampleRecord:
    rng = sample_rng(params.seed, sample_id)
    ell = M.slab_length
    k = M.fiber_dim
    t = float(rng.uniform(0.05 * ell, 0.95 * ell))
    u = rng.uniform(-2.0, 2.0, size=k)
    p = M.point(t, *u)
    d = min(_boundary_scan(M, p))

    middle = M.point(0.5 * ell, *u)
    feet = boundary_feet(M, middle)
    d_lower, d_upper = _boundary_scan(M, middle)

    level = float(rng.uniform(0.1 * ell, 0.9 * ell))
    v = np.concatenate([[0.0], _random_direction(k, rng)])
    g = integrate_manifold_geodesic(M, M.point(level, *u), v, _LEVEL_LENGTH)
    _, state = g.samples(401)
    drift = float(np.max(np.abs(state[0] - level)))
    if g.status != GeodesicStatus.COMPLETE:
        drift = math.inf

    q = M.point(float(rng.uniform(0.05 * ell, 0.95 * ell)),
                *rng.uniform(-2.0, 2.0, size=k))
    d_pq, _ = manifold_distance(M, p, q)
    exact = math.hypot(q.t - p.t, float(np.linalg.norm(np.subtract(q.u,
                                                                   p.u))))
    values = {'t': t, 'd': d, 'middle_lower': d_lower,
              'middle_upper': d_upper, 'level': level, 'level_drift': drift,
              'distance': d_pq, 'product_distance': exact}
    slacks = {
        'slack_half': 0.5 * ell - d,
        'slack_foot': -abs(d - min(t, ell - t)),
        'slack_middle': (-abs(len(feet) - 2) - abs(d_lower - d_upper)
                         - abs(min(d_lower, d_upper) - 0.5 * ell)),
        'slack_level': _LEVEL_TOL - drift,
        'slack_product': -abs(d_pq - exact),
    }
    return SampleRecord(sample_id, values, slacks)


def slab_check(
    slab_length: float,
    dim: int = 3,
    n_samples: Optional[int] = None,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
) -> VerificationReport:
    """[0, l] x flat fiber: distances to the boundary, the middle level and
    the product distance."""
    params = _resolve(params, n_samples, tol)
    M = get_manifold(f'slab{dim}', slab_length=slab_length)
    return slab_survey(M, params=params)


def slab_survey(
    M: TestManifold,
    n_samples: Optional[int] = None,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
) -> VerificationReport:
    params = _resolve(params, n_samples, tol)
    if M.fiber != Fiber.SLAB:
        raise PreconditionError(f'{M.name} is not a slab.')
    if not same_warping(M.f, M.model) or M.boundary_shape_eigenvalue != 0.0:
        raise PreconditionError(f'{M.name} is not a flat slab.')
    return _run('slab', slab_sample, M, params,
                notes=[f'slab length {M.slab_length:.6g}'])


# First variation of the distance to the boundary.

def key_lemma_sample(
    M: TestManifold,
    params: VerifyParams,
    sample_id: int,
    thetas: Sequence[float],
    t0: float,
    lam: float = 0.0,
) -> SampleRecord:
    model = M.model if lam == 0.0 else lambda_perturbed(M.model, lam)
    angle = float(thetas[sample_id])
    p = M.point(t0, *np.zeros(M.fiber_dim))
    steps = params.max_step * np.array([0.25, 0.5, 1.0])
    gaps = []
    for s in steps:
        L = variational_length(M, p, angle, float(s), params.max_step)
        L_model = model_variational_length(model, t0, angle, float(s))
        gaps.append(L_model - L)
    h = _FD_STEP
    derivative = (variational_length(M, p, angle, h, params.max_step)
                  - variational_length(M, p, angle, -h, params.max_step)
                  ) / (2.0 * h)
    values = {'theta': angle, 'L': L, 'L_model': L_model,
              'derivative': derivative}
    slacks = {'slack_key': min(gaps),
              'slack_derivative': _FD_TOL - abs(derivative
                                                 - math.cos(angle))}
    return SampleRecord(sample_id, values, slacks)


def key_lemma_check(
    M: TestManifold,
    tol: Optional[float] = None,
    params: Optional[VerifyParams] = None,
    num_thetas: int = 7,
    t0: Optional[float] = None,
    lam: float = 0.0,
) -> VerificationReport:
    """L(s, theta) <= L~(s, theta) for 0 < s <= max_step and L'(0) =
    cos(theta), theta measured from the outward normal."""
    params = _resolve(params, None, tol)
    _require_curvature_bound(M, params)
    if t0 is None:
        t0 = 0.5 * (params.t_range[0] + min(params.t_range[1], M.t_max))
    thetas = [float(x) for x in np.linspace(0.0, math.pi, num_thetas)]
    notes = [f'base point t={t0:.6g}']
    if lam:
        notes.append(f'model curvature lowered by {lam:.6g}')
    return _run('key_lemma', key_lemma_sample, M, params,
                {'thetas': thetas, 't0': t0, 'lam': lam}, notes=notes,
                n=num_thetas)
