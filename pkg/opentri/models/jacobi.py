from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from opentri.errors import PreconditionError
from opentri.logger import init_logger
from opentri.models.profile import (ArrayLike, CurvatureProfile, HermiteTable,
                                    integrate_second_order)
from opentri.models.warping import (SplittingClass, WarpingFunction,
                                    splitting_class)
from opentri.report import SampleRecord, VerificationReport

logger = init_logger(__name__)

_JACOBI_RTOL = 1e-12
_JACOBI_MAX_STEP = 0.01
# f counts as positive only above this floor.
_POSITIVE_FLOOR = 1e-6
_GAUSS_NODES = 8


class JacobiSolution:

    def __init__(
        self,
        K: CurvatureProfile,
        f0: float,
        fp0: float,
        horizon: float,
        table: HermiteTable,
    ) -> None:
        self.K = K
        self.f0 = f0
        self.fp0 = fp0
        self.horizon = horizon
        self.table = table

    def evaluate(self, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        return self.table.evaluate(t)

    def samples(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.table.nodes()

    def residual(self) -> float:
        return self.table.residual()

    def grid_edges(self, ell: float) -> np.ndarray:
        t, _, _ = self.samples()
        return t[t < ell]

    def __repr__(self) -> str:
        return (f'JacobiSolution(K={self.K.name}, f0={self.f0}, '
                f'fp0={self.fp0}, horizon={self.horizon})')


class FieldProfile:
    """A scalar field f along a boundary segment, with its derivative."""

    def __init__(
        self,
        f: Callable[[np.ndarray], np.ndarray],
        df: Callable[[np.ndarray], np.ndarray],
        name: str = 'field',
    ) -> None:
        self.f = f
        self.df = df
        self.name = name

    @classmethod
    def from_solution(cls, sol: JacobiSolution) -> 'FieldProfile':
        return cls(lambda t: sol.evaluate(t)[0],
                   lambda t: sol.evaluate(t)[1],
                   name=f'jacobi[{sol.K.name}]')

    @classmethod
    def from_warping(cls, w: WarpingFunction, ell: float) -> 'FieldProfile':
        """The model field m(t) / m(ell) of a parallel unit normal."""
        m_ell, _, _ = w.evaluate(ell)
        return cls(lambda t: np.asarray(w.evaluate(t)[0]) / m_ell,
                   lambda t: np.asarray(w.evaluate(t)[1]) / m_ell,
                   name=f'parallel[{w.name}]')

    def evaluate(self, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        return self.f(t), self.df(t)


class IndexFormValue:

    def __init__(
        self,
        value: float,
        eigenvalue: float,
        boundary_term: Optional[float] = None,
    ) -> None:
        self.value = value
        # Eigenvalue of the shape operator used in the boundary correction.
        self.eigenvalue = eigenvalue
        # [f f']_0^ell - lam f(0)^2, equal to value for Jacobi fields.
        self.boundary_term = boundary_term

    def __repr__(self) -> str:
        return (f'IndexFormValue(value={self.value:.12g}, '
                f'eigenvalue={self.eigenvalue})')


def solve_jacobi(
    K: CurvatureProfile,
    f0: float,
    fp0: float,
    horizon: float,
    max_step: float = _JACOBI_MAX_STEP,
) -> JacobiSolution:
    if not K.is_finite_on(horizon):
        raise PreconditionError(f'{K} is not finite on [0, {horizon}].')
    table = integrate_second_order(K, f0, fp0, horizon, method='DOP853',
                                   rtol=_JACOBI_RTOL, atol=_JACOBI_RTOL,
                                   max_step=max_step)
    return JacobiSolution(K, f0, fp0, horizon, table)


def first_zero(sol: JacobiSolution) -> Optional[float]:
    return sol.table.first_zero(xtol=1e-12)


def focal_distance(
    K: CurvatureProfile,
    lam: float,
    horizon: float,
) -> Optional[float]:
    """Distance to the first focal point of a boundary with eigenvalue lam."""
    if lam < 0.0:
        raise PreconditionError(f'convex boundary needs lam >= 0, got {lam}.')
    return first_zero(solve_jacobi(K, 1.0, -lam, horizon))


def index_form(
    field,
    K: CurvatureProfile,
    ell: float,
    lam: float,
    num_panels: int = 400,
) -> IndexFormValue:
    """int_0^ell (f'^2 - K f^2) dt - lam f(0)^2 by composite Gauss-Legendre."""
    if isinstance(field, JacobiSolution):
        if ell > field.horizon * (1.0 + 1e-12):
            raise PreconditionError(
                f'ell={ell} exceeds the horizon {field.horizon}.')
        edges = np.append(field.grid_edges(ell), ell)
        profile = field
    else:
        edges = np.linspace(0.0, ell, num_panels + 1)
        profile = field
    edges = np.unique(np.concatenate([edges, K.interior_breaks(ell)]))

    nodes, weights = leggauss(_GAUSS_NODES)
    lo, hi = edges[:-1, None], edges[1:, None]
    t = 0.5 * (hi - lo) * nodes[None, :] + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * weights[None, :]
    f, fp = profile.evaluate(t.ravel())
    f = np.asarray(f, dtype=float).reshape(t.shape)
    fp = np.asarray(fp, dtype=float).reshape(t.shape)
    k = np.asarray(K(t.ravel()), dtype=float) * np.ones(t.size)
    integrand = fp ** 2 - k.reshape(t.shape) * f ** 2

    f_0, fp_0 = profile.evaluate(0.0)
    f_l, fp_l = profile.evaluate(ell)
    f_0, fp_0, f_l, fp_l = map(float, (f_0, fp_0, f_l, fp_l))
    value = float(np.sum(w * integrand)) - lam * f_0 ** 2
    boundary = f_l * fp_l - f_0 * fp_0 - lam * f_0 ** 2
    return IndexFormValue(value, lam, boundary_term=boundary)


def index_form_comparison(
    K: CurvatureProfile,
    w: WarpingFunction,
    ell: float,
    lam: float = 0.0,
) -> Tuple[IndexFormValue, IndexFormValue]:
    """Index forms of the model parallel field and of the boundary Jacobi
    field Z with Z(ell) = 1; the first dominates when K >= G and lam >= 0.
    """
    model = index_form(FieldProfile.from_warping(w, ell),
                       w.curvature_profile(), ell, 0.0)
    sol = solve_jacobi(K, 1.0, -lam, ell)
    f_ell, _ = sol.evaluate(ell)
    if f_ell <= 0.0:
        raise PreconditionError(f'focal point before ell={ell}.')
    scaled = FieldProfile(lambda t: np.asarray(sol.evaluate(t)[0]) / f_ell,
                          lambda t: np.asarray(sol.evaluate(t)[1]) / f_ell,
                          name='normalized-jacobi')
    return model, index_form(scaled, K, ell, lam)


def comparison_L1_check(
    K: CurvatureProfile,
    w: WarpingFunction,
    horizon: float,
    tol: float = 1e-8,
    num: int = 4001,
) -> VerificationReport:
    """ODE comparison when the model integral of m^-2 diverges.

    If the solution of f'' + K f = 0, f(0) = 1, f'(0) = 0 stays positive,
    K must coincide with G; if f vanishes the statement is vacuous.
    """
    t = np.linspace(0.0, horizon, num)
    G = w.curvature_profile()
    k_vals = np.asarray(K(t), dtype=float) * np.ones_like(t)
    g_vals = np.asarray(G(t), dtype=float) * np.ones_like(t)
    if np.any(k_vals < g_vals - tol):
        worst = float(t[np.argmin(k_vals - g_vals)])
        raise PreconditionError(f'K < G at t={worst:.6g}.')
    cls = splitting_class(w, min(horizon, w.domain_max))
    if cls != SplittingClass.ST1:
        raise PreconditionError(
            f'model {w.name} is classified {cls.value}, not ST1.')

    zeros: List[Optional[float]] = []
    min_f = np.inf
    for max_step in (_JACOBI_MAX_STEP, 0.5 * _JACOBI_MAX_STEP):
        sol = solve_jacobi(K, 1.0, 0.0, horizon, max_step=max_step)
        zeros.append(first_zero(sol))
        _, f, _ = sol.samples()
        min_f = min(min_f, float(np.min(f)))
    if (zeros[0] is None) != (zeros[1] is None):
        logger.warning(f'step halving changed the zero: {zeros}')

    deviation = float(np.max(np.abs(k_vals - g_vals)))
    values = {'horizon': horizon, 'min_f': min_f,
              'max_deviation': deviation}
    notes: List[str] = []
    if zeros[0] is not None or min_f <= _POSITIVE_FLOOR:
        zero = zeros[0] if zeros[0] is not None else float('nan')
        values['first_zero'] = zero
        notes.append(f'f vanished at t={zero:.9g}; comparison is vacuous')
        record = SampleRecord(0, values, {})
    else:
        values['first_zero'] = float('nan')
        record = SampleRecord(0, values, {'slack_deviation': -deviation})
        if deviation >= tol:
            notes.append('f stayed positive but K != G: numerical artifact '
                         'or hypothesis failure')
    return VerificationReport('comparison_L1', [record], tol, notes=notes)
