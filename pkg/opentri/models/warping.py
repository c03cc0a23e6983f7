"""Warping functions m and radial curvature functions G with m'' + G m = 0."""
import enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import simpson

from opentri.errors import (DegenerateWarpingError, DomainError,
                            IntegrationError)
from opentri.logger import init_logger
from opentri.models.profile import (ArrayLike, CurvatureProfile, HermiteTable,
                                    integrate_second_order)

logger = init_logger(__name__)

DEFAULT_DOMAIN_MAX = 20.0
SPLITTING_NOTE = 'splitting class is a numerical heuristic'

# Tolerances of the tabulated kind.
_TABLE_RTOL = 1e-12
_TABLE_MAX_STEP = 0.002
_INITIAL_TOL = 1e-10
_RESIDUAL_TOL = 1e-8


class WarpingKind(enum.Enum):
    EUCLIDEAN = 'euclidean'
    HYPERBOLIC = 'hyperbolic'
    GAUSS = 'gauss'
    USER = 'user'
    TABULATED = 'tabulated'


class SplittingClass(enum.Enum):
    ST1 = 'ST1'
    ST2 = 'ST2'
    NEITHER = 'neither'
    INCONCLUSIVE = 'inconclusive'


Triple = Tuple[ArrayLike, ArrayLike, ArrayLike]


class WarpingFunction:

    def __init__(
        self,
        kind: WarpingKind,
        domain_max: float = DEFAULT_DOMAIN_MAX,
        table: Optional[HermiteTable] = None,
        profile: Optional[CurvatureProfile] = None,
        funcs: Optional[Tuple[Callable, Callable, Callable]] = None,
        name: Optional[str] = None,
    ) -> None:
        assert domain_max > 0.0
        if kind == WarpingKind.TABULATED:
            assert table is not None and profile is not None
        if kind == WarpingKind.USER:
            assert funcs is not None
        self.kind = kind
        self.domain_max = domain_max
        self.table = table
        self.profile = profile
        self.funcs = funcs
        self.name = name if name is not None else kind.value

    @classmethod
    def euclidean(cls, domain_max: float = DEFAULT_DOMAIN_MAX):
        return cls(WarpingKind.EUCLIDEAN, domain_max)

    @classmethod
    def hyperbolic(cls, domain_max: float = DEFAULT_DOMAIN_MAX):
        return cls(WarpingKind.HYPERBOLIC, domain_max)

    @classmethod
    def gauss(cls, domain_max: float = DEFAULT_DOMAIN_MAX):
        return cls(WarpingKind.GAUSS, domain_max)

    @classmethod
    def from_callables(
        cls,
        name: str,
        m: Callable,
        dm: Callable,
        ddm: Callable,
        domain_max: float = DEFAULT_DOMAIN_MAX,
    ) -> 'WarpingFunction':
        return cls(WarpingKind.USER, domain_max, funcs=(m, dm, ddm), name=name)

    @property
    def is_closed_form(self) -> bool:
        return self.kind != WarpingKind.TABULATED

    def _check_domain(self, t: ArrayLike) -> None:
        t_arr = np.asarray(t)
        slack = 1e-12 * max(1.0, self.domain_max)
        if np.any(t_arr < -slack) or np.any(t_arr > self.domain_max + slack):
            raise DomainError(
                f't must lie in [0, {self.domain_max}], got {t!r}.')

    def _raw(self, t: ArrayLike) -> Triple:
        if self.kind == WarpingKind.EUCLIDEAN:
            one = np.ones_like(np.asarray(t, dtype=float))
            zero = np.zeros_like(one)
            if np.ndim(t) == 0:
                return 1.0, 0.0, 0.0
            return one, zero, zero
        if self.kind == WarpingKind.HYPERBOLIC:
            c = np.cosh(t)
            return c, np.sinh(t), c
        if self.kind == WarpingKind.GAUSS:
            e = np.exp(-np.square(t))
            return e, -2.0 * t * e, (4.0 * np.square(t) - 2.0) * e
        if self.kind == WarpingKind.USER:
            m, dm, ddm = self.funcs
            return m(t), dm(t), ddm(t)
        m, dm = self.table.evaluate(t)
        return m, dm, -np.asarray(self.profile(t)) * m

    def evaluate(self, t: ArrayLike) -> Triple:
        """(m, m', m'') at t in [0, domain_max]."""
        self._check_domain(t)
        return self._raw(t)

    def evaluate_even(self, x: ArrayLike) -> Triple:
        """(m, m', m'') of the even extension m(-x) = m(x), unchecked.

        Geodesic integrators run on the doubled surface so that shooting
        residuals stay continuous across the boundary; arguments are clipped
        to the window, beyond which the caller reports an exit.
        """
        x_arr = np.asarray(x, dtype=float)
        sign = np.where(x_arr < 0.0, -1.0, 1.0)
        t = np.minimum(np.abs(x_arr), self.domain_max)
        m, dm, ddm = self._raw(t if np.ndim(x) else float(t))
        if np.ndim(x) == 0:
            return float(m), float(sign) * float(dm), float(ddm)
        return (np.broadcast_to(m, x_arr.shape),
                sign * dm,
                np.broadcast_to(ddm, x_arr.shape))

    def radial_curvature(self, t: ArrayLike) -> ArrayLike:
        self._check_domain(t)
        return self._radial_curvature_raw(t)

    def _radial_curvature_raw(self, t: ArrayLike) -> ArrayLike:
        if self.kind == WarpingKind.EUCLIDEAN:
            return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
        if self.kind == WarpingKind.HYPERBOLIC:
            return -1.0 if np.ndim(t) == 0 else np.full(np.shape(t), -1.0)
        if self.kind == WarpingKind.GAUSS:
            return 2.0 - 4.0 * np.square(t)
        if self.kind == WarpingKind.TABULATED:
            return self.profile(t)
        m, _, ddm = self._raw(t)
        return -ddm / m

    def curvature_even(self, x: ArrayLike) -> ArrayLike:
        t = np.minimum(np.abs(x), self.domain_max)
        return self._radial_curvature_raw(t)

    def curvature_profile(self) -> CurvatureProfile:
        if self.kind == WarpingKind.EUCLIDEAN:
            return CurvatureProfile.constant(0.0)
        if self.kind == WarpingKind.HYPERBOLIC:
            return CurvatureProfile.constant(-1.0)
        if self.kind == WarpingKind.GAUSS:
            return CurvatureProfile(breaks=[0.0, np.inf],
                                    coeffs=[[2.0, 0.0, -4.0]], name='gauss')
        if self.kind == WarpingKind.TABULATED:
            return self.profile
        return CurvatureProfile(fn=self._radial_curvature_raw, name=self.name)

    def grid(self, num: int = 2001, t_max: Optional[float] = None):
        t_max = self.domain_max if t_max is None else t_max
        return np.linspace(0.0, t_max, num)

    def __repr__(self) -> str:
        return (f'WarpingFunction(kind={self.kind.value}, name={self.name}, '
                f'domain_max={self.domain_max})')


def evaluate(w: WarpingFunction, t: ArrayLike) -> Triple:
    return w.evaluate(t)


def radial_curvature(w: WarpingFunction, t: ArrayLike) -> ArrayLike:
    """G(t) = -m''(t) / m(t)."""
    return w.radial_curvature(t)


def solve_from_curvature(
    G: CurvatureProfile,
    domain_max: float = DEFAULT_DOMAIN_MAX,
    tol: float = _TABLE_RTOL,
) -> WarpingFunction:
    """Tabulate m from m'' + G m = 0, m(0) = 1, m'(0) = 0.

    Raises DegenerateWarpingError when m reaches zero inside the window: the
    profile then does not define a model surface there.
    """
    if not G.is_finite_on(domain_max):
        raise ValueError(f'{G} is not finite on [0, {domain_max}].')
    table = integrate_second_order(
        G, 1.0, 0.0, domain_max, method='DOP853', rtol=tol, atol=tol,
        max_step=_TABLE_MAX_STEP, stop_at_zero=True)
    if table.t_max < domain_max * (1.0 - 1e-12):
        raise DegenerateWarpingError(table.t_max)
    t, m, _ = table.nodes()
    if np.any(m <= 0.0):
        raise DegenerateWarpingError(float(t[np.argmax(m <= 0.0)]))
    residual = table.residual()
    if residual > _RESIDUAL_TOL:
        raise IntegrationError(f'ODE residual {residual:.3e} of {G} exceeds '
                               f'{_RESIDUAL_TOL:.0e}.')
    return WarpingFunction(WarpingKind.TABULATED, domain_max, table=table,
                           profile=G, name=f'tabulated[{G.name}]')


def check_invariants(w: WarpingFunction, num: int = 2001) -> bool:
    m0, dm0, _ = w.evaluate(0.0)
    if abs(m0 - 1.0) > _INITIAL_TOL or abs(dm0) > _INITIAL_TOL:
        return False
    m, _, _ = w.evaluate(w.grid(num))
    if np.any(np.asarray(m) <= 0.0):
        return False
    if w.kind == WarpingKind.TABULATED:
        return w.table.residual() < _RESIDUAL_TOL
    return True


def lambda_perturbed(w: WarpingFunction, lam: float) -> WarpingFunction:
    """The model with radial curvature G - lam."""
    base = w.curvature_profile()
    name = f'{base.name}-{lam:g}'
    if base.coeffs is not None:
        coeffs = [[piece[0] - lam] + piece[1:] for piece in base.coeffs]
        shifted = CurvatureProfile(breaks=base.breaks, coeffs=coeffs,
                                   name=name)
    else:
        shifted = CurvatureProfile(fn=lambda t: np.asarray(base(t)) - lam,
                                   breaks=base.breaks, name=name)
    return solve_from_curvature(shifted, w.domain_max)


def splitting_class(
    w: WarpingFunction,
    horizon: Optional[float] = None,
    tol: float = 1e-6,
    num: int = 4097,
) -> SplittingClass:
    """Classify the model by the splitting conditions, heuristically.

    ST2 (liminf m = 0) is tested first: a decaying m also makes the integral
    of m^-2 diverge, and the stronger conclusion belongs to ST2 there.
    """
    horizon = w.domain_max if horizon is None else horizon
    if horizon > w.domain_max:
        raise DomainError(f'horizon {horizon} exceeds {w.domain_max}.')
    assert num % 2 == 1, 'num must be odd so that horizon/2 is a node'
    t = np.linspace(0.0, horizon, num)
    m, _, _ = w.evaluate(t)
    m = np.asarray(m, dtype=float) * np.ones_like(t)
    half = num // 2
    quarter = num // 4

    if float(np.min(m[half:])) < tol:
        return SplittingClass.ST2

    integrand = 1.0 / np.square(m)
    total = simpson(integrand, x=t)
    first_half = simpson(integrand[:half + 1], x=t[:half + 1])
    growth = total - first_half
    mean_late = float(np.mean(integrand[half:]))
    mean_early = float(np.mean(integrand[quarter:half + 1]))
    logger.debug(f'{w.name}: partial integral {total:.6g}, growth '
                 f'{growth:.3e}, running means {mean_early:.3e} -> '
                 f'{mean_late:.3e}')

    if growth > tol and mean_late >= mean_early * (1.0 - 1e-6):
        return SplittingClass.ST1
    if growth < tol and float(np.min(m)) > tol:
        return SplittingClass.NEITHER
    return SplittingClass.INCONCLUSIVE


def sector_conditions(
    w: WarpingFunction,
    horizon: Optional[float] = None,
    num: int = 2001,
) -> bool:
    """Monotone-profile conditions that rule out cut-point pairs in sectors.

    G non-increasing on [0, horizon] and m' != 0 on (0, horizon].
    """
    horizon = w.domain_max if horizon is None else horizon
    t = np.linspace(0.0, horizon, num)
    G = np.asarray(w.radial_curvature(t), dtype=float) * np.ones_like(t)
    _, dm, _ = w.evaluate(t[1:])
    dm = np.asarray(dm, dtype=float) * np.ones_like(t[1:])
    non_increasing = bool(np.all(np.diff(G) <= 1e-12))
    return non_increasing and bool(np.all(np.abs(dm) > 0.0))
