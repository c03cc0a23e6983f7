"""Curvature profiles and the scalar equation f'' + K(t) f = 0.

The same equation governs warping functions (K = G, f = m) and the normal
component of Jacobi fields, so both modules tabulate through here.
"""
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from opentri.errors import IntegrationError

ArrayLike = Union[float, np.ndarray]


class CurvatureProfile:
    """A real function of the distance to the boundary.

    Profiles built from coefficient data are picklable and can be shipped to
    worker processes; profiles wrapping an arbitrary callable are not.
    """

    def __init__(
        self,
        fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        breaks: Sequence[float] = (),
        coeffs: Optional[Sequence[Sequence[float]]] = None,
        name: str = 'custom',
    ) -> None:
        if fn is None and coeffs is None:
            raise ValueError('A profile needs a callable or coefficients.')
        if coeffs is not None:
            if len(breaks) != len(coeffs) + 1:
                raise ValueError(
                    f'{len(coeffs)} pieces need {len(coeffs) + 1} breaks, '
                    f'got {len(breaks)}.')
            if any(b1 <= b0 for b0, b1 in zip(breaks[:-1], breaks[1:])):
                raise ValueError(f'Breaks must increase: {list(breaks)}')
        self.fn = fn
        self.breaks = [float(b) for b in breaks]
        self.coeffs = ([[float(c) for c in piece] for piece in coeffs]
                       if coeffs is not None else None)
        self.name = name

    @classmethod
    def constant(cls, value: float) -> 'CurvatureProfile':
        return cls(breaks=[0.0, np.inf], coeffs=[[value]],
                   name=f'const({value:g})')

    @classmethod
    def piecewise_polynomial(
        cls,
        breaks: Sequence[float],
        coeffs: Sequence[Sequence[float]],
    ) -> 'CurvatureProfile':
        # Coefficients are in increasing powers of t on each piece.
        return cls(breaks=breaks, coeffs=coeffs, name='piecewise')

    def interior_breaks(self, horizon: float) -> List[float]:
        """Breakpoints strictly inside (0, horizon) where K may jump."""
        return [b for b in self.breaks if 0.0 < b < horizon]

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if self.coeffs is None:
            return self.fn(t)
        scalar = np.ndim(t) == 0
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.breaks, t_arr, side='right') - 1
        idx = np.clip(idx, 0, len(self.coeffs) - 1)
        out = np.empty_like(t_arr)
        for i, piece in enumerate(self.coeffs):
            mask = idx == i
            if np.any(mask):
                out[mask] = P.polyval(t_arr[mask], piece)
        return float(out[0]) if scalar else out

    def is_finite_on(self, horizon: float, num: int = 2001) -> bool:
        grid = np.linspace(0.0, horizon, num)
        return bool(np.all(np.isfinite(self(grid))))

    def __add__(self, other: 'CurvatureProfile') -> 'CurvatureProfile':
        return CurvatureProfile(
            fn=lambda t: self(t) + other(t),
            breaks=sorted(set(self.breaks) | set(other.breaks)),
            name=f'{self.name}+{other.name}')

    def __repr__(self) -> str:
        return f'CurvatureProfile(name={self.name})'


class _Segment:
    """Hermite interpolation of (f, f') on a stretch where K is smooth."""

    def __init__(
        self,
        t: np.ndarray,
        f: np.ndarray,
        fp: np.ndarray,
        K: CurvatureProfile,
    ) -> None:
        self.t = t
        self.f = f
        self.fp = fp
        self.f_spline = CubicHermiteSpline(t, f, fp)
        # f'' is reconstructed from the equation, never differenced.
        self.fp_spline = CubicHermiteSpline(t, fp, -np.asarray(K(t)) * f)


class HermiteTable:

    def __init__(self, segments: List[_Segment], K: CurvatureProfile) -> None:
        assert segments
        self.segments = segments
        self.K = K
        self.t_min = float(segments[0].t[0])
        self.t_max = float(segments[-1].t[-1])
        self._starts = np.array([seg.t[0] for seg in segments])

    def nodes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        t = [self.segments[0].t]
        f = [self.segments[0].f]
        fp = [self.segments[0].fp]
        # Consecutive segments share their breakpoint node.
        for seg in self.segments[1:]:
            t.append(seg.t[1:])
            f.append(seg.f[1:])
            fp.append(seg.fp[1:])
        return np.concatenate(t), np.concatenate(f), np.concatenate(fp)

    def evaluate(self, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        scalar = np.ndim(t) == 0
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self._starts, t_arr, side='right') - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        f = np.empty_like(t_arr)
        fp = np.empty_like(t_arr)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                f[mask] = seg.f_spline(t_arr[mask])
                fp[mask] = seg.fp_spline(t_arr[mask])
        if scalar:
            return float(f[0]), float(fp[0])
        return f, fp

    def residual(self) -> float:
        """Max of |f'' + K f| / max(1, |f|) at the grid midpoints."""
        worst = 0.0
        for seg in self.segments:
            if len(seg.t) < 2:
                continue
            mid = 0.5 * (seg.t[:-1] + seg.t[1:])
            fpp = seg.fp_spline.derivative()(mid)
            f = seg.f_spline(mid)
            res = np.abs(fpp + np.asarray(self.K(mid)) * f)
            res = res / np.maximum(1.0, np.abs(f))
            worst = max(worst, float(np.max(res)))
        return worst

    def first_zero(self, xtol: float = 1e-12) -> Optional[float]:
        """First sign change of f, refined by bracketing on the interpolant."""
        for seg in self.segments:
            f = seg.f
            exact = np.nonzero(f == 0.0)[0]
            change = np.nonzero(f[:-1] * f[1:] < 0.0)[0]
            candidates = []
            if exact.size:
                candidates.append(float(seg.t[exact[0]]))
            if change.size:
                i = int(change[0])
                root = brentq(lambda s: float(seg.f_spline(s)),
                              seg.t[i], seg.t[i + 1], xtol=xtol)
                candidates.append(float(root))
            candidates = [c for c in candidates if c > 0.0]
            if candidates:
                return min(candidates)
        return None


def _uniform_nodes(lo: float, hi: float, max_step: float) -> np.ndarray:
    num = max(2, int(np.ceil((hi - lo) / max_step)) + 1)
    return np.linspace(lo, hi, num)


def integrate_second_order(
    K: CurvatureProfile,
    f0: float,
    fp0: float,
    horizon: float,
    method: str = 'DOP853',
    rtol: float = 1e-12,
    atol: float = 1e-12,
    max_step: float = 0.01,
    stop_at_zero: bool = False,
) -> HermiteTable:
    """Integrate f'' + K f = 0 on [0, horizon], restarting at breakpoints.

    Nodes sit on a uniform grid of spacing <= max_step read from the dense
    output, so no table step is shorter than the solver's accuracy allows.
    With stop_at_zero the integration ends at the first zero of f; the last
    node of the table is then that zero.
    """
    if horizon <= 0.0:
        raise ValueError(f'horizon must be positive, got {horizon}.')

    def rhs(t, y):
        return [y[1], -K(t) * y[0]]

    def hits_zero(t, y):
        return y[0]
    hits_zero.terminal = True
    hits_zero.direction = -1 if f0 > 0 else 1

    edges = [0.0] + K.interior_breaks(horizon) + [horizon]
    segments: List[_Segment] = []
    state = [f0, fp0]
    for lo, hi in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(
            rhs, (lo, hi), state, method=method, rtol=rtol, atol=atol,
            max_step=max_step, dense_output=True,
            events=hits_zero if stop_at_zero and f0 != 0.0 else None,
        )
        if not sol.success:
            raise IntegrationError(f'integration failed on [{lo}, {hi}]: '
                                   f'{sol.message}')
        stopped = sol.t_events is not None and sol.t_events[0].size > 0
        end = float(sol.t_events[0][0]) if stopped else hi
        t = _uniform_nodes(lo, end, max_step)
        f, fp = sol.sol(t)
        if stopped:
            f[-1] = 0.0
            fp[-1] = sol.y_events[0][0][1]
        segments.append(_Segment(t, f, fp, K))
        if stopped:
            break
        state = [f[-1], fp[-1]]
    return HermiteTable(segments, K)
