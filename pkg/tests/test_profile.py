import math

import numpy as np
import pytest

from opentri.models.profile import CurvatureProfile, integrate_second_order


def test_constant_profile() -> None:
    K = CurvatureProfile.constant(-1.0)
    assert K(0.3) == -1.0
    np.testing.assert_array_equal(K(np.array([0.0, 1.0, 5.0])), -1.0)
    assert K.interior_breaks(10.0) == []


def test_piecewise_polynomial() -> None:
    K = CurvatureProfile.piecewise_polynomial([0.0, 1.0, 2.0],
                                              [[1.0], [0.0, 2.0]])
    assert K(0.5) == pytest.approx(1.0)
    assert K(1.5) == pytest.approx(3.0)
    # Past the last break the last piece is extended.
    assert K(3.0) == pytest.approx(6.0)
    assert K.interior_breaks(1.5) == [1.0]
    assert K.interior_breaks(1.0) == []


@pytest.mark.parametrize('breaks, coeffs', [
    ([0.0, 1.0], [[1.0], [2.0]]),
    ([0.0, 1.0, 1.0], [[1.0], [2.0]]),
])
def test_invalid_profile(breaks, coeffs) -> None:
    with pytest.raises(ValueError):
        CurvatureProfile(breaks=breaks, coeffs=coeffs)


def test_profile_needs_data() -> None:
    with pytest.raises(ValueError):
        CurvatureProfile()


def test_sum_of_profiles() -> None:
    K = CurvatureProfile.constant(1.0) + CurvatureProfile(
        fn=lambda t: np.asarray(t) ** 2, name='square')
    assert K(2.0) == pytest.approx(5.0)


@pytest.mark.parametrize('k, f, fp', [
    (1.0, np.cos, lambda t: -np.sin(t)),
    (-1.0, np.cosh, np.sinh),
    (0.0, lambda t: np.ones_like(t), lambda t: np.zeros_like(t)),
])
def test_integrate_second_order(k, f, fp) -> None:
    table = integrate_second_order(CurvatureProfile.constant(k), 1.0, 0.0,
                                   3.0)
    t = np.linspace(0.0, 3.0, 31)
    f_num, fp_num = table.evaluate(t)
    np.testing.assert_allclose(f_num, f(t), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(fp_num, fp(t), rtol=1e-9, atol=1e-9)
    assert table.residual() < 1e-6


def test_first_zero_of_cosine() -> None:
    table = integrate_second_order(CurvatureProfile.constant(1.0), 1.0, 0.0,
                                   3.0)
    assert table.first_zero() == pytest.approx(math.pi / 2, abs=1e-9)


def test_stop_at_zero() -> None:
    table = integrate_second_order(CurvatureProfile.constant(1.0), 1.0, 0.0,
                                   3.0, stop_at_zero=True)
    assert table.t_max == pytest.approx(math.pi / 2, abs=1e-9)


def test_restart_at_breaks() -> None:
    # f = 1 on [0, 1], then cos(t - 1).
    K = CurvatureProfile.piecewise_polynomial([0.0, 1.0, np.inf],
                                              [[0.0], [1.0]])
    table = integrate_second_order(K, 1.0, 0.0, 2.0)
    assert len(table.segments) == 2
    f, fp = table.evaluate(1.5)
    assert f == pytest.approx(math.cos(0.5), abs=1e-9)
    assert fp == pytest.approx(-math.sin(0.5), abs=1e-9)
    t, _, _ = table.nodes()
    assert np.all(np.diff(t) > 0.0)


@pytest.mark.parametrize('stop_at_zero', [False, True])
def test_uniform_nodes(stop_at_zero: bool) -> None:
    table = integrate_second_order(CurvatureProfile.constant(1.0), 1.0, 0.0,
                                   3.0, max_step=0.01,
                                   stop_at_zero=stop_at_zero)
    t, _, _ = table.nodes()
    step = np.diff(t)
    assert step.max() <= 0.01 + 1e-12
    assert step.min() >= 0.005
    assert table.residual() < 1e-8
