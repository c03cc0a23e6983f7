import math

import numpy as np
import pytest

from opentri import verify
from opentri.config import VerifyParams
from opentri.errors import PreconditionError
from opentri.models.manifold import open_triangle
from opentri.models.model_utils import get_manifold
from opentri.models.warping import WarpingFunction
from opentri.verify import (HEURISTIC_NOTE, NO_SPLITTING_NOTE,
                            alexandrov_check, certify_sector,
                            equality_case_check, key_lemma_check,
                            minimizing_feet, slab_check, slab_sample,
                            slab_survey, splitting_check, subdivide,
                            toponogov_check, unique_foot_sample,
                            weak_form_check)

HYPERBOLIC = WarpingFunction.hyperbolic()


def _params(**kwargs) -> VerifyParams:
    values = {'n': 3, 'seed': 7, 't_range': (0.5, 1.5),
              'sector_width': 1.0, 'sector_grid': 2, 'sector_angles': 3}
    values.update(kwargs)
    return VerifyParams(**values)


def _rows(report):
    return [record.as_row() for record in report.records]


def test_certify_sector_hyperbolic() -> None:
    width, report = certify_sector(HYPERBOLIC, 1.0, (0.5, 1.5),
                                   num_angles=3, grid=2)
    assert width == 1.0
    assert report.passed
    assert HEURISTIC_NOTE in report.notes


def test_certify_sector_gauss() -> None:
    width, report = certify_sector(WarpingFunction.gauss(), 1.0, (0.2, 0.6),
                                   num_starts=2, num_angles=2, grid=2)
    assert 0.0 < width <= 1.0
    assert any(r.values.get('alpha') is not None for r in report.records)


def test_toponogov_strict_pair() -> None:
    M = get_manifold('flat2', model=HYPERBOLIC)
    report = toponogov_check(M, params=_params())
    assert report.passed
    assert report.num_records() == 3
    # Flat triangles are strictly fatter than hyperbolic ones.
    assert report.min_slack() > 0.0
    thick = [r for r in report.records
             if r.values['b'] - abs(r.values['a'] - r.values['c']) > 0.05]
    assert thick
    for record in thick:
        assert min(record.slacks.values()) >= 1e-4
    assert set(report.fieldnames()) >= {
        'id', 'a', 'b', 'c', 'angle_p', 'angle_p_model', 'slack_angle_p',
        'slack_angle_q', 'slack_gap'}


def test_toponogov_is_reproducible() -> None:
    M = get_manifold('flat3', model=HYPERBOLIC)
    first = toponogov_check(M, params=_params(n=2))
    second = toponogov_check(M, params=_params(n=2))
    parallel = toponogov_check(M, params=_params(n=2, workers=2))
    assert _rows(first) == _rows(second) == _rows(parallel)


def test_toponogov_needs_curvature_bound() -> None:
    M = get_manifold('cosh2', model=WarpingFunction.euclidean())
    with pytest.raises(PreconditionError):
        toponogov_check(M, params=_params())


@pytest.mark.parametrize('tag, t_range', [
    ('flat3', (0.5, 1.5)),
    ('cosh2', (0.5, 1.5)),
    ('gauss2', (0.2, 0.6)),
])
def test_equality_case(tag: str, t_range) -> None:
    report = equality_case_check(get_manifold(tag),
                                 params=_params(n=2, t_range=t_range))
    assert report.passed
    for record in report.records:
        assert max(abs(s) for s in record.slacks.values()) < 1e-6


def test_equality_case_needs_same_warping() -> None:
    M = get_manifold('flat2', model=HYPERBOLIC)
    with pytest.raises(PreconditionError):
        equality_case_check(M, params=_params())


def test_subdivide() -> None:
    M = get_manifold('flat2')
    tri = open_triangle(M, M.point(1.0, 0.0), M.point(4.0, 4.0))
    pieces = subdivide(tri, 5)
    assert len(pieces) == 5
    assert pieces[0].a == 1.0
    assert pieces[-1].c == 4.0
    for left, right in zip(pieces[:-1], pieces[1:]):
        assert left.c == right.a
    np.testing.assert_allclose([p.b for p in pieces], 1.0)
    np.testing.assert_allclose([p.c - p.a for p in pieces], 0.6, atol=1e-6)


def test_weak_form_single_piece() -> None:
    report = weak_form_check(get_manifold('flat2'),
                             params=_params(n=2, num_pieces=1))
    assert report.passed
    for record in report.records:
        assert record.slacks['slack_upper'] == pytest.approx(0.0, abs=1e-7)
        assert record.slacks['slack_order'] == pytest.approx(0.0, abs=1e-7)


def test_weak_form_strict_pair() -> None:
    M = get_manifold('flat2', model=HYPERBOLIC)
    report = weak_form_check(M, params=_params(n=1, num_pieces=3))
    assert report.passed


def test_alexandrov_equality_case() -> None:
    M = get_manifold('flat2')
    tri = open_triangle(M, M.point(1.0, 0.0), M.point(1.5, 0.8))
    report = alexandrov_check(M, tri, grid_n=5)
    assert report.passed
    D = [r.values['D'] for r in report.records if 'D' in r.values]
    assert len(D) == 5
    assert np.ptp(D) < 1e-6
    assert D[0] == pytest.approx(0.8, abs=1e-6)


def test_alexandrov_strict_pair() -> None:
    M = get_manifold('flat2', model=HYPERBOLIC)
    tri = open_triangle(M, M.point(1.0, 0.0), M.point(1.5, 0.8))
    report = alexandrov_check(M, tri, grid_n=5)
    assert report.passed
    D = [r.values['D'] for r in report.records if 'D' in r.values]
    assert D[-1] < D[0]


def test_alexandrov_rejects_degenerate() -> None:
    M = get_manifold('flat2')
    tri = open_triangle(M, M.point(1.0, 0.0), M.point(2.0, 0.0))
    with pytest.raises(ValueError):
        alexandrov_check(M, tri, grid_n=5)


def test_splitting_st1() -> None:
    report = splitting_check(get_manifold('flat2'), params=_params())
    assert report.passed
    assert report.num_records() > 1
    assert report.min_slack() >= -1e-12


def test_splitting_neither() -> None:
    report = splitting_check(get_manifold('cosh2'), params=_params())
    assert report.passed
    assert report.num_records() == 0
    assert NO_SPLITTING_NOTE in report.notes


def test_splitting_st2() -> None:
    report = splitting_check(get_manifold('gauss2'),
                             params=_params(n=2, t_range=(0.2, 1.2)))
    assert report.passed
    assert report.num_records() == 2
    for record in report.records:
        assert record.slacks['slack_unique'] == 0.0
        assert record.values['num_minimizing'] == 1


@pytest.mark.parametrize('dim', [2, 3])
def test_slab(dim: int) -> None:
    report = slab_check(2.0, dim=dim, params=_params(n=4))
    assert report.passed
    assert report.num_records() == 4


def test_slab_survey_needs_slab() -> None:
    with pytest.raises(PreconditionError):
        slab_survey(get_manifold('flat2'), params=_params())


@pytest.mark.parametrize('tag, model', [
    ('flat2', HYPERBOLIC),
    ('flat2', None),
    ('cosh2', None),
])
def test_key_lemma(tag: str, model) -> None:
    M = get_manifold(tag, model=model)
    report = key_lemma_check(M, params=_params())
    assert report.passed
    assert report.num_records() == 7
    thetas = [r.values['theta'] for r in report.records]
    assert thetas[0] == 0.0
    assert thetas[-1] == pytest.approx(math.pi)


@pytest.mark.parametrize('model, t', [
    (WarpingFunction.euclidean(), 0.7),
    (WarpingFunction.gauss(), 0.4),
    (WarpingFunction.gauss(), 1.1),
])
def test_minimizing_feet_single(model, t: float) -> None:
    feet = minimizing_feet(model, t, num_angles=21)
    length, y = feet[0]
    assert length == pytest.approx(t, abs=1e-6)
    assert y == pytest.approx(0.0, abs=1e-6)
    assert all(other > length + 1e-6 for other, _ in feet[1:])


def test_two_minimizing_feet_fail(monkeypatch) -> None:
    monkeypatch.setattr(verify, 'minimizing_feet',
                        lambda w, t: [(1.0, 0.0), (1.0, 0.5)])
    M = get_manifold('gauss2')
    record = unique_foot_sample(M, _params(), 0)
    assert record.values['num_minimizing'] == 3
    assert record.slacks['slack_unique'] == -2.0

    report = splitting_check(M, params=_params(n=2, t_range=(0.2, 1.2)))
    assert not report.passed


def test_slab_middle_level() -> None:
    M = get_manifold('slab2', slab_length=2.0)
    record = slab_sample(M, _params(), 0)
    assert record.values['middle_lower'] == pytest.approx(1.0, abs=1e-8)
    assert record.values['middle_upper'] == pytest.approx(1.0, abs=1e-8)
    t = record.values['t']
    assert record.values['d'] == pytest.approx(min(t, 2.0 - t), abs=1e-8)


def test_slab_uses_measured_distances(monkeypatch) -> None:
    M = get_manifold('slab3', slab_length=2.0)
    exact = verify.manifold_distance

    def shrunk(M, p, q):
        length, g = exact(M, p, q)
        return 0.9 * length, g

    monkeypatch.setattr(verify, 'manifold_distance', shrunk)
    record = slab_sample(M, _params(), 0)
    assert record.slacks['slack_foot'] < -1e-3
    assert record.slacks['slack_middle'] < -1e-3
    assert not slab_survey(M, params=_params(n=2)).passed
