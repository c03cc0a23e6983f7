import pytest

from opentri.config import RunConfig, VerifyParams
from opentri.errors import ConfigError
from opentri.models.manifold import Fiber
from opentri.models.warping import WarpingKind

TOML = """
[model]
tag = "hyperbolic"
domain_max = 10

[manifold]
tag = "flat3"

[sampling]
n = 12
seed = 7
t_range = [0.5, 1.5]
sector_width = 1.0

[tolerances]
tol = 1e-7

[output]
out = "results"
"""


def test_defaults() -> None:
    params = VerifyParams()
    assert params.n == 100
    assert params.t_range == (0.2, 3.0)
    assert params.sector_width == 2.0
    assert params.grid_n == 50
    assert params.num_pieces == 8


@pytest.mark.parametrize('kwargs', [
    {'n': 0},
    {'tol': 0.0},
    {'workers': 0},
    {'t_range': (2.0, 1.0)},
])
def test_invalid_params(kwargs) -> None:
    with pytest.raises(AssertionError):
        VerifyParams(**kwargs)


def test_from_toml(tmp_path) -> None:
    path = tmp_path / 'run.toml'
    path.write_text(TOML)
    cfg = RunConfig.from_toml(str(path))
    assert cfg.model == 'hyperbolic'
    assert cfg.domain_max == 10.0
    assert cfg.manifold == 'flat3'
    assert cfg.params.n == 12
    assert cfg.params.seed == 7
    assert cfg.params.t_range == (0.5, 1.5)
    assert cfg.params.tol == 1e-7
    assert cfg.out == 'results'
    M = cfg.build_manifold()
    assert M.dim == 3
    assert M.fiber == Fiber.PLANE
    assert M.model.kind == WarpingKind.HYPERBOLIC
    assert M.model.domain_max == 10.0


def test_flags_win(tmp_path) -> None:
    path = tmp_path / 'run.toml'
    path.write_text(TOML)
    cfg = RunConfig.from_toml(str(path)).override(
        model='euclidean', n=3, seed=None, out='elsewhere')
    assert cfg.model == 'euclidean'
    assert cfg.params.n == 3
    assert cfg.params.seed == 7
    assert cfg.params.sector_width == 1.0
    assert cfg.out == 'elsewhere'


def test_inline_curvature() -> None:
    cfg = RunConfig.from_dict({'model': {
        'tag': 'bump', 'domain_max': 2.0,
        'curvature': {'breaks': [0.0, 1.0, 2.0], 'coeffs': [[-1.0], [0.0]]},
    }})
    w = cfg.build_model()
    assert w.kind == WarpingKind.TABULATED
    assert w.radial_curvature(0.5) == pytest.approx(-1.0)


@pytest.mark.parametrize('data', [
    {},
    {'model': {'tag': 'euclidean'}, 'plots': {}},
    {'model': {'tag': 'euclidean', 'colour': 'red'}},
    {'model': {'tag': 'spherical'}},
    {'model': {'tag': 'euclidean'}, 'manifold': {'tag': 'torus3'}},
    {'model': {'tag': 'euclidean'}, 'sampling': {'n': 'many'}},
    {'model': {'tag': 'euclidean'}, 'sampling': {'n': 0}},
    {'model': {'tag': 'euclidean'}, 'sampling': {'t_range': [1.0]}},
    {'model': {'tag': 'euclidean', 'curvature': {'breaks': [0.0]}}},
])
def test_bad_config(data) -> None:
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_unreadable_config(tmp_path) -> None:
    with pytest.raises(ConfigError):
        RunConfig.from_toml(str(tmp_path / 'missing.toml'))
    path = tmp_path / 'broken.toml'
    path.write_text('[model\n')
    with pytest.raises(ConfigError):
        RunConfig.from_toml(str(path))


def test_manifold_required() -> None:
    with pytest.raises(ConfigError):
        RunConfig().build_manifold()


def test_bad_override() -> None:
    with pytest.raises(ConfigError):
        RunConfig().override(model='spherical')


def test_sector_search_keys(tmp_path) -> None:
    path = tmp_path / 'run.toml'
    path.write_text(TOML.replace('sector_width = 1.0',
                                 'sector_width = 1.0\nsector_grid = 4\n'
                                 'sector_angles = 5'))
    cfg = RunConfig.from_toml(str(path))
    assert cfg.params.sector_grid == 4
    assert cfg.params.sector_angles == 5
    assert VerifyParams().sector_grid == 16
    assert VerifyParams().sector_angles == 32
    with pytest.raises(AssertionError):
        VerifyParams(sector_grid=1)
