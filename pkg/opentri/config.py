import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Dict, List, Optional, Tuple

from opentri.errors import ConfigError
from opentri.models.manifold import TestManifold
from opentri.models.model_utils import (DEFAULT_SLAB_LENGTH, MANIFOLD_CLASSES,
                                        WARPING_CLASSES, get_manifold,
                                        get_warping)
from opentri.models.warping import DEFAULT_DOMAIN_MAX, WarpingFunction


class VerifyParams:

    def __init__(
        self,
        n: int = 100,
        seed: int = 0,
        tol: float = 1e-6,
        workers: int = 1,
        t_range: Tuple[float, float] = (0.2, 3.0),
        sector_width: float = 2.0,
        grid_n: int = 50,
        num_pieces: int = 8,
        max_step: float = 0.1,
        sector_grid: int = 16,
        sector_angles: int = 32,
    ) -> None:
        assert n >= 1
        assert tol > 0.0
        assert workers >= 1
        assert 0.0 < t_range[0] < t_range[1]
        assert sector_width > 0.0
        assert grid_n >= 2
        assert num_pieces >= 1
        assert max_step > 0.0
        assert sector_grid >= 2
        assert sector_angles >= 1

        self.n = n
        self.seed = seed
        self.tol = tol
        self.workers = workers
        self.t_range = (float(t_range[0]), float(t_range[1]))
        # Fiber offsets are drawn from [0.1, 0.8 * sector_width].
        self.sector_width = sector_width
        self.grid_n = grid_n
        self.num_pieces = num_pieces
        # Largest |s| probed by the variational checks.
        self.max_step = max_step
        # Uniqueness grid side and conjugate-point fan size of the sector
        # certificate.
        self.sector_grid = sector_grid
        self.sector_angles = sector_angles

    def __repr__(self) -> str:
        return (f'VerifyParams(n={self.n}, seed={self.seed}, tol={self.tol}, '
                f'workers={self.workers}, t_range={self.t_range}, '
                f'sector_width={self.sector_width}, grid_n={self.grid_n}, '
                f'num_pieces={self.num_pieces}, '
                f'sector_grid={self.sector_grid})')


_SECTIONS = {'model', 'manifold', 'sampling', 'tolerances', 'output'}
_KEYS = {
    'model': {'tag', 'domain_max', 'curvature'},
    'manifold': {'tag', 'slab_length'},
    'sampling': {'n', 'seed', 'workers', 't_range', 'sector_width',
                 'grid_n', 'num_pieces', 'max_step', 'sector_grid',
                 'sector_angles'},
    'tolerances': {'tol'},
    'output': {'out'},
}


def _expect(value: Any, kind, where: str):
    if kind is float and isinstance(value, int) and not isinstance(value,
                                                                   bool):
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f'{where} must be {kind.__name__}, got '
                          f'{value!r}.')
    return value


class RunConfig:

    def __init__(
        self,
        model: str = 'euclidean',
        domain_max: float = DEFAULT_DOMAIN_MAX,
        breaks: Optional[List[float]] = None,
        coeffs: Optional[List[List[float]]] = None,
        manifold: Optional[str] = None,
        slab_length: float = DEFAULT_SLAB_LENGTH,
        params: Optional[VerifyParams] = None,
        out: Optional[str] = None,
    ) -> None:
        if coeffs is None and model not in WARPING_CLASSES:
            raise ConfigError(f'unknown model tag: {model}')
        if manifold is not None and manifold not in MANIFOLD_CLASSES:
            raise ConfigError(f'unknown manifold tag: {manifold}')
        self.model = model
        self.domain_max = domain_max
        self.breaks = breaks
        self.coeffs = coeffs
        self.manifold = manifold
        self.slab_length = slab_length
        self.params = params if params is not None else VerifyParams()
        self.out = out

    @classmethod
    def from_toml(cls, path: str) -> 'RunConfig':
        try:
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        except OSError as e:
            raise ConfigError(f'cannot read {path}: {e}') from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f'{path} is not valid TOML: {e}') from e
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        unknown = set(data) - _SECTIONS
        if unknown:
            raise ConfigError(f'unknown sections: {sorted(unknown)}')
        if 'model' not in data:
            raise ConfigError('missing section [model]')
        for section, table in data.items():
            if not isinstance(table, dict):
                raise ConfigError(f'[{section}] must be a table.')
            extra = set(table) - _KEYS[section]
            if extra:
                raise ConfigError(f'unknown keys in [{section}]: '
                                  f'{sorted(extra)}')

        model = data['model']
        kwargs: Dict[str, Any] = {
            'model': _expect(model.get('tag', 'euclidean'), str, 'model.tag'),
            'domain_max': _expect(model.get('domain_max', DEFAULT_DOMAIN_MAX),
                                  float, 'model.domain_max'),
        }
        if 'curvature' in model:
            curvature = _expect(model['curvature'], dict, 'model.curvature')
            try:
                kwargs['breaks'] = [float(b) for b in curvature['breaks']]
                kwargs['coeffs'] = [[float(c) for c in piece]
                                    for piece in curvature['coeffs']]
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f'bad [model.curvature]: {e}') from e

        manifold = data.get('manifold', {})
        if 'tag' in manifold:
            kwargs['manifold'] = _expect(manifold['tag'], str,
                                         'manifold.tag')
        if 'slab_length' in manifold:
            kwargs['slab_length'] = _expect(manifold['slab_length'], float,
                                            'manifold.slab_length')

        sampling = dict(data.get('sampling', {}))
        params: Dict[str, Any] = {}
        for key in ('n', 'seed', 'workers', 'grid_n', 'num_pieces',
                    'sector_grid', 'sector_angles'):
            if key in sampling:
                params[key] = _expect(sampling[key], int, f'sampling.{key}')
        for key in ('sector_width', 'max_step'):
            if key in sampling:
                params[key] = _expect(sampling[key], float,
                                      f'sampling.{key}')
        if 't_range' in sampling:
            t_range = _expect(sampling['t_range'], list, 'sampling.t_range')
            if len(t_range) != 2:
                raise ConfigError('sampling.t_range needs two numbers.')
            params['t_range'] = tuple(_expect(t, float, 'sampling.t_range')
                                      for t in t_range)
        tolerances = data.get('tolerances', {})
        if 'tol' in tolerances:
            params['tol'] = _expect(tolerances['tol'], float,
                                    'tolerances.tol')
        kwargs['params'] = _build_params(params)

        output = data.get('output', {})
        if 'out' in output:
            kwargs['out'] = _expect(output['out'], str, 'output.out')
        return cls(**kwargs)

    def override(self, **flags: Any) -> 'RunConfig':
        """Command-line flags win over file values; None means unset."""
        for key in ('model', 'manifold', 'out'):
            if flags.get(key) is not None:
                setattr(self, key, flags[key])
                if key == 'model':
                    self.breaks = self.coeffs = None
        if self.coeffs is None and self.model not in WARPING_CLASSES:
            raise ConfigError(f'unknown model tag: {self.model}')
        if self.manifold is not None and self.manifold not in MANIFOLD_CLASSES:
            raise ConfigError(f'unknown manifold tag: {self.manifold}')
        params = {key: flags[key] for key in ('n', 'seed', 'tol', 'workers')
                  if flags.get(key) is not None}
        if params:
            current = vars(self.params).copy()
            current.update(params)
            self.params = _build_params(current)
        return self

    def build_model(self) -> WarpingFunction:
        try:
            return get_warping(self.model, self.domain_max, self.breaks,
                               self.coeffs)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def build_manifold(self) -> TestManifold:
        if self.manifold is None:
            raise ConfigError('this command needs --manifold.')
        try:
            return get_manifold(self.manifold, self.build_model(),
                                self.slab_length, self.domain_max)
        except ValueError as e:
            raise ConfigError(str(e)) from e


def _build_params(values: Dict[str, Any]) -> VerifyParams:
    try:
        return VerifyParams(**values)
    except AssertionError as e:
        raise ConfigError(f'invalid sampling parameters: {values}') from e


def default_workers() -> int:
    return os.cpu_count() or 1
