import argparse
import logging
import math
import sys
from typing import Callable, Dict, List, Optional

import numpy as np

from opentri.config import RunConfig, default_workers
from opentri.errors import (ConfigError, DegenerateWarpingError, DomainError,
                            IntegrationError, InvalidSidesError,
                            NoGeodesicError, PreconditionError, SamplingError,
                            UnrealizableTriangleError, WindowExitError)
from opentri.logger import init_logger, set_level
from opentri.master.frontend import Frontend
from opentri.models.jacobi import first_zero, solve_jacobi
from opentri.models.manifold import (TestManifold, curvature_bound_certificate,
                                     integrate_manifold_geodesic)
from opentri.models.model_surface import ModelPoint, integrate_geodesic
from opentri.models.profile import CurvatureProfile
from opentri.models.triangle import (TriangleSides, build_model_triangle,
                                     theta)
from opentri.models.warping import splitting_class
from opentri.report import VerificationReport
from opentri import verify

logger = init_logger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# Errors caused by the arguments rather than by the geometry.
_USAGE_ERRORS = (ConfigError, DegenerateWarpingError, DomainError,
                 InvalidSidesError, PreconditionError,
                 UnrealizableTriangleError)
# Solver failures on valid input.
_NUMERICAL_ERRORS = (IntegrationError, NoGeodesicError, SamplingError,
                     WindowExitError)


def _toponogov(cfg: RunConfig) -> VerificationReport:
    return verify.toponogov_check(cfg.build_manifold(), params=cfg.params)


def _equality(cfg: RunConfig) -> VerificationReport:
    return verify.equality_case_check(cfg.build_manifold(), params=cfg.params)


def _weak_form(cfg: RunConfig) -> VerificationReport:
    return verify.weak_form_check(cfg.build_manifold(), params=cfg.params,
                                  refine=True)


def _alexandrov(cfg: RunConfig) -> VerificationReport:
    return verify.alexandrov_survey(cfg.build_manifold(), params=cfg.params)


def _splitting(cfg: RunConfig) -> VerificationReport:
    return verify.splitting_check(cfg.build_manifold(), params=cfg.params)


def _slab(cfg: RunConfig) -> VerificationReport:
    if cfg.manifold is None:
        cfg.manifold = 'slab3'
    return verify.slab_survey(cfg.build_manifold(), params=cfg.params)


def _key_lemma(cfg: RunConfig) -> VerificationReport:
    return verify.key_lemma_check(cfg.build_manifold(), params=cfg.params)


def _sector(cfg: RunConfig) -> VerificationReport:
    _, report = verify.certify_sector(cfg.build_model(),
                                      cfg.params.sector_width,
                                      cfg.params.t_range,
                                      num_angles=cfg.params.sector_angles,
                                      grid=cfg.params.sector_grid)
    return report


def _curvature(cfg: RunConfig) -> VerificationReport:
    return curvature_bound_certificate(cfg.build_manifold(),
                                       cfg.params.t_range[1])


VERIFY_CHECKS: Dict[str, Callable[[RunConfig], VerificationReport]] = {
    'toponogov': _toponogov,
    'equality': _equality,
    'weak_form': _weak_form,
    'alexandrov': _alexandrov,
    'splitting': _splitting,
    'slab': _slab,
    'key_lemma': _key_lemma,
    'sector': _sector,
    'curvature': _curvature,
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', type=str, default=None,
                        help='TOML run configuration')
    parser.add_argument('--model', type=str, default=None,
                        help='model warping tag')
    parser.add_argument('--manifold', type=str, default=None,
                        help='test manifold tag')
    parser.add_argument('--out', type=str, default=None,
                        help='output directory')
    parser.add_argument('--verbose', action='store_true',
                        help='log at DEBUG level')


def _add_sides(parser: argparse.ArgumentParser, many_b: bool) -> None:
    parser.add_argument('--a', type=float, required=True,
                        help='d(boundary, p)')
    if many_b:
        parser.add_argument('--b', type=float, nargs='+', required=True,
                            help='d(p, q); several values give a grid')
    else:
        parser.add_argument('--b', type=float, required=True, help='d(p, q)')
    parser.add_argument('--c', type=float, required=True,
                        help='d(boundary, q)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='opentri',
        description='Comparison geometry of open triangles')
    sub = parser.add_subparsers(dest='command', required=True)

    geodesic = sub.add_parser('geodesic', help='integrate and dump a '
                              'geodesic')
    _add_common(geodesic)
    geodesic.add_argument('--x', type=float, default=1.0,
                          help='start distance from the boundary')
    geodesic.add_argument('--y', type=float, default=0.0,
                          help='start boundary coordinate')
    geodesic.add_argument('--angle', type=float, default=math.pi / 2,
                          help='angle against d/dx')
    geodesic.add_argument('--length', type=float, default=1.0)
    geodesic.add_argument('--num', type=int, default=201,
                          help='number of samples')

    triangle = sub.add_parser('triangle', help='realize a model triangle')
    _add_common(triangle)
    _add_sides(triangle, many_b=False)

    theta_parser = sub.add_parser('theta', help='evaluate Theta(a, b, c)')
    _add_common(theta_parser)
    _add_sides(theta_parser, many_b=True)

    jacobi = sub.add_parser('jacobi', help='solve f\'\' + K f = 0 and dump')
    _add_common(jacobi)
    jacobi.add_argument('--K', type=float, default=None,
                        help='constant curvature (default: the model G)')
    jacobi.add_argument('--f0', type=float, default=1.0)
    jacobi.add_argument('--fp0', type=float, default=0.0)
    jacobi.add_argument('--horizon', type=float, default=5.0)
    jacobi.add_argument('--num', type=int, default=101)

    classify = sub.add_parser('classify', help='splitting class of a model')
    _add_common(classify)

    check = sub.add_parser('verify', help='run a verification check')
    check.add_argument('check', choices=sorted(VERIFY_CHECKS))
    _add_common(check)
    check.add_argument('--n', type=int, default=None, help='sample count')
    check.add_argument('--seed', type=int, default=None)
    check.add_argument('--tol', type=float, default=None)
    check.add_argument('--workers', type=int, default=None,
                       help='worker processes (default: available cores)')
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_toml(args.config) if args.config else RunConfig()
    flags = {key: getattr(args, key, None)
             for key in ('model', 'manifold', 'out', 'n', 'seed', 'tol',
                         'workers')}
    if (args.command == 'verify' and flags['workers'] is None
            and not args.config):
        flags['workers'] = default_workers()
    return cfg.override(**flags)


def _geodesic(args: argparse.Namespace, cfg: RunConfig,
              frontend: Frontend) -> int:
    if cfg.manifold is None:
        g = integrate_geodesic(ModelPoint(args.x, args.y), args.angle,
                               args.length, cfg.build_model())
        frontend.print_rows(g.to_csv_rows(args.num))
        return EXIT_PASS
    M: TestManifold = cfg.build_manifold()
    m, _, _ = M.f.evaluate(args.x)
    v = np.zeros(M.dim)
    v[0] = math.cos(args.angle)
    v[1] = math.sin(args.angle) / float(m)
    p = M.point(args.x, *([args.y] + [0.0] * (M.fiber_dim - 1)))
    g = integrate_manifold_geodesic(M, p, v, args.length)
    s, state = g.samples(args.num)
    names = ['t'] + [f'u{i + 1}' for i in range(M.fiber_dim)]
    frontend.print_rows([dict(zip(['s'] + names, [float(s[j])]
                                  + [float(x) for x in state[:M.dim, j]]))
                         for j in range(s.size)])
    return EXIT_PASS


def _triangle(args: argparse.Namespace, cfg: RunConfig,
              frontend: Frontend) -> int:
    tri = build_model_triangle(TriangleSides(args.a, args.b, args.c),
                               cfg.build_model())
    frontend.print_record(tri.record().as_dict())
    return EXIT_PASS


def _theta(args: argparse.Namespace, cfg: RunConfig,
           frontend: Frontend) -> int:
    w = cfg.build_model()
    values = [theta(TriangleSides(args.a, b, args.c), w) for b in args.b]
    if len(values) == 1:
        frontend.print_value(values[0])
    else:
        frontend.print_rows([{'a': args.a, 'b': b, 'c': args.c, 'theta': v}
                             for b, v in zip(args.b, values)])
    return EXIT_PASS


def _jacobi(args: argparse.Namespace, cfg: RunConfig,
            frontend: Frontend) -> int:
    if args.K is not None:
        K = CurvatureProfile.constant(args.K)
    else:
        K = cfg.build_model().curvature_profile()
    sol = solve_jacobi(K, args.f0, args.fp0, args.horizon)
    t = np.linspace(0.0, args.horizon, args.num)
    f, df = sol.evaluate(t)
    frontend.print_rows([{'t': float(t[i]), 'f': float(f[i]),
                          'df': float(df[i])} for i in range(t.size)])
    zero = first_zero(sol)
    logger.info(f'first zero: {zero if zero is not None else "none"}')
    return EXIT_PASS


def _classify(args: argparse.Namespace, cfg: RunConfig,
              frontend: Frontend) -> int:
    frontend.print_line(splitting_class(cfg.build_model()).value)
    return EXIT_PASS


def _verify(args: argparse.Namespace, cfg: RunConfig,
            frontend: Frontend) -> int:
    logger.info(f'verify {args.check}: {cfg.params}')
    report = VERIFY_CHECKS[args.check](cfg)
    frontend.emit_report(report)
    return EXIT_PASS if report.passed else EXIT_FAIL


_COMMANDS = {
    'geodesic': _geodesic,
    'triangle': _triangle,
    'theta': _theta,
    'jacobi': _jacobi,
    'classify': _classify,
    'verify': _verify,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PASS if e.code == 0 else EXIT_USAGE
    if args.verbose:
        set_level(logging.DEBUG)
    try:
        cfg = _load_config(args)
        frontend = Frontend(out_dir=cfg.out)
        return _COMMANDS[args.command](args, cfg, frontend)
    except _USAGE_ERRORS as e:
        print(f'opentri: error: {e}', file=sys.stderr)
        return EXIT_USAGE
    except _NUMERICAL_ERRORS as e:
        print(f'opentri: {type(e).__name__}: {e}', file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())
