class DomainError(ValueError):
    """An argument lies outside the truncation window [0, domain_max]."""


class InvalidSidesError(ValueError):
    pass


class TurningPointError(ValueError):
    pass


class GluingError(ValueError):
    pass


class PreconditionError(ValueError):
    """A hypothesis of a comparison statement does not hold for the input."""


class ConfigError(ValueError):
    pass


class DegenerateWarpingError(RuntimeError):

    def __init__(self, t_star: float) -> None:
        super().__init__(f'warping degenerate at t*={t_star:.6g}')
        self.t_star = t_star


class WindowExitError(RuntimeError):

    def __init__(self, s: float, x: float) -> None:
        super().__init__(
            f'geodesic exits truncation window at s={s:.6g} (x={x:.6g})')
        self.s = s
        self.x = x


class NoGeodesicError(RuntimeError):

    def __init__(self, message: str, diagnostics: dict) -> None:
        super().__init__(f'no geodesic found: {message} {diagnostics}')
        self.diagnostics = diagnostics


class UnrealizableTriangleError(RuntimeError):
    pass


class IntegrationError(RuntimeError):
    """solve_ivp failed or its table misses the residual bound."""


class SamplingError(RuntimeError):
    pass
