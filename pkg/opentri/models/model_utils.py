from typing import Optional, Sequence

from opentri.models.manifold import Fiber, TestManifold
from opentri.models.profile import CurvatureProfile
from opentri.models.warping import (DEFAULT_DOMAIN_MAX, WarpingFunction,
                                    solve_from_curvature)

WARPING_CLASSES = {
    'euclidean': WarpingFunction.euclidean,
    'hyperbolic': WarpingFunction.hyperbolic,
    'gauss': WarpingFunction.gauss,
}

# tag -> (warping tag, dim, fiber)
MANIFOLD_CLASSES = {
    'flat2': ('euclidean', 2, Fiber.LINE),
    'flat3': ('euclidean', 3, Fiber.PLANE),
    'cosh2': ('hyperbolic', 2, Fiber.LINE),
    'cosh3': ('hyperbolic', 3, Fiber.PLANE),
    'gauss2': ('gauss', 2, Fiber.LINE),
    'gauss3': ('gauss', 3, Fiber.PLANE),
    'slab2': ('euclidean', 2, Fiber.SLAB),
    'slab3': ('euclidean', 3, Fiber.SLAB),
}

DEFAULT_SLAB_LENGTH = 2.0


def get_warping(
    tag: str,
    domain_max: float = DEFAULT_DOMAIN_MAX,
    breaks: Optional[Sequence[float]] = None,
    coeffs: Optional[Sequence[Sequence[float]]] = None,
) -> WarpingFunction:
    """A shipped warping by tag, or the tabulated one of a given profile."""
    if coeffs is not None:
        profile = CurvatureProfile(breaks=breaks, coeffs=coeffs, name=tag)
        return solve_from_curvature(profile, domain_max)
    for name, factory in WARPING_CLASSES.items():
        if tag.lower() == name:
            return factory(domain_max)
    raise ValueError(f'Invalid model name: {tag}')


def get_manifold(
    tag: str,
    model: Optional[WarpingFunction] = None,
    slab_length: float = DEFAULT_SLAB_LENGTH,
    domain_max: float = DEFAULT_DOMAIN_MAX,
) -> TestManifold:
    """A shipped manifold; its model defaults to its own warping."""
    if tag.lower() not in MANIFOLD_CLASSES:
        raise ValueError(f'Invalid manifold name: {tag}')
    warping_tag, dim, fiber = MANIFOLD_CLASSES[tag.lower()]
    f = get_warping(warping_tag, domain_max)
    if model is None:
        model = get_warping(warping_tag, domain_max)
    length = slab_length if fiber == Fiber.SLAB else None
    return TestManifold(f, dim, fiber, model, slab_length=length,
                        name=tag.lower())
