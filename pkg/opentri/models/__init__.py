from opentri.models.manifold import Fiber, ManifoldPoint, TestManifold
from opentri.models.model_surface import ModelPoint
from opentri.models.model_utils import get_manifold, get_warping
from opentri.models.profile import CurvatureProfile
from opentri.models.triangle import TriangleSides
from opentri.models.warping import SplittingClass, WarpingFunction


__all__ = [
    'CurvatureProfile',
    'Fiber',
    'get_manifold',
    'get_warping',
    'ManifoldPoint',
    'ModelPoint',
    'SplittingClass',
    'TestManifold',
    'TriangleSides',
    'WarpingFunction',
]
