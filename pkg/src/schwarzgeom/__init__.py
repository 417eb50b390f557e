"""Geometry of hypersurfaces in Schwarzschild-type warped products.

Submodules:

* :mod:`~schwarzgeom.warped` - the ambient warped product and its curvature
* :mod:`~schwarzgeom.newton` - elementary symmetric functions and Newton tensors
* :mod:`~schwarzgeom.surface` - rotationally symmetric hypersurfaces and integral gaps
* :mod:`~schwarzgeom.oracles` - finite-difference cross-checks
* :mod:`~schwarzgeom.doubled` - the doubled Schwarzschild chart and two-sphere candidates
* :mod:`~schwarzgeom.offcenter` - off-center balls and their expansions
* :mod:`~schwarzgeom.cli` - command-line reports
"""

from .errors import DomainError, GeometryError, NumericError, ParameterError, PreconditionError, RegimeWarning
from .warped import AmbientParams, WarpingFunction, ambient_curvature, check_conditions, warping_data
from .newton import newton_tensor, sigma_p
from .surface import build_surface, surface_geometry
from .doubled import isoperimetric_candidates, solve_matching
from .offcenter import OffCenterBall

__version__ = "0.1.0"

__all__ = [
    "AmbientParams",
    "DomainError",
    "GeometryError",
    "NumericError",
    "OffCenterBall",
    "ParameterError",
    "PreconditionError",
    "RegimeWarning",
    "WarpingFunction",
    "ambient_curvature",
    "build_surface",
    "check_conditions",
    "isoperimetric_candidates",
    "newton_tensor",
    "sigma_p",
    "solve_matching",
    "surface_geometry",
    "warping_data",
]
