"""Penetration of an electric field into a half-space of degenerate plasma.

Kinetic (BGK-type) model with a specular-accommodative wall, solved by
eigenfunction expansion.  The main entry points are
:class:`PlasmaParameters`, :func:`classify`, :func:`solve_all`,
:func:`field_profile`, :func:`boundary_distribution` and
:func:`verify_all`.
"""
__version__ = "0.1.0"

from .coefficients import CoefficientSet, solve_all
from .dispersion import PlasmaParameters, lam, lambda_boundary
from .reconstruction import boundary_distribution, field_profile, measure_accommodation, verify_all
from .spectrum import classify, find_eta0, l_curve, winding_index

__all__ = [
    "CoefficientSet",
    "PlasmaParameters",
    "boundary_distribution",
    "classify",
    "field_profile",
    "find_eta0",
    "l_curve",
    "lam",
    "lambda_boundary",
    "measure_accommodation",
    "solve_all",
    "verify_all",
    "winding_index",
]
