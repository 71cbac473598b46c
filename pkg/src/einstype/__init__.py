"""Gradient Einstein-type structures on rotational hypersurfaces of warped products."""

from .ambient import Ambient
from .expr import Expression, Jet, eval_jet2, parse_expr
from .fixtures import compare_expectations, make_fixture
from .rotational import AngleProfile, AxiTensor, RotationalSurface, SliceSurface, build_surface
from .structure import EinsteinTypeStructure, UMap, residual_eq0001, residual_prop1, solve_lambda_mu

__version__ = "0.1.0"

__all__ = [
    "Ambient",
    "AngleProfile",
    "AxiTensor",
    "EinsteinTypeStructure",
    "Expression",
    "Jet",
    "RotationalSurface",
    "SliceSurface",
    "UMap",
    "build_surface",
    "compare_expectations",
    "eval_jet2",
    "make_fixture",
    "parse_expr",
    "residual_eq0001",
    "residual_prop1",
    "solve_lambda_mu",
]
