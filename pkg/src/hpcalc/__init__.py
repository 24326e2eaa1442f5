"""Numerical half-plane functional calculus, resolvent conditions and gamma-bounds for matrices."""

from .errors import HPCalcError
from .functions import HalfPlaneFunction, hinf_norm
from .quadrature import QuadratureConfig
from .spaces import MatrixOperator, SpaceDescriptor, adjoint, duality_pair, operator_norm, vector_norm

__version__ = "0.1.0"

__all__ = [
    "HPCalcError",
    "HalfPlaneFunction",
    "hinf_norm",
    "QuadratureConfig",
    "MatrixOperator",
    "SpaceDescriptor",
    "adjoint",
    "duality_pair",
    "operator_norm",
    "vector_norm",
]
