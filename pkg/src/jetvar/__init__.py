"""Finite-order variational calculus on jet bundles in a single chart."""

from .errors import BianchiNonzero, EngineError, ExtractionIncomplete, MalformedLift, OrderOverflow
from .gauge import (
    GaugeModel,
    LiftSpec,
    bianchi_decompose,
    invariance_residual,
    noether_current,
    superpotential,
)
from .jets import (
    BundleSpec,
    CovectorDensity,
    ProjectableVectorField,
    ScalarDensity,
    SkewDensity2,
    VectorDensity,
    d_H,
    d_H2,
    prolong,
    split_hv,
    total_derivative,
)
from .kernel import BaseCoord, Expr, FormalFn, JetVar, MultiIndex, Param, normalize, partial_base, partial_jet, substitute
from .variational import (
    adjoint,
    apply_jacobi,
    euler_lagrange,
    first_variation_check,
    helmholtz,
    interior_euler,
    is_locally_variational,
    jacobi,
    momentum,
    self_adjointness_residual,
)

__version__ = "0.1.0"

__all__ = [
    "BaseCoord", "BianchiNonzero", "BundleSpec", "CovectorDensity", "EngineError", "Expr",
    "ExtractionIncomplete", "FormalFn", "GaugeModel", "JetVar", "LiftSpec", "MalformedLift",
    "MultiIndex", "OrderOverflow", "Param", "ProjectableVectorField", "ScalarDensity", "SkewDensity2",
    "VectorDensity", "adjoint", "apply_jacobi", "bianchi_decompose", "d_H", "d_H2", "euler_lagrange",
    "first_variation_check", "helmholtz", "interior_euler", "invariance_residual",
    "is_locally_variational", "jacobi", "momentum", "noether_current", "normalize", "partial_base",
    "partial_jet", "prolong", "self_adjointness_residual", "split_hv", "substitute", "superpotential",
    "total_derivative",
]
