"""Belief propagation through Turing machines, with gradients and synthesis."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .simplex import (
    Distribution,
    SymbolSet,
    TangentVector,
    basis_tangent,
    clip_to_simplex,
    dirac,
    kl_divergence,
    project_to_affine_tangent,
    smooth_mu,
    uniform,
)

__all__ = [
    "BACKEND",
    "Distribution",
    "SymbolSet",
    "TangentVector",
    "basis_tangent",
    "clip_to_simplex",
    "dirac",
    "kl_divergence",
    "project_to_affine_tangent",
    "smooth_mu",
    "uniform",
    "__version__",
]
