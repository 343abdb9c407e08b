"""Linearised Calderon problem on the unit disk in the Zernike/Fourier bases."""

from calderon.forward import (
    BandedBoundaryOperator,
    HsNormResult,
    adjoint_apply,
    assemble,
    entry_closed_form,
    entry_quadrature_oracle,
    hs_norm,
)
from calderon.quadrature import QuadratureGrid, default_grid
from calderon.reconstruction import ReconstructionRequest, injectivity_witness, reconstruct
from calderon.stability import verify
from calderon.zernike import BasisIndex, ZernikeCoeffs, l2_norm

__version__ = "0.1.0"

__all__ = [
    "BandedBoundaryOperator",
    "BasisIndex",
    "HsNormResult",
    "QuadratureGrid",
    "ReconstructionRequest",
    "ZernikeCoeffs",
    "adjoint_apply",
    "assemble",
    "default_grid",
    "entry_closed_form",
    "entry_quadrature_oracle",
    "hs_norm",
    "injectivity_witness",
    "l2_norm",
    "reconstruct",
    "verify",
]
