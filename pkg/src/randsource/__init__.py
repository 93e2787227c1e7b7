"""Reconstruction of random acoustic source strengths from covariance data.

Core pipeline: spline phantoms on the source cube (:mod:`.domain`), the
covariance forward map through spherical-harmonics measurements on a
sphere (:mod:`.operators`), synthetic noisy data (:mod:`.synth`),
Tikhonov reconstruction with a discrepancy-principle parameter choice
(:mod:`.solver`), convergence-rate experiments (:mod:`.experiments`),
and numerical verification of the CGO stability machinery (:mod:`.cgo`).
"""

from .domain import (
    Grid,
    SourceField,
    SplinePhantom,
    eval_phantom,
    make_grid,
    phantom_random,
    phantom_shapes,
    sobolev_norm,
)
from .operators import (
    CovMatrix,
    HarmonicCoeffs,
    MeasurementBasis,
    PotentialMatrix,
    adjoint_cov,
    build_potential,
    forward_cov,
    hs_dist,
    hs_norm,
)
from .solver import ReconResult, TikhonovConfig, discrepancy_sweep, recon_error, tikhonov_solve
from .synth import additive_noise, sample_covariance, sample_source

__all__ = [
    "Grid",
    "SourceField",
    "SplinePhantom",
    "make_grid",
    "phantom_random",
    "phantom_shapes",
    "eval_phantom",
    "sobolev_norm",
    "MeasurementBasis",
    "PotentialMatrix",
    "HarmonicCoeffs",
    "CovMatrix",
    "build_potential",
    "forward_cov",
    "adjoint_cov",
    "hs_norm",
    "hs_dist",
    "TikhonovConfig",
    "ReconResult",
    "tikhonov_solve",
    "discrepancy_sweep",
    "recon_error",
    "sample_source",
    "sample_covariance",
    "additive_noise",
]

__version__ = "0.1.0"
