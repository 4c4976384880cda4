"""Berezin-Toeplitz quantization of the sphere, projection purification and
integer certificates for the quantization parameter."""
__version__ = "0.1.0"

from .certify import (
    LaurentPolynomial,
    LaurentThetaRegressor,
    certify_pipeline,
    excluded_points,
    extract_integer,
    fit_theta,
    integer_distance_scan,
)
from .linalg import Block2Matrix, eigh, operator_norm, partial_trace, spectral_function
from .projections import (
    Purifier,
    bott_projection,
    equivariant_projection,
    purify_iterate,
    purify_spectral,
    quantize_block,
    squash_correct,
    unitalize,
)
from .sphere import SphereFunction, coordinate_function, poisson_bracket
from .spin import build_spin
from .toeplitz import QuantizationConfig, ScanGrid, ToeplitzQuantizer, get_config, toeplitz_op


__all__ = [
    "Block2Matrix",
    "LaurentPolynomial",
    "LaurentThetaRegressor",
    "Purifier",
    "QuantizationConfig",
    "ScanGrid",
    "SphereFunction",
    "ToeplitzQuantizer",
    "bott_projection",
    "build_spin",
    "certify_pipeline",
    "coordinate_function",
    "eigh",
    "equivariant_projection",
    "excluded_points",
    "extract_integer",
    "fit_theta",
    "get_config",
    "integer_distance_scan",
    "operator_norm",
    "partial_trace",
    "poisson_bracket",
    "purify_iterate",
    "purify_spectral",
    "quantize_block",
    "spectral_function",
    "squash_correct",
    "toeplitz_op",
    "unitalize",
]
