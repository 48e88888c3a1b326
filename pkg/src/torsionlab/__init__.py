"""Symmetric bilinear and Cappell-Miller torsion of finite Z2-graded complexes.

The functional API lives in :mod:`torsionlab.complex`, :mod:`torsionlab.torsion`
and :mod:`torsionlab.deformation`; concrete models in :mod:`torsionlab.models`.
"""

__version__ = "0.1.0"

from .complex import (
    BilinearStructure,
    GradedComplex,
    SpectralWindow,
    admissible_thresholds,
    b_adjoint,
    cohomology_basis,
    cohomology_dims,
    spectral_window,
    validate,
)
from .exceptions import (
    AmbiguousZeroWarning,
    ChiralityError,
    ConvergenceError,
    DimensionError,
    EigenvalueCrossingError,
    GaugeError,
    InvalidBasisError,
    NonDegeneracyError,
    PairingError,
    ParseError,
    TorsionLabError,
    ValidationError,
    WindowBoundaryWarning,
)
from .linalg import generalized_eigenspaces, nonzero_spectrum_product
from .torsion import (
    ChiralityData,
    CheckReport,
    TorsionValue,
    cappell_miller_torsion,
    det_line_torsion_direct,
    det_prime,
    dual_torsion_check,
    factorization_check,
    torsion,
    window_independence_check,
)

__all__ = [
    "AmbiguousZeroWarning",
    "BilinearStructure",
    "ChiralityData",
    "ChiralityError",
    "CheckReport",
    "ConvergenceError",
    "DimensionError",
    "EigenvalueCrossingError",
    "GaugeError",
    "GradedComplex",
    "InvalidBasisError",
    "NonDegeneracyError",
    "PairingError",
    "ParseError",
    "SpectralWindow",
    "TorsionLabError",
    "TorsionValue",
    "ValidationError",
    "WindowBoundaryWarning",
    "admissible_thresholds",
    "b_adjoint",
    "cappell_miller_torsion",
    "cohomology_basis",
    "cohomology_dims",
    "det_line_torsion_direct",
    "det_prime",
    "dual_torsion_check",
    "factorization_check",
    "generalized_eigenspaces",
    "nonzero_spectrum_product",
    "spectral_window",
    "torsion",
    "validate",
    "window_independence_check",
]
