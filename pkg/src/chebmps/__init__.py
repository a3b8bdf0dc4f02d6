"""Load functions into quantized matrix product states.

Chebyshev expansions evaluated on MPS arguments, closed-form encodings,
tensor cross-interpolation and the error metrics to compare them.
"""
from .algebra import LinearCombination, affine_rescale, combine, hadamard, tensor_product
from .chebyshev import (
    ChebyshevExpansion,
    EvaluationTrace,
    ExpansionNotConverged,
    NodeKind,
    clenshaw_evaluate,
    differentiate,
    direct_evaluate,
    estimate_order,
    gauss_nodes,
    integrate,
    interpolation_coefficients,
    lobatto_nodes,
)
from .encodings import (
    PolyForm,
    PolynomialSpec,
    Trig,
    constant_encoding,
    exponential_encoding,
    polynomial_encoding,
    trig_encoding,
    x_encoding,
)
from .io import load, save
from .metrics import ErrorEstimate, Mode, SamplingConfig, distance, fit_convergence, l2_distance_exact
from .mps import (
    EXACT,
    MPS,
    Budget,
    DomainMeta,
    Order,
    SimplifyStrategy,
    bond_profile,
    canonicalize,
    element,
    elements,
    from_dense,
    inner,
    norm2,
    simplify,
    to_dense,
    truncate,
)
from .tci import BlackBox, CrossConfig, build_index_map, cross_interpolate, maxvol_rect, maxvol_square, skeleton

__version__ = "0.1.0"
