"""Free noncommutative functions on tuples of complex matrices.

Modules
-------
matcore
    Dense complex linear algebra and the :class:`MatrixTuple` container.
ncexpr
    Expression trees, parser, printer and classification.
evalad
    Evaluation, directional derivatives and principal divisors.
realize
    Linear-pencil realizations of rational expressions.
tracial
    Paths, germ continuation and monodromy increments.
"""

from .errors import (
    ClosednessError,
    DegenerateError,
    DimensionError,
    DomainExitError,
    EndpointMismatchError,
    NcError,
    ParseError,
    PencilSingularError,
    SingularMatrixError,
    StructureError,
    UnsupportedError,
    ZeroSetError,
)
from .evalad import (
    DivisorValue,
    EvalResult,
    dir_deriv,
    divisor,
    evaluate,
    jacobi_pairing,
    tracial_eval,
)
from .matcore import (
    MatrixTuple,
    direct_sum,
    expm_frechet,
    lu_det,
    random_tuple,
    random_unitary,
    solve_inv,
)
from .ncexpr import classify, parse, probe_nondegenerate, to_string
from .realize import Realization, det_ratio, divisor_split, linearize, realization_eval
from .tracial import (
    DomainSpec,
    GermSpec,
    PathSpec,
    concatenate,
    continue_germ,
    integrality_test,
    loop_phi,
    quantization_check,
    trace_equiv_check,
)

__all__ = [
    "ClosednessError",
    "DegenerateError",
    "DimensionError",
    "DivisorValue",
    "DomainExitError",
    "DomainSpec",
    "EndpointMismatchError",
    "EvalResult",
    "GermSpec",
    "MatrixTuple",
    "Modules",
    "NcError",
    "ParseError",
    "PathSpec",
    "PencilSingularError",
    "Realization",
    "SingularMatrixError",
    "StructureError",
    "UnsupportedError",
    "ZeroSetError",
    "classify",
    "concatenate",
    "continue_germ",
    "det_ratio",
    "dir_deriv",
    "direct_sum",
    "divisor",
    "divisor_split",
    "evaluate",
    "expm_frechet",
    "integrality_test",
    "jacobi_pairing",
    "linearize",
    "loop_phi",
    "lu_det",
    "parse",
    "probe_nondegenerate",
    "quantization_check",
    "random_tuple",
    "random_unitary",
    "realization_eval",
    "solve_inv",
    "to_string",
    "trace_equiv_check",
    "tracial_eval",
]

__version__ = "0.1.0"
