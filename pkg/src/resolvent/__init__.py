"""Reduction of polynomial equations to few-parameter normal forms.

A degree-n equation (n >= 21) is carried by chains of polynomial
substitutions — each determined by auxiliary equations of degree at most six
plus one final degree-<=20 intersection — to a monic equation whose first
five coefficients vanish and whose constant term is one, leaving n-6 free
coefficients. Quintics get the one-parameter z^5 + a z + 1 corridor. All
arithmetic is arbitrary-precision complex; every run is seed-deterministic
and emits a verifiable trace.
"""

from .errors import (
    DegenerateConfiguration,
    DegenerateSection,
    DegreeMismatch,
    NoConvergence,
    NonSquarefree,
    PrecisionExhausted,
    ResolventError,
    ZeroConstant,
    ZeroForm,
)
from .numerics import (
    DEFAULT_PRECISION_BITS,
    RootSet,
    UniPoly,
    coeffs_from_power_sums,
    power_sums,
    resultant,
    roots,
    tolerance,
)
from .forms import (
    CubicForm,
    FormDecomposition,
    LinearForm,
    LinearSubspace,
    QuadraticForm,
    extract_forms,
    restrict,
    tangent_hyperplane,
)
from .tschirnhaus import (
    TschirnhausMap,
    TransformedEquation,
    coefficient_functional,
    find_c123_point,
    kill_c1,
    normalize_constant,
    transform,
)
from .conegeom import ConePair, PlaneSection, common_generator, lemma1_subspace, lemma2_plane
from .pipeline import (
    ReductionReport,
    ReductionTrace,
    VerifyResult,
    reduce_bring,
    reduce_theorem1,
    verify_report,
)
from .tracing import TraceStage

__all__ = [
    "DEFAULT_PRECISION_BITS",
    "ConePair",
    "CubicForm",
    "DegenerateConfiguration",
    "DegenerateSection",
    "DegreeMismatch",
    "FormDecomposition",
    "LinearForm",
    "LinearSubspace",
    "NoConvergence",
    "NonSquarefree",
    "PlaneSection",
    "PrecisionExhausted",
    "QuadraticForm",
    "ReductionReport",
    "ReductionTrace",
    "ResolventError",
    "RootSet",
    "TraceStage",
    "TransformedEquation",
    "TschirnhausMap",
    "UniPoly",
    "VerifyResult",
    "ZeroConstant",
    "ZeroForm",
    "coefficient_functional",
    "coeffs_from_power_sums",
    "common_generator",
    "extract_forms",
    "find_c123_point",
    "kill_c1",
    "lemma1_subspace",
    "lemma2_plane",
    "normalize_constant",
    "power_sums",
    "reduce_bring",
    "reduce_theorem1",
    "restrict",
    "resultant",
    "roots",
    "tangent_hyperplane",
    "tolerance",
    "transform",
    "verify_report",
]
