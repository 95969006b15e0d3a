"""Exception types shared across the package."""


class ResolventError(Exception):
    """Base class for every package-specific failure."""


class NonSquarefree(ResolventError):
    """A root cluster is tighter than the certification tolerance.

    The caller should perturb the input or deflate the repeated factor.
    """


class NoConvergence(ResolventError):
    """Iteration budget exhausted; raise precision_bits and retry."""


class DegreeMismatch(ResolventError):
    """A black-box evaluator has higher degree than declared."""


class ZeroForm(ResolventError):
    """A form expected to be nonzero vanished within tolerance."""


class PrecisionExhausted(ResolventError):
    """Independent computation paths disagree beyond tolerance."""


class ZeroConstant(ResolventError):
    """Constant term vanished; the upstream point choice must be perturbed."""


class DegenerateConfiguration(ResolventError):
    """A randomized geometric choice stayed degenerate after bounded retries."""


class DegenerateSection(DegenerateConfiguration):
    """A plane section was tangent, collapsed, or shared a component."""
