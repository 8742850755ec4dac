"""Exception hierarchy shared by all ratspec modules.

Every error carries a stable machine-readable ``code`` so the CLI can
surface failures without string matching.
"""

from __future__ import annotations


class RatspecError(Exception):
    """Base class for all library errors."""

    code = "error"


class BadInput(RatspecError):
    code = "bad_input"


class EmptyInput(BadInput):
    code = "empty_input"


class BadParameter(BadInput):
    code = "bad_parameter"


class ZeroPolynomial(RatspecError):
    code = "zero_polynomial"


class NonConvergence(RatspecError):
    code = "non_convergence"


class DegenerateMap(RatspecError):
    code = "degenerate_map"


class BudgetExceeded(RatspecError):
    code = "budget_exceeded"


class OrbitMatchingAmbiguous(RatspecError):
    code = "orbit_matching_ambiguous"


class NotRepelling(RatspecError):
    code = "not_repelling"


class SeriesDiverged(RatspecError):
    code = "series_diverged"


class DepthExceeded(RatspecError):
    code = "depth_exceeded"


class CriticalCollision(RatspecError):
    code = "critical_collision"


class NoReturnFound(RatspecError):
    code = "no_return_found"


class BranchLost(RatspecError):
    code = "branch_lost"


class NewtonDisagreement(RatspecError):
    code = "newton_disagreement"


class FitUnstable(RatspecError):
    code = "fit_unstable"


class BranchOverlap(RatspecError):
    code = "branch_overlap"


class ZeroFamily(RatspecError):
    code = "zero_family"


class NoCandidates(RatspecError):
    """Raised when a rescaling search validates no candidate.

    ``hints`` lists base-change orders worth trying (denominators of
    fractional root valuations seen during the search).
    """

    code = "no_candidates"

    def __init__(self, message: str = "no rescaling candidates validated", hints=()):
        super().__init__(message)
        self.hints = sorted(set(hints))
