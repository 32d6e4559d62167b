"""Error hierarchy shared by every module.

Domain errors map to CLI exit code 1, precision exhaustion to exit code 2.
"""


class BetaDynError(Exception):
    code = "domain_error"
    exit_code = 1

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ParseError(BetaDynError):
    code = "parse_error"


class RootNotIsolated(BetaDynError):
    code = "root_not_isolated"


class NotGreaterThanOne(BetaDynError):
    code = "not_greater_than_one"


class PrecisionExhausted(BetaDynError):
    code = "precision_exhausted"
    exit_code = 2


class NotAdmissible(BetaDynError):
    code = "not_admissible"


class CapExceeded(BetaDynError):
    code = "cap_exceeded"


class DegenerateEquation(BetaDynError):
    code = "degenerate_equation"


class NotFoundWithinBudget(BetaDynError):
    code = "not_found_within_budget"


class InsufficientRuns(BetaDynError):
    code = "insufficient_runs"


class InvalidParams(BetaDynError):
    code = "invalid_params"


class DomainError(BetaDynError):
    code = "domain_error"


class UnmatchedCase(BetaDynError):
    code = "unmatched_case"


class InfeasibleTargets(BetaDynError):
    code = "infeasible_targets"


class DegenerateSchedule(BetaDynError):
    code = "degenerate_schedule"


class NotTemplateWord(BetaDynError):
    code = "not_template_word"


class InsufficientScales(BetaDynError):
    code = "insufficient_scales"
