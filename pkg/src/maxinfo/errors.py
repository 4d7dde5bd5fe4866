"""Exception hierarchy shared by all modules.

Every exception carries a machine-readable ``code`` and the process exit
status the CLI maps it to.
"""


class MaxInfoError(Exception):
    code = "error"
    exit_status = 1


class ParamOutOfRange(MaxInfoError, ValueError):
    code = "param_out_of_range"
    exit_status = 2


class InvalidBeta(ParamOutOfRange):
    code = "invalid_beta"


class HypothesisViolated(ParamOutOfRange):
    code = "hypothesis_violated"


class ConfigInvalid(ParamOutOfRange):
    code = "config_invalid"


class DomainMismatch(ParamOutOfRange):
    code = "domain_mismatch"


class LengthMismatch(ParamOutOfRange):
    code = "length_mismatch"


class DegenerateCode(ParamOutOfRange):
    code = "degenerate_code"


class Exhausted(ParamOutOfRange):
    code = "exhausted"


class UnboundedRatio(ParamOutOfRange):
    code = "unbounded_ratio"


class ValidationError(ParamOutOfRange):
    code = "validation_error"


class CapExceeded(MaxInfoError):
    code = "cap_exceeded"
    exit_status = 3


class InfeasibleVerification(CapExceeded):
    code = "infeasible_verification"


class ParseError(MaxInfoError):
    code = "parse_error"
    exit_status = 1

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateEntry(ParseError):
    code = "duplicate_entry"
