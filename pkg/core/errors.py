"""
Error types for Free Group Lab
Every error carries the exit code the command line reports for it.
"""

from typing import Optional, Sequence


class FreeGroupError(Exception):
    """Base class for every library error"""

    exit_code = 3


class WordSyntaxError(FreeGroupError, ValueError):
    """Malformed word text; reports the offending position"""

    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"{reason} at position {position} in {text!r}")


class AlphabetError(FreeGroupError, ValueError):
    """Letter index or rank outside the alphabet, or mixed alphabets"""


class NotReducedError(FreeGroupError, ValueError):
    """Word contains a factor x·x⁻¹"""


class EmptyWordError(FreeGroupError, ValueError):
    """Empty word where a nonempty one is required"""


class NotCyclicallyReducedError(FreeGroupError, ValueError):
    """Word is not cyclically reduced"""


class PreconditionError(FreeGroupError, ValueError):
    """Argument outside the documented domain of an operation"""


class InputFileError(FreeGroupError):
    """Input file could not be read or parsed"""


class GraphInvariantError(FreeGroupError):
    """A structural invariant of a graph construction was violated"""


class AutomatonError(FreeGroupError, ValueError):
    """Automaton failed validation; carries the list of violations"""

    def __init__(self, message: str, violations: Sequence = ()):
        self.violations = tuple(violations)
        if self.violations:
            details = "; ".join(str(v) for v in self.violations)
            message = f"{message}: {details}"
        super().__init__(message)


class ProbabilityOneCycleError(FreeGroupError):
    """Automaton has a cycle of probability 1"""


class ConvergenceError(FreeGroupError):
    """Power iteration did not converge within its iteration cap"""

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class SamplingError(FreeGroupError):
    """Rejection sampling exhausted its attempt budget"""


class ResourceCapError(FreeGroupError):
    """A configured size, enumeration or time cap was exceeded"""

    exit_code = 4

    def __init__(self, what: str, limit, requested=None):
        self.what = what
        self.limit = limit
        self.requested = requested
        if requested is None:
            message = f"{what} exceeds the configured cap of {limit}"
        else:
            message = f"{what} {requested} exceeds the configured cap of {limit}"
        super().__init__(message)


class TrialTimeoutError(ResourceCapError):
    """A single experiment trial ran past its time limit"""

    def __init__(self, limit_ms: int, elapsed_ms: float):
        self.elapsed_ms = elapsed_ms
        super().__init__("trial time (ms)", limit_ms, round(elapsed_ms))


class UsageError(FreeGroupError):
    """Invalid combination of command-line arguments"""

    exit_code = 2
