"""
Exception hierarchy for FlowLaw
"""

from typing import List, Optional


class FlowLawError(ValueError):
    """Base class for all FlowLaw errors"""

    exit_code = 3


class ConfigError(FlowLawError):
    """Invalid or inconsistent run configuration"""

    exit_code = 2


class InputFormatError(FlowLawError):
    """Empty or malformed input file"""

    exit_code = 2


class UnsortedInput(FlowLawError):
    """Packets or flows are not sorted by start time"""


class TooFewPoints(FlowLawError):
    """Fewer distinct points than requested clusters"""


class EmptyReference(FlowLawError):
    """Reference data contains no flows"""


class SymbolOutOfAlphabet(FlowLawError):
    """A symbol index lies outside [0, |Σ|)"""


class AlphabetMismatch(FlowLawError):
    """Two measures, or a model and a family, disagree on the alphabet"""


class NoPeriodAvailable(FlowLawError):
    """Neither period estimates nor priors yield a (t_d, t_p) pair"""


class EmptyFamily(FlowLawError):
    """A PL family with no members"""


class TooLarge(FlowLawError):
    """Problem exceeds the exhaustive enumeration guard"""


class Infeasible(FlowLawError):
    """Some windows are not covered by any candidate PL"""

    def __init__(self, windows: List[int], hint: Optional[str] = None):
        self.windows = list(windows)
        self.hint = hint or "raise lambda or add candidate PLs (priors)"
        shown = ", ".join(str(w) for w in self.windows[:20])
        more = "" if len(self.windows) <= 20 else f" (+{len(self.windows) - 20} more)"
        super().__init__(
            f"{len(self.windows)} window(s) not covered by any PL: {shown}{more}; {self.hint}"
        )
