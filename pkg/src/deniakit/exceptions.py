"""
Exceptions raised by deniakit.

Everything derives from DeniabilityError so the management command can map
library failures to exit codes in one place.
"""


class DeniabilityError(Exception):
    """Base class for all deniakit errors."""


# probkit


class InvalidDistributionError(DeniabilityError, ValueError):
    pass


class ShapeMismatchError(DeniabilityError, ValueError):
    pass


class InformationConsistencyError(DeniabilityError):
    """An information quantity came out negative beyond rounding noise."""


# channel


class ChannelError(DeniabilityError):
    def __init__(self, message, row=None, residual=None):
        super().__init__(message)
        self.row = row
        self.residual = residual


class ChannelFormatError(ChannelError):
    """A channel file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        text = super().__str__()
        if self.line is not None:
            return f"{text} (line {self.line}, column {self.column})"
        return text


class AlphabetError(DeniabilityError, IndexError):
    pass


class NotDegradedError(DeniabilityError):
    def __init__(self, residual=None):
        message = (
            "receiver deniability needs a physically degraded channel "
            "(Z must be a stochastic function of Y)"
        )
        if residual is not None:
            message += f"; best residual {residual:.3g}"
        super().__init__(message)
        self.residual = residual


# zeroinfo


class PartitionMismatchError(DeniabilityError):
    pass


# regions


class RegionError(DeniabilityError):
    pass


class InfeasibleDeniabilityError(RegionError):
    pass


class RegionGridError(RegionError):
    pass


# codec


class CodebookError(DeniabilityError):
    pass


class CodebookBudgetError(CodebookError):
    pass


class PlausibilityLeakError(CodebookError):
    """A satellite law puts mass outside its zero-information class."""


class MessageRangeError(CodebookError, IndexError):
    pass


class SplitError(CodebookError):
    pass


class CodewordError(CodebookError):
    pass


# evalx


class EnumerationBudgetError(DeniabilityError):
    def __init__(self, states, budget):
        super().__init__(
            f"exact enumeration needs {states} states, budget is {budget}; "
            "use monte_carlo for error estimates"
        )
        self.states = states
        self.budget = budget


class SequencePackingError(DeniabilityError):
    pass


class MixingError(DeniabilityError, ValueError):
    pass


# cli


class UsageError(DeniabilityError):
    pass


class ReproducibilityError(DeniabilityError):
    """A replayed run wrote different bytes than the manifest recorded."""
