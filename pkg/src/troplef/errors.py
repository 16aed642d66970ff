"""Exception hierarchy shared by all modules."""


class TroplefError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(TroplefError):
    """Input data does not describe a valid object."""


class HypothesisError(TroplefError):
    """A theorem's hypothesis does not hold for the given input."""
