"""Exception hierarchy shared by the numerical modules and the CLI."""


class DissprojError(Exception):
    """Base class for all package errors."""


class ConfigError(DissprojError, ValueError):
    """Invalid user input: malformed config, bad shapes, unknown names."""


class NumericalError(DissprojError, ArithmeticError):
    """A numerical precondition failed (separation, gap, finiteness)."""


class IllSeparatedSpectrum(NumericalError):
    pass


class NotDissipative(NumericalError):
    pass
