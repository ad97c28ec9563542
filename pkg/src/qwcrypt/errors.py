"""Exception hierarchy shared by the simulator and the CLI."""


class QwcryptError(Exception):
    pass


class ValidationError(QwcryptError, ValueError):
    """Bad input: wrong shape, non-unitary matrix, out-of-range parameter."""


class DimensionError(ValidationError):
    pass


class ConservationError(ValidationError):
    """Input and output configurations carry different photon numbers."""


class ResourceError(QwcryptError, RuntimeError):
    """An enumeration would exceed a configured state-space cap."""


class NumericalError(QwcryptError, ArithmeticError):
    pass
