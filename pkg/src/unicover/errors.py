"""Exception types raised across the package."""


class UnicoverError(ValueError):
    """Base class; every error here is a bad-input condition."""


class InvalidRadiusError(UnicoverError):
    pass


class InvalidExponentError(UnicoverError):
    pass


class DegenerateMeasureError(UnicoverError):
    pass


class DomainError(UnicoverError):
    """A radius family evaluated below its first admissible index, or a
    bound parameter outside its domain."""


class UnsupportedFamilyError(UnicoverError):
    pass


class DegenerateRadiusError(UnicoverError):
    pass


class InsufficientSampleError(UnicoverError):
    pass


class InvalidConfigurationError(UnicoverError):
    pass
