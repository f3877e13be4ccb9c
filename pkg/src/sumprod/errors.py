"""Exception types shared across the package."""


class SumProdError(Exception):
    """Base class for all errors raised by sumprod."""


class DivisionByZero(SumProdError, ZeroDivisionError):
    pass


class NonPrimeModulus(SumProdError, ValueError):
    pass


class CtxMismatch(SumProdError, ValueError):
    pass


class ZeroDilation(SumProdError, ValueError):
    pass


class ZeroElement(SumProdError, ValueError):
    pass


class ZeroParameter(SumProdError, ValueError):
    pass


class TooLarge(SumProdError, ValueError):
    pass


class SetTooSmall(SumProdError, ValueError):
    pass


class EmptyHistogram(SumProdError, ValueError):
    pass


class BadParams(SumProdError, ValueError):
    pass


class DescriptorError(SumProdError, ValueError):
    """Raised when a set descriptor string cannot be parsed."""


class IdentityViolation(SumProdError, AssertionError):
    """An exact (constant-free) inequality or identity failed.

    This always indicates a bug: the checked statements are theorems of
    finite arithmetic, not asymptotic estimates.
    """
