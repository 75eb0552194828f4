"""Exception types shared across the package."""


class AlgebraError(ValueError):
    """Base class for contract violations raised by the algebra layers."""


class DimensionMismatch(AlgebraError):
    pass


class IndexOutOfRange(AlgebraError, IndexError):
    pass


class NotHermitian(AlgebraError):
    pass


class NotIdempotent(AlgebraError):
    pass


class NotElementary(AlgebraError):
    pass


class NotOrthonormal(AlgebraError):
    pass


class NotUnitary(AlgebraError):
    pass


class NotCommuting(AlgebraError):
    pass


class NotInSpectrum(AlgebraError):
    pass


class ZeroInput(AlgebraError):
    pass


class LinearlyDependent(AlgebraError):
    pass


class NotInSpan(AlgebraError):
    pass


class NotNormalized(AlgebraError):
    pass


class NotInFamily(AlgebraError):
    pass


class InvalidDistribution(AlgebraError):
    pass


class VerificationFailure(AssertionError):
    """A machine-checked identity failed beyond its tolerance."""


class ParseError(ValueError):
    """Scenario file could not be parsed; message carries line/field info."""


class ValidationError(ValueError):
    """Scenario data is well formed but violates a model invariant."""
