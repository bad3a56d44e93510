"""Exception types shared across the package."""


class CliffkoError(Exception):
    pass


class InvNonMonomial(CliffkoError, ZeroDivisionError):
    pass


class NotAlphaPolynomial(CliffkoError, ValueError):
    pass


class ParseError(CliffkoError, ValueError):
    pass


class ShapeMismatch(CliffkoError, ValueError):
    pass


class MixedParity(CliffkoError, ValueError):
    pass


class SingularGram(CliffkoError, ValueError):
    pass


class SignatureMismatch(CliffkoError, ValueError):
    pass


class MixedSignConvention(CliffkoError, ValueError):
    pass


class UnknownName(CliffkoError, KeyError):
    pass


class SignatureClash(CliffkoError, ValueError):
    pass


class NotEquivariant(CliffkoError, ValueError):
    pass


class NotReducible(CliffkoError, ValueError):
    pass


class NotIntegrable(CliffkoError, ValueError):
    pass


class NonCentralBody(CliffkoError, ValueError):
    pass


class NotAntisymmetric(CliffkoError, ValueError):
    pass


class FiberMismatch(CliffkoError, ValueError):
    pass


class WitnessInvalid(CliffkoError, ValueError):
    pass


class NotIsometric(CliffkoError, ValueError):
    pass


class FlagMissing(CliffkoError, ValueError):
    pass


class InvalidConcordance(CliffkoError, ValueError):
    pass


class DegenerateAtEndpoint(CliffkoError, ValueError):
    pass


class RankJumpInsideRegion(CliffkoError, ValueError):
    pass


class EmptyOverlap(CliffkoError, ValueError):
    pass


class NotACover(CliffkoError, ValueError):
    pass


class NonConstantBundle(CliffkoError, ValueError):
    pass


class IrrationalSpectrum(CliffkoError, ValueError):
    pass
