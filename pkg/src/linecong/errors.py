"""Exception types raised across the package."""


class CongruenceError(Exception):
    """Base class for all errors raised by linecong."""


class ZeroDirection(CongruenceError):
    pass


class SingularMatrix(CongruenceError):
    pass


class NotOnQuadric(CongruenceError):
    pass


class ZeroVector(CongruenceError):
    pass


class NoRealIntersection(CongruenceError):
    pass


class TangentLine(CongruenceError):
    pass


class OutOfDomain(CongruenceError):
    pass


class StallPoint(CongruenceError):
    """The direction map is singular where a direction chart is required."""


class NotNonElliptic(CongruenceError):
    pass


class NotHyperbolic(CongruenceError):
    pass


class DegenerateFocalData(CongruenceError):
    pass


class DegenerateQuadratic(CongruenceError):
    """Every point of the line is focal."""


class NotParabolic(CongruenceError):
    pass


class SurfaceSingular(CongruenceError):
    pass


class DegenerateField(CongruenceError):
    pass


class EllipticSeed(CongruenceError):
    pass


class StepFailure(CongruenceError):
    pass


class NotIncident(CongruenceError):
    pass


class NotContained(CongruenceError):
    pass


class EqualLines(CongruenceError):
    pass


class ParseError(CongruenceError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DomainEmpty(ParseError):
    pass


class MissingChart(ParseError):
    pass
