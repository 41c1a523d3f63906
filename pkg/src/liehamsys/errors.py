"""Exception hierarchy shared by every module."""


class LieHamError(Exception):
    """Base class; the CLI maps subclasses to exit code 3 by name."""


class InvalidArgument(LieHamError, ValueError):
    pass


class UnknownAlgebra(LieHamError, KeyError):
    pass


class UnknownRepresentation(LieHamError, KeyError):
    pass


class ChartMismatch(LieHamError):
    pass


class NotCanonical(LieHamError):
    pass


class DimensionMismatch(LieHamError):
    pass


class NotHamiltonian(LieHamError):
    pass


class SingularChart(LieHamError):
    pass


class CoefficientSingular(LieHamError):
    pass


class GridMismatch(LieHamError):
    pass


class DegenerateConstants(LieHamError):
    pass


class SingularDenominator(LieHamError):
    pass


class DegenerateSolutionSet(LieHamError):
    pass


class InconsistentInvariants(LieHamError):
    pass


class InvalidParams(LieHamError):
    pass


class SchemaError(LieHamError):
    """Raised for malformed configuration documents (CLI exit code 2)."""
