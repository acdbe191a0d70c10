"""Exception hierarchy shared by all modules."""


class HBoundsError(Exception):
    """Base class for every error raised by the package."""


# geometry
class GeometryError(HBoundsError):
    pass


class NonConvex(GeometryError):
    pass


class NonPlanarFace(GeometryError):
    pass


class DegenerateFace(GeometryError):
    pass


class BadOrdering(GeometryError):
    pass


class NonPositive(GeometryError):
    pass


class OutsideCone(GeometryError):
    pass


# sphere arrangement
class DegenerateArrangement(GeometryError):
    pass


class OnBoundary(HBoundsError):
    pass


class DegenerateTriangle(HBoundsError):
    pass


class OnTriangleBoundary(HBoundsError):
    pass


# topology
class TopologyError(HBoundsError):
    pass


class UnknownSector(TopologyError):
    pass


class InconsistentWrapping(TopologyError):
    pass


class NonIntegerInvariant(InconsistentWrapping):
    pass


class ResidueViolation(TopologyError):
    pass


class ProbeDegenerate(TopologyError):
    pass


class InconsistentEdgeSigns(TopologyError):
    pass


class NegativeConstant(HBoundsError):
    pass


# minimal connection
class CardinalityMismatch(HBoundsError):
    pass


class InadmissibleTopology(TopologyError):
    pass


class InfeasiblePotentials(HBoundsError):
    pass


class UnbalancedDegrees(HBoundsError):
    pass


# octant maps and quadrature
class NoRegularPoint(HBoundsError):
    pass


class WindingAmbiguous(HBoundsError):
    pass


class ToleranceNotMet(HBoundsError):
    """Raised when adaptive quadrature cannot reach its target.

    The best estimate and its error are attached so callers can decide
    whether to accept them.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class SnapFailure(HBoundsError):
    pass


# extension
class ExtensionError(HBoundsError):
    pass


class TraceMismatch(ExtensionError):
    pass


class WindingNonzero(ExtensionError):
    pass


class EdgeEnergyTooSmall(ExtensionError):
    pass
