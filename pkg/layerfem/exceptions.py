"""
Errors raised by layerfem. All of them are ValueError subclasses, so callers that only
care about "invalid input" can keep catching ValueError.
"""


class LayerFemError(ValueError):
    pass


class ConfigError(LayerFemError):
    pass


class UnknownProblem(ConfigError):
    pass


class MeshError(LayerFemError):
    pass


class TransitionTooLarge(MeshError):
    pass


class BadCellCount(MeshError):
    pass


class NonMonotonePhi(MeshError):
    pass


class NonConvexPhi(MeshError):
    pass


class IndexOutOfRange(MeshError, IndexError):
    pass


class TooFewPoints(LayerFemError):
    pass


class UnsupportedOrder(LayerFemError):
    pass


class BadEpsilon(LayerFemError):
    pass


class InvalidProblem(LayerFemError):
    pass


class IncompatibleBasis(LayerFemError):
    pass


class QuadratureUnderflow(LayerFemError):
    pass


class NotSPD(LayerFemError):
    pass


class ResidualTooLarge(LayerFemError):
    pass


class MissingDerivative(LayerFemError):
    pass


class NotPlyCell(LayerFemError):
    pass


class MissingDecomposition(LayerFemError):
    pass


class RegionMeshMismatch(LayerFemError):
    pass


class NonPositiveError(LayerFemError):
    pass


class NotEnoughPoints(LayerFemError):
    pass
