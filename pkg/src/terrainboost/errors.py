"""Exception hierarchy shared across the package."""


class TerrainBoostError(Exception):
    """Base class for all errors raised by this package."""


# --- graph construction / queries ---

class DuplicateLevel(TerrainBoostError):
    pass


class UnknownEndpoint(TerrainBoostError):
    pass


class SelfLoop(TerrainBoostError):
    pass


class DisconnectedGraph(TerrainBoostError):
    pass


class InvalidDimensions(TerrainBoostError):
    pass


class OutOfRangeId(TerrainBoostError):
    pass


class DisconnectedInduced(TerrainBoostError):
    pass


# --- terrains and partitions ---

class NotASubset(TerrainBoostError):
    pass


class WrongUniverse(TerrainBoostError):
    pass


class NotProperSubset(TerrainBoostError):
    pass


class SingletonUniverse(TerrainBoostError):
    pass


class UniverseTooLarge(TerrainBoostError):
    pass


# --- dataset ingestion ---

class MissingColumn(TerrainBoostError):
    pass


class UnknownLevel(TerrainBoostError):
    pass


class MissingValue(TerrainBoostError):
    pass


class NonBinaryTarget(TerrainBoostError):
    pass


class ConstantColumn(TerrainBoostError):
    pass


class EmptySplit(TerrainBoostError):
    pass


# --- model fitting / prediction ---

class EmptyDataset(TerrainBoostError):
    pass


class MisalignedTargets(TerrainBoostError):
    pass


class UnknownLevelAtPredict(TerrainBoostError):
    pass


class DegenerateTarget(TerrainBoostError):
    pass


class LengthMismatch(TerrainBoostError):
    pass


class InvalidConfig(TerrainBoostError):
    pass
