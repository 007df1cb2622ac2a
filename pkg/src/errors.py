"""Exception hierarchy of the engine, grouped by the module that raises it."""


class EngineError(Exception):
    """Base error for everything raised by the engine."""


class ConfigError(EngineError):
    pass


# ----------------- GEOMETRY -----------------
class GeometryError(EngineError):
    pass


class DegenerateConfiguration(GeometryError):
    pass


class TooFewCorrespondences(GeometryError):
    pass


class NoConsensus(GeometryError):
    pass


class PointAtInfinity(GeometryError):
    pass


class MaskSizeMismatch(GeometryError):
    pass


class InvalidPlane(GeometryError):
    pass


# ----------------- NUMERICS -----------------
class NumericsError(EngineError):
    pass


class ShapeMismatch(NumericsError, ValueError):
    pass


class NonPositiveDelta(NumericsError):
    pass


# ----------------- ENCODERS -----------------
class EncoderError(EngineError):
    pass


class EmptySequence(EncoderError):
    pass


class ProviderUnavailable(EncoderError):
    pass


class LengthMismatch(EncoderError, ValueError):
    pass


class GridDimMismatch(EncoderError):
    pass


# ----------------- DENOISERS / DIFFUSION -----------------
class DenoiserError(EngineError):
    pass


class InvalidPattern(DenoiserError):
    pass


class DiffusionError(EngineError):
    pass


class InvalidT(DiffusionError):
    pass


class InvalidK(DiffusionError):
    pass


# ----------------- DATA -----------------
class DataError(EngineError):
    pass


class DegenerateSplit(DataError):
    pass


class FormatError(DataError):
    pass


class DatasetIoError(DataError, OSError):
    pass


# ----------------- EVAL -----------------
class EvalError(EngineError):
    pass


class TooShort(EvalError):
    pass


class CheckpointMismatch(EvalError):
    pass


# ----------------- CLI -----------------
class OutputLocked(EngineError):
    pass
