"""Exception hierarchy shared by every module."""


class TightHamError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(TightHamError, ValueError):
    pass


class WrongArity(InvalidInput):
    pass


class VertexOutOfRange(InvalidInput):
    pass


class UnsupportedUniformity(InvalidInput):
    pass


class TooLarge(InvalidInput):
    pass


class InfeasibleProbabilities(InvalidInput):
    pass


class EpsOutOfRange(InvalidInput):
    pass


class EllTooSmall(InvalidInput):
    pass


class XTooSmall(InvalidInput):
    pass


class TuplesIntersect(InvalidInput):
    pass


class LengthInfeasible(InvalidInput):
    pass


class NotReservoirVertex(InvalidInput):
    pass


class AlreadyExposed(TightHamError):
    """An r-set was offered for exposure a second time within one round."""


class InternalVerificationFailure(TightHamError):
    pass


class CertificationFailure(TightHamError):
    def __init__(self, clause, message):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


class StageFailure(TightHamError):
    """An algorithmic step gave up. ``stage`` names the step that failed."""

    stage = "unknown"

    def __init__(self, message, *, stage=None, phase=None, **details):
        super().__init__(message)
        if stage is not None:
            self.stage = stage
        self.phase = phase
        self.details = details


class ConnectionFailure(StageFailure):
    stage = "connect"


class WidthWindowFailure(ConnectionFailure):
    stage = "fan-window"


class LevelBudgetExceeded(ConnectionFailure):
    stage = "fan-levels"


class BridgeFailure(ConnectionFailure):
    stage = "bridge"


class EmbeddingBudgetExhausted(StageFailure):
    stage = "step1"


class AbsorbCapacityExceeded(StageFailure):
    stage = "step45"
