"""Exception hierarchy shared by all modules."""


class EstimationError(Exception):
    """Base class for every error raised by exactsme."""


class NotCoprime(EstimationError):
    pass


class NonCausal(EstimationError):
    pass


class SingularBezoutian(EstimationError):
    pass


class DisturbanceOutOfBounds(EstimationError):
    pass


class ZeroDirection(EstimationError):
    pass


class NotOnBoundary(EstimationError):
    pass


class DegeneratePolytope(EstimationError):
    pass


class ConePrecondition(EstimationError):
    pass


class EmptyFront(EstimationError):
    """The measurement is inconsistent with the model: S_k is empty."""

    def __init__(self, k: int, message: str = ""):
        self.k = k
        super().__init__(message or f"uncertainty set is empty at step {k}")


class DegenerateFront(EstimationError):
    """S_k has empty interior, so boundary propagation cannot continue."""

    def __init__(self, k: int, message: str = ""):
        self.k = k
        super().__init__(message or f"uncertainty set has empty interior at step {k}")


class Infeasible(EstimationError):
    pass


class Unbounded(EstimationError):
    pass


class NotFeasible(EstimationError):
    pass


class EmptySet(EstimationError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"exact recursion produced an empty set at step {step}")


class ConfigError(EstimationError):
    pass
