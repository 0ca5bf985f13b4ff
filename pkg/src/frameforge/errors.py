"""Exception hierarchy shared by every frameforge module."""


class FrameForgeError(Exception):
    """Base class; the CLI maps any subclass to exit code 2."""


class NonFiniteEntry(FrameForgeError, ValueError):
    pass


class NotSymmetric(FrameForgeError, ValueError):
    pass


class DimensionMismatch(FrameForgeError, ValueError):
    pass


class FormatError(FrameForgeError, ValueError):
    """Malformed FRAME v1 text, report text or sequence header."""


class GeneratorError(FrameForgeError):
    """A sequence family failed to produce the member at some index."""


class SubsetBudgetExceeded(FrameForgeError):
    def __init__(self, needed, budget, what="subsets"):
        super().__init__(f"{what}: {needed} exceeds subset budget {budget}")
        self.needed = needed
        self.budget = budget


class DegenerateWitness(FrameForgeError):
    pass


class NotSpanning(FrameForgeError):
    pass


class CountMismatch(FrameForgeError, ValueError):
    pass


class ZeroComplement(FrameForgeError):
    pass


class ConstructionFailed(FrameForgeError):
    pass


class LiftNotPossible(FrameForgeError):
    pass


class LevelNotPR(FrameForgeError):
    pass


class IndexOutOfRange(FrameForgeError, IndexError):
    pass
