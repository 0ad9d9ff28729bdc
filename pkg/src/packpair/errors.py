"""Exception hierarchy shared by all planning modules."""


class PackPairError(Exception):
    """Base class for every error raised by the package."""


class DegenerateInput(PackPairError, ValueError):
    pass


class InconsistentKeypoints(PackPairError, ValueError):
    pass


class AmbiguousCorners(PackPairError, ValueError):
    pass


class ShapeMismatch(PackPairError, ValueError):
    pass


class NoVisibleKeypoints(PackPairError, ValueError):
    pass


class NoSolution(PackPairError):
    """The toppling constraint has no real root for the given geometry."""


class Infeasible(PackPairError):
    """A root exists but violates the collision or range limits."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        # the out-of-range solution, when one was computed
        self.solution = solution


class WrongState(PackPairError, ValueError):
    pass


class NoRotation(PackPairError):
    """Gravity torque about the box edge is not positive."""


class Unplannable(PackPairError):
    pass


class ShoeBoxMismatch(PackPairError, ValueError):
    pass


class NotPlaced(PackPairError):
    pass


class InapplicableAction(PackPairError):
    pass


class NoBottomState(PackPairError, ValueError):
    """Requested a bottom-state scene for a shoe that cannot rest sole-up."""


class ScenarioError(PackPairError, ValueError):
    """Malformed scenario file; carries a 1-based line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
