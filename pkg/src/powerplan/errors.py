"""Exception hierarchy shared by the solver modules."""


class PowerPlanError(Exception):
    """Base class for every error raised by powerplan."""


class InvalidScenario(PowerPlanError, ValueError):
    pass


class DegenerateUser(InvalidScenario):
    """A user whose own-signal coefficient A_ii vanishes."""

    def __init__(self, user: int):
        self.user = user
        super().__init__(f"user {user} has zero own-signal coefficient A_ii")


class DimensionMismatch(PowerPlanError, ValueError):
    pass


class NoConvergence(PowerPlanError, RuntimeError):
    def __init__(self, iterations: int, detail: str = ""):
        self.iterations = iterations
        msg = f"no convergence after {iterations} iterations"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SingularSystem(PowerPlanError, ArithmeticError):
    """Linear solve broke down although the spectral gate said it should not."""


class NotMember(PowerPlanError, ValueError):
    pass


class InvalidBound(PowerPlanError, ValueError):
    pass


class RegionEmpty(PowerPlanError):
    """The SIR targets cannot be met by any power vector."""


class AlreadyFeasible(PowerPlanError):
    """The minimal power point already satisfies the power constraints."""


class Infeasible(PowerPlanError):
    """The SIR region and the power caps do not intersect."""

    def __init__(self, msg: str, min_point=None):
        self.min_point = min_point
        super().__init__(msg)


class OutOfBox(PowerPlanError, ValueError):
    pass


class ParseError(PowerPlanError, ValueError):
    def __init__(self, location: str, reason: str):
        self.location = location
        self.reason = reason
        super().__init__(f"{location}: {reason}")


class ValidationError(InvalidScenario):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")
