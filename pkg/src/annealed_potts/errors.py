"""Exception hierarchy.

Every numeric failure raised by the library derives from :class:`PottsError`;
invalid arguments raise plain :class:`ValueError`.
"""


class PottsError(Exception):
    """Base class for numeric failures (CLI exit code 3)."""


class NonConvergence(PottsError):
    """Adaptive quadrature or an iteration ran out of budget."""


class MomentRequired(PottsError):
    """A quantity needs a moment of W that is infinite."""


class DivergentSecondMoment(MomentRequired):
    """E[W^2] is infinite, so there is no finite critical temperature."""


class ConcaveRegime(PottsError):
    """B >= log(q-1): the landscape is concave and has no transition."""


class NotZeroCrossing(PottsError):
    """The second derivative of the landscape does not change sign exactly once."""


class NoSteepness(NotZeroCrossing):
    """The unique inflection point is not steep."""


class WrongRegime(PottsError):
    """The inverse temperature is outside the three-solution window."""


class NoSignChange(PottsError):
    """A bracketing precondition does not hold."""


class TooLargeQ(PottsError):
    """Brute-force grid search requested for too many colours."""


class BudgetExceeded(PottsError):
    """Exact enumeration would visit more configurations than allowed."""
