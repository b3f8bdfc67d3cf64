"""Exception types raised by the spinkelly library."""


class SpinKellyError(Exception):
    """Base class for all spinkelly errors."""


class ZeroProbabilityOutcome(SpinKellyError):
    """Bayes update conditioned on an outcome whose probability is zero.

    Signals a logically impossible branch; callers must prune it instead of
    asking for its posterior.
    """


class BankruptWealth(SpinKellyError):
    """A bet result would leave zero wealth (full stake lost).

    Under Kelly sizing this can only happen when a full-stake bet is placed
    on an outcome that is not certain, i.e. a policy bug.
    """


class DegenerateDelta(SpinKellyError):
    """Closed-form angle undefined because sin(delta)*cos(delta) vanishes."""


class UndefinedFormula(SpinKellyError):
    """The printed information-gain angle formula has a vanishing denominator."""


class DegeneratePrior(SpinKellyError):
    """No informative measurement exists at a prior of exactly 0 or 1."""


class GridTooCoarse(SpinKellyError):
    """Backward induction produced a value decrease beyond tolerance.

    Indicates interpolation breakdown; refine the grid.
    """


class OutOfRangeWealth(SpinKellyError):
    """A wealth query or update left the configured wealth grid."""


class InstanceTooLarge(SpinKellyError):
    """Exact (exponential-cost) evaluation requested for too many rounds."""


class UnsolvablePolicy(SpinKellyError):
    """A policy was requested that cannot be evaluated for these game parameters."""


class IoFailure(SpinKellyError):
    """A CSV/JSON export or import failed at the I/O level."""
