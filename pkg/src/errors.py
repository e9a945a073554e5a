"""
Exception hierarchy for the kernel-queues package.

Every error carries the process exit code the CLI reports for it:
2 for bad input, 3 for mathematically inadmissible requests,
4 for iterations that did not converge.
"""


class KernelQueueError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


# Bad input (exit 2)

class ScenarioError(KernelQueueError, ValueError):
    """A scenario document or flag override is malformed."""

    exit_code = 2


class InvalidProbability(KernelQueueError, ValueError):
    """A probability or mass function is outside its admissible range."""

    exit_code = 2


class UnsupportedKind(KernelQueueError, TypeError):
    """An operation was asked for a distribution kind it does not handle."""

    exit_code = 2


# Mathematical inadmissibility (exit 3)

class Inadmissible(KernelQueueError):
    """The request has no mathematical answer for these parameters."""

    exit_code = 3


class Unstable(Inadmissible):
    """Mean arrival rate is not strictly below the service capacity."""


class NeverEmpty(Inadmissible):
    """P(A = 0) = 0: the queue never empties, no tree function exists."""


class DegenerateLinear(Inadmissible):
    """Affine arrival PGF: the second kernel root is at infinity."""


class NoPoleSingularity(Inadmissible):
    """v = T_A(B(v)) has no crossing inside the domain of T_A."""


class DegenerateBoundary(Inadmissible):
    """P(B = 0) is 0 or 1, so the priority formula has no content."""


class BeyondRadius(Inadmissible):
    """Argument lies beyond the convergence radius of a tree function."""


class OutOfDomain(Inadmissible):
    """Argument lies at or beyond the pole of a closed-form PGF."""


class NearPole(Inadmissible):
    """A closed-form denominator is too close to zero to evaluate."""


class NonUnitDenominator(Inadmissible):
    """Series division by a series whose constant term vanishes."""


class ZeroOrder(Inadmissible):
    """Derivative requested of an order-0 series."""


class NotADistribution(Inadmissible):
    """Series coefficients are not a probability distribution."""


class NonFiniteCoefficient(Inadmissible):
    """NaN or infinity appeared in a series result."""


# Non-convergence (exit 4)

class NoConvergence(KernelQueueError):
    """An iteration hit its cap before meeting its stopping rule."""

    exit_code = 4
