"""
Truncated power series over real coefficients.

A TruncatedSeries holds the coefficients of u^0 .. u^order. Binary
operations on operands of different orders truncate to the smaller one.
All values are immutable; every operation returns a new series.
"""
import logging
from typing import Iterable, Union

import numpy as np

from .errors import NonFiniteCoefficient, NonUnitDenominator, NotADistribution, ZeroOrder

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 128
MAX_ORDER = 512
UNIT_EPS = 1e-12

Number = Union[int, float]


class TruncatedSeries:
    """Power series sum(coeffs[n] * u**n) known up to u**order."""

    __slots__ = ("_coeffs",)
    # numpy scalars must defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, coeffs: Iterable[float]):
        """Build a series from its coefficient list.

        Args:
            coeffs: Coefficients of u^0, u^1, ... (at least one)

        Raises:
            NonFiniteCoefficient: If any coefficient is NaN or infinite
        """
        arr = np.array(coeffs, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("A series needs at least the constant coefficient")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteCoefficient(f"Non-finite coefficient in series of order {arr.size - 1}")
        arr.setflags(write=False)
        self._coeffs = arr

    @classmethod
    def constant(cls, value: float, order: int) -> "TruncatedSeries":
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        return cls(coeffs)

    @classmethod
    def variable(cls, order: int) -> "TruncatedSeries":
        """The series u itself."""
        coeffs = np.zeros(order + 1)
        if order >= 1:
            coeffs[1] = 1.0
        return cls(coeffs)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[float], order: int) -> "TruncatedSeries":
        """Pad with zeros or cut so that the result has exactly `order`."""
        arr = np.array(coeffs, dtype=float).ravel()[: order + 1]
        return cls(np.pad(arr, (0, order + 1 - arr.size)))

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def order(self) -> int:
        return self._coeffs.size - 1

    def truncate(self, order: int) -> "TruncatedSeries":
        if order >= self.order:
            return self
        return TruncatedSeries(self._coeffs[: order + 1])

    def __len__(self) -> int:
        return self._coeffs.size

    def __getitem__(self, n):
        return self._coeffs[n]

    def __repr__(self) -> str:
        head = ", ".join(f"{c:.6g}" for c in self._coeffs[:6])
        tail = ", ..." if self.order >= 6 else ""
        return f"TruncatedSeries(order={self.order}, [{head}{tail}])"

    def __call__(self, x: float) -> float:
        return evaluate(self, x)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(-self._coeffs)

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return add(self, other)
        return add(self, TruncatedSeries.constant(float(other), self.order))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TruncatedSeries):
            return add(self, -other)
        return add(self, TruncatedSeries.constant(-float(other), self.order))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return TruncatedSeries(self._coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return divide(self, other)
        return TruncatedSeries(self._coeffs / float(other))


def _aligned(a: TruncatedSeries, b: TruncatedSeries):
    order = min(a.order, b.order)
    return a.coeffs[: order + 1], b.coeffs[: order + 1], order


def add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Coefficientwise sum, truncated to the smaller order."""
    x, y, _ = _aligned(a, b)
    return TruncatedSeries(x + y)


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product, truncated to the smaller order."""
    x, y, order = _aligned(a, b)
    return TruncatedSeries(np.convolve(x, y)[: order + 1])


def divide(num: TruncatedSeries, den: TruncatedSeries) -> TruncatedSeries:
    """Quotient series q with q * den = num up to the common order.

    Args:
        num: Numerator series
        den: Denominator series; its constant term must not vanish

    Returns:
        TruncatedSeries: The quotient

    Raises:
        NonUnitDenominator: If |den[0]| <= 1e-12
    """
    x, d, order = _aligned(num, den)
    d0 = d[0]
    if abs(d0) <= UNIT_EPS:
        raise NonUnitDenominator(f"Denominator constant term {d0!r} is not invertible")
    q = np.zeros(order + 1)
    q[0] = x[0] / d0
    for n in range(1, order + 1):
        q[n] = (x[n] - np.dot(d[1 : n + 1], q[n - 1 :: -1])) / d0
    return TruncatedSeries(q)


def compose_outer_poly(p: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """Evaluate the polynomial with coefficients p at the series `inner`.

    p is taken as an exact polynomial of degree p.order; the result has
    the order of `inner`.
    """
    result = TruncatedSeries.constant(p.coeffs[-1], inner.order)
    for c in p.coeffs[-2::-1]:
        result = mul(result, inner) + c
    return result


def derivative(s: TruncatedSeries) -> TruncatedSeries:
    """Termwise derivative; the order drops by one.

    Raises:
        ZeroOrder: If s has order 0
    """
    if s.order == 0:
        raise ZeroOrder("Cannot differentiate a series known only to order 0")
    return TruncatedSeries(np.polynomial.polynomial.polyder(s.coeffs))


def evaluate(s: TruncatedSeries, x: float) -> float:
    """Horner evaluation of the truncated polynomial at x."""
    value = float(np.polynomial.polynomial.polyval(x, s.coeffs))
    if not np.isfinite(value):
        raise NonFiniteCoefficient(f"Series of order {s.order} overflows at x={x!r}")
    return value


def shift(s: TruncatedSeries, k: int = 1) -> TruncatedSeries:
    """Multiply by u**k, keeping the order."""
    if k <= 0:
        return s
    return TruncatedSeries.from_coeffs(np.concatenate((np.zeros(k), s.coeffs)), s.order)


def tail_transform(pgf_series: TruncatedSeries, beyond: float = 0.0, tol: float = 1e-6) -> TruncatedSeries:
    """Turn a distribution series into its tail series.

    Entry R of the result is P(X >= R) = sum(pi(n) for R <= n <= order) + beyond,
    computed by reverse cumulative sums so that small tails keep their
    relative precision. Entry 0 is 1.

    Args:
        pgf_series: Coefficients pi(0..order) of a distribution
        beyond: Estimate of the mass past the truncation order
        tol: Allowed deviation of the coefficient sum plus beyond from 1

    Returns:
        TruncatedSeries: Tail probabilities for R = 0..order

    Raises:
        NotADistribution: On negative coefficients or a bad normalization
    """
    coeffs = pgf_series.coeffs
    if coeffs.min() < -UNIT_EPS:
        raise NotADistribution(f"Negative mass {float(coeffs.min()):.3e} in distribution series")
    if not beyond >= 0.0:
        raise NotADistribution(f"Mass past the truncation order must be non-negative, got {beyond!r}")
    total = float(coeffs.sum()) + beyond
    if abs(total - 1.0) > tol:
        raise NotADistribution(f"Distribution series sums to {total!r}, not 1")
    masses = np.clip(coeffs, 0.0, None)
    tail = np.minimum(np.cumsum(masses[::-1])[::-1] + beyond, 1.0)
    tail[0] = 1.0
    return TruncatedSeries(tail)
