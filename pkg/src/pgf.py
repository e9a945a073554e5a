"""
Probability generating functions of arrival and service distributions.

Two kinds are supported: finite support (exact mass function, evaluated
as a polynomial anywhere on the real line) and the shifted geometric
distribution on the positive integers, G(s) = ps / (1 - (1-p)s).
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InvalidProbability, OutOfDomain, UnsupportedKind
from .series import TruncatedSeries, compose_outer_poly, divide

NORMALIZATION_TOL = 1e-12


class PgfKind(Enum):
    FINITE = "finite"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class Pgf:
    """A distribution on the naturals given by its generating function.

    Use the factory functions (`finite`, `bimodal`, `bernoulli_service`,
    `geometric_shifted`, `product`) rather than the constructor.
    """

    kind: PgfKind
    probs: Optional[np.ndarray] = field(default=None, compare=False)
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind is PgfKind.FINITE:
            probs = np.array(self.probs, dtype=float).ravel()
            if probs.size == 0 or not np.all(np.isfinite(probs)):
                raise InvalidProbability("Mass function must be a non-empty list of finite reals")
            if probs.min() < 0.0:
                raise InvalidProbability(f"Negative probability {probs.min()!r} in mass function")
            if abs(probs.sum() - 1.0) > NORMALIZATION_TOL:
                raise InvalidProbability(f"Mass function sums to {probs.sum()!r}, not 1")
            nonzero = np.flatnonzero(probs)
            probs = probs[: nonzero[-1] + 1].copy()
            probs.setflags(write=False)
            object.__setattr__(self, "probs", probs)
        elif not (self.p is not None and 0.0 < self.p <= 1.0):
            raise InvalidProbability(f"Geometric parameter must lie in (0, 1], got {self.p!r}")

    def __eq__(self, other):
        if not isinstance(other, Pgf) or self.kind is not other.kind:
            return NotImplemented
        if self.kind is PgfKind.GEOMETRIC:
            return self.p == other.p
        return np.array_equal(self.probs, other.probs)

    def __hash__(self):
        if self.kind is PgfKind.GEOMETRIC:
            return hash((self.kind, self.p))
        return hash((self.kind, tuple(self.probs)))

    def __repr__(self) -> str:
        if self.kind is PgfKind.GEOMETRIC:
            return f"Pgf(geometric, p={self.p})"
        return f"Pgf(finite, probs={list(np.round(self.probs, 12))})"

    @property
    def is_finite(self) -> bool:
        return self.kind is PgfKind.FINITE

    @property
    def degree(self) -> float:
        """Largest value with positive mass (inf for geometric)."""
        return self.probs.size - 1 if self.is_finite else float("inf")

    @property
    def is_linear(self) -> bool:
        """True for affine PGFs (degree <= 1), whose second kernel root is at infinity."""
        if self.is_finite:
            return self.degree <= 1
        return self.p == 1.0

    @property
    def p0(self) -> float:
        """P(A = 0)."""
        return float(self.probs[0]) if self.is_finite else 0.0

    def mass(self, n: int) -> float:
        if self.is_finite:
            return float(self.probs[n]) if 0 <= n < self.probs.size else 0.0
        return self.p * (1.0 - self.p) ** (n - 1) if n >= 1 else 0.0

    @property
    def pole(self) -> float:
        """Radius of convergence (inf for finite support)."""
        if self.is_finite or self.p == 1.0:
            return float("inf")
        return 1.0 / (1.0 - self.p)

    def _check_domain(self, x: float) -> None:
        if not self.is_finite and abs(x) >= self.pole:
            raise OutOfDomain(f"Geometric PGF with p={self.p} has a pole at {self.pole}; got x={x}")

    def evaluate(self, x: float) -> float:
        if self.is_finite:
            return float(P.polyval(x, self.probs))
        self._check_domain(x)
        q = 1.0 - self.p
        return self.p * x / (1.0 - q * x)

    __call__ = evaluate

    def deriv(self, x: float) -> float:
        if self.is_finite:
            return float(P.polyval(x, P.polyder(self.probs))) if self.degree >= 1 else 0.0
        self._check_domain(x)
        q = 1.0 - self.p
        return self.p / (1.0 - q * x) ** 2

    def deriv2(self, x: float) -> float:
        if self.is_finite:
            return float(P.polyval(x, P.polyder(self.probs, 2))) if self.degree >= 2 else 0.0
        self._check_domain(x)
        q = 1.0 - self.p
        return 2.0 * self.p * q / (1.0 - q * x) ** 3

    @property
    def mean(self) -> float:
        if self.is_finite:
            return float(np.dot(np.arange(self.probs.size), self.probs))
        return 1.0 / self.p

    def as_series(self, order: int) -> TruncatedSeries:
        """Coefficients P(n) for n = 0..order."""
        if self.is_finite:
            return TruncatedSeries.from_coeffs(self.probs, order)
        n = np.arange(order + 1)
        coeffs = np.where(n >= 1, self.p * (1.0 - self.p) ** np.maximum(n - 1, 0), 0.0)
        return TruncatedSeries(coeffs)

    def compose_series(self, inner: TruncatedSeries, derivative: int = 0) -> TruncatedSeries:
        """The series A(W) (or A'(W) when derivative=1) for a series W.

        Args:
            inner: The series W
            derivative: 0 for the PGF itself, 1 for its first derivative

        Returns:
            TruncatedSeries: Composition with the order of `inner`
        """
        if self.is_finite:
            coeffs = self.probs if derivative == 0 else P.polyder(self.probs, derivative)
            return compose_outer_poly(TruncatedSeries(coeffs), inner)
        q = 1.0 - self.p
        den = 1.0 - q * inner
        if derivative == 0:
            return divide(self.p * inner, den)
        if derivative == 1:
            return divide(TruncatedSeries.constant(self.p, inner.order), den * den)
        raise ValueError(f"Unsupported derivative order {derivative}")

    def to_json(self) -> Dict[str, Any]:
        """Scenario document of a finite-support distribution."""
        if not self.is_finite:
            raise UnsupportedKind("Geometric distributions have no scenario document")
        return {"type": "finite", "probs": [float(x) for x in self.probs]}


def finite(probs: Iterable[float]) -> Pgf:
    """Distribution with P(k) = probs[k] for k = 0..d."""
    return Pgf(PgfKind.FINITE, probs=np.array(list(probs), dtype=float))


def _check_probability(p: float, name: str = "p") -> None:
    if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
        raise InvalidProbability(f"{name} must lie in [0, 1], got {p!r}")


def bimodal(p: float, m: int) -> Pgf:
    """D_{p,m}(u) = (1 - p) + p u^m: a batch of m packets with probability p.

    Args:
        p: Batch probability in [0, 1]
        m: Batch size, at least 1

    Returns:
        Pgf: The bimodal distribution
    """
    _check_probability(p)
    if int(m) != m or m < 1:
        raise InvalidProbability(f"Batch size must be a positive integer, got {m!r}")
    probs = np.zeros(int(m) + 1)
    probs[0] = 1.0 - p
    probs[int(m)] += p
    return finite(probs)


def bernoulli_service(p: float) -> Pgf:
    """S(u) = 1 - p + pu: one packet served with probability p."""
    _check_probability(p)
    if p == 0.0:
        raise InvalidProbability("Service probability must be positive")
    return finite([1.0 - p, p])


def geometric_shifted(p: float) -> Pgf:
    """Geometric distribution on {1, 2, ...}, G(s) = ps / (1 - (1-p)s)."""
    return Pgf(PgfKind.GEOMETRIC, p=p)


def product(a: Pgf, b: Pgf) -> Pgf:
    """Distribution of the sum of independent A and B.

    Raises:
        UnsupportedKind: If either operand is geometric
    """
    if not (a.is_finite and b.is_finite):
        raise UnsupportedKind("product() needs two finite-support distributions")
    probs = np.convolve(a.probs, b.probs)
    return finite(probs / probs.sum())


def _batch_size(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidProbability(f"Batch size 'm' must be an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise InvalidProbability(f"Batch size 'm' must be an integer, got {value!r}")
    return int(value)


def from_json(doc: Dict[str, Any]) -> Pgf:
    """Parse {"type": "bimodal", "p": .., "m": ..} or {"type": "finite", "probs": [..]}.

    Geometric distributions are built from parameters in code, never read
    from documents.

    Raises:
        InvalidProbability: On an unknown type or missing fields
    """
    if not isinstance(doc, dict):
        raise InvalidProbability(f"PGF description must be an object, got {type(doc).__name__}")
    kind = doc.get("type")
    try:
        if kind == "bimodal":
            return bimodal(float(doc["p"]), _batch_size(doc["m"]))
        if kind == "finite":
            return finite(doc["probs"])
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InvalidProbability):
            raise
        raise InvalidProbability(f"Malformed {kind} PGF description: {e}") from e
    raise InvalidProbability(f"Unknown PGF type {kind!r}; expected 'bimodal' or 'finite'")
