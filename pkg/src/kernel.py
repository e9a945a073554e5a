"""
Galton-Watson tree functions and kernel-root solvers.

T_A is the small root of T = z A(T). Its radius of convergence rho is
reached at the tangency abscissa tau where A(tau) = tau A'(tau). The
characteristic roots governing the stationary tails are

    beta   second solution of u = A(u)
    gamma  largest solution of A(u) S(1/u) = 1, S Bernoulli(p)
    delta  largest solution of v = T_A(B(v))

Scalar roots are bracketed first (scipy's brentq) and then polished
with Newton steps that are only accepted inside the bracket.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BeyondRadius,
    DegenerateBoundary,
    DegenerateLinear,
    InvalidProbability,
    NeverEmpty,
    NoConvergence,
    NoPoleSingularity,
    OutOfDomain,
    UnsupportedKind,
    Unstable,
)
from .pgf import Pgf
from .series import TruncatedSeries, divide, shift

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12
TREE_TOL = 1e-13
RADIUS_TOL = 1e-12
SERIES_NEWTON_TOL = 1e-13
SERIES_NEWTON_CAP = 200
ABOVE_ONE = 1e-9
MAX_BRACKET = 2.0 ** 60
_XTOL = 1e-15
_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class TreeFunction:
    """The tree function T_A of an offspring distribution A.

    For affine offspring tau and rho are +inf sentinels: T_A is then
    the rational function a0 z / (1 - a1 z).
    """

    offspring: Pgf
    tau: float
    rho: float

    @property
    def is_linear(self) -> bool:
        return self.offspring.is_linear

    @property
    def domain_limit(self) -> float:
        """Largest argument T_A can be evaluated at (rho, or the pole 1/a1 when affine)."""
        if not self.is_linear:
            return self.rho
        a1 = self.offspring.mass(1)
        return 1.0 / a1 if a1 > 0.0 else math.inf

    def tangency(self) -> Tuple[float, float]:
        """Return (tau, rho).

        Raises:
            DegenerateLinear: For affine offspring, which has no tangency point
        """
        if self.is_linear:
            raise DegenerateLinear("Affine offspring PGF has no tangency point (rho = +inf)")
        return self.tau, self.rho

    def __call__(self, z: float) -> float:
        return tree_eval(self, z)


def _expand_bracket(f: Callable[[float], float], start: float = 2.0) -> float:
    """Double `start` until f turns positive."""
    x = start
    while not f(x) > 0.0:
        x *= 2.0
        if x > MAX_BRACKET:
            raise NoConvergence(f"No sign change found below {MAX_BRACKET:g}")
    return x


def _polish(f, df, x: float, lo: float, hi: float, tol: float, max_steps: int = 50) -> float:
    """Newton steps from x, kept strictly inside (lo, hi)."""
    for _ in range(max_steps):
        fx = f(x)
        if abs(fx) < tol:
            break
        slope = df(x)
        if slope == 0.0:
            break
        nxt = x - fx / slope
        if not lo < nxt < hi or nxt == x:
            break
        x = nxt
    return x


def _bracketed_root(f, df, lo: float, hi: float, tol: float) -> float:
    x = brentq(f, lo, hi, xtol=_XTOL, rtol=_RTOL, maxiter=500)
    root = _polish(f, df, x, lo, hi, tol)
    logger.debug(f"Root {root!r} in [{lo!r}, {hi!r}], residual {f(root):.2e}")
    return root


def require_empties(a: Pgf) -> None:
    if a.p0 <= 0.0:
        raise NeverEmpty("P(A = 0) = 0: the queue never empties")


def require_stable(rate: float, capacity: float = 1.0) -> None:
    if rate >= capacity:
        raise Unstable(f"Mean arrival rate {rate:.6g} is not below service capacity {capacity:.6g}")


def require_nonlinear(a: Pgf) -> None:
    if a.is_linear:
        raise DegenerateLinear("Affine arrival PGF: the kernel root lies at +inf")


def build_tree_function(a: Pgf) -> TreeFunction:
    """Build T_A and its tangency point (tau, rho).

    Args:
        a: Offspring distribution with P(A=0) > 0 and mean < 1

    Returns:
        TreeFunction: With tau solving A(x) = x A'(x) and rho = tau / A(tau)

    Raises:
        NeverEmpty: If P(A=0) = 0
        Unstable: If mean(a) >= 1
    """
    require_empties(a)
    require_stable(a.mean)
    if a.is_linear:
        return TreeFunction(a, math.inf, math.inf)

    def slope_gap(x):
        return x * a.deriv(x) - a.evaluate(x)

    def slope_gap_deriv(x):
        return x * a.deriv2(x)

    hi = _expand_bracket(slope_gap)
    tau = _bracketed_root(slope_gap, slope_gap_deriv, 1.0, hi, ROOT_TOL)
    return TreeFunction(a, tau, tau / a.evaluate(tau))


def tree_eval(t: TreeFunction, z: float) -> float:
    """Small root x of x = z A(x), for 0 <= z <= rho.

    Raises:
        BeyondRadius: If z exceeds the radius of T_A
    """
    a = t.offspring
    if z < 0.0:
        raise OutOfDomain(f"Tree function evaluated at negative argument {z!r}")
    if z == 0.0:
        return 0.0
    if t.is_linear:
        a0, a1 = a.mass(0), a.mass(1)
        if z * a1 >= 1.0:
            raise BeyondRadius(f"z={z!r} is at or past the pole {t.domain_limit!r} of T_A")
        return a0 * z / (1.0 - a1 * z)
    if z > t.rho + RADIUS_TOL:
        raise BeyondRadius(f"z={z!r} exceeds the radius rho={t.rho!r} of T_A")

    def gap(x):
        return x - z * a.evaluate(x)

    def gap_deriv(x):
        return 1.0 - z * a.deriv(x)

    if z >= t.rho or gap(t.tau) <= 0.0:
        return t.tau
    x = brentq(gap, 0.0, t.tau, xtol=_XTOL, rtol=_RTOL, maxiter=500)
    return _polish(gap, gap_deriv, x, 0.0, t.tau, TREE_TOL)


def tree_deriv(t: TreeFunction, z: float) -> float:
    """T_A'(z) = A(T) / (1 - z A'(T)) by implicit differentiation.

    Raises:
        BeyondRadius: At or beyond rho, where the denominator vanishes
    """
    if not t.is_linear and z >= t.rho:
        raise BeyondRadius(f"T_A' is infinite at and beyond rho={t.rho!r}; got z={z!r}")
    a = t.offspring
    x = tree_eval(t, z)
    den = 1.0 - z * a.deriv(x)
    if den <= 0.0:
        raise BeyondRadius(f"T_A' denominator vanished at z={z!r}")
    return a.evaluate(x) / den


def tree_series(t: TreeFunction, order: int) -> TruncatedSeries:
    """Coefficients of T_A up to z^order by fixed-point iteration T <- z A(T).

    Each pass fixes one more coefficient, so `order` passes are exact.
    """
    if order < 1:
        raise ValueError(f"Tree series needs order >= 1, got {order}")
    a = t.offspring
    tree = TruncatedSeries.constant(0.0, order)
    for _ in range(order):
        tree = shift(a.compose_series(tree), 1)
    return tree


def empty_probability_series(t: TreeFunction, t_max: int) -> TruncatedSeries:
    """Coefficients of 1 / (1 - T_A(z)) up to z^t_max.

    Entry t is P(X_t = 0) for the single queue started empty.
    """
    tree = tree_series(t, max(t_max, 1))
    one = TruncatedSeries.constant(1.0, tree.order)
    return divide(one, one - tree).truncate(t_max)


def second_fixed_point(a: Pgf) -> float:
    """beta > 1 with A(beta) = beta.

    Raises:
        NeverEmpty, Unstable, DegenerateLinear
    """
    require_empties(a)
    require_stable(a.mean)
    require_nonlinear(a)

    def excess(u):
        return a.evaluate(u) - u

    def excess_deriv(u):
        return a.deriv(u) - 1.0

    hi = _expand_bracket(excess)
    return _bracketed_root(excess, excess_deriv, 1.0 + ABOVE_ONE, hi, ROOT_TOL)


def geometric_kernel_root(a: Pgf, p: float) -> float:
    """gamma > 1 with A(gamma) S(1/gamma) = 1 for Bernoulli(p) service.

    Solved in the cleared form A(u)((1-p)u + p) = u; p = 1 gives beta.

    Raises:
        InvalidProbability: If p is outside (0, 1]
        Unstable: If mean(a) >= p
        DegenerateLinear: For affine a
    """
    if not 0.0 < p <= 1.0:
        raise InvalidProbability(f"Service probability must lie in (0, 1], got {p!r}")
    require_empties(a)
    require_stable(a.mean, p)
    require_nonlinear(a)

    def excess(u):
        return a.evaluate(u) * ((1.0 - p) * u + p) - u

    def excess_deriv(u):
        return a.deriv(u) * ((1.0 - p) * u + p) + a.evaluate(u) * (1.0 - p) - 1.0

    hi = _expand_bracket(excess)
    return _bracketed_root(excess, excess_deriv, 1.0 + ABOVE_ONE, hi, ROOT_TOL)


def _check_second_flow(a: Pgf, b: Pgf) -> None:
    if not b.is_finite:
        raise UnsupportedKind("Second-flow arrivals must have finite support")
    if b.p0 <= 0.0:
        raise DegenerateBoundary("P(B = 0) = 0: flow 2 arrives in every slot")
    require_stable(a.mean + b.mean)


def tree_compose_series(a: Pgf, b: Pgf, order: int) -> TruncatedSeries:
    """Series of W(v) = T_A(B(v)), the solution of W = B(v) A(W).

    Series Newton iteration seeded with the constant T_A(B(0)); stops
    when every residual coefficient is below 1e-13.

    Args:
        a: Flow-1 arrivals (offspring of T_A)
        b: Flow-2 arrivals, finite support
        order: Truncation order

    Returns:
        TruncatedSeries: Coefficients of W

    Raises:
        NoConvergence: After 200 Newton iterations
    """
    _check_second_flow(a, b)
    t = build_tree_function(a)
    bv = b.as_series(order)
    w = TruncatedSeries.constant(tree_eval(t, b.p0), order)
    for iteration in range(SERIES_NEWTON_CAP):
        residual = w - bv * a.compose_series(w)
        worst = float(np.abs(residual.coeffs).max())
        logger.debug(f"T_A(B(v)) Newton pass {iteration}: max residual {worst:.2e}")
        if worst < SERIES_NEWTON_TOL:
            return w
        jacobian = 1.0 - bv * a.compose_series(w, derivative=1)
        w = w - residual / jacobian
    raise NoConvergence(f"T_A(B(v)) series did not converge in {SERIES_NEWTON_CAP} Newton passes")


def _argument_reaching(b: Pgf, level: float) -> float:
    """v > 1 with B(v) = level (B is increasing on the positive axis)."""

    def gap(v):
        return b.evaluate(v) - level

    try:
        hi = _expand_bracket(gap)
    except NoConvergence:
        raise NoPoleSingularity(f"B(v) never reaches the radius {level!r} of T_A") from None
    return brentq(gap, 1.0, hi, xtol=_XTOL, rtol=_RTOL, maxiter=500)


def composite_tree_root(a: Pgf, b: Pgf) -> float:
    """delta > 1, the largest solution of v = T_A(B(v)).

    Raises:
        Unstable: If mean(a) + mean(b) >= 1
        NoPoleSingularity: If the crossing would lie past the domain of T_A
    """
    _check_second_flow(a, b)
    t = build_tree_function(a)
    limit = t.domain_limit
    if math.isinf(limit):
        raise NoPoleSingularity("T_A is entire here; v = T_A(B(v)) has no second root")
    v_max = _argument_reaching(b, limit)

    def gap(v):
        return v - tree_eval(t, b.evaluate(v))

    def gap_deriv(v):
        return 1.0 - tree_deriv(t, b.evaluate(v)) * b.deriv(v)

    lo = 1.0 + ABOVE_ONE
    if t.is_linear:
        # T_A blows up at its pole, so some point below v_max has a negative gap
        hi = None
        for k in range(1, 61):
            candidate = v_max - (v_max - 1.0) * 2.0 ** -k
            if gap(candidate) < 0.0:
                hi = candidate
                break
        if hi is None:
            raise NoPoleSingularity("v - T_A(B(v)) stays positive up to the pole of T_A")
    else:
        hi = v_max
        if gap(hi) > 0.0:
            raise NoPoleSingularity(
                f"v - T_A(B(v)) is still positive at v_max={v_max!r}: "
                "the dominant singularity is the branch point, not a pole")
    return _bracketed_root(gap, gap_deriv, lo, hi, ROOT_TOL)
