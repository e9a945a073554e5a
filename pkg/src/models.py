"""
Stationary analysis of the four discrete-time queueing models.

    single          X' = (X - 1)+ + A
    random_service  X' = (X - S)+ + A, S ~ Bernoulli(p)
    priority        flow 2 (Y) is served only when flow 1 (X) is empty
    tandem          queue 1 forwards its departures to queue 2 (Y)

For each model the module gives the stationary PGF as a truncated series
(except tandem), the tail P(. >= R), the asymptotic pair (C, r) with
P(. >= R) ~ C r^-R, and the Doob-style reference curve.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateBoundary, InvalidProbability, NearPole, OutOfDomain
from .kernel import (
    build_tree_function,
    composite_tree_root,
    geometric_kernel_root,
    require_empties,
    require_stable,
    second_fixed_point,
    tree_compose_series,
    tree_deriv,
    tree_eval,
)
from .performance import measure_performance
from .pgf import Pgf, product
from .series import MAX_ORDER, TruncatedSeries, divide, tail_transform

logger = logging.getLogger(__name__)

POLE_EPS = 1e-9
TAIL_MARGIN = 16


class ModelKind(Enum):
    SINGLE = "single"
    RANDOM_SERVICE = "random_service"
    PRIORITY = "priority"
    TANDEM = "tandem"


class Asymptotic(NamedTuple):
    """P(. >= R) ~ prefactor * base ** -R."""

    prefactor: float
    base: float


@dataclass(frozen=True)
class ModelSpec:
    """One of the four queueing systems with its arrival distributions."""

    kind: ModelKind
    arrivals: Pgf
    arrivals_b: Optional[Pgf] = None
    service_p: float = 1.0

    def __post_init__(self):
        two_flows = self.kind in (ModelKind.PRIORITY, ModelKind.TANDEM)
        if two_flows and self.arrivals_b is None:
            raise ValueError(f"Model '{self.kind.value}' needs a second arrival distribution")
        if not 0.0 < self.service_p <= 1.0:
            raise InvalidProbability(f"Service probability must lie in (0, 1], got {self.service_p!r}")

    @classmethod
    def single(cls, a: Pgf) -> "ModelSpec":
        return cls(ModelKind.SINGLE, a)

    @classmethod
    def random_service(cls, a: Pgf, p: float) -> "ModelSpec":
        return cls(ModelKind.RANDOM_SERVICE, a, service_p=p)

    @classmethod
    def priority(cls, a: Pgf, b: Pgf) -> "ModelSpec":
        return cls(ModelKind.PRIORITY, a, b)

    @classmethod
    def tandem(cls, a: Pgf, b: Pgf) -> "ModelSpec":
        return cls(ModelKind.TANDEM, a, b)

    @property
    def load(self) -> float:
        """Total mean arrival rate."""
        rate = self.arrivals.mean
        if self.arrivals_b is not None:
            rate += self.arrivals_b.mean
        return rate

    def check_stability(self) -> None:
        """Raise Unstable unless the load is strictly below service capacity."""
        require_stable(self.load, self.service_p)


@dataclass(frozen=True)
class StationaryAnalysis:
    spec: ModelSpec
    pgf: Optional[TruncatedSeries]
    tail: Optional[np.ndarray]
    asym_prefactor: float
    asym_base: float
    doob_prefactor: float
    doob_base: float

    def asymptotic_curve(self, r_max: int) -> np.ndarray:
        r = np.arange(r_max + 1)
        return self.asym_prefactor * self.asym_base ** -r.astype(float)

    def doob_curve(self, r_max: int) -> np.ndarray:
        r = np.arange(r_max + 1)
        return self.doob_prefactor * self.doob_base ** -r.astype(float)


def pk_single(a: Pgf, order: int) -> TruncatedSeries:
    """Pollaczek-Khinchine series (1 - lam) A(u)(u - 1) / (u - A(u))."""
    require_empties(a)
    require_stable(a.mean)
    u = TruncatedSeries.variable(order)
    au = a.as_series(order)
    return divide((1.0 - a.mean) * au * (u - 1.0), u - au)


def pk_random_service(a: Pgf, p: float, order: int) -> TruncatedSeries:
    """Stationary series under Bernoulli(p) service.

    The 1/u factors are cleared:
    (1 - lam/p) p A(u)(u - 1) / (u - A(u)((1 - p)u + p)).
    """
    if not 0.0 < p <= 1.0:
        raise InvalidProbability(f"Service probability must lie in (0, 1], got {p!r}")
    require_empties(a)
    require_stable(a.mean, p)
    u = TruncatedSeries.variable(order)
    au = a.as_series(order)
    num = (1.0 - a.mean / p) * p * au * (u - 1.0)
    den = u - au * ((1.0 - p) * u + p)
    return divide(num, den)


def priority_low_pgf(a: Pgf, b: Pgf, order: int) -> TruncatedSeries:
    """Stationary series of the low-priority backlog Y.

    (1 - lamA - lamB) B(v)(1 - v)(W - 1) / ((1 - B(v))(v - W)), W = T_A(B(v)).
    """
    require_stable(a.mean + b.mean)
    if not 0.0 < b.p0 < 1.0:
        raise DegenerateBoundary(f"P(B = 0) = {b.p0!r}: need 0 < P(B = 0) < 1")
    w = tree_compose_series(a, b, order)
    bv = b.as_series(order)
    v = TruncatedSeries.variable(order)
    spare = 1.0 - a.mean - b.mean
    num = spare * bv * (1.0 - v) * (w - 1.0)
    den = (1.0 - bv) * (v - w)
    return divide(num, den)


def priority_low_value(a: Pgf, b: Pgf, v: float) -> float:
    """Pi(v) of the low-priority backlog at a scalar 0 <= v < delta.

    Uses the scalar tree function, so it stays valid up to the pole at
    delta where the truncated series is useless.

    Raises:
        OutOfDomain: For negative v
        NearPole: If |v - T_A(B(v))| <= 1e-9
        BeyondRadius: If B(v) exceeds the radius of T_A
    """
    require_stable(a.mean + b.mean)
    if not 0.0 < b.p0 < 1.0:
        raise DegenerateBoundary(f"P(B = 0) = {b.p0!r}: need 0 < P(B = 0) < 1")
    if v < 0.0:
        raise OutOfDomain(f"Pi(v) needs v >= 0, got v={v}")
    if v == 1.0:
        return 1.0
    b_v = b.evaluate(v)
    w = tree_eval(build_tree_function(a), b_v)
    if abs(v - w) <= POLE_EPS:
        raise NearPole(f"v - T_A(B(v)) = {v - w:.3e} at v={v}")
    spare = 1.0 - a.mean - b.mean
    return spare * b_v * (1.0 - v) * (w - 1.0) / ((1.0 - b_v) * (v - w))


def priority_total_pgf(a: Pgf, b: Pgf, order: int) -> TruncatedSeries:
    """Stationary series of X + Y in the priority queue.

    The server is work-conserving, so the total backlog is the single
    queue fed by the aggregated arrivals AB.
    """
    return pk_single(product(a, b), order)


def asym_single(a: Pgf) -> Asymptotic:
    """C = (1 - lam) beta / (A'(beta) - 1), base beta."""
    beta = second_fixed_point(a)
    return Asymptotic((1.0 - a.mean) * beta / (a.deriv(beta) - 1.0), beta)


def asym_random_service(a: Pgf, p: float) -> Asymptotic:
    gamma = geometric_kernel_root(a, p)
    a_gamma = a.evaluate(gamma)
    s_inv = 1.0 - p + p / gamma
    slope = a.deriv(gamma) * s_inv - a_gamma * p / gamma ** 2
    prefactor = (1.0 - a.mean / p) * (a_gamma - 1.0) / ((gamma - 1.0) * slope)
    return Asymptotic(prefactor, gamma)


def _composite_terms(a: Pgf, b: Pgf):
    """delta, B(delta) and the shared denominator of the two-flow constants."""
    delta = composite_tree_root(a, b)
    t = build_tree_function(a)
    b_delta = b.evaluate(delta)
    w_prime = tree_deriv(t, b_delta) * b.deriv(delta)
    # both factors are negative at delta
    den = (1.0 - b_delta) * (1.0 - w_prime)
    return delta, b_delta, den


def asym_priority(a: Pgf, b: Pgf) -> Asymptotic:
    delta, b_delta, den = _composite_terms(a, b)
    spare = 1.0 - a.mean - b.mean
    return Asymptotic(spare * b_delta * (delta - 1.0) / den, delta)


def asym_tandem(a: Pgf, b: Pgf) -> Asymptotic:
    delta, _, den = _composite_terms(a, b)
    spare = 1.0 - a.mean - b.mean
    return Asymptotic(spare * delta * (delta - 1.0) / den, delta)


def doob_reference(spec: ModelSpec) -> Asymptotic:
    """Reference curve prefactor * base^-R.

    single: beta^(1-R); random service: gamma^(1-R);
    priority and tandem: delta^-R.
    """
    spec.check_stability()
    if spec.kind is ModelKind.SINGLE:
        beta = second_fixed_point(spec.arrivals)
        return Asymptotic(beta, beta)
    if spec.kind is ModelKind.RANDOM_SERVICE:
        gamma = geometric_kernel_root(spec.arrivals, spec.service_p)
        return Asymptotic(gamma, gamma)
    return Asymptotic(1.0, composite_tree_root(spec.arrivals, spec.arrivals_b))


def closed_form_phi(a: Pgf, u: float, z: float) -> float:
    """Transient generating function sum_t sum_n P(X_t = n) u^n z^t at a point.

    Raises:
        OutOfDomain: Unless 0 < u <= 1 and 0 <= z < 1
        NearPole: If |1 - z A(u)/u| <= 1e-9
    """
    if not (0.0 < u <= 1.0 and 0.0 <= z < 1.0):
        raise OutOfDomain(f"closed_form_phi needs 0 < u <= 1 and 0 <= z < 1, got u={u}, z={z}")
    t = build_tree_function(a)
    a_u = a.evaluate(u)
    den = 1.0 - z * a_u / u
    if abs(den) <= POLE_EPS:
        raise NearPole(f"1 - zA(u)/u = {den:.3e} at u={u}, z={z}")
    empty = 1.0 / (1.0 - tree_eval(t, z))
    return (1.0 + empty * z * a_u * (1.0 - 1.0 / u)) / den


def closed_form_priority_boundary(a: Pgf, b: Pgf, v: float, z: float) -> float:
    """sum_t sum_m P(X_t = 0, Y_t = m) v^m z^t for the priority queue.

    (v + T_A(zB(v))(v - 1) / (1 - T_AB(z))) / (v - T_A(zB(v))).
    """
    if not (0.0 < v <= 1.0 and 0.0 <= z < 1.0):
        raise OutOfDomain(f"Boundary function needs 0 < v <= 1 and 0 <= z < 1, got v={v}, z={z}")
    require_stable(a.mean + b.mean)
    kernel_root = tree_eval(build_tree_function(a), z * b.evaluate(v))
    den = v - kernel_root
    if abs(den) <= POLE_EPS:
        raise NearPole(f"v - T_A(zB(v)) = {den:.3e} at v={v}, z={z}")
    both_empty = 1.0 / (1.0 - tree_eval(build_tree_function(product(a, b)), z))
    return (v + both_empty * kernel_root * (v - 1.0)) / den


def exact_tail(pgf: TruncatedSeries, asym: Asymptotic, r_max: int) -> np.ndarray:
    """Tail P(. >= R) for R = 0..r_max from a truncated stationary series.

    The mass past the order is estimated by C r^-(order + 1). Entries below
    the noise floor of the series (its normalization error, at least
    (order + 1) machine epsilons) cannot be resolved and are NaN.
    """
    beyond = asym.prefactor * asym.base ** -float(pgf.order + 1)
    tail = tail_transform(pgf, beyond).coeffs[: r_max + 1].copy()
    floor = max(abs(float(pgf.coeffs.sum()) + beyond - 1.0), (pgf.order + 1) * np.finfo(float).eps)
    unresolved = tail < floor
    if unresolved.any():
        first = int(np.argmax(unresolved))
        logger.warning(f"Exact tail falls below the series noise floor {floor:.1e} at R={first}; "
                       f"left empty up to R={r_max}")
        tail[first:] = np.nan
    return tail


@measure_performance
def analyze(spec: ModelSpec, order: int, r_max: int) -> StationaryAnalysis:
    """Stationary series, tail, asymptotic and reference curves for one model.

    Args:
        spec: The model
        order: Series truncation order
        r_max: Largest tail index reported, at most order - 16

    Returns:
        StationaryAnalysis: The bundle; pgf and tail are None for tandem
    """
    if order > MAX_ORDER:
        raise ValueError(f"Series order {order} exceeds the maximum {MAX_ORDER}")
    if r_max > order - TAIL_MARGIN:
        raise ValueError(f"r_max={r_max} must not exceed order - {TAIL_MARGIN} = {order - TAIL_MARGIN}")
    spec.check_stability()
    a, b = spec.arrivals, spec.arrivals_b
    logger.info(f"Analyzing {spec.kind.value} model at order {order}")

    if spec.kind is ModelKind.SINGLE:
        pgf, asym = pk_single(a, order), asym_single(a)
    elif spec.kind is ModelKind.RANDOM_SERVICE:
        pgf, asym = pk_random_service(a, spec.service_p, order), asym_random_service(a, spec.service_p)
    elif spec.kind is ModelKind.PRIORITY:
        pgf, asym = priority_low_pgf(a, b, order), asym_priority(a, b)
    else:
        pgf, asym = None, asym_tandem(a, b)

    tail = None if pgf is None else exact_tail(pgf, asym, r_max)
    doob = doob_reference(spec)
    return StationaryAnalysis(spec, pgf, tail, asym.prefactor, asym.base, doob.prefactor, doob.base)
