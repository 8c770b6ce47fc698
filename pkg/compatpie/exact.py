"""Exact conditional inference for the odds ratio of a 2x2 table.

Given both margins, the exposed-case count A follows the noncentral
hypergeometric distribution

    Pr(A = a; psi) ∝ C(n1, a) C(N - n1, m1 - a) psi^a,   a_min <= a <= a_max

Everything here is computed in log space from log-gamma values and
normalised by subtracting the largest log weight, so margins in the
thousands do not overflow. psi = 0 and psi = inf are the point masses at
a_min and a_max.
"""

import functools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import bisect
from scipy.special import gammaln

from compatpie.config import (
    CACHE_SIZE,
    ESTIMATE_AGREEMENT_TOL,
    LOG_PSI_CAP,
    MINIMUM_LIKELIHOOD_RTOL,
    ROOT_XTOL,
)
from compatpie.errors import (
    BoundaryEstimateError,
    InvalidAlphaError,
    InvalidPsiError,
    InvalidSpecError,
)
from compatpie.interval import IntervalEstimate, IntervalMethod
from compatpie.table import Table2x2
from compatpie.trace import Trace

logger = logging.getLogger(__name__)


class Side(Enum):
    LOWER = "lower"
    UPPER = "upper"
    TWO_SIDED = "two-sided"


class TwoSidedRule(Enum):
    DOUBLED = "doubled"
    MINIMUM_LIKELIHOOD = "minimum-likelihood"


class LimitConstruction(Enum):
    INVERT_TWO_SIDED = "invert-two-sided"
    TAIL_PAIR = "tail-pair"


@functools.lru_cache(maxsize=CACHE_SIZE)
def _log_kernel(m1: int, n1: int, n: int) -> tuple[int, NDArray[np.float64]]:
    a_min = max(0, n1 + m1 - n)
    a_max = min(n1, m1)
    support = np.arange(a_min, a_max + 1, dtype=np.float64)
    log_weights = (
        gammaln(n1 + 1)
        - gammaln(support + 1)
        - gammaln(n1 - support + 1)
        + gammaln(n - n1 + 1)
        - gammaln(m1 - support + 1)
        - gammaln(n - n1 - m1 + support + 1)
    )
    log_weights.setflags(write=False)
    return a_min, log_weights


def _normalized(log_weights: NDArray[np.float64], log_psi: float) -> NDArray[np.float64]:
    size = log_weights.shape[0]
    if log_psi == -math.inf:
        weights = np.zeros(size)
        weights[0] = 1.0
        return weights
    if log_psi == math.inf:
        weights = np.zeros(size)
        weights[-1] = 1.0
        return weights
    shifted = log_weights + log_psi * np.arange(size)
    weights = np.exp(shifted - shifted.max())
    return weights / weights.sum()


def _check_psi(psi: float, allow_limits: bool = False) -> float:
    if math.isnan(psi) or psi < 0:
        raise InvalidPsiError(f"odds ratio must be positive, got {psi}")
    if not allow_limits and (psi == 0 or math.isinf(psi)):
        raise InvalidPsiError(f"odds ratio must be positive and finite, got {psi}")
    return math.log(psi) if psi > 0 else -math.inf


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InvalidAlphaError(f"alpha must lie in (0, 1), got {alpha}")


@dataclass(frozen=True)
class NchgDistribution:
    m1: int
    n1: int
    n: int
    psi: float

    def __post_init__(self):
        if self.n < 1 or not (0 <= self.m1 <= self.n and 0 <= self.n1 <= self.n):
            raise InvalidSpecError(
                f"margins m1={self.m1}, n1={self.n1} do not fit a total of {self.n}"
            )
        _check_psi(self.psi, allow_limits=True)

    @classmethod
    def from_table(cls, t: Table2x2, psi: float) -> "NchgDistribution":
        return cls(t.cases, t.exposed, t.total, psi)

    @property
    def a_min(self) -> int:
        return max(0, self.n1 + self.m1 - self.n)

    @property
    def a_max(self) -> int:
        return min(self.n1, self.m1)

    @property
    def support(self) -> NDArray[np.int64]:
        return np.arange(self.a_min, self.a_max + 1)

    @functools.cached_property
    def weights(self) -> NDArray[np.float64]:
        _, log_weights = _log_kernel(self.m1, self.n1, self.n)
        log_psi = math.log(self.psi) if self.psi > 0 else -math.inf
        return _normalized(log_weights, log_psi)

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.weights))

    @property
    def variance(self) -> float:
        return float(np.dot((self.support - self.mean) ** 2, self.weights))


class _ConditionalModel:
    """Tail arithmetic for one observed table as a function of log(psi)."""

    def __init__(self, t: Table2x2, mid_p: bool = False):
        self.table = t
        self.a_min, self.log_weights = _log_kernel(t.cases, t.exposed, t.total)
        self.a_max = self.a_min + self.log_weights.shape[0] - 1
        self.index = t.a - self.a_min
        self.mid_p = mid_p

    @property
    def degenerate(self) -> bool:
        return self.a_min == self.a_max

    def weights(self, log_psi: float) -> NDArray[np.float64]:
        return _normalized(self.log_weights, log_psi)

    def tails(self, log_psi: float) -> tuple[float, float, float]:
        weights = self.weights(log_psi)
        observed = float(weights[self.index])
        lower = float(weights[: self.index + 1].sum())
        upper = float(weights[self.index :].sum())
        if self.mid_p:
            lower -= observed / 2
            upper -= observed / 2
        return min(lower, 1.0), min(upper, 1.0), observed

    def upper(self, log_psi: float) -> float:
        return self.tails(log_psi)[1]

    def lower(self, log_psi: float) -> float:
        return self.tails(log_psi)[0]

    def two_sided(self, log_psi: float, rule: "TwoSidedRule") -> float:
        if rule is TwoSidedRule.DOUBLED:
            lower, upper, _ = self.tails(log_psi)
            return min(1.0, 2 * min(lower, upper))
        weights = self.weights(log_psi)
        observed = weights[self.index]
        p = float(weights[weights <= observed * (1 + MINIMUM_LIKELIHOOD_RTOL)].sum())
        if self.mid_p:
            p -= float(observed) / 2
        return min(1.0, p)

    def mean(self, log_psi: float) -> float:
        weights = self.weights(log_psi)
        return self.a_min + float(np.dot(np.arange(weights.shape[0]), weights))

    def start(self) -> float:
        t = self.table
        if 0 in t.cells:
            return 0.0
        return math.log(t.a * t.d / (t.b * t.c))

    def mode_range(self) -> tuple[float, float]:
        """log(psi) range over which the observed count is a mode."""
        n, n1, m1, a = self.table.total, self.table.exposed, self.table.cases, self.table.a

        def log_ratio(k: int) -> float:
            # log of Pr(k) / (psi Pr(k-1))
            return math.log((n1 - k + 1) * (m1 - k + 1)) - math.log(k * (n - n1 - m1 + k))

        lo = -math.inf if a == self.a_min else -log_ratio(a)
        hi = math.inf if a == self.a_max else -log_ratio(a + 1)
        return lo, hi


def solve_log_psi(
    f: Callable[[float], float],
    start: float = 0.0,
    increasing: bool = True,
    cap: float = LOG_PSI_CAP,
) -> float:
    """Root of a monotone function of log(psi).

    The bracket grows geometrically away from ``start``; if no sign change
    appears before |log(psi)| = cap the root is taken to be -inf or +inf.
    """

    def g(x: float) -> float:
        return f(x) if increasing else -f(x)

    value = g(start)
    if value == 0:
        return start
    direction = 1.0 if value < 0 else -1.0
    near, step = start, 1.0
    while True:
        far = start + direction * step
        if abs(far) > cap:
            far = direction * cap
            if (g(far) < 0) == (value < 0):
                logger.debug("no sign change before log(psi)=%s", far)
                return direction * math.inf
        if (g(far) < 0) != (value < 0):
            break
        near, step = far, step * 2
    lo, hi = sorted((near, far))
    return float(bisect(g, lo, hi, xtol=ROOT_XTOL))


def _exp(log_psi: float) -> float:
    if log_psi == -math.inf:
        return 0.0
    if log_psi == math.inf:
        return math.inf
    return math.exp(log_psi)


def nchg_pmf(dist: NchgDistribution, a: int) -> float:
    _check_psi(dist.psi)
    if a < dist.a_min or a > dist.a_max:
        return 0.0
    return float(dist.weights[a - dist.a_min])


def exact_tail(
    t: Table2x2, psi: float, side: Side = Side.UPPER, mid_p: bool = False
) -> float:
    """Pr(A >= a) (upper) or Pr(A <= a) (lower) given the margins of ``t``.

    psi = 0 and psi = inf are accepted as the limiting point masses.
    """
    log_psi = _check_psi(psi, allow_limits=True)
    lower, upper, _ = _ConditionalModel(t, mid_p).tails(log_psi)
    match side:
        case Side.UPPER:
            return upper
        case Side.LOWER:
            return lower
    raise InvalidSpecError(f"exact_tail needs a one-sided side, got {side.value}")


@dataclass(frozen=True)
class ExactPValue:
    p: float
    psi: float
    side: Side
    rule: TwoSidedRule = TwoSidedRule.DOUBLED
    mid_p: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "psi": self.psi,
            "side": self.side.value,
            "rule": self.rule.value,
            "mid_p": self.mid_p,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ExactPValue":
        return cls(
            p=float(raw["p"]),
            psi=float(raw["psi"]),
            side=Side(raw["side"]),
            rule=TwoSidedRule(raw["rule"]),
            mid_p=bool(raw["mid_p"]),
        )


def exact_p(
    t: Table2x2,
    psi: float,
    rule: TwoSidedRule = TwoSidedRule.DOUBLED,
    mid_p: bool = False,
    side: Side = Side.TWO_SIDED,
) -> ExactPValue:
    log_psi = _check_psi(psi)
    model = _ConditionalModel(t, mid_p)
    if side is Side.TWO_SIDED:
        p = model.two_sided(log_psi, rule)
    else:
        lower, upper, _ = model.tails(log_psi)
        p = upper if side is Side.UPPER else lower
    return ExactPValue(p=max(0.0, p), psi=psi, side=side, rule=rule, mid_p=mid_p)


def p_value_function(
    t: Table2x2, rule: TwoSidedRule = TwoSidedRule.DOUBLED, mid_p: bool = False
) -> Callable[[float], float]:
    """Two-sided exact P as a function of psi, sharing one kernel across calls."""
    model = _ConditionalModel(t, mid_p)

    def p(psi: float) -> float:
        return max(0.0, model.two_sided(_check_psi(psi), rule))

    return p


def conditional_mean(dist: NchgDistribution) -> float:
    return dist.mean


@dataclass(frozen=True)
class PointEstimate:
    max_p: float
    cmle: float
    plateau: tuple[float, float]
    p_max: float
    rule: TwoSidedRule = TwoSidedRule.DOUBLED

    @property
    def discrepancy(self) -> float:
        return abs(math.log(self.max_p) - math.log(self.cmle))

    @property
    def agrees(self) -> bool:
        return self.discrepancy <= ESTIMATE_AGREEMENT_TOL

    def to_dict(self) -> dict[str, Any]:
        return {
            "max_p": self.max_p,
            "cmle": self.cmle,
            "plateau": list(self.plateau),
            "p_max": self.p_max,
            "rule": self.rule.value,
            "discrepancy": self.discrepancy,
        }


def _plateau(
    model: _ConditionalModel, rule: TwoSidedRule
) -> tuple[float, float]:
    """log(psi) interval on which the two-sided P reaches its maximum."""
    if model.degenerate:
        return -math.inf, math.inf
    if rule is TwoSidedRule.MINIMUM_LIKELIHOOD:
        return model.mode_range()
    start = model.start()
    lo = solve_log_psi(lambda x: model.upper(x) - 0.5, start, increasing=True)
    hi = solve_log_psi(lambda x: model.lower(x) - 0.5, start, increasing=False)
    if hi < lo:
        # mid-P tails cross at a single point
        lo = hi = (lo + hi) / 2
    return lo, hi


def boundary_estimate(t: Table2x2) -> float | None:
    """0, inf or nan when the observed count sits on the edge of its support, else None."""
    dist = NchgDistribution.from_table(t, 1.0)
    if dist.a_min == dist.a_max:
        return math.nan
    if t.a == dist.a_min:
        return 0.0
    if t.a == dist.a_max:
        return math.inf
    return None


@Trace
def cmle_or(
    t: Table2x2, rule: TwoSidedRule = TwoSidedRule.DOUBLED, mid_p: bool = False
) -> PointEstimate:
    boundary = boundary_estimate(t)
    if boundary is not None:
        if math.isnan(boundary):
            raise BoundaryEstimateError(
                boundary, "a zero margin leaves no information on the odds ratio"
            )
        raise BoundaryEstimateError(boundary)
    model = _ConditionalModel(t, mid_p)
    lo, hi = _plateau(model, rule)
    log_max_p = (lo + hi) / 2
    log_cmle = solve_log_psi(lambda x: model.mean(x) - t.a, model.start(), increasing=True)
    estimate = PointEstimate(
        max_p=math.exp(log_max_p),
        cmle=math.exp(log_cmle),
        plateau=(math.exp(lo), math.exp(hi)),
        p_max=model.two_sided(log_max_p, rule),
        rule=rule,
    )
    if not estimate.agrees:
        logger.info(
            "max-P estimate %.6g and conditional MLE %.6g differ by %.3g on the log scale",
            estimate.max_p,
            estimate.cmle,
            estimate.discrepancy,
        )
    return estimate


@Trace
def exact_limits(
    t: Table2x2,
    alpha: float,
    rule: TwoSidedRule = TwoSidedRule.DOUBLED,
    mid_p: bool = False,
    construction: LimitConstruction = LimitConstruction.INVERT_TWO_SIDED,
) -> IntervalEstimate:
    _check_alpha(alpha)
    model = _ConditionalModel(t, mid_p)
    if model.degenerate:
        return IntervalEstimate(0.0, math.inf, alpha, IntervalMethod.EXACT)

    start = model.start()
    if rule is TwoSidedRule.DOUBLED or construction is LimitConstruction.TAIL_PAIR:
        lo = solve_log_psi(lambda x: model.upper(x) - alpha / 2, start, increasing=True)
        hi = solve_log_psi(lambda x: model.lower(x) - alpha / 2, start, increasing=False)
    else:
        plateau_lo, plateau_hi = _plateau(model, rule)
        lo = hi = math.inf
        if plateau_lo == -math.inf:
            lo = -math.inf
        else:
            lo = solve_log_psi(
                lambda x: model.two_sided(min(x, plateau_lo), rule) - alpha,
                plateau_lo,
                increasing=True,
            )
        if plateau_hi == math.inf:
            hi = math.inf
        else:
            hi = solve_log_psi(
                lambda x: model.two_sided(max(x, plateau_hi), rule) - alpha,
                plateau_hi,
                increasing=False,
            )
    return IntervalEstimate(_exp(lo), _exp(hi), alpha, IntervalMethod.EXACT)
