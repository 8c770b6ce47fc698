"""Alpha-level decision rules, Monte Carlo power and multiplicity arithmetic."""

import functools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping

from scipy.stats import norm

from compatpie.asymptotic import pearson_chi2, wald_input, wald_p
from compatpie.config import CACHE_SIZE, DEFAULT_SIMS
from compatpie.errors import (
    InvalidAlphaError,
    InvalidGridError,
    InvalidKError,
    InvalidPError,
    InvalidSpecError,
)
from compatpie.exact import exact_p
from compatpie.interval import IntervalEstimate, TestMethod
from compatpie.montecarlo import (
    Scenario,
    SimReport,
    check_seed,
    check_sims,
    draw_counts,
    fan_out,
    rate_report,
    replicate_rng,
)
from compatpie.table import Table2x2

logger = logging.getLogger(__name__)


class Decision(Enum):
    REJECT = "reject"
    ACCEPT = "fail-to-reject"


@dataclass(frozen=True)
class TestDecision:
    p: float | None
    alpha: float
    decision: Decision

    @property
    def rejected(self) -> bool:
        return self.decision is Decision.REJECT

    def __str__(self) -> str:
        return f"{self.decision.value} at level {self.alpha:g}"

    def to_dict(self) -> dict[str, Any]:
        return {"p": self.p, "alpha": self.alpha, "decision": self.decision.value}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "TestDecision":
        p = raw.get("p")
        return cls(
            None if p is None else float(p), float(raw["alpha"]), Decision(raw["decision"])
        )


def _check_level(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InvalidAlphaError(f"alpha must lie in (0, 1), got {alpha}")


def alpha_test(p: float, alpha: float) -> TestDecision:
    if math.isnan(p) or not 0 <= p <= 1:
        raise InvalidPError(f"P-value must lie in [0, 1], got {p}")
    _check_level(alpha)
    return TestDecision(p, alpha, Decision.REJECT if p <= alpha else Decision.ACCEPT)


def interval_test(iv: IntervalEstimate, psi: float) -> TestDecision:
    """Reject psi when the alpha-level interval excludes it."""
    decision = Decision.ACCEPT if iv.contains(psi) else Decision.REJECT
    return TestDecision(None, iv.alpha, decision)


@dataclass(frozen=True)
class PowerSpec:
    n_exposed: int
    n_unexposed: int
    baseline_risk: float
    or_pop: float
    alpha: float = 0.05
    test: TestMethod = TestMethod.EXACT
    n_sims: int = DEFAULT_SIMS
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.alpha) or not 0 <= self.alpha <= 1:
            raise InvalidSpecError(f"alpha must lie in [0, 1], got {self.alpha}")
        check_sims(self.n_sims)
        check_seed(self.seed)
        # validates group sizes, risk and odds ratio
        self.scenario()

    def scenario(self, or_pop: float | None = None) -> Scenario:
        return Scenario(
            self.n_exposed,
            self.n_unexposed,
            self.baseline_risk,
            self.or_pop if or_pop is None else or_pop,
        )


@functools.lru_cache(maxsize=CACHE_SIZE)
def null_p(cells: tuple[int, int, int, int], test: TestMethod) -> float | None:
    """P-value for OR = 1, or None when the table carries no test statistic."""
    t = Table2x2(*cells)
    if t.has_zero_margin():
        return None
    match test:
        case TestMethod.EXACT:
            return exact_p(t, 1.0).p
        case TestMethod.PEARSON:
            return pearson_chi2(t).p
        case TestMethod.WALD:
            if t.has_zero_cell():
                return None
            return wald_p(wald_input(t))
    raise InvalidSpecError(f"unknown test {test}")


def rejects(p: float | None, alpha: float) -> bool:
    if alpha <= 0:
        return False
    if alpha >= 1:
        return True
    return p is not None and p <= alpha


def _rejections(
    scenario: Scenario,
    seed: int,
    stream: int,
    test: TestMethod,
    alpha: float,
    start: int,
    stop: int,
) -> int:
    hits = 0
    for a, c in draw_counts(scenario, seed, start, stop, stream):
        cells = (
            int(a),
            scenario.n_exposed - int(a),
            int(c),
            scenario.n_unexposed - int(c),
        )
        hits += rejects(null_p(cells, test), alpha)
    return hits


def _power(spec: PowerSpec, or_pop: float, stream: int) -> SimReport:
    scenario = spec.scenario(or_pop)
    worker = functools.partial(_rejections, scenario, spec.seed, stream, spec.test, spec.alpha)
    hits = sum(fan_out(worker, spec.n_sims))
    report = rate_report(scenario, f"power-{spec.test.value}", spec.seed, hits, spec.n_sims)
    report.extras.update({"alpha": spec.alpha, "beta": 1 - report.estimate, "stream": stream})
    logger.debug("power at OR %g: %d / %d", or_pop, hits, spec.n_sims)
    return report


def power_mc(spec: PowerSpec) -> SimReport:
    """Rejection rate of the null OR = 1 when the population OR is ``spec.or_pop``.

    Replicates depend only on (seed, index), so runs that differ only in
    alpha see the same tables.
    """
    return _power(spec, spec.or_pop, 0)


@dataclass(frozen=True)
class PowerPoint:
    or_pop: float
    power: float
    beta: float
    mc_error: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "or_pop": self.or_pop,
            "power": self.power,
            "beta": self.beta,
            "mc_error": self.mc_error,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "PowerPoint":
        return cls(
            float(raw["or_pop"]), float(raw["power"]), float(raw["beta"]), float(raw["mc_error"])
        )


def power_curve(spec: PowerSpec, or_grid: Iterable[float]) -> list[PowerPoint]:
    grid = list(or_grid)
    if not grid:
        raise InvalidGridError("power curve needs at least one odds ratio")
    for value in grid:
        if not 0 < value < math.inf:
            raise InvalidGridError(f"odds ratios must be positive and finite, got {value}")
    points = []
    for stream, or_pop in enumerate(grid, start=1):
        report = _power(spec, or_pop, stream)
        points.append(PowerPoint(or_pop, report.estimate, 1 - report.estimate, report.mc_error))
    return points


def bonferroni(alpha: float, k: int) -> float:
    _check_level(alpha)
    if k < 1:
        raise InvalidKError(f"number of tests must be >= 1, got {k}")
    return alpha / k


class DependenceKind(Enum):
    INDEPENDENT = "independent"
    PERFECT = "perfectly-correlated"
    SIMULATED = "simulated"


@dataclass(frozen=True)
class Dependence:
    kind: DependenceKind = DependenceKind.INDEPENDENT
    rho: float = 0.0
    n_sims: int = DEFAULT_SIMS
    seed: int = 0

    def __post_init__(self):
        if self.kind is DependenceKind.SIMULATED:
            if math.isnan(self.rho) or not 0 <= self.rho <= 1:
                raise InvalidSpecError(f"rho must lie in [0, 1], got {self.rho}")
            check_sims(self.n_sims)
            check_seed(self.seed)

    @classmethod
    def simulated(cls, rho: float, n_sims: int, seed: int) -> "Dependence":
        return cls(DependenceKind.SIMULATED, rho, n_sims, seed)


def _familywise_hits(
    k: int, alpha: float, rho: float, seed: int, start: int, stop: int
) -> int:
    z = float(norm.isf(alpha / 2))
    shared, own = math.sqrt(rho), math.sqrt(1 - rho)
    hits = 0
    for index in range(start, stop):
        rng = replicate_rng(seed, index)
        statistics = shared * rng.standard_normal() + own * rng.standard_normal(k)
        hits += bool((abs(statistics) >= z).any())
    return hits


def familywise_rate(
    alpha: float, k: int, dependence: Dependence = Dependence()
) -> SimReport:
    """Chance of one or more P <= alpha among k tests of true nulls."""
    _check_level(alpha)
    if k < 1:
        raise InvalidKError(f"number of tests must be >= 1, got {k}")
    extras = {"alpha": alpha, "k": float(k)}
    match dependence.kind:
        case DependenceKind.INDEPENDENT:
            rate = 1 - (1 - alpha) ** k
            return SimReport(None, dependence.kind.value, 0, 0, rate, 0.0, extras)
        case DependenceKind.PERFECT:
            return SimReport(None, dependence.kind.value, 0, 0, alpha, 0.0, extras)
    worker = functools.partial(_familywise_hits, k, alpha, dependence.rho, dependence.seed)
    hits = sum(fan_out(worker, dependence.n_sims))
    extras["rho"] = dependence.rho
    return rate_report(
        None, dependence.kind.value, dependence.seed, hits, dependence.n_sims, extras
    )
