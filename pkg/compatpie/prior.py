"""Interval priors as prior data, and the augmented logistic fit they feed.

A normal prior on the log odds ratio with standard deviation ``se`` is
encoded as a balanced pseudo-trial: each arm holds A cases among A + H
subjects, so the pseudo log-OR variance 2/A + 2/H equals se**2. The pseudo
stratum gets its own intercept and an offset of -center on the exposed
row, which moves the prior mode from 0 to ``center``.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

import numpy as np
from scipy.stats import norm

from compatpie.asymptotic import log_odds_ratio
from compatpie.config import PSEUDO_NONCASES
from compatpie.errors import (
    DegeneratePriorError,
    InvalidSpecError,
    SeparatedDataError,
    ZeroCellError,
)
from compatpie.interval import IntervalEstimate, IntervalMethod
from compatpie.logistic import GroupedFit, fit_grouped
from compatpie.table import Table2x2
from compatpie.trace import Trace

logger = logging.getLogger(__name__)

# design row, cases, trials, offset
Row = tuple[list[float], float, float, float]


class RatioScale(Enum):
    ODDS_RATIO = "odds-ratio"
    RATE_RATIO = "rate-ratio"


def _z(level: float) -> float:
    return float(norm.isf((1 - level) / 2))


def _check_level(level: float) -> None:
    if not 0 < level < 1:
        raise InvalidSpecError(f"prior level must lie in (0, 1), got {level}")


@dataclass(frozen=True)
class IntervalPrior:
    lower: float
    upper: float
    level: float = 0.95
    scale: RatioScale = RatioScale.ODDS_RATIO

    def __post_init__(self):
        if not (0 < self.lower < math.inf and 0 < self.upper < math.inf):
            raise InvalidSpecError(
                f"prior bounds must be positive and finite, got {self.lower}, {self.upper}"
            )
        if self.lower == self.upper:
            raise DegeneratePriorError(f"prior interval has zero width at {self.lower}")
        if self.lower > self.upper:
            raise InvalidSpecError(f"prior lower bound {self.lower} exceeds upper {self.upper}")
        _check_level(self.level)

    @property
    def center(self) -> float:
        return (math.log(self.lower) + math.log(self.upper)) / 2

    @property
    def log_symmetric(self) -> bool:
        return math.isclose(self.center, 0.0, abs_tol=1e-12)


@dataclass(frozen=True)
class PriorData:
    cases_per_arm: float
    implied_se: float
    center: float = 0.0
    level: float = 0.95
    scale: RatioScale = RatioScale.ODDS_RATIO

    @property
    def total_cases(self) -> float:
        return 2 * self.cases_per_arm

    @property
    def required_cases_per_arm(self) -> int:
        """Whole cases each arm of a balanced trial must observe to match the prior."""
        return math.ceil(self.cases_per_arm - 1e-9)

    @property
    def required_total_cases(self) -> int:
        return 2 * self.required_cases_per_arm

    def reconstruct_interval(self, level: float | None = None) -> tuple[float, float]:
        level = self.level if level is None else level
        _check_level(level)
        half = _z(level) * self.implied_se
        return math.exp(self.center - half), math.exp(self.center + half)

    def pseudo_cases(self, noncases: float = PSEUDO_NONCASES) -> float:
        """Cases per pseudo arm once ``noncases`` noncases per arm are added."""
        variance = self.implied_se**2 - 2 / noncases
        if variance <= 0:
            raise DegeneratePriorError(
                f"prior SE {self.implied_se:.3g} is too narrow for {noncases:g} pseudo noncases"
            )
        return 2 / variance

    def to_dict(self) -> dict[str, Any]:
        return {
            "cases_per_arm": self.cases_per_arm,
            "total_cases": self.total_cases,
            "required_cases_per_arm": self.required_cases_per_arm,
            "required_total_cases": self.required_total_cases,
            "implied_se": self.implied_se,
            "center": self.center,
            "level": self.level,
            "scale": self.scale.value,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "PriorData":
        return cls(
            cases_per_arm=float(raw["cases_per_arm"]),
            implied_se=float(raw["implied_se"]),
            center=float(raw.get("center", 0.0)),
            level=float(raw.get("level", 0.95)),
            scale=RatioScale(raw.get("scale", RatioScale.ODDS_RATIO.value)),
        )


def prior_to_data(prior: IntervalPrior) -> PriorData:
    implied_se = (math.log(prior.upper) - math.log(prior.lower)) / (2 * _z(prior.level))
    data = PriorData(2 / implied_se**2, implied_se, prior.center, prior.level, prior.scale)
    if not prior.log_symmetric:
        logger.info(
            "prior (%g, %g) is not log-symmetric; centred at log ratio %.6g",
            prior.lower,
            prior.upper,
            prior.center,
        )
    return data


@dataclass(frozen=True)
class AugmentedFit:
    log_or_posterior: float
    se_posterior: float
    frequentist_log_or: float
    frequentist_se: float
    converged: bool
    iterations: int
    frequentist_boundary: str = ""
    prior_center: float | None = None

    def posterior_interval(self, alpha: float = 0.05) -> tuple[float, float]:
        half = _z(1 - alpha) * self.se_posterior
        return math.exp(self.log_or_posterior - half), math.exp(self.log_or_posterior + half)

    def frequentist_interval(self, alpha: float = 0.05) -> IntervalEstimate | None:
        if self.frequentist_boundary:
            return None
        half = _z(1 - alpha) * self.frequentist_se
        return IntervalEstimate(
            math.exp(self.frequentist_log_or - half),
            math.exp(self.frequentist_log_or + half),
            alpha,
            IntervalMethod.WALD,
        )

    def to_dict(self) -> dict[str, Any]:
        def finite(v: float) -> float | None:
            return v if math.isfinite(v) else None

        return {
            "log_or_posterior": self.log_or_posterior,
            "se_posterior": self.se_posterior,
            "frequentist_log_or": finite(self.frequentist_log_or),
            "frequentist_se": finite(self.frequentist_se),
            "frequentist_boundary": self.frequentist_boundary,
            "converged": self.converged,
            "iterations": self.iterations,
            "prior_center": self.prior_center,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "AugmentedFit":
        def number(v: Any) -> float:
            return math.nan if v is None else float(v)

        center = raw.get("prior_center")
        return cls(
            log_or_posterior=float(raw["log_or_posterior"]),
            se_posterior=float(raw["se_posterior"]),
            frequentist_log_or=number(raw["frequentist_log_or"]),
            frequentist_se=number(raw["frequentist_se"]),
            converged=bool(raw["converged"]),
            iterations=int(raw["iterations"]),
            frequentist_boundary=str(raw.get("frequentist_boundary", "")),
            prior_center=None if center is None else float(center),
        )


def _boundary(t: Table2x2) -> str:
    try:
        log_odds_ratio(t)
    except ZeroCellError:
        if t.a * t.d > 0:
            return "+inf"
        if t.b * t.c > 0:
            return "-inf"
        return "undefined"
    return ""


def _actual_rows(t: Table2x2) -> list[Row]:
    # columns: actual intercept, prior intercept, exposure
    rows = [([1.0, 0.0, 1.0], t.a, t.exposed, 0.0), ([1.0, 0.0, 0.0], t.c, t.unexposed, 0.0)]
    return [row for row in rows if row[2] > 0]


def _prior_rows(prior: PriorData) -> list[Row]:
    cases = prior.pseudo_cases()
    trials = cases + PSEUDO_NONCASES
    return [
        ([0.0, 1.0, 1.0], cases, trials, -prior.center),
        ([0.0, 1.0, 0.0], cases, trials, 0.0),
    ]


def _fit(rows: list[Row], columns: list[int]) -> GroupedFit:
    design = np.array([row[0] for row in rows])[:, columns]
    return fit_grouped(
        design,
        [row[1] for row in rows],
        [row[2] for row in rows],
        [row[3] for row in rows],
    )


@Trace
def augment_and_fit(t: Table2x2, prior: PriorData | None = None) -> AugmentedFit:
    """Frequentist fit of ``t`` alongside the fit of ``t`` plus the prior stratum."""
    boundary = _boundary(t)
    if boundary:
        freq_log_or, freq_se, freq_iterations = math.nan, math.nan, 0
        logger.info("table %s is separated; frequentist log OR is %s", t, boundary)
    else:
        freq = _fit(_actual_rows(t), [0, 2])
        freq_log_or, freq_se = float(freq.coefficients[1]), freq.se(1)
        freq_iterations = freq.iterations

    if prior is None:
        if boundary:
            raise SeparatedDataError(f"table {t} has no finite log odds ratio and no prior")
        return AugmentedFit(freq_log_or, freq_se, freq_log_or, freq_se, True, freq_iterations)

    # a zero margin carries no information on the odds ratio
    actual: list[Row] = [] if t.has_zero_margin() else _actual_rows(t)
    columns = [0, 1, 2] if actual else [1, 2]
    fit = _fit(actual + _prior_rows(prior), columns)
    index = len(columns) - 1
    return AugmentedFit(
        log_or_posterior=float(fit.coefficients[index]),
        se_posterior=fit.se(index),
        frequentist_log_or=freq_log_or,
        frequentist_se=freq_se,
        converged=fit.converged,
        iterations=fit.iterations,
        frequentist_boundary=boundary,
        prior_center=prior.center,
    )
