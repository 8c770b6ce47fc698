"""Large-sample approximations on the log odds-ratio scale."""

import logging
import math
from dataclasses import dataclass
from typing import Any

from scipy.optimize import brentq
from scipy.stats import chi2, norm

from compatpie.config import PEARSON_LOG_PSI_CAP
from compatpie.errors import (
    InvalidAlphaError,
    InvalidPsiError,
    NonpositiveSEError,
    ZeroCellError,
    ZeroExpectedCountError,
)
from compatpie.exact import Side, exact_limits, exact_p, solve_log_psi
from compatpie.interval import IntervalEstimate, IntervalMethod
from compatpie.table import Table2x2, summarize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Chi2Result:
    t: float
    df: int
    p: float
    side: Side = Side.UPPER

    def to_dict(self) -> dict[str, Any]:
        return {"t": self.t, "df": self.df, "p": self.p, "side": self.side.value}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Chi2Result":
        return cls(float(raw["t"]), int(raw["df"]), float(raw["p"]), Side(raw["side"]))


@dataclass(frozen=True)
class WaldInput:
    b: float
    se: float
    c: float = 0.0

    def __post_init__(self):
        if not self.se > 0:
            raise NonpositiveSEError(f"standard error must be positive, got {self.se}")

    @property
    def z(self) -> float:
        return abs(self.b - self.c) / self.se


def _check_no_zero_margin(t: Table2x2) -> None:
    if t.has_zero_margin():
        raise ZeroExpectedCountError(f"table {t} has a zero margin")


def pearson_chi2(t: Table2x2, side: Side = Side.UPPER) -> Chi2Result:
    """Uncorrected Pearson statistic sum((O - E)^2 / E) on 1 df."""
    _check_no_zero_margin(t)
    expected = summarize(t).expected
    statistic = sum((o - e) ** 2 / e for o, e in zip(t.cells, expected))
    match side:
        case Side.UPPER:
            p = float(chi2.sf(statistic, 1))
        case Side.LOWER:
            p = float(chi2.cdf(statistic, 1))
        case _:
            raise InvalidPsiError("the Pearson P-value is one-tailed in the statistic")
    return Chi2Result(t=statistic, df=1, p=p, side=side)


def expected_exposed_cases(t: Table2x2, psi: float) -> float:
    """Fitted exposed-case count with both margins fixed and odds ratio psi."""
    n, n1, m1 = t.total, t.exposed, t.cases
    rest = n - n1 - m1
    lo, hi = max(0.0, -rest), float(min(n1, m1))
    if lo == hi:
        return lo

    def score(e: float) -> float:
        return e * (rest + e) - psi * (n1 - e) * (m1 - e)

    return float(brentq(score, lo, hi, xtol=1e-14 * max(1.0, hi), rtol=1e-15))


def _signed_deviation(t: Table2x2, psi: float) -> float:
    # signed square root of the 1-df statistic; decreasing in psi
    e = expected_exposed_cases(t, psi)
    fitted = (e, t.exposed - e, t.cases - e, t.total - t.exposed - t.cases + e)
    if t.a == e:
        return 0.0
    if min(fitted) <= 0:
        return math.copysign(math.inf, t.a - e)
    return (t.a - e) * math.sqrt(sum(1 / f for f in fitted))


def pearson_statistic(t: Table2x2, psi: float) -> float:
    _check_no_zero_margin(t)
    if not psi > 0 or math.isinf(psi):
        raise InvalidPsiError(f"odds ratio must be positive and finite, got {psi}")
    return _signed_deviation(t, psi) ** 2


def pearson_p(t: Table2x2, psi: float) -> float:
    return float(chi2.sf(pearson_statistic(t, psi), 1))


def pearson_limits(t: Table2x2, alpha: float) -> IntervalEstimate:
    """Limits where the 1-df Pearson test of psi has P = alpha."""
    _check_alpha(alpha)
    _check_no_zero_margin(t)
    root = math.sqrt(float(chi2.isf(alpha, 1)))
    start = 0.0 if t.has_zero_cell() else math.log(t.a * t.d / (t.b * t.c))

    def deviation(x: float) -> float:
        return _signed_deviation(t, math.exp(x))

    lo = solve_log_psi(
        lambda x: deviation(x) - root, start, increasing=False, cap=PEARSON_LOG_PSI_CAP
    )
    hi = solve_log_psi(
        lambda x: deviation(x) + root, start, increasing=False, cap=PEARSON_LOG_PSI_CAP
    )
    logger.debug("pearson limits for %s: log psi in (%s, %s)", t, lo, hi)
    return IntervalEstimate(_exp(lo), _exp(hi), alpha, IntervalMethod.PEARSON)


def _exp(x: float) -> float:
    if x == -math.inf:
        return 0.0
    if x == math.inf:
        return math.inf
    return math.exp(x)


def _check_alpha(alpha: float, allow_one: bool = False) -> None:
    upper_ok = alpha <= 1 if allow_one else alpha < 1
    if not (alpha > 0 and upper_ok):
        raise InvalidAlphaError(f"alpha must lie in (0, 1), got {alpha}")


def log_odds_ratio(t: Table2x2, haldane: bool = False) -> float:
    a, b, c, d = (x + 0.5 for x in t.cells) if haldane else t.cells
    if min(a, b, c, d) <= 0:
        raise ZeroCellError(f"table {t} has a zero cell")
    return math.log(a * d / (b * c))


def log_or_se(t: Table2x2, haldane: bool = False) -> float:
    """Woolf standard error; ``haldane`` adds 0.5 to every cell first."""
    cells = [x + 0.5 for x in t.cells] if haldane else list(t.cells)
    if min(cells) <= 0:
        raise ZeroCellError(f"table {t} has a zero cell")
    return math.sqrt(sum(1 / x for x in cells))


def wald_input(t: Table2x2, psi: float = 1.0, haldane: bool = False) -> WaldInput:
    if not psi > 0 or math.isinf(psi):
        raise InvalidPsiError(f"odds ratio must be positive and finite, got {psi}")
    return WaldInput(log_odds_ratio(t, haldane), log_or_se(t, haldane), math.log(psi))


def wald_p(inp: WaldInput) -> float:
    return float(2 * norm.sf(inp.z))


def wald_limits(b: float, se: float, alpha: float) -> IntervalEstimate:
    if not se > 0:
        raise NonpositiveSEError(f"standard error must be positive, got {se}")
    _check_alpha(alpha, allow_one=True)
    z = float(norm.isf(alpha / 2))
    return IntervalEstimate(
        math.exp(b - z * se), math.exp(b + z * se), alpha, IntervalMethod.WALD
    )


def wald_table_limits(t: Table2x2, alpha: float, haldane: bool = False) -> IntervalEstimate:
    return wald_limits(log_odds_ratio(t, haldane), log_or_se(t, haldane), alpha)


@dataclass(frozen=True)
class MethodComparison:
    """Null P-values and alpha-level limits of each method for one table."""

    alpha: float
    p_values: dict[str, float]
    intervals: dict[str, IntervalEstimate | None]

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "p_values": dict(self.p_values),
            "intervals": {
                k: (v.to_dict() if v is not None else None) for k, v in self.intervals.items()
            },
        }


def compare_methods(t: Table2x2, alpha: float = 0.05) -> MethodComparison:
    p_values: dict[str, float] = {"exact": exact_p(t, 1.0).p}
    intervals: dict[str, IntervalEstimate | None] = {"exact": exact_limits(t, alpha)}
    try:
        p_values["wald"] = wald_p(wald_input(t))
        intervals["wald"] = wald_table_limits(t, alpha)
    except ZeroCellError:
        p_values["wald"] = math.nan
        intervals["wald"] = None
    try:
        p_values["pearson"] = pearson_chi2(t).p
        intervals["pearson"] = pearson_limits(t, alpha)
    except ZeroExpectedCountError:
        p_values["pearson"] = math.nan
        intervals["pearson"] = None
    return MethodComparison(alpha, p_values, intervals)
