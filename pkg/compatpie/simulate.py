"""Monte Carlo checks of coverage, sparse-data bias and significance filtering.

All three draw their tables through ``montecarlo.draw_counts`` on stream 0,
so two runs with the same scenario and seed see the same tables whatever
the method.
"""

import csv
import functools
import io
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from compatpie.asymptotic import log_odds_ratio, wald_table_limits
from compatpie.config import CACHE_SIZE, DEFAULT_SIMS
from compatpie.decisions import null_p, rejects
from compatpie.errors import InvalidSpecError, UnsupportedFormatError, ZeroCellError
from compatpie.exact import exact_limits
from compatpie.interval import TestMethod
from compatpie.montecarlo import (
    Scenario,
    SimReport,
    check_seed,
    check_sims,
    draw_counts,
    fan_out,
    rate_report,
)
from compatpie.table import Table2x2

logger = logging.getLogger(__name__)

Cells = tuple[int, int, int, int]


def _tables(scenario: Scenario, seed: int, start: int, stop: int) -> list[Cells]:
    return [
        (int(a), scenario.n_exposed - int(a), int(c), scenario.n_unexposed - int(c))
        for a, c in draw_counts(scenario, seed, start, stop)
    ]


def _check_alpha(alpha: float, allow_one: bool = False) -> None:
    upper_ok = alpha <= 1 if allow_one else alpha < 1
    if math.isnan(alpha) or not (alpha > 0 and upper_ok):
        raise InvalidSpecError(f"alpha out of range: {alpha}")


@functools.lru_cache(maxsize=CACHE_SIZE)
def _limits(cells: Cells, method: TestMethod, alpha: float) -> tuple[float, float] | None:
    t = Table2x2(*cells)
    match method:
        case TestMethod.EXACT:
            iv = exact_limits(t, alpha)
        case TestMethod.WALD:
            try:
                iv = wald_table_limits(t, alpha)
            except ZeroCellError:
                return None
        case _:
            raise InvalidSpecError(f"coverage is simulated for exact and wald, not {method.value}")
    return iv.lower, iv.upper


def _coverage_counts(
    scenario: Scenario, seed: int, method: TestMethod, alpha: float, start: int, stop: int
) -> tuple[int, int]:
    covered = undefined = 0
    for cells in _tables(scenario, seed, start, stop):
        limits = _limits(cells, method, alpha)
        if limits is None:
            undefined += 1
        elif limits[0] <= scenario.or_pop <= limits[1]:
            covered += 1
    return covered, undefined


def coverage_sim(
    sc: Scenario,
    method: TestMethod = TestMethod.EXACT,
    alpha: float = 0.05,
    n_sims: int = DEFAULT_SIMS,
    seed: int = 0,
) -> SimReport:
    """Share of intervals containing ``sc.or_pop``.

    ``estimate`` leaves undefined intervals out of the denominator;
    ``extras['coverage_undefined_as_miss']`` counts them as misses.
    """
    _check_alpha(alpha)
    check_sims(n_sims)
    check_seed(seed)
    if method is TestMethod.PEARSON:
        raise InvalidSpecError("coverage is simulated for exact and wald intervals")
    worker = functools.partial(_coverage_counts, sc, seed, method, alpha)
    counts = fan_out(worker, n_sims)
    covered = sum(c for c, _ in counts)
    undefined = sum(u for _, u in counts)
    defined = n_sims - undefined
    extras = {
        "alpha": alpha,
        "coverage_undefined_as_miss": covered / n_sims,
        "undefined_fraction": undefined / n_sims,
        "n_defined": float(defined),
    }
    logger.debug("%s coverage: %d of %d defined intervals", method.value, covered, defined)
    return rate_report(sc, f"coverage-{method.value}", seed, covered, defined, extras)


def sample_log_or(cells: Cells) -> float:
    """Sample log odds ratio; +-inf for one zero diagonal, nan when both are zero."""
    try:
        return log_odds_ratio(Table2x2(*cells))
    except ZeroCellError:
        a, b, c, d = cells
        if a * d > 0:
            return math.inf
        if b * c > 0:
            return -math.inf
        return math.nan


def _estimates(scenario: Scenario, seed: int, start: int, stop: int) -> NDArray[np.float64]:
    return np.array([sample_log_or(cells) for cells in _tables(scenario, seed, start, stop)])


def sparse_bias_sim(sc: Scenario, n_sims: int = DEFAULT_SIMS, seed: int = 0) -> SimReport:
    """Error of the sample log odds ratio against ln(or_pop).

    ``estimate`` is the mean error over finite estimates; the extras add
    medians, the share of estimates beyond the truth on the side away from
    the null, and the shares of infinite and undefined estimates.
    """
    check_sims(n_sims)
    check_seed(seed)
    estimates = np.concatenate(fan_out(functools.partial(_estimates, sc, seed), n_sims))
    truth = math.log(sc.or_pop)
    defined = estimates[~np.isnan(estimates)]
    finite = defined[np.isfinite(defined)]
    errors = finite - truth
    if len(finite) == 0:
        mean_error = error = median_finite = math.nan
    else:
        mean_error = float(errors.mean())
        error = float(errors.std(ddof=1) / math.sqrt(len(finite))) if len(finite) > 1 else math.nan
        median_finite = float(np.median(errors))
    if truth == 0 or len(defined) == 0:
        beyond = math.nan
    else:
        beyond = float(np.mean(math.copysign(1.0, truth) * (defined - truth) > 0))
    extras = {
        "mean_error": mean_error,
        "median_error_finite": median_finite,
        "median_error_all": float(np.median(defined - truth)) if len(defined) else math.nan,
        "beyond_truth_fraction": beyond,
        "nonfinite_fraction": float(np.isinf(estimates).sum()) / n_sims,
        "undefined_fraction": float(np.isnan(estimates).sum()) / n_sims,
        "n_finite": float(len(finite)),
    }
    return SimReport(sc, "sparse-bias", n_sims, seed, mean_error, error, extras)


def _filter_draws(
    scenario: Scenario, seed: int, test: TestMethod, start: int, stop: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    estimates, p_values = [], []
    for cells in _tables(scenario, seed, start, stop):
        estimates.append(sample_log_or(cells))
        p = null_p(cells, test)
        p_values.append(math.nan if p is None else p)
    return np.array(estimates), np.array(p_values)


def significance_filter_sim(
    sc: Scenario,
    alpha: float = 0.05,
    n_sims: int = DEFAULT_SIMS,
    seed: int = 0,
    test: TestMethod = TestMethod.WALD,
) -> SimReport:
    """Mean |log OR| among replicates whose null test gives P <= alpha.

    Only finite estimates take part; alpha = 1 keeps every one of them.
    """
    _check_alpha(alpha, allow_one=True)
    check_sims(n_sims)
    check_seed(seed)
    draws = fan_out(functools.partial(_filter_draws, sc, seed, test), n_sims)
    estimates = np.concatenate([e for e, _ in draws])
    p_values = np.concatenate([p for _, p in draws])
    finite = np.isfinite(estimates)
    size = np.abs(estimates[finite])
    passed = np.array(
        [rejects(None if math.isnan(p) else float(p), alpha) for p in p_values[finite]],
        dtype=bool,
    )
    kept = size[passed]
    true_abs = abs(math.log(sc.or_pop))
    conditional = float(kept.mean()) if len(kept) else math.nan
    error = float(kept.std(ddof=1) / math.sqrt(len(kept))) if len(kept) > 1 else math.nan
    extras = {
        "alpha": alpha,
        "overall_mean_abs": float(size.mean()) if len(size) else math.nan,
        "true_abs": true_abs,
        "inflation_ratio": conditional / true_abs if true_abs > 0 else math.nan,
        "pass_fraction": len(kept) / n_sims,
        "nonfinite_fraction": float((~finite).sum()) / n_sims,
    }
    return SimReport(sc, f"filter-{test.value}", n_sims, seed, conditional, error, extras)


def load_scenarios(source: str | Path | IO[str]) -> list[Scenario]:
    """Read a JSON array of scenario objects."""
    try:
        if isinstance(source, (str, Path)):
            with open(source) as f:
                raw = json.load(f)
        else:
            raw = json.load(source)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidSpecError(f"cannot read scenarios: {e}")
    if not isinstance(raw, list):
        raise InvalidSpecError("scenario file must hold a JSON array")
    return [Scenario.from_dict(item) for item in raw]


class ReportFormat(Enum):
    JSONL = "jsonl"
    CSV = "csv"

    @classmethod
    def parse(cls, value: "str | ReportFormat") -> "ReportFormat":
        if isinstance(value, ReportFormat):
            return value
        if value == "json":
            return cls.JSONL
        try:
            return cls(value)
        except ValueError:
            raise UnsupportedFormatError(f"unsupported report format {value!r}")


SCENARIO_COLUMNS = ("label", "n_exposed", "n_unexposed", "baseline_risk", "or_pop")
REPORT_COLUMNS = ("method", "n_sims", "seed", "estimate", "mc_error")


def _cell(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


def format_reports(reports: Sequence[SimReport], fmt: "str | ReportFormat") -> str:
    match ReportFormat.parse(fmt):
        case ReportFormat.JSONL:
            return "".join(json.dumps(r.to_dict()) + "\n" for r in reports)
        case ReportFormat.CSV:
            extras = sorted({key for r in reports for key in r.extras})
            out = io.StringIO()
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(SCENARIO_COLUMNS + REPORT_COLUMNS + tuple(extras))
            for r in reports:
                scenario = r.scenario.to_dict() if r.scenario else {}
                row = [scenario.get(c, "") for c in SCENARIO_COLUMNS]
                row += [r.method, r.n_sims, r.seed, r.estimate, r.mc_error]
                row += [r.extras.get(key, "") for key in extras]
                writer.writerow([_cell(v) for v in row])
            return out.getvalue()
    raise UnsupportedFormatError(f"unsupported report format {fmt!r}")


def write_reports(
    reports: Iterable[SimReport], path: str | Path, fmt: "str | ReportFormat" = ReportFormat.JSONL
) -> None:
    text = format_reports(list(reports), fmt)
    with open(path, "w", newline="") as f:
        f.write(text)
