"""Command-line front end: one subcommand per procedure.

Tables are given as ``--table a,b,c,d`` in canonical order (exposed-case,
exposed-noncase, unexposed-case, unexposed-noncase). ``--layout printed``
reads the same four numbers in the printed orientation instead (unexposed
column first, case row first), so the canonical table 10,110,16,464 is also
``--layout printed --table 16,10,464,110``.

Numeric flags accept small arithmetic expressions (``--lower 1/1.20``).
"""

import argparse
import contextlib
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Final, Sequence, TypeVar

from compatpie.asymptotic import (
    compare_methods,
    pearson_chi2,
    pearson_limits,
    pearson_p,
    wald_input,
    wald_p,
    wald_table_limits,
)
from compatpie.compatibility import (
    CompatibilityCurve,
    CurveGrid,
    coin_toss_equivalent,
    compatibility_curve,
    curve_limits,
    s_value,
    toss_bracket,
)
from compatpie.config import (
    DEFAULT_SIMS,
    OR_DIGITS,
    POINTS_PER_DECADE,
    P_DIGITS,
    S_DIGITS,
    log_level,
)
from compatpie.decisions import (
    Dependence,
    DependenceKind,
    PowerSpec,
    alpha_test,
    bonferroni,
    familywise_rate,
    power_curve,
    power_mc,
)
from compatpie.errors import (
    BoundaryEstimateError,
    CompatError,
    ComputationError,
    InputError,
    ReportWriteError,
)
from compatpie.exact import LimitConstruction, TwoSidedRule, cmle_or, exact_limits, exact_p
from compatpie.interval import IntervalEstimate, TestMethod
from compatpie.montecarlo import Scenario, SimReport
from compatpie.parser import evaluate_counts, evaluate_value, evaluate_values
from compatpie.prior import IntervalPrior, RatioScale, augment_and_fit, prior_to_data
from compatpie.render import format_half_up, render_curves
from compatpie.simulate import (
    coverage_sim,
    format_reports,
    load_scenarios,
    significance_filter_sim,
    sparse_bias_sim,
)
from compatpie.table import Table2x2, new_table, summarize

logger = logging.getLogger(__name__)

PROG: Final[str] = "compat"
FORMATS: Final[tuple[str, ...]] = ("text", "json", "csv")
SIMULATIONS: Final[tuple[str, ...]] = ("coverage-sim", "sparse-sim", "filter-sim")

_T = TypeVar("_T")


class UsageError(InputError):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class Display:
    p: int = P_DIGITS
    ratio: int = OR_DIGITS
    s: int = S_DIGITS

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "Display":
        if args.precision is None:
            return cls()
        if args.precision < 0:
            raise UsageError(f"--precision must be >= 0, got {args.precision}")
        return cls(args.precision, args.precision, args.precision)

    def ratio_text(self, value: float) -> str:
        return "inf" if math.isinf(value) else f"{value:.{self.ratio}f}"


@dataclass
class Output:
    text: str
    payload: Any
    rows: list[dict[str, Any]]


# argument readers


def _value(text: str) -> float:
    return evaluate_value(text)


def _values(text: str) -> list[float]:
    return evaluate_values(text)


def _count(text: str) -> int:
    return evaluate_counts(text, 1)[0]


def _table(args: argparse.Namespace) -> Table2x2:
    cells = evaluate_counts(args.table, 4)
    if args.layout == "printed":
        return Table2x2.from_printed(*cells)
    return new_table(*cells)


def _methods(text: str, allowed: Sequence[str] = ("exact", "wald", "pearson")) -> list[TestMethod]:
    names = list(allowed) if text == "all" else [m.strip() for m in text.split(",")]
    methods = []
    for name in names:
        if name not in allowed:
            raise UsageError(f"unknown method {name!r}; choose from {', '.join(allowed)} or all")
        methods.append(TestMethod(name))
    return methods


def _each_method(
    methods: Sequence[TestMethod], compute: Callable[[TestMethod], _T]
) -> tuple[dict[TestMethod, _T], dict[TestMethod, str]]:
    """Results per method, plus the reason for each method the table leaves undefined.

    A lone method that fails raises, as does a request where every method fails.
    """
    done: dict[TestMethod, _T] = {}
    failed: dict[TestMethod, ComputationError] = {}
    for method in methods:
        try:
            done[method] = compute(method)
        except ComputationError as e:
            if len(methods) == 1:
                raise
            logger.warning("%s undefined for this table: %s", method.value, e)
            failed[method] = e
    if not done:
        raise next(iter(failed.values()))
    return done, {method: str(e) for method, e in failed.items()}


def _scenarios(args: argparse.Namespace) -> list[Scenario]:
    if args.scenario_file:
        return load_scenarios(args.scenario_file)
    missing = [
        flag
        for flag, value in (
            ("--n-exposed", args.n_exposed),
            ("--n-unexposed", args.n_unexposed),
            ("--baseline-risk", args.baseline_risk),
            ("--or", args.or_pop),
        )
        if value is None
    ]
    if missing:
        raise UsageError(f"missing {', '.join(missing)} (or give --scenario-file)")
    return [Scenario(args.n_exposed, args.n_unexposed, args.baseline_risk, args.or_pop, args.label)]


def _require_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command} is stochastic and needs --seed")
    return args.seed


def _exact_options(args: argparse.Namespace) -> dict[str, Any]:
    return {"rule": TwoSidedRule(args.rule), "mid_p": args.mid_p}


def _write_report(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as e:
        raise ReportWriteError(
            f"cannot write report to {path}: {e.strerror or e}; check that the directory exists"
        ) from e


def _surprise_text(p: float, d: Display) -> str:
    s = s_value(p)
    if p == 0:
        return f"p={p:.{d.p}f}, s=inf bits"
    n = coin_toss_equivalent(p)
    low, high = toss_bracket(n)
    bracket = f"(1/2^{n}={format_half_up(low, d.p)}"
    bracket += f", 1/2^{n - 1}={format_half_up(high, d.p)})" if n > 0 else ")"
    return f"p={p:.{d.p}f}, s={s:.{d.s}f} bits, coin-toss n={n} {bracket}"


def _surprise_row(p: float) -> dict[str, Any]:
    row: dict[str, Any] = {"p": p, "s": s_value(p) if p > 0 else "inf"}
    if p > 0:
        n = coin_toss_equivalent(p)
        row.update({"coin_tosses": n, "toss_bracket": list(toss_bracket(n))})
    return row


# subcommands


def cmd_describe(args: argparse.Namespace, d: Display) -> Output:
    t = _table(args)
    summary = summarize(t)
    e = summary.expected
    lines = [
        f"table a,b,c,d = {t}",
        f"{'':12}{'case':>8}{'noncase':>10}{'total':>8}",
        f"{'exposed':12}{t.a:>8}{t.b:>10}{t.exposed:>8}",
        f"{'unexposed':12}{t.c:>8}{t.d:>10}{t.unexposed:>8}",
        f"{'total':12}{t.cases:>8}{t.noncases:>10}{t.total:>8}",
        f"proportion with outcome: exposed {summary.p_exposed:.{d.p}f}, "
        f"unexposed {summary.p_unexposed:.{d.p}f}",
        f"RD={summary.rd:.{d.p}f} RR={summary.rr.format(d.ratio)} OR={summary.or_.format(d.ratio)}",
        f"expected under independence: a={e[0]:.{d.s}f} b={e[1]:.{d.s}f} "
        f"c={e[2]:.{d.s}f} d={e[3]:.{d.s}f}",
    ]
    payload = {"table": t.to_dict(), "summary": summary.to_dict()}
    row = {**t.to_dict(), **{k: v for k, v in summary.to_dict().items() if k != "expected"}}
    row.update({f"expected_{k}": v for k, v in zip("abcd", e)})
    return Output("\n".join(lines), payload, [row])


def _test_one(
    t: Table2x2, method: TestMethod, psi: float, args: argparse.Namespace
) -> dict[str, Any]:
    result: dict[str, Any] = {"method": method.value, "psi": psi}
    match method:
        case TestMethod.EXACT:
            p = exact_p(t, psi, **_exact_options(args)).p
            result["rule"] = args.rule
        case TestMethod.PEARSON:
            if psi == 1:
                chi = pearson_chi2(t)
                p, result["statistic"] = chi.p, chi.t
            else:
                p = pearson_p(t, psi)
        case TestMethod.WALD:
            inp = wald_input(t, psi)
            p, result["statistic"] = wald_p(inp), inp.z
    result.update(_surprise_row(p))
    result["decision"] = alpha_test(p, args.alpha).to_dict()
    return result


def cmd_test(args: argparse.Namespace, d: Display) -> Output:
    t = _table(args)
    psi = args.or_value
    methods = _methods(args.method)
    done, undefined = _each_method(methods, lambda m: _test_one(t, m, psi, args))
    results: list[dict[str, Any]] = []
    lines: list[str] = []
    for method in methods:
        if method in undefined:
            reason = undefined[method]
            results.append({"method": method.value, "psi": psi, "undefined": reason})
            lines.append(f"{method.value} test of OR={psi:g}: undefined ({reason})")
            continue
        r = done[method]
        results.append(r)
        extra = ""
        if "statistic" in r:
            label = "chi2" if r["method"] == "pearson" else "Z"
            extra = f", {label}={r['statistic']:.{d.ratio}f}"
        decision = f"{r['decision']['decision']} at level {args.alpha:g}"
        lines.append(
            f"{r['method']} test of OR={psi:g}: {_surprise_text(r['p'], d)}{extra}; {decision}"
        )
    return Output("\n".join(lines), {"table": t.to_dict(), "results": results}, _flat(results))


def _flat(results: list[dict[str, Any]]) -> list[dict[str, Any]]:
    rows = []
    for r in results:
        row = {k: v for k, v in r.items() if not isinstance(v, (dict, list))}
        if "decision" in r:
            row["decision"] = r["decision"]["decision"]
        rows.append(row)
    return rows


def _interval(t: Table2x2, method: TestMethod, args: argparse.Namespace) -> IntervalEstimate:
    match method:
        case TestMethod.EXACT:
            construction = LimitConstruction(args.construction)
            return exact_limits(t, args.alpha, construction=construction, **_exact_options(args))
        case TestMethod.WALD:
            return wald_table_limits(t, args.alpha)
        case TestMethod.PEARSON:
            return pearson_limits(t, args.alpha)
    raise UsageError(f"unknown method {method}")


def cmd_interval(args: argparse.Namespace, d: Display) -> Output:
    t = _table(args)
    methods = _methods(args.method)
    done, undefined = _each_method(methods, lambda m: _interval(t, m, args))
    lines: list[str] = []
    rows: list[dict[str, Any]] = []
    for method in methods:
        if method in undefined:
            lines.append(f"{method.value} interval: undefined ({undefined[method]})")
            rows.append({"method": method.value, "undefined": undefined[method]})
            continue
        iv = done[method]
        lines.append(
            f"{iv.label} ({iv.method.value}): {d.ratio_text(iv.lower)}, {d.ratio_text(iv.upper)}"
        )
        rows.append(iv.to_dict())
    payload: dict[str, Any] = {"table": t.to_dict(), "intervals": rows}
    if TestMethod.EXACT in done:
        try:
            estimate = cmle_or(t, **_exact_options(args))
            lines.append(
                f"point estimate (maximum P) {d.ratio_text(estimate.max_p)}, "
                f"conditional MLE {d.ratio_text(estimate.cmle)}"
            )
            payload["point_estimate"] = estimate.to_dict()
        except BoundaryEstimateError as e:
            lines.append(f"point estimate on the boundary: OR {d.ratio_text(e.value)}")
    if args.method == "all" and TestMethod.EXACT in done:
        comparison = compare_methods(t, args.alpha)
        payload["comparison"] = comparison.to_dict()
    return Output("\n".join(lines), payload, rows)


def cmd_compat_curve(args: argparse.Namespace, d: Display) -> Output | bytes:
    t = _table(args)
    grid = None
    if args.psi_min is not None or args.psi_max is not None:
        if args.psi_min is None or args.psi_max is None:
            raise UsageError("give both --psi-min and --psi-max")
        grid = CurveGrid(args.psi_min, args.psi_max, args.points_per_decade)
    elif args.points_per_decade != POINTS_PER_DECADE:
        grid = CurveGrid.for_table(t, args.points_per_decade)
    marks = tuple(args.alpha_marks)
    methods = _methods(args.methods)
    done, undefined = _each_method(
        methods, lambda m: compatibility_curve(t, grid, m, marks, **_exact_options(args))
    )
    if args.format != "text":
        return render_curves(list(done.values()), args.format, args.width, args.height)
    lines = []
    for method in methods:
        if method in undefined:
            lines.append(f"{method.value} curve: undefined ({undefined[method]})")
            continue
        curve = done[method]
        lines.append(
            f"{curve.method.value} curve: {len(curve.points)} points, "
            f"max p={curve.p_max:.{d.p}f} at OR {d.ratio_text(curve.psi_hat)}"
        )
        lines.extend(_curve_marks(curve, d))
    return Output("\n".join(lines), None, [])


def _curve_marks(curve: CompatibilityCurve, d: Display) -> list[str]:
    lines = []
    for alpha in curve.alpha_marks:
        iv = curve_limits(curve, alpha)
        lines.append(
            f"  p={alpha:g} crossings: {d.ratio_text(iv.lower)}, {d.ratio_text(iv.upper)}"
        )
    return lines


def cmd_svalue(args: argparse.Namespace, d: Display) -> Output:
    rows = [_surprise_row(p) for p in args.p]
    lines = [_surprise_text(p, d) for p in args.p]
    return Output("\n".join(lines), {"values": rows}, _flat(rows))


def _power_spec(args: argparse.Namespace) -> PowerSpec:
    (scenario,) = _scenarios(args)
    return PowerSpec(
        scenario.n_exposed,
        scenario.n_unexposed,
        scenario.baseline_risk,
        scenario.or_pop,
        args.alpha,
        TestMethod(args.test),
        args.sims,
        _require_seed(args),
    )


def _report_line(report: SimReport, d: Display) -> str:
    where = report.scenario.describe() if report.scenario else ""
    return (
        f"{report.method} [{where}]: {report.estimate:.{d.p}f} "
        f"(MC error {report.mc_error:.{d.p + 1}f}, {report.n_sims} replicates, seed {report.seed})"
    )


def cmd_power(args: argparse.Namespace, d: Display) -> Output:
    report = power_mc(_power_spec(args))
    text = _report_line(report, d) + f"\nbeta={1 - report.estimate:.{d.p}f}"
    return Output(text, report.to_dict(), [_report_row(report)])


def cmd_power_curve(args: argparse.Namespace, d: Display) -> Output:
    spec = _power_spec(args)
    points = power_curve(spec, args.or_grid)
    lines = [f"{'OR':>10}{'power':>10}{'beta':>10}{'MC error':>10}"]
    for pt in points:
        lines.append(
            f"{pt.or_pop:>10g}{pt.power:>10.{d.p}f}{pt.beta:>10.{d.p}f}{pt.mc_error:>10.{d.p + 1}f}"
        )
    rows = [pt.to_dict() for pt in points]
    payload = {"test": spec.test.value, "alpha": spec.alpha, "points": rows}
    return Output("\n".join(lines), payload, rows)


def cmd_bonferroni(args: argparse.Namespace, d: Display) -> Output:
    level = bonferroni(args.alpha, args.k)
    text = f"per-test level for {args.k} tests at familywise level {args.alpha:g}: {level:g}"
    row = {"alpha": args.alpha, "k": args.k, "level": level}
    return Output(text, row, [row])


def cmd_familywise(args: argparse.Namespace, d: Display) -> Output:
    kind = DependenceKind(args.dependence)
    if kind is DependenceKind.SIMULATED:
        dependence = Dependence.simulated(args.rho, args.sims, _require_seed(args))
    else:
        dependence = Dependence(kind)
    report = familywise_rate(args.alpha, args.k, dependence)
    text = (
        f"chance of one or more p <= {args.alpha:g} among {args.k} null tests "
        f"({kind.value}): {report.estimate:.{d.p}f}"
    )
    if kind is DependenceKind.SIMULATED:
        text += f" (MC error {report.mc_error:.{d.p + 1}f}, rho={args.rho:g}, seed {report.seed})"
    return Output(text, report.to_dict(), [_report_row(report)])


def _prior(args: argparse.Namespace) -> IntervalPrior:
    if args.lower is None or args.upper is None:
        raise UsageError("give --lower and --upper for the prior, or --no-prior")
    return IntervalPrior(args.lower, args.upper, args.level, RatioScale(args.scale))


def cmd_prior_data(args: argparse.Namespace, d: Display) -> Output:
    prior = _prior(args)
    data = prior_to_data(prior)
    lower, upper = data.reconstruct_interval()
    text = "\n".join(
        [
            f"prior {prior.scale.value} between {prior.lower:.{d.ratio}f} and "
            f"{prior.upper:.{d.ratio}f} with probability {prior.level:g}",
            f"equivalent prior data: {data.required_cases_per_arm} cases per arm "
            f"({data.cases_per_arm:.{d.ratio}f} before rounding up), "
            f"{data.required_total_cases} cases in total",
            f"implied SE of the log ratio {data.implied_se:.4f}, centred at ratio "
            f"{math.exp(data.center):.{d.ratio}f} "
            f"(interval {lower:.{d.ratio}f} to {upper:.{d.ratio}f})",
        ]
    )
    return Output(text, data.to_dict(), [data.to_dict()])


def cmd_bayes_fit(args: argparse.Namespace, d: Display) -> Output:
    t = _table(args)
    data = None if args.no_prior else prior_to_data(_prior(args))
    fit = augment_and_fit(t, data)
    lines = []
    frequentist = fit.frequentist_interval(args.alpha)
    if frequentist is None:
        lines.append(f"frequentist log OR on the boundary ({fit.frequentist_boundary})")
    else:
        lines.append(
            f"frequentist OR {math.exp(fit.frequentist_log_or):.{d.ratio}f} "
            f"(log OR {fit.frequentist_log_or:.4f}, SE {fit.frequentist_se:.4f}); "
            f"{frequentist.label}: {d.ratio_text(frequentist.lower)}, "
            f"{d.ratio_text(frequentist.upper)}"
        )
    if data is not None:
        lower, upper = fit.posterior_interval(args.alpha)
        lines.append(
            f"posterior OR {math.exp(fit.log_or_posterior):.{d.ratio}f} "
            f"(log OR {fit.log_or_posterior:.4f}, SE {fit.se_posterior:.4f}); "
            f"{1 - args.alpha:g} posterior interval: {lower:.{d.ratio}f}, {upper:.{d.ratio}f}"
        )
        lines.append(
            f"prior data: {data.cases_per_arm:.{d.ratio}f} cases per arm centred at ratio "
            f"{math.exp(data.center):.{d.ratio}f}"
        )
    return Output("\n".join(lines), fit.to_dict(), [fit.to_dict()])


def _report_row(report: SimReport) -> dict[str, Any]:
    row: dict[str, Any] = dict(report.scenario.to_dict()) if report.scenario else {}
    row.update(
        {
            "method": report.method,
            "n_sims": report.n_sims,
            "seed": report.seed,
            "estimate": report.estimate,
            "mc_error": report.mc_error,
        }
    )
    row.update(report.extras)
    return row


def _simulation(
    args: argparse.Namespace, d: Display, run: Callable[[Scenario, int], list[SimReport]]
) -> Output:
    seed = _require_seed(args)
    reports = [r for sc in _scenarios(args) for r in run(sc, seed)]
    if args.output:
        fmt = "csv" if args.format == "csv" else "jsonl"
        _write_report(args.output, format_reports(reports, fmt))
    lines = []
    for r in reports:
        lines.append(_report_line(r, d))
        lines.extend(
            f"  {key}={value:.{d.p + 1}f}" if isinstance(value, float) else f"  {key}={value}"
            for key, value in r.extras.items()
        )
    payload = {"reports": [r.to_dict() for r in reports]}
    return Output("\n".join(lines), payload, [_report_row(r) for r in reports])


def cmd_coverage_sim(args: argparse.Namespace, d: Display) -> Output:
    methods = _methods(args.method, ("exact", "wald"))
    return _simulation(
        args,
        d,
        lambda sc, seed: [coverage_sim(sc, m, args.alpha, args.sims, seed) for m in methods],
    )


def cmd_sparse_sim(args: argparse.Namespace, d: Display) -> Output:
    return _simulation(args, d, lambda sc, seed: [sparse_bias_sim(sc, args.sims, seed)])


def cmd_filter_sim(args: argparse.Namespace, d: Display) -> Output:
    test = TestMethod(args.test)
    return _simulation(
        args,
        d,
        lambda sc, seed: [significance_filter_sim(sc, args.alpha, args.sims, seed, test)],
    )


# parser construction


def _common(p: argparse.ArgumentParser, formats: Sequence[str] = FORMATS) -> None:
    p.add_argument("--format", choices=formats, default="text")
    p.add_argument("--precision", type=int, default=None, help="display digits for every value")
    p.add_argument("--output", default=None, help="also write the report to this file")
    p.add_argument("--verbose", action="store_true", help="log at DEBUG level to stderr")


def _table_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--table", required=True, help="four counts a,b,c,d")
    p.add_argument(
        "--layout",
        choices=("canonical", "printed"),
        default="canonical",
        help="canonical: exposed-case, exposed-noncase, unexposed-case, unexposed-noncase; "
        "printed: unexposed-case, exposed-case, unexposed-noncase, exposed-noncase",
    )


def _exact_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rule", choices=[r.value for r in TwoSidedRule], default="doubled")
    p.add_argument("--mid-p", action="store_true")


def _scenario_args(p: argparse.ArgumentParser, scenario_file: bool = True) -> None:
    p.add_argument("--n-exposed", type=_count)
    p.add_argument("--n-unexposed", type=_count)
    p.add_argument("--baseline-risk", type=_value, help="outcome risk among the unexposed")
    p.add_argument("--or", dest="or_pop", type=_value, help="population odds ratio")
    p.add_argument("--label", default="")
    if scenario_file:
        p.add_argument("--scenario-file", default=None, help="JSON array of scenarios")
    p.add_argument("--sims", type=_count, default=DEFAULT_SIMS)
    p.add_argument("--seed", type=_count, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog=PROG, description="compatibility inference for 2x2 tables")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("describe", help="counts, proportions, RD/RR/OR, expected counts")
    _common(p)
    _table_args(p)
    p.set_defaults(handler=cmd_describe)

    p = sub.add_parser("test", help="P-value, S-value and decision for one odds ratio")
    _common(p)
    _table_args(p)
    _exact_args(p)
    p.add_argument("--or", dest="or_value", type=_value, default=1.0)
    p.add_argument("--method", default="exact", help="exact, wald, pearson, a comma list or all")
    p.add_argument("--alpha", type=_value, default=0.05)
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser("compat-curve", help="P-value and S-value function over odds ratios")
    _common(p, FORMATS + ("svg",))
    _table_args(p)
    _exact_args(p)
    p.add_argument("--methods", default="exact", help="comma list of exact, wald, pearson")
    p.add_argument("--psi-min", type=_value)
    p.add_argument("--psi-max", type=_value)
    p.add_argument("--points-per-decade", type=_count, default=POINTS_PER_DECADE)
    p.add_argument("--alpha-marks", type=_values, default=[0.05])
    p.add_argument("--width", type=_count, default=640)
    p.add_argument("--height", type=_count, default=400)
    p.set_defaults(handler=cmd_compat_curve)

    p = sub.add_parser("interval", help="compatibility interval by test inversion")
    _common(p)
    _table_args(p)
    _exact_args(p)
    p.add_argument("--alpha", type=_value, default=0.05)
    p.add_argument("--method", default="exact", help="exact, wald, pearson, a comma list or all")
    p.add_argument(
        "--construction",
        choices=[c.value for c in LimitConstruction],
        default=LimitConstruction.INVERT_TWO_SIDED.value,
    )
    p.set_defaults(handler=cmd_interval)

    p = sub.add_parser("svalue", help="S-values and coin-toss equivalents of P-values")
    _common(p)
    p.add_argument("--p", type=_values, required=True)
    p.set_defaults(handler=cmd_svalue)

    for name, handler, text in (
        ("power", cmd_power, "Monte Carlo power of the alpha-level test of OR = 1"),
        ("power-curve", cmd_power_curve, "power over a grid of population odds ratios"),
    ):
        p = sub.add_parser(name, help=text)
        _common(p)
        _scenario_args(p, scenario_file=False)
        p.add_argument("--alpha", type=_value, default=0.05)
        p.add_argument("--test", choices=[m.value for m in TestMethod], default="exact")
        if name == "power-curve":
            p.add_argument("--or-grid", type=_values, required=True)
            p.set_defaults(or_pop=1.0)
        p.set_defaults(handler=handler, scenario_file=None)

    p = sub.add_parser("bonferroni", help="per-test level alpha / k")
    _common(p)
    p.add_argument("--alpha", type=_value, default=0.05)
    p.add_argument("--k", type=_count, required=True)
    p.set_defaults(handler=cmd_bonferroni)

    p = sub.add_parser("familywise", help="chance of at least one rejection among k null tests")
    _common(p)
    p.add_argument("--alpha", type=_value, default=0.05)
    p.add_argument("--k", type=_count, required=True)
    p.add_argument(
        "--dependence", choices=[k.value for k in DependenceKind], default="independent"
    )
    p.add_argument("--rho", type=_value, default=0.0)
    p.add_argument("--sims", type=_count, default=DEFAULT_SIMS)
    p.add_argument("--seed", type=_count, default=None)
    p.set_defaults(handler=cmd_familywise)

    for name, handler, text in (
        ("prior-data", cmd_prior_data, "express an interval prior as prior data"),
        ("bayes-fit", cmd_bayes_fit, "frequentist and prior-augmented logistic fits"),
    ):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--lower", type=_value, required=name == "prior-data")
        p.add_argument("--upper", type=_value, required=name == "prior-data")
        p.add_argument("--level", type=_value, default=0.95)
        p.add_argument("--scale", choices=[s.value for s in RatioScale], default="odds-ratio")
        if name == "bayes-fit":
            _table_args(p)
            p.add_argument("--alpha", type=_value, default=0.05)
            p.add_argument("--no-prior", action="store_true")
        p.set_defaults(handler=handler)

    p = sub.add_parser("coverage-sim", help="coverage of exact and Wald intervals")
    _common(p)
    _scenario_args(p)
    p.add_argument("--method", default="exact,wald", help="exact, wald or both as a comma list")
    p.add_argument("--alpha", type=_value, default=0.05)
    p.set_defaults(handler=cmd_coverage_sim)

    p = sub.add_parser("sparse-sim", help="sparse-data bias of the sample log odds ratio")
    _common(p)
    _scenario_args(p)
    p.set_defaults(handler=cmd_sparse_sim)

    p = sub.add_parser("filter-sim", help="inflation of estimates that pass P <= alpha")
    _common(p)
    _scenario_args(p)
    p.add_argument("--alpha", type=_value, default=0.05)
    p.add_argument("--test", choices=[m.value for m in TestMethod], default="wald")
    p.set_defaults(handler=cmd_filter_sim)

    return parser


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _render(output: Output, fmt: str) -> str:
    match fmt:
        case "json":
            return json.dumps(_jsonable(output.payload), allow_nan=False, default=str) + "\n"
        case "csv":
            out = io.StringIO()
            keys: list[str] = []
            for row in output.rows:
                keys.extend(k for k in row if k not in keys)
            writer = csv.DictWriter(out, keys, lineterminator="\n")
            writer.writeheader()
            writer.writerows(output.rows)
            return out.getvalue()
    return output.text + "\n"


def _configure_logging(verbose: bool, stream: io.StringIO) -> logging.Handler:
    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("compatpie")
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else log_level())
    return handler


def run(argv: Sequence[str]) -> tuple[int, str, str]:
    """Run one subcommand; returns (exit status, stdout text, stderr text)."""
    err = io.StringIO()
    parser = build_parser()
    try:
        help_text = io.StringIO()
        with contextlib.redirect_stdout(help_text), contextlib.redirect_stderr(err):
            args = parser.parse_args(list(argv))
    except UsageError as e:
        return 2, "", f"{e}\ntry '{PROG} --help' or '{PROG} <command> --help'\n"
    except InputError as e:
        return 2, "", f"{PROG}: {e}\n"
    except SystemExit as e:
        return int(e.code or 0), help_text.getvalue(), err.getvalue()

    root = logging.getLogger("compatpie")
    previous = root.level
    handler = _configure_logging(args.verbose, err)
    try:
        display = Display.from_args(args)
        output = args.handler(args, display)
        text = output.decode() if isinstance(output, bytes) else _render(output, args.format)
        if args.output and args.command not in SIMULATIONS:
            _write_report(args.output, text)
        return 0, text, err.getvalue()
    except InputError as e:
        return 2, "", err.getvalue() + f"{PROG} {args.command}: {e}\n"
    except CompatError as e:
        return 1, "", err.getvalue() + f"{PROG} {args.command}: {e}\n"
    finally:
        root.removeHandler(handler)
        root.setLevel(previous)


def main() -> None:
    status, out, err = run(sys.argv[1:])
    sys.stdout.write(out)
    sys.stderr.write(err)
    sys.exit(status)
