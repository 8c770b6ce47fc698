"""Tabulate or plot compatibility curves as csv, json or svg."""

import csv
import io
import json
import math
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Final, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from numpy.typing import ArrayLike, NDArray

from compatpie.compatibility import CompatibilityCurve, CompatibilityPoint
from compatpie.errors import EmptyCurveError, InvalidSpecError, UnsupportedFormatError
from compatpie.interval import TestMethod

CSV_HEADER: Final[tuple[str, ...]] = ("psi", "p", "s")
SIGNIFICANT_DIGITS: Final[int] = 15
SVG_WIDTH: Final[int] = 640
SVG_HEIGHT: Final[int] = 400
SERIES_COLOURS: Final[dict[TestMethod, str]] = {
    TestMethod.EXACT: "#1f4e79",
    TestMethod.WALD: "#b35900",
    TestMethod.PEARSON: "#3a7d44",
}


class RenderFormat(Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"

    @classmethod
    def parse(cls, value: "str | RenderFormat") -> "RenderFormat":
        if isinstance(value, RenderFormat):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            raise UnsupportedFormatError(f"unsupported format {value!r}")


def format_float(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def format_half_up(value: float, digits: int) -> str:
    """Fixed-point text with ties rounded away from zero, so 0.0625 reads 0.063."""
    return str(Decimal(repr(value)).quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_UP))


def _check_curves(curves: Sequence[CompatibilityCurve]) -> None:
    if not curves or any(not c.points for c in curves):
        raise EmptyCurveError("nothing to render: empty curve")


def render_curve(
    c: CompatibilityCurve,
    fmt: "str | RenderFormat",
    width: int = SVG_WIDTH,
    height: int = SVG_HEIGHT,
) -> bytes:
    return render_curves([c], fmt, width, height)


def render_curves(
    curves: Sequence[CompatibilityCurve],
    fmt: "str | RenderFormat",
    width: int = SVG_WIDTH,
    height: int = SVG_HEIGHT,
) -> bytes:
    _check_curves(curves)
    match RenderFormat.parse(fmt):
        case RenderFormat.CSV:
            return _render_csv(curves).encode()
        case RenderFormat.JSON:
            return _render_json(curves).encode()
        case RenderFormat.SVG:
            return _render_svg(curves, width, height)
    raise UnsupportedFormatError(f"unsupported format {fmt!r}")


def _render_csv(curves: Sequence[CompatibilityCurve]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("method",) + CSV_HEADER)
    for curve in curves:
        for point in curve.points:
            row = [format_float(point.psi), format_float(point.p), format_float(point.s)]
            writer.writerow([curve.method.value] + row)
    return out.getvalue()


def _render_json(curves: Sequence[CompatibilityCurve]) -> str:
    if len(curves) == 1:
        return json.dumps(curves[0].to_dict()) + "\n"
    return json.dumps({"curves": [c.to_dict() for c in curves]}) + "\n"


def _render_svg(curves: Sequence[CompatibilityCurve], width: int, height: int) -> bytes:
    if width < 1 or height < 1:
        raise InvalidSpecError(f"svg size must be positive, got {width}x{height}")
    with matplotlib.rc_context({"svg.hashsalt": "compatpie", "svg.fonttype": "none"}):
        figure = Figure(figsize=(width / 100, height / 100), dpi=100)
        axes = figure.add_subplot()
        for curve in curves:
            axes.plot(
                [pt.psi for pt in curve.points],
                [pt.p for pt in curve.points],
                color=SERIES_COLOURS[curve.method],
                label=curve.method.value,
                gid=f"series-{curve.method.value}",
            )
        marks = sorted({alpha for curve in curves for alpha in curve.alpha_marks})
        for alpha in marks:
            axes.axhline(alpha, color="grey", linestyle="--", linewidth=0.8, gid=f"alpha-{alpha:g}")
        axes.set_xscale("log")
        axes.set_ylim(0, 1)
        axes.set_xlabel("hypothesized odds ratio")
        axes.set_ylabel("P-value")
        axes.set_title(curves[0].source)
        secondary = axes.secondary_yaxis("right", functions=(_p_to_s, _s_to_p))
        secondary.set_ylabel("S-value (bits)")
        secondary.set_yticks([0, 1, 2, 3, 4, 5, 7])
        axes.legend(loc="upper right")
        out = io.BytesIO()
        figure.savefig(out, format="svg", metadata={"Date": None})
    return out.getvalue()


def _p_to_s(p: ArrayLike) -> NDArray[np.float64]:
    with np.errstate(divide="ignore"):
        return -np.log2(np.clip(p, 1e-300, 1.0))


def _s_to_p(s: ArrayLike) -> NDArray[np.float64]:
    return np.power(2.0, -np.asarray(s, dtype=float))


def load_curve(data: bytes | str, fmt: "str | RenderFormat") -> list[CompatibilityCurve]:
    """Read back what ``render_curves`` wrote as csv or json."""
    text = data.decode() if isinstance(data, bytes) else data
    match RenderFormat.parse(fmt):
        case RenderFormat.JSON:
            raw = json.loads(text)
            items = raw["curves"] if "curves" in raw else [raw]
            return [CompatibilityCurve.from_dict(item) for item in items]
        case RenderFormat.CSV:
            return _load_csv(text)
    raise UnsupportedFormatError(f"cannot load curves from {fmt!r}")


def _load_csv(text: str) -> list[CompatibilityCurve]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise EmptyCurveError("empty csv document")
    header, body = rows[0], rows[1:]
    # documents without a method column hold one exact curve
    tagged = header[0] == "method"
    series: dict[str, list[CompatibilityPoint]] = {}
    for row in body:
        method = row[0] if tagged else TestMethod.EXACT.value
        psi, p, s = (float(v) for v in (row[1:] if tagged else row))
        series.setdefault(method, []).append(CompatibilityPoint(psi, p, s))
    return [
        CompatibilityCurve(tuple(points), TestMethod(method), source="csv")
        for method, points in series.items()
    ]

