"""P-value (compatibility) functions and S-values over odds-ratio grids."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from compatpie.asymptotic import pearson_p, wald_input, wald_p
from compatpie.config import GRID_SPAN, POINTS_PER_DECADE
from compatpie.errors import EmptyCurveError, InvalidAlphaError, InvalidGridError, InvalidPError
from compatpie.exact import TwoSidedRule, boundary_estimate, p_value_function
from compatpie.interval import IntervalEstimate, TestMethod, limit_from_json, limit_to_json
from compatpie.table import Table2x2, summarize
from compatpie.trace import Trace

logger = logging.getLogger(__name__)

PLATEAU_RTOL = 1e-12


def _check_p(p: float) -> None:
    if math.isnan(p) or not 0 <= p <= 1:
        raise InvalidPError(f"P-value must lie in [0, 1], got {p}")


def s_value(p: float) -> float:
    """Surprisal -log2(p) in bits; p = 0 gives inf."""
    _check_p(p)
    if p == 0:
        return math.inf
    return 0.0 - math.log2(p)


def coin_toss_equivalent(p: float) -> int:
    """Number of heads in a row carrying about as much surprise as p.

    The S-value is rounded to the nearest integer, halves going down.
    """
    _check_p(p)
    if p == 0:
        raise InvalidPError("a P-value of 0 has no finite coin-toss equivalent")
    return max(0, math.ceil(s_value(p) - 0.5))


def toss_bracket(n: int) -> tuple[float, float]:
    """Probabilities of n and of n - 1 heads in a row."""
    if n < 0:
        raise InvalidPError(f"toss count must be >= 0, got {n}")
    return 0.5**n, min(1.0, 0.5 ** (n - 1))


@dataclass(frozen=True)
class CompatibilityPoint:
    psi: float
    p: float
    s: float

    @classmethod
    def at(cls, psi: float, p: float) -> "CompatibilityPoint":
        return cls(psi, p, s_value(p))

    def to_dict(self) -> dict[str, Any]:
        return {"psi": self.psi, "p": self.p, "s": limit_to_json(self.s)}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "CompatibilityPoint":
        return cls(float(raw["psi"]), float(raw["p"]), limit_from_json(raw["s"]))


@dataclass(frozen=True)
class CurveGrid:
    psi_min: float
    psi_max: float
    points_per_decade: int = POINTS_PER_DECADE

    def __post_init__(self):
        if not (0 < self.psi_min < self.psi_max) or math.isinf(self.psi_max):
            raise InvalidGridError(
                f"grid needs 0 < psi_min < psi_max < inf, got [{self.psi_min}, {self.psi_max}]"
            )
        if self.points_per_decade < 1:
            raise InvalidGridError(
                f"points per decade must be >= 1, got {self.points_per_decade}"
            )

    @classmethod
    def around(
        cls,
        center: float,
        span: float = GRID_SPAN,
        points_per_decade: int = POINTS_PER_DECADE,
    ) -> "CurveGrid":
        if not (0 < center < math.inf):
            center = 1.0
        return cls(center / span, center * span, points_per_decade)

    @classmethod
    def for_table(cls, t: Table2x2, points_per_decade: int = POINTS_PER_DECADE) -> "CurveGrid":
        or_ = summarize(t).or_
        return cls.around(or_.value if or_.is_finite else 1.0, points_per_decade=points_per_decade)

    def values(self) -> list[float]:
        decades = math.log10(self.psi_max) - math.log10(self.psi_min)
        count = max(2, math.ceil(decades * self.points_per_decade - 1e-9) + 1)
        values = np.logspace(math.log10(self.psi_min), math.log10(self.psi_max), count)
        values[0], values[-1] = self.psi_min, self.psi_max
        return [float(v) for v in values]


@dataclass(frozen=True)
class CompatibilityCurve:
    points: tuple[CompatibilityPoint, ...]
    method: TestMethod
    source: str
    alpha_marks: tuple[float, ...] = (0.05,)
    boundary: float | None = None

    def __post_init__(self):
        for previous, point in zip(self.points, self.points[1:]):
            if not point.psi > previous.psi:
                raise InvalidGridError("curve points must have strictly increasing psi")
        for point in self.points:
            _check_p(point.p)

    @property
    def p_max(self) -> float:
        if not self.points:
            raise EmptyCurveError("curve has no points")
        return max(point.p for point in self.points)

    @property
    def psi_hat(self) -> float:
        """Geometric centre of the grid points that attain the largest P.

        A table whose count sits on the edge of its support has its estimate at
        0, inf or nan whatever the grid.
        """
        if self.boundary is not None:
            return self.boundary
        top = self.p_max
        attained = [pt.psi for pt in self.points if pt.p >= top * (1 - PLATEAU_RTOL)]
        return math.sqrt(attained[0] * attained[-1])

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "source": self.source,
            "alpha_marks": list(self.alpha_marks),
            "boundary": None if self.boundary is None else str(limit_to_json(self.boundary)),
            "points": [point.to_dict() for point in self.points],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "CompatibilityCurve":
        return cls(
            points=tuple(CompatibilityPoint.from_dict(p) for p in raw["points"]),
            method=TestMethod(raw["method"]),
            source=str(raw["source"]),
            alpha_marks=tuple(float(a) for a in raw.get("alpha_marks", ())),
            boundary=None if raw.get("boundary") is None else limit_from_json(raw["boundary"]),
        )


def _p_function(
    t: Table2x2, method: TestMethod, rule: TwoSidedRule, mid_p: bool
) -> Callable[[float], float]:
    match method:
        case TestMethod.EXACT:
            return p_value_function(t, rule, mid_p)
        case TestMethod.WALD:
            return lambda psi: wald_p(wald_input(t, psi))
        case TestMethod.PEARSON:
            return lambda psi: pearson_p(t, psi)
    raise InvalidGridError(f"unknown method {method}")


@Trace
def compatibility_curve(
    t: Table2x2,
    grid: CurveGrid | None = None,
    method: TestMethod = TestMethod.EXACT,
    alpha_marks: Iterable[float] = (0.05,),
    rule: TwoSidedRule = TwoSidedRule.DOUBLED,
    mid_p: bool = False,
) -> CompatibilityCurve:
    marks = tuple(alpha_marks)
    for alpha in marks:
        if not 0 < alpha < 1:
            raise InvalidAlphaError(f"alpha marks must lie in (0, 1), got {alpha}")
    grid = grid or CurveGrid.for_table(t)
    p_of = _p_function(t, method, rule, mid_p)
    points = tuple(CompatibilityPoint.at(psi, min(1.0, p_of(psi))) for psi in grid.values())
    curve = CompatibilityCurve(points, method, str(t), marks, boundary_estimate(t))
    logger.debug(
        "%s curve for %s: %d points, max P %.6g at psi %.6g",
        method.value,
        t,
        len(points),
        curve.p_max,
        curve.psi_hat,
    )
    return curve


def _crossing(left: CompatibilityPoint, right: CompatibilityPoint, alpha: float) -> float:
    # linear in p against log(psi)
    x0, x1 = math.log(left.psi), math.log(right.psi)
    if right.p == left.p:
        return math.exp((x0 + x1) / 2)
    w = (alpha - left.p) / (right.p - left.p)
    return math.exp(x0 + w * (x1 - x0))


def curve_limits(curve: CompatibilityCurve, alpha: float) -> IntervalEstimate:
    """Interpolated P = alpha crossings around the curve maximum.

    A run of P > alpha that reaches the end of the grid gives 0 or inf on that side.
    """
    if not 0 < alpha < 1:
        raise InvalidAlphaError(f"alpha must lie in (0, 1), got {alpha}")
    points: Sequence[CompatibilityPoint] = curve.points
    if not points:
        raise EmptyCurveError("curve has no points")
    top = max(range(len(points)), key=lambda i: points[i].p)
    if points[top].p <= alpha:
        raise EmptyCurveError(f"no grid point has P above {alpha}")
    lo, hi = top, top
    while lo > 0 and points[lo - 1].p > alpha:
        lo -= 1
    while hi < len(points) - 1 and points[hi + 1].p > alpha:
        hi += 1
    lower = 0.0 if lo == 0 else _crossing(points[lo - 1], points[lo], alpha)
    upper = math.inf if hi == len(points) - 1 else _crossing(points[hi], points[hi + 1], alpha)
    return IntervalEstimate(lower, upper, alpha, curve.method.interval_method)
