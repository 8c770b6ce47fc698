import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from compatpie.errors import InvalidSpecError


class IntervalMethod(Enum):
    EXACT = "exact"
    WALD = "wald"
    PEARSON = "pearson-inversion"


class TestMethod(Enum):
    EXACT = "exact"
    PEARSON = "pearson"
    WALD = "wald"

    @property
    def interval_method(self) -> IntervalMethod:
        return {
            TestMethod.EXACT: IntervalMethod.EXACT,
            TestMethod.PEARSON: IntervalMethod.PEARSON,
            TestMethod.WALD: IntervalMethod.WALD,
        }[self]


def limit_to_json(value: float) -> float | str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def limit_from_json(raw: float | str) -> float:
    return float(raw)


@dataclass(frozen=True)
class IntervalEstimate:
    """Limits on the odds-ratio scale; (0, inf) ends mark one-sided results."""

    lower: float
    upper: float
    alpha: float
    method: IntervalMethod
    scale: str = "OR"

    @property
    def one_sided(self) -> bool:
        return self.lower == 0 or math.isinf(self.upper)

    @property
    def label(self) -> str:
        return f"{self.alpha:g}-level compatibility interval"

    def contains(self, psi: float) -> bool:
        return self.lower <= psi <= self.upper

    def format(self, digits: int) -> str:
        def show(v: float) -> str:
            return "inf" if math.isinf(v) else f"{v:.{digits}f}"

        return f"{self.label} ({self.method.value}): {show(self.lower)}, {show(self.upper)}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "lower": limit_to_json(self.lower),
            "upper": limit_to_json(self.upper),
            "alpha": self.alpha,
            "method": self.method.value,
            "scale": self.scale,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "IntervalEstimate":
        try:
            return cls(
                lower=limit_from_json(raw["lower"]),
                upper=limit_from_json(raw["upper"]),
                alpha=float(raw["alpha"]),
                method=IntervalMethod(raw["method"]),
                scale=str(raw.get("scale", "OR")),
            )
        except (KeyError, ValueError) as e:
            raise InvalidSpecError(f"not an interval: {raw!r} ({e})")

    def __str__(self) -> str:
        return self.format(2)
