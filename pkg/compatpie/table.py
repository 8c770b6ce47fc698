"""Canonical 2x2 table, descriptive association measures, null expected counts.

Cell order is always (exposed-case, exposed-noncase, unexposed-case,
unexposed-noncase), written ``a, b, c, d``::

                  case   noncase
    exposed         a       b      n1 = a + b
    unexposed       c       d      n0 = c + d
                   m1      m0       N
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Final, Mapping

from compatpie.errors import (
    EmptyTableError,
    InvalidSpecError,
    NegativeCountError,
    NonIntegerCountError,
)


class RatioTag(Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class Ratio:
    """A ratio measure that may have a zero denominator."""

    value: float
    tag: RatioTag = RatioTag.FINITE

    @classmethod
    def of(cls, numerator: float, denominator: float) -> "Ratio":
        if denominator > 0:
            return cls(numerator / denominator)
        if numerator > 0:
            return cls(math.inf, RatioTag.INFINITE)
        return cls(math.nan, RatioTag.UNDEFINED)

    @property
    def is_finite(self) -> bool:
        return self.tag is RatioTag.FINITE

    def inverse(self) -> "Ratio":
        match self.tag:
            case RatioTag.UNDEFINED:
                return self
            case RatioTag.INFINITE:
                return Ratio(0.0)
        if self.value == 0:
            return Ratio(math.inf, RatioTag.INFINITE)
        return Ratio(1.0 / self.value)

    def format(self, digits: int) -> str:
        match self.tag:
            case RatioTag.INFINITE:
                return "inf"
            case RatioTag.UNDEFINED:
                return "undefined"
        return f"{self.value:.{digits}f}"

    def to_json(self) -> float | str:
        return self.value if self.is_finite else self.tag.value

    @classmethod
    def from_json(cls, raw: float | str) -> "Ratio":
        if isinstance(raw, str):
            tag = RatioTag(raw)
            return cls(math.inf if tag is RatioTag.INFINITE else math.nan, tag)
        return cls(float(raw))

    def __str__(self) -> str:
        return self.format(4)


@dataclass(frozen=True)
class Table2x2:
    a: int
    b: int
    c: int
    d: int

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d

    @property
    def cases(self) -> int:
        return self.a + self.c

    @property
    def noncases(self) -> int:
        return self.b + self.d

    @property
    def exposed(self) -> int:
        return self.a + self.b

    @property
    def unexposed(self) -> int:
        return self.c + self.d

    @property
    def cells(self) -> tuple[int, int, int, int]:
        return self.a, self.b, self.c, self.d

    def has_zero_cell(self) -> bool:
        return 0 in self.cells

    def has_zero_margin(self) -> bool:
        return 0 in (self.cases, self.noncases, self.exposed, self.unexposed)

    def scaled(self, k: int) -> "Table2x2":
        return new_table(self.a * k, self.b * k, self.c * k, self.d * k)

    @classmethod
    def from_printed(
        cls, unexposed_case: int, exposed_case: int, unexposed_noncase: int, exposed_noncase: int
    ) -> "Table2x2":
        """Read cells in the printed orientation: unexposed column first, case row first."""
        return new_table(exposed_case, exposed_noncase, unexposed_case, unexposed_noncase)

    def to_dict(self) -> dict[str, int]:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Table2x2":
        try:
            return new_table(int(raw["a"]), int(raw["b"]), int(raw["c"]), int(raw["d"]))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidSpecError(f"not a table: {raw!r} ({e})")

    def __str__(self) -> str:
        return f"{self.a},{self.b},{self.c},{self.d}"


@dataclass(frozen=True)
class AssociationSummary:
    rd: float
    rr: Ratio
    or_: Ratio
    p_exposed: float
    p_unexposed: float
    odds_exposed: Ratio
    odds_unexposed: Ratio
    expected: tuple[float, float, float, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "rd": self.rd,
            "rr": self.rr.to_json(),
            "or": self.or_.to_json(),
            "p_exposed": self.p_exposed,
            "p_unexposed": self.p_unexposed,
            "odds_exposed": self.odds_exposed.to_json(),
            "odds_unexposed": self.odds_unexposed.to_json(),
            "expected": list(self.expected),
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "AssociationSummary":
        a, b, c, d = (float(e) for e in raw["expected"])
        return cls(
            rd=float(raw["rd"]),
            rr=Ratio.from_json(raw["rr"]),
            or_=Ratio.from_json(raw["or"]),
            p_exposed=float(raw["p_exposed"]),
            p_unexposed=float(raw["p_unexposed"]),
            odds_exposed=Ratio.from_json(raw["odds_exposed"]),
            odds_unexposed=Ratio.from_json(raw["odds_unexposed"]),
            expected=(a, b, c, d),
        )


EXAMPLE_TABLE: Final[tuple[int, int, int, int]] = (10, 110, 16, 464)


def new_table(a: int, b: int, c: int, d: int) -> Table2x2:
    cells = (a, b, c, d)
    for name, value in zip("abcd", cells):
        if int(value) != value:
            raise NonIntegerCountError(f"cell {name} must be a whole count, got {value}")
        if value < 0:
            raise NegativeCountError(f"cell {name} must be >= 0, got {value}")
    if sum(cells) == 0:
        raise EmptyTableError("table has no observations")
    return Table2x2(int(a), int(b), int(c), int(d))


def _proportion(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator > 0 else math.nan


def summarize(t: Table2x2) -> AssociationSummary:
    n = t.total
    p_exposed = _proportion(t.a, t.exposed)
    p_unexposed = _proportion(t.c, t.unexposed)
    expected = (
        t.exposed * t.cases / n,
        t.exposed * t.noncases / n,
        t.unexposed * t.cases / n,
        t.unexposed * t.noncases / n,
    )
    return AssociationSummary(
        rd=p_exposed - p_unexposed,
        rr=Ratio.of(t.a * t.unexposed, t.c * t.exposed),
        or_=Ratio.of(t.a * t.d, t.b * t.c),
        p_exposed=p_exposed,
        p_unexposed=p_unexposed,
        odds_exposed=Ratio.of(t.a, t.b),
        odds_unexposed=Ratio.of(t.c, t.d),
        expected=expected,
    )


def flip_exposure(t: Table2x2) -> Table2x2:
    return Table2x2(t.c, t.d, t.a, t.b)
