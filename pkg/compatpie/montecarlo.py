"""Reproducible replicate streams and process fan-out for the simulations.

Replicate ``i`` of stream ``s`` under seed ``seed`` draws from
``Philox(SeedSequence(seed, spawn_key=(s, i)))`` so every replicate has its
own counter-based substream regardless of how replicates are scheduled.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence, TypeVar

import numpy as np

from compatpie.config import CHUNK_SIZE, threads
from compatpie.errors import InvalidSpecError

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class Scenario:
    n_exposed: int
    n_unexposed: int
    baseline_risk: float
    or_pop: float
    label: str = ""

    def __post_init__(self):
        if self.n_exposed < 1 or self.n_unexposed < 1:
            raise InvalidSpecError(
                f"group sizes must be >= 1, got {self.n_exposed} and {self.n_unexposed}"
            )
        if not 0 < self.baseline_risk < 1:
            raise InvalidSpecError(f"baseline risk must lie in (0, 1), got {self.baseline_risk}")
        if not 0 < self.or_pop < math.inf:
            raise InvalidSpecError(f"population odds ratio must be positive, got {self.or_pop}")

    @property
    def exposed_risk(self) -> float:
        odds = self.or_pop * self.baseline_risk / (1 - self.baseline_risk)
        return odds / (1 + odds)

    def describe(self) -> str:
        return self.label or (
            f"n1={self.n_exposed} n0={self.n_unexposed} "
            f"risk0={self.baseline_risk:g} or={self.or_pop:g}"
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_exposed": self.n_exposed,
            "n_unexposed": self.n_unexposed,
            "baseline_risk": self.baseline_risk,
            "or_pop": self.or_pop,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Scenario":
        try:
            return cls(
                n_exposed=int(raw["n_exposed"]),
                n_unexposed=int(raw["n_unexposed"]),
                baseline_risk=float(raw["baseline_risk"]),
                or_pop=float(raw["or_pop"]),
                label=str(raw.get("label", "")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidSpecError(f"not a scenario: {raw!r} ({e})")


@dataclass(frozen=True)
class SimReport:
    scenario: Scenario | None
    method: str
    n_sims: int
    seed: int
    estimate: float
    mc_error: float
    extras: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.to_dict() if self.scenario else None,
            "method": self.method,
            "n_sims": self.n_sims,
            "seed": self.seed,
            "estimate": _json_float(self.estimate),
            "mc_error": _json_float(self.mc_error),
            "extras": {k: _json_float(v) for k, v in self.extras.items()},
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "SimReport":
        return cls(
            scenario=Scenario.from_dict(raw["scenario"]) if raw.get("scenario") else None,
            method=str(raw["method"]),
            n_sims=int(raw["n_sims"]),
            seed=int(raw["seed"]),
            estimate=float(raw["estimate"]),
            mc_error=float(raw["mc_error"]),
            extras={k: float(v) for k, v in raw.get("extras", {}).items()},
        )


def _json_float(value: float) -> float | str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def rate_report(
    scenario: Scenario | None,
    method: str,
    seed: int,
    hits: int,
    n: int,
    extras: dict[str, float] | None = None,
) -> SimReport:
    """Binomial rate hits/n with its Monte Carlo standard error."""
    rate = hits / n if n > 0 else math.nan
    error = math.sqrt(rate * (1 - rate) / n) if n > 0 else math.nan
    return SimReport(scenario, method, n, seed, rate, error, dict(extras or {}))


def check_sims(n_sims: int) -> None:
    if n_sims < 1:
        raise InvalidSpecError(f"n_sims must be >= 1, got {n_sims}")


def check_seed(seed: int) -> None:
    if seed < 0:
        raise InvalidSpecError(f"seed must be a nonnegative integer, got {seed}")


def replicate_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    check_seed(seed)
    sequence = np.random.SeedSequence(seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(sequence))


def draw_counts(
    scenario: Scenario, seed: int, start: int, stop: int, stream: int = 0
) -> np.ndarray:
    """Exposed and unexposed case counts for replicates ``start`` to ``stop - 1``."""
    counts = np.empty((stop - start, 2), dtype=np.int64)
    p1 = scenario.exposed_risk
    for row, index in enumerate(range(start, stop)):
        rng = replicate_rng(seed, index, stream)
        counts[row, 0] = rng.binomial(scenario.n_exposed, p1)
        counts[row, 1] = rng.binomial(scenario.n_unexposed, scenario.baseline_risk)
    return counts


def chunks(n_sims: int, chunk_size: int = CHUNK_SIZE) -> list[tuple[int, int]]:
    return [(lo, min(n_sims, lo + chunk_size)) for lo in range(0, n_sims, chunk_size)]


def fan_out(
    worker: Callable[[int, int], T],
    n_sims: int,
    workers: int | None = None,
    chunk_size: int = CHUNK_SIZE,
) -> list[T]:
    """Run ``worker(start, stop)`` over replicate chunks; results come back in chunk order.

    ``worker`` must be picklable (a module-level function or a
    ``functools.partial`` of one) when more than one process is used.
    """
    check_sims(n_sims)
    workers = threads() if workers is None else workers
    spans: Sequence[tuple[int, int]] = chunks(n_sims, chunk_size)
    logger.debug("%d replicates in %d chunks on %d workers", n_sims, len(spans), workers)
    if workers <= 1 or len(spans) == 1:
        return [worker(lo, hi) for lo, hi in spans]
    with ProcessPoolExecutor(max_workers=min(workers, len(spans))) as pool:
        return list(pool.map(worker, *zip(*spans)))
