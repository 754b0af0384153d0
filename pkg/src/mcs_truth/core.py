"""Domain types shared by every stage of the pipeline.

Slots and regions are 1-based. A region is addressed either by its grid
coordinates ``(h, w)`` or by the flat index ``n = (h - 1) * W + w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """Raised for coordinates or indices outside their valid range."""


class SequencingError(ValueError):
    """Raised when slot batches are fed out of order."""


class FormatError(ValueError):
    """Raised when a delimited input file cannot be parsed.

    ``line`` is the 1-based line number in the file (header is line 1).
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class RegionGrid:
    height: int
    width: int

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise DomainError(f"grid dimensions must be positive, got {self.height}x{self.width}")

    @property
    def n_regions(self) -> int:
        return self.height * self.width

    def index(self, h: int, w: int) -> int:
        return region_index(h, w, self)

    def coords(self, n: int) -> tuple[int, int]:
        """Inverse of :meth:`index`."""
        if not 1 <= n <= self.n_regions:
            raise DomainError(f"region {n} outside [1, {self.n_regions}]")
        h, w0 = divmod(n - 1, self.width)
        return h + 1, w0 + 1

    def neighbours(self, n: int) -> list[int]:
        """Regions one grid step away (4-connectivity)."""
        h, w = self.coords(n)
        out = []
        for dh, dw in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            hh, ww = h + dh, w + dw
            if 1 <= hh <= self.height and 1 <= ww <= self.width:
                out.append(self.index(hh, ww))
        return out

    @classmethod
    def for_regions(cls, n_regions: int) -> "RegionGrid":
        """Most square ``H x W`` grid with exactly ``n_regions`` cells (H <= W)."""
        if n_regions < 1:
            raise DomainError("need at least one region")
        h = int(math.isqrt(n_regions))
        while n_regions % h:
            h -= 1
        return cls(h, n_regions // h)


def region_index(h: int, w: int, grid: RegionGrid) -> int:
    if not (1 <= h <= grid.height and 1 <= w <= grid.width):
        raise DomainError(f"({h}, {w}) outside {grid.height}x{grid.width} grid")
    return (h - 1) * grid.width + w


@dataclass(frozen=True)
class SensingReport:
    mu: int
    slot: int
    region: int
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"non-finite value from MU {self.mu} at slot {self.slot}")


@dataclass(frozen=True)
class SlotBatch:
    """All reports submitted during one slot.

    Construction rejects reports from other slots and a second report by
    the same MU.
    """

    slot: int
    reports: tuple[SensingReport, ...] = ()

    def __post_init__(self):
        reports = tuple(self.reports)
        object.__setattr__(self, "reports", reports)
        seen = set()
        for rep in reports:
            if rep.slot != self.slot:
                raise SequencingError(f"report for slot {rep.slot} in batch for slot {self.slot}")
            if rep.mu in seen:
                raise DomainError(f"MU {rep.mu} reported twice in slot {self.slot}")
            seen.add(rep.mu)

    def __len__(self) -> int:
        return len(self.reports)

    def __iter__(self):
        return iter(self.reports)

    @cached_property
    def mus(self) -> np.ndarray:
        return np.array([r.mu for r in self.reports], dtype=np.int64)

    @cached_property
    def regions(self) -> np.ndarray:
        return np.array([r.region for r in self.reports], dtype=np.int64)

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.reports], dtype=float)

    def in_region(self, region: int) -> list[SensingReport]:
        return [r for r in self.reports if r.region == region]


def slot_mean(batch: SlotBatch, region: int) -> float | None:
    """Mean reported value in ``region``, or ``None`` if nobody reported there."""
    values = [r.value for r in batch.reports if r.region == region]
    if not values:
        return None
    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class MeanVector:
    """Per-region slot means; ``means[n - 1]`` is NaN where region ``n`` had no data."""

    slot: int
    means: np.ndarray

    def get(self, region: int) -> float | None:
        value = self.means[region - 1]
        return None if np.isnan(value) else float(value)

    @classmethod
    def from_batch(cls, batch: SlotBatch, n_regions: int) -> "MeanVector":
        means = np.full(n_regions, np.nan)
        if len(batch):
            idx = batch.regions - 1
            sums = np.bincount(idx, weights=batch.values, minlength=n_regions)
            counts = np.bincount(idx, minlength=n_regions)
            present = counts > 0
            means[present] = sums[present] / counts[present]
        return cls(batch.slot, means)


@dataclass(frozen=True)
class DataCache:
    """Rolling window over the most recent ``length`` slot batches."""

    length: int
    batches: tuple[SlotBatch, ...] = field(default=())

    def __post_init__(self):
        if self.length < 1:
            raise DomainError("cache length must be positive")

    @property
    def slots(self) -> list[int]:
        return [b.slot for b in self.batches]

    @property
    def last_slot(self) -> int | None:
        return self.batches[-1].slot if self.batches else None

    def reports(self) -> list[SensingReport]:
        return [r for b in self.batches for r in b.reports]

    def update(self, batch: SlotBatch) -> "DataCache":
        return cache_update(self, batch)


def cache_update(cache: DataCache, batch: SlotBatch) -> DataCache:
    last = cache.last_slot
    if last is not None and batch.slot != last + 1:
        raise SequencingError(f"expected slot {last + 1}, got {batch.slot}")
    batches = cache.batches + (batch,)
    if len(batches) > cache.length:
        batches = batches[-cache.length:]
    return DataCache(cache.length, batches)


def group_batches(reports: Iterable[SensingReport], n_slots: int | None = None,
                  first_slot: int = 1) -> list[SlotBatch]:
    """Group loose reports into one batch per slot, including empty slots."""
    by_slot: dict[int, list[SensingReport]] = {}
    for rep in reports:
        by_slot.setdefault(rep.slot, []).append(rep)
    if n_slots is None:
        n_slots = max(by_slot, default=first_slot - 1) - first_slot + 1
    stray = [s for s in by_slot if not first_slot <= s < first_slot + n_slots]
    if stray:
        raise DomainError(f"reports for slots outside [{first_slot}, {first_slot + n_slots - 1}]: {sorted(stray)[:5]}")
    return [SlotBatch(t, tuple(sorted(by_slot.get(t, ()), key=lambda r: r.mu)))
            for t in range(first_slot, first_slot + n_slots)]


def flatten(batches: Sequence[SlotBatch]) -> list[SensingReport]:
    return [r for b in batches for r in b.reports]
