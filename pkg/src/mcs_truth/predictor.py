"""Ground-truth prediction from historical slot means.

Every predictor maps the slot means observed before slot ``t`` to a vector
of predicted values for slot ``t`` (NaN where no prediction is possible).
The classical forecasters here stand in for a learned spatio-temporal
network; anything that can write a ``slot,region,ghat`` file can be
plugged in through :func:`load_external`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import DomainError, FormatError, MeanVector, SlotBatch
from .io import PREDICTION_HEADER, read_rows, write_rows

KINDS = ("persistence", "moving_average", "seasonal_naive", "oracle_noisy", "external")


@dataclass(frozen=True)
class PredictorConfig:
    kind: str = "seasonal_naive"
    p: int = 5
    season: int = 48
    noise: float = 0.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown predictor kind {self.kind!r}; expected one of {KINDS}")
        if self.p < 1:
            raise DomainError("p must be >= 1")
        if self.season < 1:
            raise DomainError("season must be >= 1")
        if self.noise < 0:
            raise DomainError("noise must be >= 0")
        if self.kind == "external" and not self.path:
            raise DomainError("external predictor needs a path")


@dataclass
class PredictionGrid:
    """Predicted ground truth per (slot, region); absent cells are NaN."""

    n_regions: int
    cells: dict[int, np.ndarray] = field(default_factory=dict)

    def vector(self, slot: int) -> np.ndarray:
        v = self.cells.get(slot)
        if v is None:
            return np.full(self.n_regions, np.nan)
        return v

    def get(self, slot: int, region: int) -> float | None:
        v = self.cells.get(slot)
        if v is None or not 1 <= region <= self.n_regions or np.isnan(v[region - 1]):
            return None
        return float(v[region - 1])

    def set(self, slot: int, region: int, value: float) -> None:
        if slot not in self.cells:
            self.cells[slot] = np.full(self.n_regions, np.nan)
        self.cells[slot][region - 1] = value

    def __len__(self) -> int:
        return sum(int(np.count_nonzero(~np.isnan(v))) for v in self.cells.values())

    def to_csv(self, path) -> None:
        rows = ((t, n + 1, float(v[n])) for t, v in sorted(self.cells.items())
                for n in range(self.n_regions) if not np.isnan(v[n]))
        write_rows(path, PREDICTION_HEADER, rows)


def _index(history: Sequence[MeanVector] | Mapping[int, np.ndarray]) -> Mapping[int, np.ndarray]:
    if isinstance(history, Mapping):
        return history
    return {m.slot: m.means for m in history}


def _n_regions(hist: Mapping[int, np.ndarray]) -> int:
    for v in hist.values():
        return len(v)
    raise DomainError("empty history")


def persistence(history, t: int) -> np.ndarray:
    hist = _index(history)
    prev = hist.get(t - 1)
    if prev is None:
        return np.full(_n_regions(hist), np.nan)
    return prev.copy()


def seasonal_naive(history, t: int, season: int) -> np.ndarray:
    hist = _index(history)
    ref = hist.get(t - season)
    if ref is None:
        return np.full(_n_regions(hist), np.nan)
    return ref.copy()


def moving_average(history, t: int, p: int) -> np.ndarray:
    """Mean of the available means over slots ``t-p .. t-1``.

    Regions with no data in any of those slots stay NaN.
    """
    hist = _index(history)
    n = _n_regions(hist)
    total = np.zeros(n)
    count = np.zeros(n)
    for s in range(t - p, t):
        m = hist.get(s)
        if m is None:
            continue
        ok = ~np.isnan(m)
        total[ok] += m[ok]
        count[ok] += 1
    out = np.full(n, np.nan)
    have = count > 0
    out[have] = total[have] / count[have]
    return out


def predict(history, t: int, config: PredictorConfig = PredictorConfig()) -> np.ndarray:
    """Predict slot ``t`` from history alone (no fallback)."""
    if config.kind == "persistence":
        return persistence(history, t)
    if config.kind == "moving_average":
        return moving_average(history, t, config.p)
    if config.kind == "seasonal_naive":
        return seasonal_naive(history, t, config.season)
    raise DomainError(f"{config.kind} predictions are not computed from history")


def oracle_predict(truth, sigma: float, seed: int) -> PredictionGrid:
    """Truth perturbed by independent relative Gaussian noise ``G * (1 + eta)``."""
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    rng = np.random.default_rng(seed)
    grid = PredictionGrid(truth.n_regions)
    eta = rng.normal(0.0, sigma, size=truth.task.shape) if sigma > 0 else np.zeros(truth.task.shape)
    for i, t in enumerate(truth.task_slots):
        grid.cells[t] = truth.task[i] * (1.0 + eta[i])
    return grid


def load_external(path, n_regions: int | None = None) -> PredictionGrid:
    rows = []
    for line, (slot, region, ghat) in read_rows(path, PREDICTION_HEADER, (int, int, float)):
        if region < 1 or (n_regions is not None and region > n_regions):
            raise FormatError(f"region {region} out of range", line)
        if not math.isfinite(ghat):
            raise FormatError("non-finite prediction", line)
        rows.append((slot, region, ghat))
    if n_regions is None:
        n_regions = max((r for _, r, _ in rows), default=0)
    grid = PredictionGrid(n_regions)
    for slot, region, ghat in rows:
        grid.set(slot, region, ghat)
    return grid


def rolling_predictions(history: Sequence[MeanVector], batches: Sequence[SlotBatch],
                        config: PredictorConfig, n_regions: int,
                        base: PredictionGrid | None = None) -> PredictionGrid:
    """Slot-by-slot predictions for every task slot, with the fallback chain.

    The prediction for slot ``t`` only sees history and the means of task
    slots ``< t``. Missing cells fall back to a ``p``-slot moving average,
    then to the region's most recent observed mean; cells that are still
    missing stay NaN. ``base`` supplies precomputed cells for the oracle and
    external kinds.
    """
    if config.kind in ("oracle_noisy", "external") and base is None:
        raise DomainError(f"{config.kind} predictor needs a precomputed grid")
    means: dict[int, np.ndarray] = {}
    last_seen = np.full(n_regions, np.nan)
    for m in sorted(history, key=lambda m: m.slot):
        means[m.slot] = m.means
        ok = ~np.isnan(m.means)
        last_seen[ok] = m.means[ok]

    grid = PredictionGrid(n_regions)
    for batch in batches:
        t = batch.slot
        if base is not None:
            ghat = base.vector(t).copy()
        elif means:
            ghat = predict(means, t, config)
        else:
            ghat = np.full(n_regions, np.nan)
        missing = np.isnan(ghat)
        if missing.any() and means:
            ma = moving_average(means, t, config.p)
            ghat[missing] = ma[missing]
            missing = np.isnan(ghat)
        if missing.any():
            ghat[missing] = last_seen[missing]
        grid.cells[t] = ghat

        current = MeanVector.from_batch(batch, n_regions).means
        means[t] = current
        ok = ~np.isnan(current)
        last_seen[ok] = current[ok]
    return grid
