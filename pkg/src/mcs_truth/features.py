"""Error features and implication degrees between reports.

A report's relative error against the predicted truth is split into a
region-level circumstance part (running mean of errors in the region) and
a user part (the remainder). The two-component error vector, scaled by the
prediction so it stays defined at a zero prediction, is the report's
feature; the cosine of two features is their degree of implication.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TAU_G = 1e-9


def sensing_error(v: float, ghat: float) -> float | None:
    """Relative error ``(v - ghat) / ghat``; ``None`` when ``|ghat| < TAU_G``."""
    if not abs(ghat) >= TAU_G:
        return None
    return (v - ghat) / ghat


def user_error(v: float, ghat: float, circ: float) -> float | None:
    if not abs(ghat) >= TAU_G:
        return None
    return (v - (1.0 + circ) * ghat) / ghat


@dataclass(frozen=True)
class DataFeature:
    a: float
    b: float

    @property
    def degenerate(self) -> bool:
        return self.a == 0.0 and self.b == 0.0

    def __iter__(self):
        yield self.a
        yield self.b


def scaled_feature(v: float, ghat: float, circ: float) -> DataFeature:
    return DataFeature(ghat * circ, v - (1.0 + circ) * ghat)


def implication(f1, f2) -> float:
    """Cosine similarity of two features; 0 when either has zero norm."""
    a1, b1 = f1
    a2, b2 = f2
    n1 = math.sqrt(a1 * a1 + b1 * b1)
    n2 = math.sqrt(a2 * a2 + b2 * b2)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    c = (a1 * a2 + b1 * b2) / (n1 * n2)
    return min(1.0, max(-1.0, c))


def implication_matrix(fa: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """Pairwise :func:`implication` between rows of ``fa`` (m, 2) and ``fb`` (k, 2).

    Elementwise operations follow the scalar function's order so results
    are identical bit for bit.
    """
    a1, b1 = fa[:, 0:1], fa[:, 1:2]
    a2, b2 = fb[:, 0][None, :], fb[:, 1][None, :]
    n1 = np.sqrt(a1 * a1 + b1 * b1)
    n2 = np.sqrt(a2 * a2 + b2 * b2)
    denom = n1 * n2
    dot = a1 * a2 + b1 * b2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = dot / denom
    out = np.minimum(1.0, np.maximum(-1.0, out))
    out[(n1 == 0.0) | (n2 == 0.0)] = 0.0
    # rows/cols without a feature (NaN) carry no implication
    out[np.isnan(out)] = 0.0
    return out


@dataclass(frozen=True)
class CircumstanceState:
    """Per-region report count and running circumstance error.

    Arrays are indexed by ``region - 1``.
    """

    counts: np.ndarray
    errors: np.ndarray

    @classmethod
    def empty(cls, n_regions: int) -> "CircumstanceState":
        return cls(np.zeros(n_regions, dtype=np.int64), np.zeros(n_regions))

    @property
    def n_regions(self) -> int:
        return len(self.counts)

    def count(self, region: int) -> int:
        return int(self.counts[region - 1])

    def error(self, region: int) -> float:
        return float(self.errors[region - 1])


def circumstance_step(prev_error: float, prev_count: int, deltas: Sequence[float]) -> tuple[float, int]:
    """One slot of the running-mean update for a single region."""
    count = prev_count + len(deltas)
    if count == 0:
        return 0.0, 0
    return (prev_error * prev_count + math.fsum(deltas)) / count, count


def circumstance_update(state: CircumstanceState, region: int, deltas: Sequence[float]) -> CircumstanceState:
    """Fold one slot's relative errors for ``region`` into the state.

    ``None`` entries (undefined errors) are skipped and not counted.
    """
    deltas = [d for d in deltas if d is not None]
    i = region - 1
    err, cnt = circumstance_step(float(state.errors[i]), int(state.counts[i]), deltas)
    counts = state.counts.copy()
    errors = state.errors.copy()
    counts[i] = cnt
    errors[i] = err
    return CircumstanceState(counts, errors)


def advance_circumstance(state: CircumstanceState, regions: Sequence[int], values: Sequence[float],
                         ghat: np.ndarray) -> CircumstanceState:
    """Update every region from one slot of reports.

    ``ghat`` is the slot's prediction vector (NaN where absent); reports in
    regions without a usable prediction do not contribute.
    """
    per_region: dict[int, list[float]] = {}
    for n, v in zip(regions, values):
        g = ghat[n - 1]
        if np.isnan(g):
            continue
        d = sensing_error(float(v), float(g))
        if d is not None:
            per_region.setdefault(int(n), []).append(d)
    counts = state.counts.copy()
    errors = state.errors.copy()
    for n, deltas in per_region.items():
        err, cnt = circumstance_step(float(errors[n - 1]), int(counts[n - 1]), deltas)
        errors[n - 1] = err
        counts[n - 1] = cnt
    return CircumstanceState(counts, errors)


def feature_array(values: np.ndarray, ghat: np.ndarray, circ: np.ndarray) -> np.ndarray:
    """Vectorised :func:`scaled_feature`; rows with NaN ``ghat`` become NaN."""
    out = np.empty((len(values), 2))
    out[:, 0] = ghat * circ
    out[:, 1] = values - (1.0 + circ) * ghat
    return out
