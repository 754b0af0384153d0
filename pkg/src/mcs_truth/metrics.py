"""Evaluation metrics and the repetition harness."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import SensingReport
from .features import TAU_G

log = logging.getLogger(__name__)


class UndefinedMetric(ValueError):
    pass


def f1_score(predicted: Sequence[bool], actual: Sequence[bool]) -> float:
    """F1 with malicious as the positive class; 0 when precision + recall is 0."""
    pred = np.asarray(predicted, dtype=bool)
    act = np.asarray(actual, dtype=bool)
    if pred.shape != act.shape:
        raise ValueError("label arrays differ in length")
    tp = int(np.sum(pred & act))
    fp = int(np.sum(pred & ~act))
    fn = int(np.sum(~pred & act))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def reputation_distance(final: Sequence[float], malicious: Sequence[bool]) -> float:
    r = np.asarray(final, dtype=float)
    bad = np.asarray(malicious, dtype=bool)
    if bad.all() or not bad.any():
        raise UndefinedMetric("both classes must be non-empty")
    return float(r[~bad].mean() - r[bad].mean())


def relative_noise(report: SensingReport, truth) -> float:
    g = truth.at(report.slot, report.region)
    return abs(report.value - g) / max(abs(g), TAU_G)


@dataclass(frozen=True)
class NoiseReduction:
    ratio: float
    all_removed: bool = False


def noise_reduction_ratio(original: Sequence[SensingReport], kept: Sequence[SensingReport],
                          truth) -> NoiseReduction:
    """``1 - mean_noise(kept) / mean_noise(original)`` with relative noise."""
    base = [relative_noise(r, truth) for r in original]
    if not kept:
        return NoiseReduction(1.0, all_removed=True)
    base_mean = math.fsum(base) / len(base) if base else 0.0
    if base_mean == 0.0:
        return NoiseReduction(0.0)
    kept_mean = math.fsum(relative_noise(r, truth) for r in kept) / len(kept)
    return NoiseReduction(1.0 - kept_mean / base_mean)


@dataclass
class RunMetrics:
    method: str
    f1: float
    reputation_distance: float
    noise_reduction_ratio: float
    per_run: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def row(self) -> tuple:
        return (self.method, self.f1, self.reputation_distance, self.noise_reduction_ratio)


def repeat_harness(run: Callable[[int], dict], method: str, repetitions: int = 6,
                   seeds: Iterable[int] | None = None) -> RunMetrics:
    """Run ``run(seed)`` per seed and average the three metrics.

    ``run`` returns a dict with keys ``f1``, ``reputation_distance`` and
    ``noise_reduction_ratio``. A failing seed is logged and annotated; the
    mean is taken over the successful ones.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    seeds = list(range(repetitions)) if seeds is None else list(seeds)[:repetitions]
    per_run, failures = [], []
    for seed in seeds:
        try:
            res = dict(run(seed))
        except Exception as exc:  # noqa: BLE001 -- partial results are the contract
            log.warning("%s seed %d failed: %s", method, seed, exc)
            failures.append({"seed": seed, "error": repr(exc)})
            continue
        res["seed"] = seed
        per_run.append(res)
    keys = ("f1", "reputation_distance", "noise_reduction_ratio")
    means = {k: (math.fsum(r[k] for r in per_run) / len(per_run)) if per_run else math.nan for k in keys}
    return RunMetrics(method, means["f1"], means["reputation_distance"], means["noise_reduction_ratio"],
                      per_run, failures)
