"""Comparator methods that score each report by its distance to an
estimated truth and feed the score into the shared reputation update.

* ``wei`` -- the mean of everything reported in the region before the slot
* ``cnb`` -- the prediction itself
* ``td``  -- a CRH-style weighted estimate from the slot's own reports,
  with per-MU weights carried across slots
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DomainError, SlotBatch
from .engine import QualityRecord, ReputationLedger, SlotResult, TdConfig, reputation_update
from .features import TAU_G

KINDS = ("wei", "cnb", "td")
WEIGHT_EPS = 1e-6


def distance_quality(v: float, ghat: float, lam: float = 0.3) -> float:
    """``exp(-|v - ghat| / |ghat| / lam)``; 1 on exact agreement."""
    if lam <= 0:
        raise DomainError("lambda must be > 0")
    delta = abs(v - ghat) / max(abs(ghat), TAU_G)
    return math.exp(-delta / lam)


def wei_estimate(values: Sequence[float]) -> float | None:
    if len(values) == 0:
        return None
    return math.fsum(values) / len(values)


def cnb_estimate(predictions, region: int, slot: int) -> float | None:
    g = predictions.vector(slot)[region - 1]
    return None if np.isnan(g) else float(g)


def crh_weights(values: np.ndarray, estimate: float, eps: float = WEIGHT_EPS) -> np.ndarray:
    """``-ln((e_j + eps) / sum_k (e_k + eps))`` with ``e_j = |v_j - estimate|``, floored at 0."""
    e = np.abs(values - estimate) + eps
    return np.maximum(-np.log(e / e.sum()), 0.0)


def td_estimate(values: Sequence[float], weights: Sequence[float] | None = None,
                tol: float = 1e-3, max_iters: int = 100) -> tuple[float, np.ndarray]:
    """Alternate weighted mean and distance-based weights until the estimate
    moves by less than ``tol`` (relative to its magnitude)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise DomainError("no reports to estimate from")
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=float).copy()
    if v.size == 1:
        return float(v[0]), np.ones(1)
    if not np.any(w > 0):
        w = np.ones_like(v)
    est = float(np.dot(w, v) / w.sum())
    for _ in range(max_iters):
        w = crh_weights(v, est)
        if not np.any(w > 0):
            break
        new = float(np.dot(w, v) / w.sum())
        moved = abs(new - est)
        est = new
        if moved < tol * max(abs(est), 1.0):
            break
    return est, w


@dataclass
class BaselineState:
    ledger: ReputationLedger
    region_sum: np.ndarray
    region_count: np.ndarray
    mu_error: np.ndarray
    mu_count: np.ndarray


class Baseline:
    """Runs one comparator method slot by slot.

    Reports whose truth estimate is unavailable are kept and leave the
    submitter's reputation unchanged.
    """

    def __init__(self, kind: str, n_mus: int, n_regions: int, cfg: TdConfig = TdConfig(), lam: float = 0.3):
        if kind not in KINDS:
            raise DomainError(f"unknown baseline {kind!r}")
        self.kind = kind
        self.cfg = cfg
        self.lam = lam
        self.n_regions = n_regions
        self.state = BaselineState(ReputationLedger(n_mus, cfg.initial_reputation),
                                   np.zeros(n_regions), np.zeros(n_regions, dtype=np.int64),
                                   np.zeros(n_mus), np.zeros(n_mus, dtype=np.int64))
        self.results: list[SlotResult] = []

    @property
    def ledger(self) -> ReputationLedger:
        return self.state.ledger

    def _estimates(self, batch: SlotBatch, predictions) -> dict[int, float | None]:
        st = self.state
        regions = sorted(set(batch.regions.tolist()))
        if self.kind == "wei":
            return {n: (st.region_sum[n - 1] / st.region_count[n - 1]) if st.region_count[n - 1] else None
                    for n in regions}
        if self.kind == "cnb":
            return {n: cnb_estimate(predictions, n, batch.slot) for n in regions}
        # td: initial weights from each MU's mean relative error so far
        mean_err = np.where(st.mu_count > 0, st.mu_error / np.maximum(st.mu_count, 1), np.nan)
        known = ~np.isnan(mean_err)
        prior = np.ones(len(mean_err))
        if known.any():
            e = mean_err[known] + WEIGHT_EPS
            prior[known] = np.maximum(-np.log(e / e.sum()), 0.0)
            prior[~known] = prior[known].mean() if known.sum() else 1.0
        out = {}
        for n in regions:
            mask = batch.regions == n
            est, _ = td_estimate(batch.values[mask], prior[batch.mus[mask] - 1],
                                 tol=self.cfg.epsilon, max_iters=self.cfg.max_iters)
            out[n] = est
        return out

    def step(self, batch: SlotBatch, predictions=None) -> SlotResult:
        start = time.perf_counter()
        st = self.state
        r_prev = st.ledger.current
        r_new = r_prev.copy()
        est = self._estimates(batch, predictions)
        records = []
        for rep in batch.reports:
            g = est.get(rep.region)
            if g is None:
                records.append(QualityRecord(rep, math.nan, math.nan, math.nan, 1.0, True))
                continue
            q = distance_quality(rep.value, g, self.lam)
            score = -math.log1p(-q) if q < 1.0 else math.inf
            records.append(QualityRecord(rep, q, score, score, q, q >= self.cfg.gamma))
            r_new[rep.mu - 1] = reputation_update(float(r_prev[rep.mu - 1]), q, self.cfg)
            if self.kind == "td":
                st.mu_error[rep.mu - 1] += abs(rep.value - g) / max(abs(g), TAU_G)
                st.mu_count[rep.mu - 1] += 1
        if self.kind == "wei" and len(batch):
            st.region_sum += np.bincount(batch.regions - 1, weights=batch.values, minlength=self.n_regions)
            st.region_count += np.bincount(batch.regions - 1, minlength=self.n_regions)
        st.ledger = st.ledger.appended(r_new)
        res = SlotResult(batch.slot, records, None, 1 if len(batch) else 0, True, [],
                         time.perf_counter() - start)
        self.results.append(res)
        return res

    def run(self, batches: Sequence[SlotBatch], predictions=None) -> list[SlotResult]:
        for b in batches:
            self.step(b, predictions)
        return self.results
