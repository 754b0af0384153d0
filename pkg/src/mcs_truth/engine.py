"""Reputation-based truth discovery over a stream of slot batches.

Each slot alternates between scoring the slot's reports (from the
reputations of MUs that submitted matching values, adjusted by the
implication of every cached report) and updating the submitters'
reputations, until the largest reputation change drops below ``epsilon``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import DataCache, DomainError, SensingReport, SlotBatch
from .features import CircumstanceState, advance_circumstance, feature_array, implication_matrix


@dataclass(frozen=True)
class TdConfig:
    alpha: float = 0.018
    beta: float = 0.06
    gamma: float = 0.5
    rho: float = 0.02
    cache_length: int = 5
    epsilon: float = 0.001
    max_iters: int = 100
    r_clamp: float = 0.001
    tau_v: float = 1e-9
    initial_reputation: float = 0.5

    def __post_init__(self):
        if not 0 < self.alpha < self.beta < 1:
            raise DomainError("need 0 < alpha < beta < 1")
        if not 0 < self.gamma < 1:
            raise DomainError("need 0 < gamma < 1")
        if not 0 < self.rho < 1:
            raise DomainError("need 0 < rho < 1")
        if self.cache_length < 1:
            raise DomainError("cache_length must be >= 1")
        if not self.epsilon > 0:
            raise DomainError("epsilon must be > 0")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if not 0 < self.r_clamp < 0.5:
            raise DomainError("need 0 < r_clamp < 0.5")
        if self.tau_v < 0:
            raise DomainError("tau_v must be >= 0")
        if not 0 <= self.initial_reputation <= 1:
            raise DomainError("initial_reputation must lie in [0, 1]")


def clamp_reputation(r: float, margin: float = 0.001) -> float:
    return min(max(r, margin), 1.0 - margin)


def reputation_score(r: float, r_clamp: float = 0.001) -> float:
    """``-ln(1 - r)`` after clamping ``r`` into ``[r_clamp, 1 - r_clamp]``."""
    return -math.log(1.0 - clamp_reputation(r, r_clamp))


def quality_level(score: float) -> float:
    return -math.expm1(-score)


def reputation_update(r: float, q: float, cfg: TdConfig = TdConfig(), clamp: bool = True) -> float:
    """Move reputation ``r`` toward ``q``.

    High-quality data (``q >= gamma``) raise it at rate ``alpha``, low-quality
    data lower it at rate ``beta``.
    """
    g = cfg.gamma
    if q >= g:
        r_new = 0.5 * (1.0 + cfg.alpha * ((q - g) / (1.0 - g)) + (1.0 - cfg.alpha) * (2.0 * r - 1.0))
    else:
        r_new = 0.5 * (1.0 + cfg.beta * ((q - g) / g) + (1.0 - cfg.beta) * (2.0 * r - 1.0))
    if clamp:
        r_new = clamp_reputation(r_new, cfg.r_clamp)
    return r_new


def values_match(v_i: float, v_j: float, tau_v: float) -> bool:
    return abs(v_j - v_i) <= tau_v * max(abs(v_i), 1.0)


def matching_set(report: SensingReport, batch: SlotBatch, tau_v: float = 1e-9) -> set[int]:
    """MUs that reported the same value as ``report`` in its region and slot."""
    out = {report.mu}
    for other in batch.reports:
        if other.region == report.region and values_match(report.value, other.value, tau_v):
            out.add(other.mu)
    return out


def expected_quality(reputations: Sequence[float]) -> float:
    """Probability that at least one of the matching MUs is right."""
    prod = 1.0
    for r in reputations:
        prod *= 1.0 - r
    return 1.0 - prod


def expected_quality_score(report: SensingReport, reputations: Mapping[int, float] | np.ndarray,
                           batch: SlotBatch, cfg: TdConfig = TdConfig()) -> float:
    """Sum of reputation scores over the report's matching set.

    ``reputations`` maps MU id to reputation; an array is indexed by ``mu - 1``.
    """
    mus = sorted(matching_set(report, batch, cfg.tau_v))
    if isinstance(reputations, np.ndarray):
        rs = [float(reputations[m - 1]) for m in mus]
    else:
        rs = [reputations[m] for m in mus]
    return math.fsum(reputation_score(r, cfg.r_clamp) for r in rs)


@dataclass(frozen=True)
class QualityRecord:
    report: SensingReport
    expected_quality: float
    expected_score: float
    score: float
    q: float
    kept: bool


def overall_quality(report: SensingReport, expected_score: float, cached_scores: Sequence[float],
                    implications: Sequence[float], cfg: TdConfig = TdConfig()) -> QualityRecord:
    """Combine a report's own expected score with the implication-weighted
    scores of the cached reports; negative totals floor at zero."""
    support = math.fsum(s * imp for s, imp in zip(cached_scores, implications))
    score = max(expected_score + cfg.rho * support, 0.0)
    q = quality_level(score)
    return QualityRecord(report, quality_level(expected_score), expected_score, score, q, q >= cfg.gamma)


class ReputationLedger:
    """Reputation of every MU after each processed slot.

    ``history[0]`` holds the initial reputations; MU ``i`` lives at index ``i - 1``.
    """

    def __init__(self, n_mus: int, initial: float = 0.5, history: list[np.ndarray] | None = None):
        if n_mus < 1:
            raise DomainError("need at least one MU")
        self.n_mus = n_mus
        if history is None:
            history = [np.full(n_mus, float(initial))]
        self.history = history

    @property
    def current(self) -> np.ndarray:
        return self.history[-1]

    @property
    def slots_processed(self) -> int:
        return len(self.history) - 1

    def reputation(self, mu: int) -> float:
        return float(self.current[mu - 1])

    def appended(self, reputations: np.ndarray) -> "ReputationLedger":
        return ReputationLedger(self.n_mus, history=self.history + [reputations])

    def trajectory_rows(self, first_slot: int = 1):
        """``(slot, mu, reputation)`` rows; the initial state is slot ``first_slot - 1``."""
        for k, reps in enumerate(self.history):
            slot = first_slot - 1 + k
            for i, r in enumerate(reps):
                yield slot, i + 1, float(r)


def classify_mus(ledger: ReputationLedger, threshold: float = 0.5) -> np.ndarray:
    """Boolean array, True where the MU's final reputation is below ``threshold``."""
    return ledger.current < threshold


@dataclass
class EngineState:
    ledger: ReputationLedger
    cache: DataCache
    circumstance: CircumstanceState

    @classmethod
    def initial(cls, n_mus: int, n_regions: int, cfg: TdConfig = TdConfig()) -> "EngineState":
        return cls(ReputationLedger(n_mus, cfg.initial_reputation), DataCache(cfg.cache_length),
                   CircumstanceState.empty(n_regions))


@dataclass
class SlotResult:
    slot: int
    records: list[QualityRecord]
    state: EngineState
    iterations: int
    converged: bool
    deltas: list[float] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def kept(self) -> list[SensingReport]:
        return [rec.report for rec in self.records if rec.kept]


def _matching_groups(batches: Sequence[SlotBatch], tau_v: float) -> list[list[int]]:
    """Matching-set MU ids for every report of ``batches``, in cache order."""
    groups = []
    for batch in batches:
        for rep in batch.reports:
            groups.append(sorted(matching_set(rep, batch, tau_v)))
    return groups


def run_slot(batch: SlotBatch, state: EngineState, predictions, cfg: TdConfig = TdConfig()) -> SlotResult:
    """Process one slot.

    ``predictions`` is anything with a ``vector(slot)`` method returning the
    per-region predicted truth (NaN where unavailable), e.g.
    :class:`~mcs_truth.predictor.PredictionGrid`. Reputations, circumstance
    errors and cache in ``state`` are not modified; the advanced state is
    returned in the result.
    """
    start = time.perf_counter()
    r_prev = state.ledger.current
    cache = state.cache.update(batch)
    ghat_t = predictions.vector(batch.slot)
    circ = advance_circumstance(state.circumstance, batch.regions, batch.values, ghat_t)

    if not len(batch):
        new_state = EngineState(state.ledger.appended(r_prev), cache, circ)
        return SlotResult(batch.slot, [], new_state, 0, True, [], time.perf_counter() - start)

    # Everything below except the scores depends only on the slot's data,
    # so it is computed once rather than per iteration.
    values = np.concatenate([b.values for b in cache.batches])
    regions = np.concatenate([b.regions for b in cache.batches])
    ghat = np.concatenate([predictions.vector(b.slot)[b.regions - 1] if len(b) else np.empty(0)
                           for b in cache.batches])
    feats = feature_array(values, ghat, circ.errors[regions - 1])
    n_cur = len(batch)
    imp = implication_matrix(feats[-n_cur:], feats)
    groups = _matching_groups(cache.batches, cfg.tau_v)
    group_idx = [np.asarray(g) - 1 for g in groups]
    cur_reports = batch.reports
    cur_idx = batch.mus - 1

    r_iter = r_prev
    records: list[QualityRecord] = []
    deltas = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        scores_r = [reputation_score(float(r), cfg.r_clamp) for r in r_iter]
        cache_scores = np.array([math.fsum(scores_r[j] for j in g) for g in group_idx])
        own_scores = cache_scores[-n_cur:]
        weighted = imp * cache_scores[None, :]
        records = []
        r_next = r_iter.copy()
        for k, rep in enumerate(cur_reports):
            support = math.fsum(weighted[k])
            score = max(float(own_scores[k]) + cfg.rho * support, 0.0)
            q = quality_level(score)
            records.append(QualityRecord(rep, quality_level(float(own_scores[k])), float(own_scores[k]),
                                         score, q, q >= cfg.gamma))
            r_next[cur_idx[k]] = reputation_update(float(r_prev[cur_idx[k]]), q, cfg)
        delta = float(np.max(np.abs(r_next[cur_idx] - r_iter[cur_idx])))
        deltas.append(delta)
        r_iter = r_next
        if delta < cfg.epsilon:
            converged = True
            break

    new_state = EngineState(state.ledger.appended(r_iter), cache, circ)
    return SlotResult(batch.slot, records, new_state, it, converged, deltas, time.perf_counter() - start)


class TruthDiscovery:
    """Stateful wrapper feeding consecutive slots through :func:`run_slot`."""

    def __init__(self, n_mus: int, n_regions: int, cfg: TdConfig = TdConfig()):
        self.cfg = cfg
        self.state = EngineState.initial(n_mus, n_regions, cfg)
        self.results: list[SlotResult] = []

    @property
    def ledger(self) -> ReputationLedger:
        return self.state.ledger

    def step(self, batch: SlotBatch, predictions) -> SlotResult:
        res = run_slot(batch, self.state, predictions, self.cfg)
        self.state = res.state
        self.results.append(res)
        return res

    def run(self, batches: Sequence[SlotBatch], predictions) -> list[SlotResult]:
        for b in batches:
            self.step(b, predictions)
        return self.results
