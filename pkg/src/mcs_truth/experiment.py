"""Glue between the simulator, the methods and the metrics."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .baselines import Baseline
from .core import SensingReport
from .engine import ReputationLedger, SlotResult, TdConfig, TruthDiscovery, classify_mus
from .metrics import RunMetrics, f1_score, noise_reduction_ratio, repeat_harness, reputation_distance
from .predictor import PredictionGrid, PredictorConfig, load_external, oracle_predict, rolling_predictions
from .simulator import Scenario, ScenarioConfig, simulate

log = logging.getLogger(__name__)

METHODS = ("prbtd", "wei", "cnb", "td")


@dataclass
class MethodRun:
    method: str
    results: list[SlotResult]
    ledger: ReputationLedger

    @property
    def kept(self) -> list[SensingReport]:
        return [r for res in self.results for r in res.kept]

    @property
    def mean_slot_seconds(self) -> float:
        busy = [res.seconds for res in self.results]
        return float(np.mean(busy)) if busy else 0.0

    @property
    def non_converged(self) -> list[int]:
        return [res.slot for res in self.results if not res.converged]


def scenario_predictions(scenario: Scenario, config: PredictorConfig = PredictorConfig()) -> PredictionGrid:
    base = None
    if config.kind == "oracle_noisy":
        base = oracle_predict(scenario.truth, config.noise, scenario.config.seed)
    elif config.kind == "external":
        base = load_external(config.path, scenario.truth.n_regions)
    return rolling_predictions(scenario.history, scenario.batches, config, scenario.truth.n_regions, base)


def run_method(scenario: Scenario, method: str, predictions: PredictionGrid,
               td: TdConfig = TdConfig(), lam: float = 0.3) -> MethodRun:
    n_mus, n_regions = scenario.config.n_mus, scenario.truth.n_regions
    if method == "prbtd":
        runner = TruthDiscovery(n_mus, n_regions, td)
    elif method in ("wei", "cnb", "td"):
        runner = Baseline(method, n_mus, n_regions, td, lam)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    results = runner.run(scenario.batches, predictions)
    run = MethodRun(method, results, runner.ledger)
    if run.non_converged:
        log.info("%s: %d slots hit max_iters", method, len(run.non_converged))
    return run


def evaluate(run: MethodRun, scenario: Scenario) -> dict:
    malicious = scenario.malicious
    nrr = noise_reduction_ratio(scenario.reports, run.kept, scenario.truth)
    return {
        "f1": f1_score(classify_mus(run.ledger), malicious),
        "reputation_distance": reputation_distance(run.ledger.current, malicious),
        "noise_reduction_ratio": nrr.ratio,
        "all_removed": nrr.all_removed,
        "mean_slot_seconds": run.mean_slot_seconds,
    }


def compare(cfg: ScenarioConfig, methods: Sequence[str] = METHODS, td: TdConfig = TdConfig(),
            predictor: PredictorConfig = PredictorConfig(), seeds: Sequence[int] = range(6),
            lam: float = 0.3) -> dict[str, RunMetrics]:
    """Every method on the same simulated scenario per seed; mean metrics per method."""
    cache: dict[int, dict] = {}

    def per_seed(seed: int) -> dict:
        if seed not in cache:
            scen = simulate(replace(cfg, seed=seed))
            preds = scenario_predictions(scen, predictor)
            cache[seed] = {m: evaluate(run_method(scen, m, preds, td, lam), scen) for m in methods}
        return cache[seed]

    seeds = list(seeds)
    return {m: repeat_harness(lambda s, m=m: per_seed(s)[m], m, len(seeds), seeds) for m in methods}
