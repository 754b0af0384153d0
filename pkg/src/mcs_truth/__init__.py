"""Prediction-anchored, reputation-based truth discovery for crowdsensing data."""
from .baselines import Baseline, cnb_estimate, distance_quality, td_estimate, wei_estimate
from .config import ConfigError, ExperimentConfig
from .core import (DataCache, DomainError, FormatError, MeanVector, RegionGrid, SensingReport, SequencingError,
                   SlotBatch, cache_update, group_batches, region_index, slot_mean)
from .engine import (EngineState, QualityRecord, ReputationLedger, SlotResult, TdConfig, TruthDiscovery,
                     classify_mus, expected_quality, expected_quality_score, matching_set, overall_quality,
                     reputation_score, reputation_update, run_slot)
from .experiment import METHODS, compare, evaluate, run_method, scenario_predictions
from .features import (CircumstanceState, DataFeature, circumstance_update, implication, scaled_feature,
                       sensing_error, user_error)
from .metrics import RunMetrics, UndefinedMetric, f1_score, noise_reduction_ratio, repeat_harness, reputation_distance
from .predictor import PredictionGrid, PredictorConfig, load_external, oracle_predict, predict, rolling_predictions
from .simulator import (GroundTruthSeries, MuProfile, Scenario, ScenarioConfig, build_population, emit_reports,
                        generate_truth, inject_scenarios, simulate)

__version__ = "0.1.0"
