import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import small_instance
from mcs_truth.baselines import (Baseline, cnb_estimate, crh_weights, distance_quality, td_estimate,
                                 wei_estimate)
from mcs_truth.core import DomainError, SensingReport, SlotBatch
from mcs_truth.engine import TdConfig, reputation_update
from mcs_truth.predictor import PredictionGrid, oracle_predict
from mcs_truth.simulator import generate_truth


def scalar_crh(values, iters=100, eps=1e-6, tol=1e-3):
    """Plain-python CRH iteration with uniform starting weights."""
    w = [1.0] * len(values)
    est = sum(wi * v for wi, v in zip(w, values)) / sum(w)
    for _ in range(iters):
        e = [abs(v - est) + eps for v in values]
        tot = sum(e)
        w = [max(-math.log(x / tot), 0.0) for x in e]
        new = sum(wi * v for wi, v in zip(w, values)) / sum(w)
        moved, est = abs(new - est), new
        if moved < tol * max(abs(est), 1.0):
            break
    return est


def test_wei_examples():
    assert wei_estimate([100, 110, 120]) == 110
    assert wei_estimate([42]) == 42
    assert wei_estimate([]) is None


def test_cnb_examples():
    grid = PredictionGrid(2)
    grid.set(3, 1, 120.5)
    assert cnb_estimate(grid, 1, 3) == 120.5
    assert cnb_estimate(grid, 2, 3) is None
    truth = generate_truth(5, 2, 0, history_slots=0)
    assert cnb_estimate(oracle_predict(truth, 0.0, 1), 2, 4) == truth.at(4, 2)


def test_td_estimate_examples():
    assert td_estimate([7.5])[0] == 7.5
    est, w = td_estimate([10, 10, 100])
    assert est == pytest.approx(scalar_crh([10, 10, 100]), rel=1e-9)
    assert abs(est - 10) < 1.0 and w[2] < w[0]
    assert td_estimate([3.0, 3.0, 3.0])[0] == 3.0


@given(st.floats(-100, 100), st.lists(st.floats(0.1, 50), min_size=1, max_size=4))
def test_td_symmetric(m, offsets):
    values = [m + d for d in offsets] + [m - d for d in offsets]
    est, _ = td_estimate(values)
    assert est == pytest.approx(m, abs=1e-9 * max(1, abs(m)) + 1e-9)


def test_distance_quality_examples():
    assert distance_quality(100, 100) == 1.0
    assert distance_quality(130, 100, 0.3) == pytest.approx(math.exp(-1), rel=1e-12)
    assert distance_quality(1e12, 1.0) == pytest.approx(0.0, abs=1e-300)
    with pytest.raises(DomainError):
        distance_quality(1, 1, 0)


@given(st.floats(0, 10), st.floats(0, 10))
def test_distance_quality_decreasing(d1, d2):
    lo, hi = sorted((d1, d2))
    q_lo, q_hi = distance_quality(100 + 100 * lo, 100), distance_quality(100 + 100 * hi, 100)
    assert q_hi <= q_lo
    if hi - lo > 1e-9:
        assert q_hi < q_lo


def test_crh_weights_floor():
    assert np.all(crh_weights(np.array([1.0, 2.0, 50.0]), 1.5) >= 0)


def test_wei_excludes_current_slot():
    b = Baseline("wei", 2, 1)
    r1 = b.step(SlotBatch(1, (SensingReport(1, 1, 1, 100.0),)))
    assert r1.records[0].kept and r1.records[0].q == 1.0
    assert b.ledger.current.tolist() == [0.5, 0.5]
    r2 = b.step(SlotBatch(2, (SensingReport(2, 2, 1, 130.0),)))
    assert r2.records[0].q == pytest.approx(math.exp(-1))
    assert b.ledger.reputation(2) == pytest.approx(reputation_update(0.5, math.exp(-1)))


def test_cnb_scores_against_prediction():
    grid = PredictionGrid(1, {1: np.array([100.0])})
    b = Baseline("cnb", 2, 1)
    res = b.step(SlotBatch(1, (SensingReport(1, 1, 1, 100.0), SensingReport(2, 1, 1, 130.0))), grid)
    assert [r.kept for r in res.records] == [True, False]
    assert b.ledger.reputation(1) > 0.5 > b.ledger.reputation(2)


@pytest.mark.parametrize("kind", ["wei", "cnb", "td"])
def test_baselines_run_on_shared_inputs(kind):
    batches, grid, _ = small_instance(2, n_slots=30)
    b = Baseline(kind, 5, 2, TdConfig())
    results = b.run(batches, grid)
    assert len(results) == 30 and b.ledger.slots_processed == 30
    assert np.all((b.ledger.current >= 0.001) & (b.ledger.current <= 0.999))


def test_unknown_kind():
    with pytest.raises(DomainError):
        Baseline("dti", 2, 1)
