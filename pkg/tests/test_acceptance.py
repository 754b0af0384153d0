"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a ``PASS``/``FAIL`` line; the lines are repeated in the
pytest terminal summary. Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import filecmp
import math
import os
import time

import numpy as np
import pytest

from conftest import record_criterion, small_instance
from reference_alg import reference_run
from mcs_truth.cli import main
from mcs_truth.engine import TdConfig, TruthDiscovery, expected_quality, reputation_score, reputation_update
from mcs_truth.experiment import compare
from mcs_truth.features import CircumstanceState, DataFeature, circumstance_update, implication
from mcs_truth.simulator import ScenarioConfig

CFG = TdConfig()
SEEDS = range(6)
BASIC = ScenarioConfig()
SPARSITY_LEVELS = (1.0, 0.9, 0.8, 0.7, 0.6)


@pytest.fixture(scope="module")
def basic():
    return compare(BASIC, seeds=SEEDS)


def test_criterion_1_property_suite():
    start = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 200)
    out = np.array([[reputation_update(r, q, CFG, clamp=False) for q in grid] for r in grid])
    ok_update = bool(np.all((out >= 0.0) & (out <= 1.0)))

    rng = np.random.default_rng(2024)
    ok_imp = True
    for _ in range(10_000):
        f, g = rng.normal(size=2) * 10 ** rng.uniform(-3, 3), rng.normal(size=2) * 10 ** rng.uniform(-3, 3)
        k = 10 ** rng.uniform(-3, 3)
        c = implication(DataFeature(*f), DataFeature(*g))
        ck = implication(DataFeature(*(k * f)), DataFeature(*g))
        ok_imp &= -1.0 <= c <= 1.0 and abs(c - ck) <= 1e-12

    worst_q = 0.0
    for _ in range(1000):
        rs = rng.uniform(0.001, 0.999, size=int(rng.integers(1, 11))).tolist()
        score_form = -math.expm1(-math.fsum(reputation_score(r) for r in rs))
        worst_q = max(worst_q, abs(score_form - expected_quality(rs)))

    worst_stream = 0.0
    for _ in range(100):
        s = CircumstanceState.empty(1)
        flat = []
        for _slot in range(int(rng.integers(1, 15))):
            deltas = rng.normal(0.1, 0.3, size=int(rng.integers(0, 6))).tolist()
            flat += deltas
            s = circumstance_update(s, 1, deltas)
        batch = math.fsum(flat) / len(flat) if flat else 0.0
        worst_stream = max(worst_stream, abs(s.error(1) - batch))

    elapsed = time.perf_counter() - start
    ok = ok_update and ok_imp and worst_q <= 1e-9 and worst_stream <= 1e-12 and elapsed < 10
    record_criterion("1 property suite", ok,
                     f"update in [0,1]: {ok_update}; implication bounded+scale-invariant: {ok_imp}; "
                     f"max q-form gap {worst_q:.1e}; max streaming gap {worst_stream:.1e}; {elapsed:.2f} s")
    assert ok


def test_criterion_2_closed_form_dynamics():
    r_up = r_down = 0.5
    worst = 0.0
    for m in range(1, 201):
        r_up = reputation_update(r_up, 1.0, CFG, clamp=False)
        r_down = reputation_update(r_down, 0.0, CFG, clamp=False)
        worst = max(worst, abs(r_up - (1 - 0.5 * (1 - CFG.alpha) ** m)), abs(r_down - 0.5 * (1 - CFG.beta) ** m))
    ok = worst <= 1e-9
    record_criterion("2 closed-form dynamics", ok, f"max deviation over m<=200: {worst:.1e}")
    assert ok


def test_criterion_3_reference_equivalence():
    mismatches = []
    for seed in range(20):
        batches, grid, _ = small_instance(seed, n_mus=5, n_regions=2, n_slots=10)
        td = TruthDiscovery(5, 2, CFG)
        prod = td.run(batches, grid)
        ref = reference_run(batches, grid, 5, 2, CFG)
        for res, (recs, iters, conv, reps) in zip(prod, ref):
            same = (res.records == recs and res.iterations == iters and res.converged == conv
                    and res.state.ledger.current.tolist() == reps)
            if not same:
                mismatches.append((seed, res.slot))
    ok = not mismatches
    record_criterion("3 reference equivalence", ok, f"20 instances, mismatched (seed, slot): {mismatches[:5]}")
    assert ok


def test_criterion_4_basic_setup(basic):
    p, td, cnb, wei = (basic[m] for m in ("prbtd", "td", "cnb", "wei"))
    nrr = {m: [r["noise_reduction_ratio"] for r in basic[m].per_run] for m in basic}
    ordered = sum(a > b >= c >= d for a, b, c, d in zip(nrr["prbtd"], nrr["td"], nrr["cnb"], nrr["wei"]))
    parts = {
        "f1": p.f1 >= 0.95,
        "nrr": p.noise_reduction_ratio >= 0.5,
        "ordering": ordered >= 5,
        "rd": p.reputation_distance - td.reputation_distance >= 0.2 * td.reputation_distance,
    }
    ok = all(parts.values())
    detail = (f"PRBTD f1 {p.f1:.4f} nrr {p.noise_reduction_ratio:.4f} rd {p.reputation_distance:.4f}; "
              f"TD nrr {td.noise_reduction_ratio:.4f} rd {td.reputation_distance:.4f}; "
              f"CNB nrr {cnb.noise_reduction_ratio:.4f}; WEI nrr {wei.noise_reduction_ratio:.4f}; "
              f"ordering held in {ordered}/6; sub-checks {parts}")
    record_criterion("4 basic setup", ok, detail)
    assert ok


def test_criterion_5_bursty(basic):
    bursty = compare(ScenarioConfig(bursty=True), methods=("prbtd", "cnb"), seeds=SEEDS)
    drop_p = basic["prbtd"].noise_reduction_ratio - bursty["prbtd"].noise_reduction_ratio
    drop_c = basic["cnb"].noise_reduction_ratio - bursty["cnb"].noise_reduction_ratio
    ok = drop_p < drop_c
    record_criterion("5 bursty robustness", ok, f"PRBTD nrr drop {drop_p:.4f} vs CNB drop {drop_c:.4f}")
    assert ok


def test_criterion_6_sparsity(basic):
    wins, cells = 0, []
    for level in SPARSITY_LEVELS:
        res = basic if level == 1.0 else compare(ScenarioConfig(sparsity=level), methods=("prbtd", "td"),
                                                 seeds=SEEDS)
        p, t = res["prbtd"].noise_reduction_ratio, res["td"].noise_reduction_ratio
        wins += p >= t
        cells.append(f"{level:.0%}: {p:.3f} vs {t:.3f}")
    ok = wins >= 4
    record_criterion("6 sparsity trend", ok, f"PRBTD >= TD at {wins}/5 levels ({'; '.join(cells)})")
    assert ok


def test_criterion_7_low_noise(basic):
    low = compare(ScenarioConfig(low_noise_mu=0.15), seeds=SEEDS)
    metrics = ("f1", "reputation_distance", "noise_reduction_ratio")
    not_decreasing = [(m, k, getattr(basic[m], k), getattr(low[m], k))
                      for m in low for k in metrics if not getattr(low[m], k) < getattr(basic[m], k)]
    not_top = [k for k in metrics if any(getattr(low[m], k) >= getattr(low["prbtd"], k) for m in low if m != "prbtd")]
    ok = not not_decreasing and not not_top
    table = "; ".join(f"{m} " + "/".join(f"{getattr(low[m], k):.3f}" for k in metrics) for m in low)
    record_criterion("7 low-noise attacker", ok,
                     f"mu=0.15 f1/rd/nrr: {table}; not decreasing: {not_decreasing}; PRBTD not top on: {not_top}")
    assert ok


def test_criterion_8_runtime(basic):
    mean = float(np.mean([r["mean_slot_seconds"] for r in basic["prbtd"].per_run]))
    ok = mean < 2.0
    record_criterion("8 runtime", ok, f"mean run_slot wall time {mean * 1000:.2f} ms")
    assert ok


def test_criterion_9_determinism(tmp_path):
    outs = []
    for name in ("first", "second"):
        work = tmp_path / name
        work.mkdir()
        cwd = os.getcwd()
        os.chdir(work)
        try:
            assert main(["run", "--out", "out"]) == 0
        finally:
            os.chdir(cwd)
        outs.append(work / "out")
    files = sorted(str(p.relative_to(outs[0])) for p in outs[0].rglob("*") if p.is_file())
    match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], files, shallow=False)
    ok = not mismatch and not errors and "metrics.csv" in match
    record_criterion("9 determinism", ok, f"{len(match)} files byte-identical; differing: {mismatch + errors}")
    assert ok
