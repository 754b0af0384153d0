import numpy as np
import pytest

from mcs_truth.core import SensingReport, group_batches
from mcs_truth.predictor import PredictionGrid

ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def small_instance(seed: int, n_mus: int = 5, n_regions: int = 2, n_slots: int = 10,
                   n_bad: int = 1, p_report: float = 0.8, p_absent: float = 0.1):
    """Random reports plus a noisy prediction grid with a few holes.

    Some normal MUs share exact values so matching sets are non-trivial.
    """
    rng = np.random.default_rng(seed)
    truth = rng.uniform(50, 150, size=(n_slots, n_regions))
    grid = PredictionGrid(n_regions)
    for t in range(1, n_slots + 1):
        pred = truth[t - 1] * (1 + rng.normal(0, 0.05, n_regions))
        pred[rng.random(n_regions) < p_absent] = np.nan
        grid.cells[t] = pred
    bad = set(range(1, n_bad + 1))
    reports = []
    for t in range(1, n_slots + 1):
        for i in range(1, n_mus + 1):
            if rng.random() > p_report:
                continue
            n = int(rng.integers(1, n_regions + 1))
            g = truth[t - 1, n - 1]
            v = g * (1 + rng.normal(0.3, 0.1)) if i in bad else g
            reports.append(SensingReport(i, t, n, float(v)))
    return group_batches(reports, n_slots), grid, bad


@pytest.fixture
def instance():
    return small_instance(0)
