"""One slot by hand: three MUs agree with the forecast, one does not.

Shows the records the engine returns and how the reputations move.
"""
import numpy as np

from mcs_truth import PredictionGrid, SensingReport, SlotBatch, TruthDiscovery

grid = PredictionGrid(1, {t: np.array([100.0]) for t in (1, 2)})
td = TruthDiscovery(n_mus=4, n_regions=1)
for t in (1, 2):
    batch = SlotBatch(t, (SensingReport(1, t, 1, 101.0), SensingReport(2, t, 1, 99.5),
                          SensingReport(3, t, 1, 100.4), SensingReport(4, t, 1, 135.0)))
    res = td.step(batch, grid)
    print(f"slot {t}: {res.iterations} iterations, converged={res.converged}")
    for rec in res.records:
        print(f"  MU {rec.report.mu}  v={rec.report.value:6.1f}  q={rec.q:.3f}  kept={rec.kept}")
print("reputations:", np.round(td.ledger.current, 4))
