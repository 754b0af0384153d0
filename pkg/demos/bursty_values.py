"""Sudden level drops the forecaster cannot see coming.

Three windows of 7 slots x 4 regions have their true values halved. The
seasonal forecast still expects the old level, so honest reports there look
like 50% errors.
"""
from mcs_truth.experiment import compare
from mcs_truth.simulator import ScenarioConfig

methods = ("prbtd", "cnb", "td")
calm = compare(ScenarioConfig(), methods=methods)
burst = compare(ScenarioConfig(bursty=True), methods=methods)
for m in methods:
    a, b = calm[m].noise_reduction_ratio, burst[m].noise_reduction_ratio
    print(f"{m:6s} nrr {a:.3f} -> {b:.3f}  (drop {a - b:+.3f})")
