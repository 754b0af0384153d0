"""Fewer reports per slot: keep 100% down to 60% of the submissions."""
from mcs_truth.experiment import compare
from mcs_truth.simulator import ScenarioConfig

for level in (1.0, 0.9, 0.8, 0.7, 0.6):
    res = compare(ScenarioConfig(sparsity=level), methods=("prbtd", "td"))
    print(f"{level:4.0%}  prbtd nrr {res['prbtd'].noise_reduction_ratio:.3f}"
          f"  td nrr {res['td'].noise_reduction_ratio:.3f}")
