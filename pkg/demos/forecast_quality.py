"""How much does PRBTD depend on the forecast?

The oracle predictor perturbs the true values by relative Gaussian noise
of a chosen size, standing in for forecasters of varying accuracy.
"""
from mcs_truth.experiment import compare
from mcs_truth.predictor import PredictorConfig
from mcs_truth.simulator import ScenarioConfig

for sigma in (0.0, 0.05, 0.1, 0.2, 0.3):
    res = compare(ScenarioConfig(), methods=("prbtd", "cnb"), seeds=range(3),
                  predictor=PredictorConfig("oracle_noisy", noise=sigma))
    p, c = res["prbtd"], res["cnb"]
    print(f"sigma_p {sigma:4.2f}  prbtd f1 {p.f1:.3f} nrr {p.noise_reduction_ratio:.3f}"
          f"  cnb nrr {c.noise_reduction_ratio:.3f}")
