"""A small replication study on the scenario grid.

Full-size settings (200 replicates, 300 bootstrap draws, N = 500 and 5000)
take minutes to hours; the defaults here finish in about a minute.  Pass
--full for the desk-scale configuration.
"""

import sys

from cedcurve.simlab import ScenarioConfig, run_replication_study

full = "--full" in sys.argv
n_rep, k_boot = (200, 300) if full else (20, 20)

for scenario in (1, 2):
    configs = [ScenarioConfig.scenario(scenario, cens, 500) for cens in ("low", "high")]
    report = run_replication_study(configs, (2.0, 12.0), n_replicates=n_rep, k_boot=k_boot, k_draws=5000,
                                   seed=scenario, m_oracle=1_000_000)
    print(f"scenario {scenario}")
    print(report.to_csv())
