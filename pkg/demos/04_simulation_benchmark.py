"""
A small simulation benchmark
============================

Compare the three selection methods across sample sizes and write the
results table to CSV.
"""

import numpy as np

from sbspline.harness import SimulationConfig, run_simulation, write_results

cfg = SimulationConfig(setting=1, ns=(1024, 2048, 4096), snr=5, q_rules=("10*n^(1/9)",),
                       methods=("sbs", "abs", "unif"), replicates=5, seed=7)
rows = run_simulation(cfg)

print(f"{'method':6s} {'n':>6s} {'q':>4s} {'mse':>9s} {'se':>9s} {'fit ms':>7s}")
for r in rows:
    print(f"{r.method:6s} {r.n:6d} {r.q_eff:4d} {r.mse_mean:9.5f} {r.mse_se:9.5f} "
          f"{1e3 * r.fit_seconds_mean:7.2f}")

# MSE should fall roughly like a power of n; estimate the slope per method.
for method in cfg.methods:
    mses = [r.mse_mean for r in rows if r.method == method]
    slope = np.polyfit(np.log(cfg.ns), np.log(mses), 1)[0]
    print(f"{method}: log-log slope {slope:.2f}")

write_results("simulation_results.csv", rows)
print("wrote simulation_results.csv")
