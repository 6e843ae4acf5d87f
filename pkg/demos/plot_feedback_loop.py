"""
The recommendation feedback loop at desk scale
==============================================

Members with little network get fewer good recommendations, which keeps
their network small. We run the loop for the three intervention arms on a
small population and watch the degree gap between groups.
"""
import numpy as np

from linkfair import config as cfg
from linkfair import simulator as sim

settings = cfg.resolve("desk")
conf = cfg.sim_config(settings)
print(f"n={conf.n}, steps={conf.t_max}, slots={conf.m}, runs={conf.runs}")

##############################################################################
# All arms of one repetition share the same seed and initial graph.
out = sim.run_arms(conf)

##############################################################################
# Mean degree gap along the run, averaged over repetitions.
steps = [0, 100, 200, 300, 400, 500]
for arm, runs in out.items():
    gap = np.mean([r.metrics.column("abs_gap") for r in runs], axis=0)
    share = np.mean([r.metrics.exposure_share() for r in runs])
    print(f"{arm:5s} gap", " ".join(f"{gap[t]:.2f}" for t in steps),
          f"| majority exposure share {share:.3f}")

##############################################################################
# Initial conditions: majority members start with more connections.
state = out["none"][0]
d, g = state.initial_graph.degrees, state.population.group
print("initial mean degree majority/minority", round(d[g == 0].mean(), 2), round(d[g == 1].mean(), 2))
