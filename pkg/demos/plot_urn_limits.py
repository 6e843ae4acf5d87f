"""
Limits of the mixed preferential attachment model
=================================================

New members arrive one at a time and attach proportionally to degree,
accepting same-group or cross-group partners with the mixing probabilities
``p0`` and ``p1``. We compare the minority degree share ``alpha_t`` of three
proposal mechanisms with their closed-form limits.
"""
import numpy as np

from linkfair import mpa

r, p0, p1 = 0.35, 0.7, 0.7

##############################################################################
# Closed-form limits. Group-first (dp) proposals move the limit toward r but
# do not reach it; the retention filter targets r exactly.
print("baseline limit", round(mpa.baseline_alpha(r, p0, p1), 5))
print("dp limit      ", round(mpa.theorem1_alpha(r, p0, p1), 5))
print("tail exponents", np.round(mpa.power_law_exponents(r, p0, p1, mpa.baseline_alpha(r, p0, p1)), 4))

##############################################################################
# Trajectories over 2e5 arrivals for a handful of seeds.
for variant in ("baseline", "dp", "dynamic"):
    conf = mpa.MpaConfig(r=r, p0=p0, p1=p1, variant=variant, t_max=200_000, stride=50_000)
    runs = np.array([mpa.mpa_run(mpa.MpaConfig(**{**conf.__dict__, "seed": s})).alpha
                     for s in range(5)])
    print(f"{variant:9s}", " ".join(f"{a:.4f}" for a in runs.mean(axis=0)))

##############################################################################
# Heat map data: where does the dp proposal help most?
grid = mpa.limits_grid(r, resolution=9)
imp = grid[:, 4].reshape(9, 9)
print("\nchange in |alpha - r| from dp (rows p0, columns p1)")
print(np.round(imp, 3))
