"""
Fair ranking policies on a single query
=======================================

A source member is shown ``m`` candidates. The policy that maximizes
expected utility simply sorts by score. Adding a parity constraint turns the
solution into a mixture of two rankings, which we inspect here.
"""
import numpy as np

from linkfair import ranking as rk

rng = np.random.default_rng(0)

##############################################################################
# Ten candidates, four of them in the minority, scored by some model.
# Minority scores are shifted down a little.
groups = np.array([0] * 6 + [1] * 4)
u = np.clip(rng.normal(0.6, 0.15, 10) - 0.1 * groups, 0, 1)
v = rk.position_bias(4)
print("scores  ", np.round(u, 3))
print("slot weights", np.round(v, 4))

##############################################################################
# Unconstrained: the greedy ranking.
greedy = rk.solve_policy(u, v)
print("greedy ranking", greedy.rankings[0], "utility", round(greedy.objective(u, v), 4))
print("exposure shares", rk.expected_exposure_by_group(greedy, v, groups))

##############################################################################
# Demographic parity of exposure: equal exposure per group member.
# Majority members make up 60% of candidates, so their share should be 0.6.
for kind in (rk.EXPOSURE, rk.UTILITY):
    pol = rk.solve_policy(u, v, rk.make_constraint(kind, u, groups))
    print(f"\n{kind} parity")
    for r, w in zip(pol.rankings, pol.weights):
        print(f"  ranking {r} with weight {w:.3f}")
    print("  utility", round(pol.objective(u, v), 4),
          "exposure shares", np.round(rk.expected_exposure_by_group(pol, v, groups), 4))

##############################################################################
# Drawing rankings from the policy. The marginal of slot 1 matches column 1.
pol = rk.solve_policy(u, v, rk.exposure_parity(groups))
draws = np.array([rk.sample_ranking(pol, rng)[0] for _ in range(20000)])
print("\nslot-1 frequencies", np.round(np.bincount(draws, minlength=10) / 20000, 3))
print("slot-1 column     ", np.round(pol.matrix[:, 0], 3))
