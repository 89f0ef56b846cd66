"""
Dependence, packing numbers and the rate bound
==============================================

Correlated coordinates make the maximum concentrate more slowly. The rate
bound alpha(p) + tau(p) + 1/log p prices the dependence through N(tau), the
largest number of coordinates more than tau-correlated with any one of them.
Here we compute it for two stationary covariance families and compare it
with simulated deviations of M_p / u_p.
"""

import math

from gaussmax import PRESETS, capstone_auto, materialize, packing_report
from gaussmax.montecarlo import DeltaSchedule, estimate_concentration

power = PRESETS["powerlaw-g1"]   # rho(k) = (1 + k)^-1
logd = PRESETS["logdecay-nu1"]   # rho(k) = (1 + log(1 + k))^-1

# Packing numbers at a fixed tau. A slowly decaying covariance has a large
# N(tau), and the greedy packing keeps about p / N(tau) nearly orthogonal points.
for name, model in (("powerlaw", power), ("logdecay", logd)):
    rep = packing_report(model, 2000, 0.2)
    print(f"{name}: N(0.2) = {rep.n_tau}, alpha = {rep.alpha:.3f}, packing size {len(rep.gamma_set)}")

# The greedy set really is tau-separated.
a = materialize(power, 2000).entries
g = packing_report(power, 2000, 0.2).gamma_set
print("largest covariance inside the packing:", max(a[i, j] for i in g[:50] for j in g[:50] if i != j))

# Rate bound at the optimal tau(p). Power law: tau = 1/log p, bound ~ log log p / log p.
# Log decay: tau = (nu log p)^(-nu/(nu+1)), bound ~ (log p)^(-1/2) for nu = 1.
print(f"{'p':>6} {'powerlaw':>9} {'x logp/loglogp':>15} {'logdecay':>9} {'x sqrt(logp)':>13}")
for k in (10, 16, 24, 32, 48):
    p = 2**k
    lp = math.log(p)
    bp, bl = capstone_auto(power, p).total, capstone_auto(logd, p).total
    print(f"{'2^%d' % k:>6} {bp:9.4f} {bp * lp / math.log(lp):15.3f} {bl:9.4f} {bl * math.sqrt(lp):13.3f}")

# The bound is an upper bound on the rate, and a generous one at desk scale:
# the simulated mean deviation sits far below it.
for name, model in (("powerlaw", power), ("logdecay", logd)):
    est = estimate_concentration(model, None, [2**10, 2**14], DeltaSchedule("capstone_auto", 1.0), reps=300, seed=3)
    for e in est:
        print(f"{name} p=2^{round(math.log2(e.p))}: bound {e.delta_p:.3f}, "
              f"E|M/u_p - 1| = {e.mean_abs_dev:.4f}, P(beyond bound) = {e.prob:.3f}")
