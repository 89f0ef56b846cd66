"""
How fast does max / u_p settle at 1?
====================================

For p independent standard normals, M_p / u_p - 1 shrinks like 1/log p.
Normalizing by sqrt(2 log p) instead costs a factor log log p. Both claims
are checked here by simulation, using exact draws of the iid maximum so
that p can go to 2^20 at no cost.
"""

import math

from gaussmax import CovarianceModel
from gaussmax.montecarlo import DeltaSchedule, empirical_rate_fit, estimate_concentration, gumbel_check

iid = CovarianceModel.iid()
grid = [2**k for k in range(10, 21, 2)]
schedule = DeltaSchedule("c_over_logp", 1.0)

runs = {
    norm: estimate_concentration(iid, None, grid, schedule, norm_kind=norm, reps=2000, seed=1)
    for norm in ("u_p", "sqrt2logp")
}

# mean |M/norm - 1| times log p: flat for u_p, growing like log log p otherwise.
print(f"{'p':>8} {'u_p':>10} {'sqrt2logp':>10} {'loglog p':>9}")
for a, b in zip(runs["u_p"], runs["sqrt2logp"]):
    lp = math.log(a.p)
    print(f"{'2^%d' % round(math.log2(a.p)):>8} {a.mean_abs_dev * lp:10.4f} {b.mean_abs_dev * lp:10.4f} {math.log(lp):9.4f}")

# At these sizes the fit cannot tell the two rates apart for sqrt(2 log p):
# its bias is about (log log p + log 4 pi) / (4 log p), and log 4 pi = 2.53
# still outweighs log log p. The penalty shows as a level about 1.7 times higher.
for norm, est in runs.items():
    fit = empirical_rate_fit(est)
    print(f"{norm:>10}: best fit {fit.best!r}, band(log p) {fit.band_logp:.2f}, band(loglog) {fit.band_loglog:.2f}")

# Probability of missing the band 1 +/- 1/log p, split into its two tails.
# The upper tail dominates: the maximum overshoots more often than it falls short.
for e in runs["u_p"]:
    print(f"p=2^{round(math.log2(e.p))}: P(miss) = {e.prob:.3f} +/- {e.half_width:.3f}  "
          f"(above {e.count_above}, below {e.count_below})")

# The fluctuations are Gumbel on the scale 1/u_p; the KS distance to the
# limit law falls slowly, again at a 1/log p pace.
for k in (6, 10, 16):
    g = gumbel_check(2**k, reps=5000, seed=2)
    print(f"KS to Gumbel at p=2^{k}: {g.ks:.4f} (1% critical value {g.critical_1pct:.4f})")
