"""
Three ways to normalize a Gaussian maximum
==========================================

The maximum of p standard normals grows like sqrt(2 log p), but that is only
the first-order story. This script tabulates the three normalizers used in
the package and shows how slowly the crude one catches up.
"""

import numpy as np

from gaussmax import constants_for, up_gap

# u_p is the (1 - 1/p)-quantile, u_star the classical Gumbel centering with
# its log log correction, and sqrt(2 log p) the leading term of both.
print(f"{'p':>8} {'u_p':>8} {'u_star':>8} {'sqrt2logp':>10} {'u_p/sqrt':>9} {'gap':>9}")
for k in range(1, 19, 2):
    c = constants_for(10**k)
    print(f"{'1e%d' % k:>8} {c.u_p:8.4f} {c.u_star:8.4f} {c.sqrt_2_log_p:10.4f} "
          f"{c.u_p / c.sqrt_2_log_p:9.4f} {up_gap(10**k):9.5f}")

# The ratio u_p / sqrt(2 log p) is still below 0.9 at p = 1e4: a normalizer
# that is off by 10% is useless when the fluctuations being measured are of
# order 1/log p, which is about 0.1 at that size.
#
# The gap sqrt(2 log p) (u_p - u_star), by contrast, shrinks steadily, so
# u_star and u_p are interchangeable at the 1/log p scale.

# delta_opt = 1/u_p^2 is the best possible concentration rate with u_p as
# both centering and scale; it is of order 1/(2 log p).
ps = np.array([10**k for k in (2, 4, 8, 16)])
for p in ps:
    c = constants_for(int(p))
    print(f"p=1e{int(np.log10(p))}: delta_opt = {c.delta_opt:.4f}, 1/(2 log p) = {1 / (2 * np.log(p)):.4f}")
