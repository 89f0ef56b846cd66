"""
Maxima of transformed Gaussian arrays
=====================================

If eta = f(eps) for a smooth increasing (or even) f, the maximum of eta
concentrates around f(u_p) at a rate d*_p inherited from the Gaussian rate
delta_p. Squares double it; exponentials multiply it by u_p; exponential
powers e^{|x|^lambda} multiply it by about lambda (2 log p)^{lambda/2}.
"""

import math

import numpy as np

from gaussmax import CovarianceModel, TransformSpec, constants_for, transform_rate
from gaussmax.montecarlo import DeltaSchedule, estimate_concentration
from gaussmax.rates import exp_power_nu_threshold, lognormal_urs_check
from gaussmax.sampler import apply_transform, prepare, sample_row

p = 2**16
u = constants_for(p).u_p
delta = 1 / math.log(p)

# Induced rates at the Gaussian rate 1/log p.
for spec in (TransformSpec(), TransformSpec("square"), TransformSpec("abspower", 3.0), TransformSpec("exp"),
             TransformSpec("expabspower", 0.5), TransformSpec("expabspower", 1.5)):
    print(f"{spec.name:>16}: d* = {transform_rate(spec, p, delta):.4f}")

# As delta -> 0 the square rate tends to exactly 2 delta, the exp rate to u_p delta.
for d in (1e-1, 1e-2, 1e-3, 1e-4):
    sq = transform_rate(TransformSpec("square"), p, d) / d
    ex = transform_rate(TransformSpec("exp"), p, d) / (u * d)
    print(f"delta={d:g}: square/identity {sq:.5f}, exp/(u_p delta) {ex:.5f}")

# The max of f(x) never needs the whole transformed row: it is f(max x) for
# increasing f and max(f(max x), f(min x)) for even f.
x = sample_row(prepare(CovarianceModel.iid(), 1000, seed=5), 0)
for spec in (TransformSpec("exp"), TransformSpec("square")):
    direct = apply_transform(x, spec).max()
    print(f"{spec.name}: max f(x) = {direct:.6f}, from extremes = {max(spec.f(x.max()), spec.f(x.min())):.6f}")

# Simulated deviations of the transformed maximum, normalized by f(u_p).
for spec in (TransformSpec(), TransformSpec("square"), TransformSpec("exp")):
    (e,) = estimate_concentration(CovarianceModel.iid(), spec, [p], DeltaSchedule("c_over_logp", 1.0),
                                  norm_kind="f_of_up", reps=2000, seed=6)
    print(f"{spec.name:>8}: E|max f / f(u_p) - 1| = {e.mean_abs_dev:.4f}")

# Log-normal arrays e^eps inherit uniform relative stability from the Gaussian
# array when the covariance decays faster than (log lag)^-nu with nu > 1/3.
print("nu threshold for e^x:", exp_power_nu_threshold(1.0))
for nu in np.array([0.2, 1 / 3, 0.5, 1.0]):
    print(f"nu = {nu:.3f}: relatively stable -> {lognormal_urs_check(float(nu)).urs}")
