import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import mp_isf
from gaussmax.covariance import PRESETS, CovarianceModel, materialize
from gaussmax.errors import DomainError, InadmissibleError
from gaussmax.normal_toolkit import constants_for
from gaussmax.packing import n_tau
from gaussmax.rates import (
    TransformKind,
    TransformSpec,
    capstone_auto,
    capstone_bound,
    exp_power_nu_threshold,
    g_beta,
    logdecay_optimal_tau,
    lognormal_urs_check,
    optimize_tau_logdecay,
    optimize_tau_powerlaw,
    powerlaw_n_tau_cap,
    transform_rate,
    transform_rate_closed_form,
    transform_rate_from_u,
)

ALL_SPECS = [
    TransformSpec(),
    TransformSpec("exp"),
    TransformSpec("square"),
    TransformSpec("abspower", 0.5),
    TransformSpec("abspower", 3.0),
    TransformSpec("signedpower", 1.5),
    TransformSpec("signedpower", 0.7),
    TransformSpec("expabspower", 0.5),
    TransformSpec("expabspower", 1.5),
    TransformSpec("expsignedpower", 1.0),
]


class TestCapstone:
    def test_sum(self):
        b = capstone_bound(1000, 0.25, 3)
        assert b.total == pytest.approx(0.1590 + 0.25 + 0.1448, abs=2e-4)
        assert b.total == b.term_alpha + b.term_tau + b.term_log

    def test_iid_is_one_over_log_p(self):
        assert capstone_bound(10**6, 0.0, 1).total == 1.0 / math.log(10**6)
        assert capstone_auto(CovarianceModel.iid(), 4096).total == 1.0 / math.log(4096)

    @given(st.integers(3, 10**12), st.floats(0.0, 0.99), st.integers(1, 10**6))
    def test_monotone(self, p, tau, n):
        b = capstone_bound(p, tau, n).total
        assert capstone_bound(p, min(tau + 0.005, 0.999), n).total > b
        assert capstone_bound(p, tau, n + 1).total > b
        assert capstone_bound(p + 1, tau, n).total < b

    def test_domain(self):
        for args in ((2, 0.1, 1), (100, 1.0, 1), (100, -0.1, 1), (100, 0.1, 0)):
            with pytest.raises(DomainError):
                capstone_bound(*args)


class TestPowerLaw:
    def test_tau_and_band(self):
        for k in range(10, 21):
            p = 2**k
            b = optimize_tau_powerlaw(p, 1.0)
            assert b.tau_p == 1.0 / math.log(p)
            assert 0.5 <= b.total * math.log(p) / math.log(math.log(p)) <= 5

    def test_count_matches_brute_force(self):
        p = 4096
        b = optimize_tau_powerlaw(p, 2.0)
        assert b.n_tau == n_tau(materialize(CovarianceModel.power_law(2.0), p), b.tau_p)
        assert b.n_tau <= powerlaw_n_tau_cap(b.tau_p, 2.0)

    def test_large_p_below_analytic_cap(self):
        p = 2**40
        b = optimize_tau_powerlaw(p, 1.0)
        assert b.n_tau <= powerlaw_n_tau_cap(b.tau_p, 1.0)

    def test_large_gamma(self):
        p = 2**16
        b = optimize_tau_powerlaw(p, 200.0)
        assert b.n_tau == 1
        assert b.total == pytest.approx(b.tau_p + 1 / math.log(p))


class TestLogDecay:
    def test_analytic_tau(self):
        assert logdecay_optimal_tau(100.0, 1.0) == pytest.approx(0.1, rel=1e-15)

    def test_band(self):
        vals = []
        for k in range(10, 21):
            p = 2**k
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                b = optimize_tau_logdecay(p, 1.0)
            assert b.guard_ok
            vals.append(b.total * math.sqrt(math.log(p)))
        assert max(vals) / min(vals) <= 1.5

    def test_exponent_approaches_one(self):
        exps = [nu / (nu + 1) for nu in (1, 4, 16, 64, 256)]
        assert all(b > a for a, b in zip(exps, exps[1:]))
        assert 1 - exps[-1] < 0.004

    def test_guard_failure_warns(self):
        with pytest.warns(RuntimeWarning, match="guard"):
            b = optimize_tau_logdecay(2**10, 1.0, c_tilde=1e6)
        assert not b.guard_ok

    def test_auto_dispatch(self):
        assert capstone_auto(PRESETS["logdecay-nu1"], 4096) == optimize_tau_logdecay(4096, 1.0)
        perm = CovarianceModel.permuted(CovarianceModel.power_law(1.0), range(100)[::-1])
        assert capstone_auto(perm, 100).total == optimize_tau_powerlaw(100, 1.0).total
        with pytest.raises(DomainError):
            capstone_auto(CovarianceModel.explicit(np.eye(3)), 3)


class TestTransformRate:
    def test_square(self):
        assert transform_rate(TransformSpec("square"), 1000, 0.01) == pytest.approx(0.0202, rel=1e-12)

    def test_exp(self):
        u = constants_for(100).u_p
        got = transform_rate(TransformSpec("exp"), 100, 0.05)
        assert got == pytest.approx(u * 0.05 * math.exp(u * 0.05), rel=1e-13)
        assert got == pytest.approx(0.1307, abs=5e-5)

    def test_identity(self):
        assert transform_rate(TransformSpec(), 1000, 0.123) == pytest.approx(0.123, rel=1e-15)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.name)
    @pytest.mark.parametrize("p", [100, 2**12, 2**20])
    @pytest.mark.parametrize("delta", [1e-4, 1e-2, 0.05])
    def test_closed_form_matches_literal_rule(self, spec, p, delta):
        try:
            lit = transform_rate(spec, p, delta)
        except InadmissibleError:
            with pytest.raises(InadmissibleError):
                transform_rate_closed_form(spec, p, delta)
            return
        assert transform_rate_closed_form(spec, p, delta) == pytest.approx(lit, rel=1e-10)

    def test_literal_rule_against_mpmath(self):
        spec = TransformSpec("expabspower", 1.5)
        p, d = 2**12, 0.02
        u = mp.mpf(constants_for(p).u_p)
        fp = lambda x: mp.mpf(1.5) * x**0.5 * mp.exp(x**1.5)
        want = u * d * max(fp(u * (1 - d)), fp(u * (1 + d))) / mp.exp(u**1.5)
        assert transform_rate(spec, p, d) == pytest.approx(float(want), rel=1e-12)

    def test_square_over_identity_tends_to_two(self):
        ratios = [transform_rate(TransformSpec("square"), 1000, d) / d for d in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert all(abs(b - 2) < abs(a - 2) for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(2.0, rel=1e-2)

    def test_exp_over_u_delta_tends_to_one(self):
        p = 2**16
        u = constants_for(p).u_p
        r = transform_rate(TransformSpec("exp"), p, 1e-4) / (u * 1e-4)
        assert r == pytest.approx(1.0, rel=1e-2)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 1.5])
    def test_exp_power_bounded_at_desk_scale(self, lam):
        spec = TransformSpec("expabspower", lam)
        for k in (12, 16, 20):
            p = 2**k
            d = 1 / math.log(p)
            ratio = transform_rate(spec, p, d) / (lam * d * (2 * math.log(p)) ** (lam / 2))
            assert 0.5 < ratio < 5

    @pytest.mark.parametrize("lam", [0.5, 1.0, 1.5])
    def test_exp_power_ratio_converges(self, lam):
        spec = TransformSpec("expabspower", lam)
        ratios = []
        for log_p in (1e2, 1e4, 1e8, 1e12):
            u = float(mp_isf(mp.exp(-mp.mpf(log_p))))
            d = 1 / log_p
            ratios.append(transform_rate_from_u(spec, u, d) / (lam * d * (2 * log_p) ** (lam / 2)))
        assert all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(1.0, rel=3e-3)

    def test_guards(self):
        with pytest.raises(InadmissibleError, match="guard"):
            transform_rate(TransformSpec("exp"), 2**20, 0.5)
        with pytest.raises(InadmissibleError):
            TransformSpec("expabspower", 2.0)
        with pytest.raises(InadmissibleError):
            TransformSpec("abspower")
        with pytest.raises(InadmissibleError):
            TransformSpec("square", 2.0)
        with pytest.raises(DomainError):
            transform_rate(TransformSpec("abspower", 2.0), 5, 0.1)
        with pytest.raises(DomainError):
            transform_rate(TransformSpec(), 100, 1.0)

    def test_names(self):
        assert TransformSpec("abspower", 1.5).name == "abspower1.5"
        assert TransformSpec().kind is TransformKind.IDENTITY


class TestLognormal:
    def test_threshold(self):
        assert lognormal_urs_check(0.5).urs
        assert not lognormal_urs_check(1 / 3).urs
        assert not lognormal_urs_check(0.2).urs
        assert lognormal_urs_check(0.5, c=1.0).gaussian_c == pytest.approx(1 / math.e)
        assert exp_power_nu_threshold(1.0) == pytest.approx(1 / 3)

    def test_domain(self):
        with pytest.raises(DomainError):
            lognormal_urs_check(0.0)


class TestGBeta:
    def test_values(self):
        assert g_beta(0.75) == 2.25
        assert g_beta(1 - 1e-12) == pytest.approx(1.0, abs=1e-5)
        assert g_beta(1e-12) == pytest.approx(4.0, abs=1e-5)

    def test_strictly_decreasing(self):
        vals = [g_beta(b) for b in np.linspace(0.01, 0.99, 99)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            g_beta(bad)
