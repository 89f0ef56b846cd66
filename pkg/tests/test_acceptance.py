"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or as part of the full
suite; the verdict lines are written to the terminal either way.
"""

import math

import numpy as np
import pytest
from scipy import stats

from conftest import random_correlation
from gaussmax.cli import run
from gaussmax.covariance import PRESETS, CovarianceModel, acf, materialize
from gaussmax.montecarlo import (
    DeltaSchedule,
    empirical_rate_fit,
    estimate_concentration,
    gumbel_check,
    ks_distance,
    phase_diagram,
)
from gaussmax.normal_toolkit import constants_for, mills_ratio_bounds, up_gap
from gaussmax.packing import greedy_packing, n_tau, n_tau_model
from gaussmax.rates import TransformSpec, transform_rate
from gaussmax.sampler import Method, apply_transform, normalized_max, prepare, sample_row

pytestmark = pytest.mark.acceptance

IID = CovarianceModel.iid()
RATE_GRID = [2**10, 2**12, 2**14, 2**16, 2**18]
TAUS = [0.05, 0.1, 0.25, 0.5, 0.8]


@pytest.fixture
def verdict(capsys):
    """verdict(n, title, ok, detail) prints the line, then asserts ok."""

    def _verdict(n, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {n} failed: {detail}"

    return _verdict


def _brute_n_tau(a, tau):
    # O(p^2) count, one coordinate at a time; the point itself counts.
    p = a.shape[0]
    best = 0
    for i in range(p):
        best = max(best, int(np.count_nonzero(a[:, i] > tau)))
    return best


def test_c01_quantile_identity(verdict):
    worst = 0.0
    for k in range(1, 9):
        p = 10**k
        worst = max(worst, abs(p * stats.norm.sf(constants_for(p).u_p) - 1))
    verdict(1, "p * sf(u_p) = 1 within 1e-9 for p = 1e1..1e8", worst <= 1e-9, f"max |err| = {worst:.2e}")


def test_c02_mills_sandwich(verdict):
    bad = [
        u for u in np.geomspace(0.1, 50.0, 200)
        if not (mills_ratio_bounds(float(u)).lower <= mills_ratio_bounds(float(u)).ratio <= 1.0)
    ]
    verdict(2, "Mills ratio sandwich on 200 points of [0.1, 50]", not bad, f"{len(bad)} violations")


def test_c03_up_vs_ustar(verdict):
    gaps = [abs(up_gap(10**k)) for k in range(3, 9)]
    ok = gaps[-1] < gaps[0] and all(b < a for a, b in zip(gaps, gaps[1:]))
    verdict(3, "sqrt(2 log p)|u_p - u_star| decreasing over 1e3..1e8", ok, f"{gaps[0]:.4f} -> {gaps[-1]:.4f}")


def test_c04_packing_oracle(verdict):
    rng = np.random.default_rng(404)
    mismatches = 0
    for _ in range(50):
        p = int(rng.integers(5, 200))
        a = random_correlation(rng, p, rank=int(rng.integers(1, p + 1)))
        for tau in TAUS:
            mismatches += n_tau(a, tau) != _brute_n_tau(a, tau)
    for name, model in PRESETS.items():
        a = materialize(model, 2000).entries
        for tau in TAUS:
            want = _brute_n_tau(a, tau)
            mismatches += n_tau(a, tau) != want
            mismatches += n_tau_model(model, tau, 2000) != want
    verdict(4, "n_tau equals brute force on 50 random matrices and all presets", mismatches == 0,
            f"{mismatches} mismatches")


def test_c05_packing_guarantee(verdict):
    failures = []
    p = 2000
    for name, model in PRESETS.items():
        a = materialize(model, p).entries
        for tau in TAUS:
            g = greedy_packing(a, tau)
            sub = a[np.ix_(g, g)]
            viol = int(np.count_nonzero(sub[~np.eye(len(g), dtype=bool)] > tau))
            if viol or len(g) < math.ceil(p / n_tau(a, tau)):
                failures.append((name, tau, viol, len(g)))
    verdict(5, "greedy packing: no violations and |Gamma| >= ceil(p / N)", not failures, f"failures: {failures}")


def _rate_run(norm):
    return estimate_concentration(IID, None, RATE_GRID, DeltaSchedule("c_over_logp", 1.0), norm, reps=2000, seed=6)


def test_c06_iid_rate_band(verdict):
    fit = empirical_rate_fit(_rate_run("u_p"))
    verdict(6, "iid, norm u_p: mean_abs_dev * log p band <= 3", fit.band_logp <= 3, f"band {fit.band_logp:.3f}")


def test_c07_sqrt_penalty(verdict):
    base = _rate_run("u_p")
    naive = _rate_run("sqrt2logp")
    fit = empirical_rate_fit(naive)
    worse = all(n.mean_abs_dev > b.mean_abs_dev for n, b in zip(naive, base))
    verdict(7, "norm sqrt(2 log p): log log p band <= 3 and worse than u_p at every p",
            fit.band_loglog <= 3 and worse, f"band {fit.band_loglog:.3f}, worse everywhere: {worse}")


def test_c08_capstone_validity(verdict):
    probs = {}
    for name in ("powerlaw-g1", "logdecay-nu1"):
        est = estimate_concentration(
            PRESETS[name], None, [2**12, 2**16], DeltaSchedule("capstone_auto", 5.0), reps=1000, seed=8
        )
        for e in est:
            probs[(name, e.p)] = e.prob
    worst = max(probs.values())
    verdict(8, "P(|M/u_p - 1| > 5 x capstone bound) <= 0.1", worst <= 0.1, f"max prob {worst:.3f}")


def test_c09_gumbel(verdict):
    small = gumbel_check(2**6, 5000, seed=9)
    big = gumbel_check(2**16, 5000, seed=9)
    rng = np.random.default_rng(99)
    exact = ks_distance(rng.gumbel(size=5000))
    ok = big.ks <= 0.05 and big.ks < small.ks and exact <= 1.63 / math.sqrt(5000)
    verdict(9, "Gumbel KS at 2^16 <= 0.05, below 2^6, and self-test passes", ok,
            f"KS 2^6 {small.ks:.4f}, 2^16 {big.ks:.4f}, exact {exact:.4f}")


def test_c10_phase_transition(verdict):
    betas = [0.3, 0.5, 0.7]
    mults = [0.6, 0.8, 1.0, 1.2, 1.4]
    cells = phase_diagram(2**14, betas, mults, IID, reps=100, seed=10, r_relative=True)
    problems = []
    for i, beta in enumerate(betas):
        freqs = [c.recovery_freq for c in cells[i * len(mults): (i + 1) * len(mults)]]
        if freqs[0] > 0.1 or freqs[-1] < 0.9:
            problems.append((beta, freqs[0], freqs[-1]))
        if any(b < a - 0.1 for a, b in zip(freqs, freqs[1:])):
            problems.append((beta, "not monotone", freqs))
    verdict(10, "recovery <= 0.1 at 0.6 g(beta), >= 0.9 at 1.4 g(beta), monotone in r", not problems,
            f"problems: {problems}")


def test_c11_transform_identities(verdict):
    rng = np.random.default_rng(11)
    monotone = [TransformSpec(), TransformSpec("exp"), TransformSpec("signedpower", 3.0),
                TransformSpec("signedpower", 0.5), TransformSpec("expsignedpower", 1.2)]
    even = [TransformSpec("square"), TransformSpec("abspower", 0.7), TransformSpec("expabspower", 1.5)]
    broken = 0
    for _ in range(10_000):
        x = rng.standard_normal(int(rng.integers(1, 50))) * 3
        for spec in monotone:
            broken += apply_transform(x, spec).max() != spec.f(x.max())
        for spec in even:
            broken += apply_transform(x, spec).max() != max(spec.f(x.max()), spec.f(x.min()))
    d = 1e-4
    chi = transform_rate(TransformSpec("square"), 1000, d) / transform_rate(TransformSpec(), 1000, d)
    p = 2**16
    ex = transform_rate(TransformSpec("exp"), p, d) / (constants_for(p).u_p * d)
    ok = broken == 0 and abs(chi / 2 - 1) <= 0.01 and abs(ex - 1) <= 0.01
    verdict(11, "max/f identities exact; d* ratios square/identity -> 2 and exp/(u delta) -> 1", ok,
            f"{broken} identity failures, square ratio {chi:.5f}, exp ratio {ex:.5f}")


def test_c12_sampler_law(verdict):
    model, p, reps = PRESETS["powerlaw-g1"], 512, 10_000
    s = prepare(model, p, seed=12)
    x = np.stack([sample_row(s, r) for r in range(reps)])
    zs = []
    for k in range(11):
        per_row = (x[:, : p - k] * x[:, k:]).mean(axis=1)
        zs.append(abs(per_row.mean() - acf(model, k)) / (per_row.std(ddof=1) / math.sqrt(reps)))
    del x
    u = constants_for(256).u_p
    fft = prepare(model, 256, seed=13)
    chol = prepare(model, 256, seed=14, method=Method.CHOLESKY)
    a = [normalized_max(sample_row(fft, r), u) for r in range(5000)]
    b = [normalized_max(sample_row(chol, r), u) for r in range(5000)]
    pval = stats.ks_2samp(a, b).pvalue
    ok = max(zs) <= 3 and pval > 1e-3 and fft.method is Method.CIRCULANT_FFT
    verdict(12, "lag covariances within 3 SE; FFT vs Cholesky KS not rejected at 0.1%", ok,
            f"max z {max(zs):.2f}, KS p-value {pval:.3f}")


DETERMINISM_RUNS = [
    ("constants", "--p", "10,100,1000"),
    ("packing", "--model", "powerlaw-g1", "--p", "500", "--tau", "0.2"),
    ("rate-bound", "--model", "logdecay-nu1", "--p", "2^10,2^16"),
    ("concentration", "--model", "powerlaw-g1", "--p", "2^8,2^12", "--reps", "300", "--seed", "13"),
    ("concentration", "--p", "2^10,2^16", "--transform", "square", "--norm", "f_of_up", "--reps", "500", "--seed", "13"),
    ("phase-diagram", "--p", "2^12", "--beta", "0.3,0.7", "--r", "0.8,1.2", "--r-relative", "--reps", "60", "--seed", "13"),
    ("gumbel-check", "--p", "2^8,2^14", "--reps", "2000", "--seed", "13"),
    ("conjecture-probe", "--model", "logdecay-nu1", "--p", "2^8,2^11", "--reps", "200", "--seed", "13"),
]


def test_c13_determinism(verdict, tmp_path, capsys):
    differing = []
    for i, argv in enumerate(DETERMINISM_RUNS):
        texts = []
        for workers in (1, 3):
            out = tmp_path / f"{i}-{workers}"
            code = run([*argv, "--out", str(out), "--workers", str(workers)])
            texts.append((out / f"{argv[0]}.csv").read_bytes() if code == 0 else None)
        if texts[0] is None or texts[0] != texts[1]:
            differing.append(" ".join(argv))
    capsys.readouterr()
    verdict(13, "every command gives byte-identical CSV for 1 and 3 workers", not differing, f"differing: {differing}")
