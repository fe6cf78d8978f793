"""Acceptance gate: each criterion at its stated tolerance.

A one-line verdict per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from ratiolab.conditions import check_condition_A, check_small_domination
from ratiolab.density import density_of_set
from ratiolab.experiments import load_config
from ratiolab.groups import FreeGroup, IntegerLattice
from ratiolab.gridwalk import product_bump
from ratiolab.harness import (
    modular_ratio,
    ratio_integrated,
    ratio_pointwise,
    ratio_shift,
    ratio_translation,
)
from ratiolab.measures import (
    LogTrajectory,
    WeightedSupport,
    convolution_power,
    lazy_srw_free,
    radial_return_probabilities,
)
from ratiolab.spectral import (
    estimate_R_logfit,
    fit_exponential,
    nu_invariance_residual,
    twist,
    verify_similarity,
)

Z = IntegerLattice(1)
Q, S, P = 0.2, 0.2, 0.6
R_CLOSED = 1.0 / (S + 2.0 * math.sqrt(P * Q))


@pytest.fixture(scope="module")
def walk():
    return WeightedSupport.measure(Z, {(-1,): Q, (0,): S, (1,): P})


@pytest.fixture(scope="module")
def one0():
    return WeightedSupport.indicator(Z, [(0,)])


def _return_logs(v, n):
    e = v.group.identity
    return LogTrajectory(WeightedSupport.indicator(v.group, [e]), v, n, [e]).point(0)[1]


def test_criterion_1_spectral_z(walk, criterion):
    t0 = time.perf_counter()
    logfit = estimate_R_logfit(_return_logs(walk, 2000), (200, 2000), log=True)
    fit = fit_exponential(walk)
    elapsed = time.perf_counter() - t0
    parts = [
        criterion(1, "log-fit R", abs(logfit.R - 1.120046) <= 1e-3, f"{logfit.R:.7f}"),
        criterion(1, "t*", abs(fit.phi.params[0] - (-0.549306)) <= 1e-6, f"{fit.phi.params[0]:.9f}"),
        # 0.892820 is printed to six places; the 1e-9 comparison is against s + 2 sqrt(pq)
        criterion(1, "1/R", abs(fit.laplace_value - 1.0 / R_CLOSED) <= 1e-9, f"{fit.laplace_value:.12f}"),
        criterion(1, "runtime", elapsed < 10.0, f"{elapsed:.2f}s"),
    ]
    assert all(parts)


def test_criterion_2_pointwise_series(walk, one0, criterion):
    s = ratio_pointwise(one0, one0, (1,), (0,), walk, 2000, tol=1e-3, n_from=500)
    assert abs(s.target - 0.5773503) <= 1e-7
    ok = criterion(2, "series n>=500", s.verdict(), f"max err {s.max_error():.2e}")
    assert ok


def test_criterion_2_exceptional_density(walk, one0, criterion):
    s = ratio_pointwise(one0, one0, (1,), (0,), walk, 2000, eps=1e-2)
    d = s.final_density
    ok = criterion(2, "density d_2000 <= 0.01", d <= 0.01, f"{d:.4f} ({int(s.exceptional.sum())} exceptional n, eps 1e-2 relative)")
    assert ok, f"d_2000 = {d} exceeds 0.01"


def test_criterion_3_shift(walk, one0, criterion):
    s1 = ratio_shift(one0, (0,), 1, walk, 2000, tol=1e-3, n_from=500)
    s2 = ratio_shift(one0, (0,), 2, walk, 2000, tol=2e-3, n_from=500)
    assert abs(s1.target - 0.8928203) <= 1e-7 and abs(s2.target - 0.7971282) <= 1e-7
    a = criterion(3, "m=1", s1.verdict(), f"max err {s1.max_error():.2e}")
    b = criterion(3, "m=2", s2.verdict(), f"max err {s2.max_error():.2e}")
    assert a and b


def test_criterion_4_integrated(walk, one0, criterion):
    kappa = WeightedSupport.measure(Z, {(0,): 0.5, (1,): 0.5})
    mu = WeightedSupport.delta(Z, (0,))
    res = ratio_integrated(kappa, mu, one0, one0, 1, walk, 2000, tol=1e-3, n_from=500)
    same = ratio_integrated(mu, mu, one0, one0, 1, walk, 2000, tol=1e-3, n_from=500)
    assert abs(res.ratio.target - 0.7886751) <= 1e-7
    assert abs(same.shifted.target - 0.8928203) <= 1e-7
    a = criterion(4, "integrated", res.ratio.verdict() and res.lower_ok, f"max err {res.ratio.max_error():.2e}")
    b = criterion(4, "integrated shift m=1", same.shifted.verdict(), f"max err {same.shifted.max_error():.2e}")
    assert a and b


def test_criterion_5_twisted(walk, one0, criterion):
    fit = fit_exponential(walk)
    vt = twist(walk, fit.R, fit.phi)
    f = WeightedSupport.function(Z, {(-1,): 1.0, (0,): 0.5, (2,): 2.0})
    resid = max(verify_similarity(f, walk, fit.R, fit.phi, n) for n in range(1, 21))
    eq8 = ratio_shift(one0, (0,), 1, vt, 2000, R=1.0, tol=1e-3, n_from=500)
    logfit = estimate_R_logfit(_return_logs(vt, 2000), (200, 2000), log=True)
    parts = [
        criterion(5, "similarity n<=20", resid <= 1e-10, f"{resid:.1e}"),
        criterion(5, "twisted mass", abs(vt.mass() - 1.0) <= 1e-9, f"{vt.mass():.15f}"),
        criterion(5, "shift series -> 1", eq8.verdict(), f"max err {eq8.max_error():.2e}"),
        criterion(5, "twisted log-fit R", abs(logfit.R - 1.0) <= 1e-3, f"{logfit.R:.7f}"),
    ]
    assert all(parts)


def test_criterion_6_exact_identities(walk, criterion):
    fit = fit_exponential(walk)
    f = WeightedSupport.function(Z, {(0,): 1.0, (1,): 2.0})
    g = WeightedSupport.function(Z, {(0,): 1.0, (2,): 0.5})
    tc = ratio_translation(g, (0,), (3,), walk, 100, f=f, phi=fit.phi)
    win = [(k,) for k in range(-30, 31)]
    inv = nu_invariance_residual(fit.phi, walk, fit.R, win)
    ident = ratio_pointwise(g, g, (3,), (3,), walk, 500, phi=fit.phi).values
    c = 3.5
    base = ratio_pointwise(f, g, (0,), (3,), walk, 500, phi=fit.phi)
    scaled = ratio_pointwise(f.scaled(c), g, (0,), (3,), walk, 500, phi=fit.phi)
    scale_gap = float(np.max(np.abs(scaled.values - c * base.values) / (c * base.values)))
    parts = [
        criterion(6, "translation", tc.exact, f"atom gap {tc.max_atom_gap}, point gap {tc.max_point_gap}"),
        criterion(6, "nu(g_z)", tc.nu_residual <= 1e-12, f"{tc.nu_residual:.1e}"),
        criterion(6, "R nuP = nu", inv <= 1e-12, f"{inv:.1e} relative"),
        criterion(6, "identity ratio", bool(np.all(ident == 1.0)), "exact"),
        criterion(
            6,
            "scaling",
            scale_gap <= 1e-12 and abs(scaled.target - c * base.target) <= 1e-12 * c * base.target
            and np.array_equal(scaled.exceptional, base.exceptional),
            f"{scale_gap:.1e}",
        ),
    ]
    assert all(parts)


def test_criterion_7_free_group(criterion):
    F2 = FreeGroup(2)
    v = lazy_srw_free(F2, 0.5)
    radial = radial_return_probabilities(2, 0.5, 8)
    gap = max(abs(convolution_power(v, n).value(()) - radial[n]) for n in range(9))
    t0 = time.perf_counter()
    logs = radial_return_probabilities(2, 0.5, 2000, log=True)
    est = estimate_R_logfit(logs, (200, 2000), log=True)
    elapsed = time.perf_counter() - t0
    lap = fit_exponential(v).laplace_value
    parts = [
        criterion(7, "radial = dense n<=8", gap <= 1e-12, f"{gap:.1e}"),
        criterion(7, "log-fit R", abs(est.R - 1.0717968) <= 5e-3, f"{est.R:.7f}"),
        criterion(7, "runtime", elapsed < 1.0, f"{elapsed:.3f}s"),
        criterion(7, "Laplace min 1 > 1/R", abs(lap - 1.0) <= 1e-9 and lap > 1.0 / est.R, f"{lap:.12f} vs {1 / est.R:.7f}"),
    ]
    assert all(parts)


def test_criterion_8_modular(criterion):
    cfg = load_config("affine-t3")
    space, p = cfg.group, cfg.params
    g = product_bump(p["g"]["wu"], p["g"]["wb"])
    xs = [space.from_ab(a, b) for a, b in p["points_ab"]]
    rep = modular_ratio(space, g, cfg.law, xs, cfg.n_max, window=tuple(p["window"]), tol=5e-2, truncation_bound=1e-3)
    delta = space.modular_quadrature(space.from_ab(2, 0), g)
    a_ok = all(s.verdict() for s in rep.series_a.values())
    b_ok = all(s.verdict() for s in rep.series_b.values())
    worst_a = max(s.max_error() for s in rep.series_a.values())
    worst_b = max(s.max_error() for s in rep.series_b.values())
    trunc = max(s.max_truncation() for s in list(rep.series_a.values()) + list(rep.series_b.values()))
    wx, west = rep.witness
    parts = [
        criterion(8, "Delta(2,0) oracle", abs(delta - 0.5) <= 0.01, f"{delta:.6f}"),
        criterion(8, "series A", a_ok and trunc < 1e-3, f"max err {worst_a:.2e}, truncation {trunc:.1e}"),
        criterion(8, "series B", b_ok, f"max err {worst_b:.2e}"),
        criterion(8, "witness < 1", west < 1.0, f"{west:.4f} at {wx}"),
    ]
    assert all(parts)


def test_criterion_9_density(criterion):
    sq = float(density_of_set([k * k for k in range(1, 101)], 10_000)[-1])
    ev = float(density_of_set(range(2, 10_001, 2), 10_000)[-1])
    a = criterion(9, "squares", sq == 0.01, f"{sq!r}")
    b = criterion(9, "evens", abs(ev - 0.5) <= 1e-3, f"{ev!r}")
    assert a and b


def test_criterion_10_conditions(walk, one0, criterion):
    wa = check_condition_A(walk, WeightedSupport.indicator(Z, [(-1,), (0,), (1,)]))
    wd = check_small_domination(WeightedSupport.indicator(Z, [(2,)]), one0, walk, form="measure")
    a = criterion(10, "condition A", wa.j == 1 and abs(wa.gamma - 0.2) <= 1e-12, f"(j, gamma) = ({wa.j}, {wa.gamma})")
    b = criterion(10, "small domination", wd.m == 2 and abs(wd.a - 2.7778) <= 1e-4, f"(m, a) = ({wd.m}, {wd.a:.6f})")
    assert a and b
