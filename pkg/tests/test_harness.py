from __future__ import annotations

import math

import numpy as np
import pytest

from ratiolab.errors import PreconditionError
from ratiolab.groups import FreeGroup, IntegerLattice
from ratiolab.harness import (
    RatioSeries,
    ratio_integrated,
    ratio_pointwise,
    ratio_shift,
    ratio_translation,
    ratio_twisted,
)
from ratiolab.measures import WeightedSupport, lazy_srw_free
from ratiolab.spectral import fit_exponential, twist

Z = IntegerLattice(1)
BIASED = WeightedSupport.measure(Z, {(-1,): 0.2, (0,): 0.2, (1,): 0.6})
R_BIASED = 1.0 / (0.2 + 2.0 * math.sqrt(0.12))
ONE0 = WeightedSupport.indicator(Z, [(0,)])


def test_ratio_series_bookkeeping():
    vals = np.array([2.0, 1.5, 1.01, 0.995, 1.0, np.nan])
    s = RatioSeries("t", "demo", np.arange(1, 7), vals, 1.0, "L", eps=0.02, tol=0.02, n_from=3)
    assert s.exceptional.tolist() == [True, True, False, False, False, True]
    assert s.final_density == pytest.approx(0.5)
    assert s.verdict() is False
    s.n_from, s.values = 3, vals[:5]
    s2 = RatioSeries("t", "demo", np.arange(1, 6), vals[:5], 1.0, "L", tol=0.02, n_from=3)
    assert s2.verdict() is True and s2.max_error() == pytest.approx(0.01)
    summ = s2.summary()
    assert summ["target"]["provenance"] == "L"
    rows = list(s2.rows())
    assert len(rows) == 5


def test_identity_ratio_is_exactly_one():
    g = WeightedSupport.function(Z, {(0,): 1.0, (2,): 0.5})
    s = ratio_pointwise(g, g, (3,), (3,), BIASED, 300)
    assert np.all(s.values == 1.0) and s.target == pytest.approx(1.0)


def test_pointwise_converges_to_phi_ratio():
    s = ratio_pointwise(ONE0, ONE0, (1,), (0,), BIASED, 1500, tol=2e-3, n_from=500)
    assert s.target == pytest.approx(math.sqrt(1 / 3), rel=1e-9)
    assert s.verdict()


def test_scaling_is_exact():
    f = WeightedSupport.function(Z, {(0,): 1.0, (1,): 2.0})
    fit = fit_exponential(BIASED)
    base = ratio_pointwise(f, ONE0, (0,), (1,), BIASED, 200, phi=fit.phi)
    sc = ratio_pointwise(f.scaled(4.0), ONE0, (0,), (1,), BIASED, 200, phi=fit.phi)
    assert np.allclose(sc.values, 4.0 * base.values, rtol=1e-13, atol=0)
    assert sc.target == pytest.approx(4.0 * base.target, rel=1e-13)


def test_nu_g_zero_raises():
    g = WeightedSupport.function(Z, {(0,): 1.0, (1,): -1 / math.sqrt(3)})
    with pytest.raises(PreconditionError):
        ratio_pointwise(ONE0, g, (0,), (0,), BIASED, 10)


@pytest.mark.parametrize("m, target", [(1, 1 / R_BIASED), (2, R_BIASED**-2)])
def test_shift_series(m, target):
    s = ratio_shift(ONE0, (0,), m, BIASED, 1500, tol=2e-3 * m, n_from=500)
    assert s.target == pytest.approx(target, rel=1e-12)
    assert s.verdict()
    with pytest.raises(PreconditionError):
        ratio_shift(ONE0, (0,), 0, BIASED, 10)


def test_free_group_shift_uses_laplace_bound_by_default():
    # dense supports grow like 3^n on F2, so only a short run is affordable
    s = ratio_shift(WeightedSupport.indicator(FreeGroup(2), [()]), (), 1, lazy_srw_free(FreeGroup(2), 0.5), 6)
    assert s.target == pytest.approx(1.0)
    assert s.values[0] == pytest.approx(0.3125 / 0.5)


def test_integrated_targets():
    kappa = WeightedSupport.measure(Z, {(0,): 0.5, (1,): 0.5})
    mu = WeightedSupport.delta(Z, (0,))
    res = ratio_integrated(kappa, mu, ONE0, ONE0, 1, BIASED, 1500, tol=2e-3, n_from=500)
    assert res.ratio.target == pytest.approx(0.7886751, abs=1e-7)
    assert res.shifted.target == pytest.approx(0.7886751 / R_BIASED, abs=1e-7)
    assert res.shifted.target == pytest.approx(0.7041452, abs=1e-7)
    assert res.ratio.verdict() and res.shifted.verdict() and res.lower_ok


def test_integrated_rejects_non_probability():
    half = WeightedSupport.measure(Z, {(0,): 0.5})
    with pytest.raises(PreconditionError):
        ratio_integrated(half, half, ONE0, ONE0, 1, BIASED, 10)


def test_twisted_ratio_target():
    fit = fit_exponential(BIASED)
    vt = twist(BIASED, fit.R, fit.phi)
    s = ratio_twisted(ONE0.scaled(2.0), ONE0, (0,), (0,), vt, 100)
    assert s.target == 2.0
    assert np.allclose(s.values, 2.0, rtol=1e-14)
    s2 = ratio_twisted(WeightedSupport.indicator(Z, [(0,), (1,)]), ONE0, (0,), (0,), vt, 1500, tol=5e-3, n_from=500)
    assert s2.target == 2.0 and s2.verdict()


def test_translation_is_exact_and_targets_agree():
    fit = fit_exponential(BIASED)
    g = WeightedSupport.function(Z, {(0,): 1.0, (2,): 0.5})
    tc = ratio_translation(g, (0,), (3,), BIASED, 60, phi=fit.phi)
    assert tc.exact
    assert tc.nu_ratio == pytest.approx(tc.phi_z, rel=1e-12)
    assert tc.target_pointwise == pytest.approx(tc.target_translated, rel=1e-12)
