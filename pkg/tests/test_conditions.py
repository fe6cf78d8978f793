from __future__ import annotations

import pytest

from ratiolab.conditions import check_condition_A, check_small_domination
from ratiolab.errors import PreconditionError
from ratiolab.groups import IntegerLattice
from ratiolab.measures import WeightedSupport

Z = IntegerLattice(1)
BIASED = WeightedSupport.measure(Z, {(-1,): 0.2, (0,): 0.2, (1,): 0.6})


@pytest.mark.parametrize(
    "points, j, gamma",
    [([(-1,), (0,), (1,)], 1, 0.2), ([(5,)], 5, 0.6**5), ([(2,)], 2, 0.36), ([(-2,), (3,)], 3, 0.2**2 * 0.2 * 3)],
)
def test_condition_A(points, j, gamma):
    w = check_condition_A(BIASED, WeightedSupport.indicator(Z, points))
    assert w.found and w.j == j
    assert w.gamma == pytest.approx(gamma, rel=1e-12)
    assert w.margin >= 0.0


def test_condition_A_not_found_within_budget():
    w = check_condition_A(BIASED, WeightedSupport.indicator(Z, [(9,)]), j_max=5)
    assert not w.found and w.j is None


@pytest.mark.parametrize("form, a", [("function", 25.0), ("measure", 1 / 0.36)])
def test_small_domination(form, a):
    w = check_small_domination(WeightedSupport.indicator(Z, [(2,)]), WeightedSupport.indicator(Z, [(0,)]), BIASED, form=form)
    assert w.found and w.m == 2
    assert w.a == pytest.approx(a, rel=1e-12)
    assert w.margin >= 0.0
    assert w.to_dict()["form"] == form


def test_small_domination_zero_f():
    w = check_small_domination(WeightedSupport.function(Z, {}), WeightedSupport.indicator(Z, [(0,)]), BIASED)
    assert (w.m, w.a) == (1, 0.0)


def test_inputs_must_be_nonnegative():
    with pytest.raises(PreconditionError):
        check_condition_A(BIASED, WeightedSupport.function(Z, {(0,): -1.0}))
    with pytest.raises(ValueError):
        check_small_domination(WeightedSupport.indicator(Z, [(0,)]), WeightedSupport.indicator(Z, [(0,)]), BIASED, form="dual")
