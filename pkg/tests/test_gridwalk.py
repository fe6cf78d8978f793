from __future__ import annotations

import numpy as np
import pytest

from ratiolab.errors import GroupMismatch, PreconditionError, TruncationError
from ratiolab.groups import GridAffine, IntegerLattice
from ratiolab.gridwalk import GridFunction, GridTrajectory, apply_P_grid, grid_law, product_bump
from ratiolab.measures import WeightedSupport

SPACE = GridAffine(K=6, du=1.0, h=1 / 16, B=2.0)
LAW = grid_law(SPACE, {(-1.0, 0.0): 0.1, (0.0, 0.0): 0.5, (1.0, 0.0): 0.4})


def test_constant_is_harmonic_in_the_interior():
    ones = GridFunction(SPACE, np.ones(SPACE.shape))
    out, absorbed = apply_P_grid(ones, LAW)
    assert np.allclose(out.values[1:-1, :], 1.0, atol=1e-14)
    assert np.allclose(out.values + absorbed, 1.0, atol=1e-14)


def test_lattice_step_is_a_pure_shift():
    g = GridFunction.from_callable(SPACE, product_bump(1.5, 0.5))
    law = grid_law(SPACE, {(1.0, 0.0): 1.0})
    out, _ = apply_P_grid(g, law)
    assert np.array_equal(out.values[:-1], g.values[1:])


def test_b_step_scales_with_a():
    g = GridFunction.from_callable(SPACE, lambda U, Bm: Bm + 0 * U)
    law = grid_law(SPACE, {(0.0, 1 / 16): 1.0})
    out, _ = apply_P_grid(g, law)
    U, Bm = SPACE.mesh()
    expect = Bm + 2.0**U / 16
    inside = np.abs(expect) <= SPACE.B
    assert np.allclose(out.values[inside], expect[inside], atol=1e-12)


def test_right_haar_is_preserved_away_from_edges():
    g = GridFunction.from_callable(SPACE, product_bump(1.5, 0.5))
    out, _ = apply_P_grid(g, LAW)
    # right translates keep their right-Haar integral, so pi(P f) = pi(f) v(G)
    assert out.integral() == pytest.approx(g.integral(), rel=1e-12)


def test_truncation_guard():
    g = GridFunction(SPACE, np.ones(SPACE.shape))
    with pytest.raises(TruncationError):
        apply_P_grid(g, LAW, max_absorbed=0.05)


def test_trajectory_and_truncation_report():
    g = GridFunction.from_callable(SPACE, product_bump(1.5, 0.5))
    tr = GridTrajectory(g, LAW, 8, [(0.0, 0.0), (1.0, 0.0)])
    assert tr.log_values.shape == (9, 2)
    assert np.all(tr.truncation >= 0) and tr.truncation[0, 0] == 0.0
    r = tr.ratio(1, 0)
    assert r[0] == pytest.approx(g.at((1.0, 0.0)) / g.at((0.0, 0.0)))


def test_validation():
    with pytest.raises(PreconditionError):
        grid_law(SPACE, {(0.0, 0.0): 0.5})
    with pytest.raises(ValueError):
        GridFunction(SPACE, np.ones((2, 2)))
    with pytest.raises(GroupMismatch):
        apply_P_grid(GridFunction(SPACE, np.ones(SPACE.shape)), WeightedSupport.delta(IntegerLattice(1), (0,)))
