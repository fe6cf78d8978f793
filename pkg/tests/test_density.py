from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratiolab.density import density_of_set, density_profile, exceptional_density, incremental_density


def test_squares_and_evens():
    assert density_of_set([k * k for k in range(1, 101)], 10_000)[-1] == 0.01
    assert density_of_set(range(2, 10_001, 2), 10_000)[-1] == pytest.approx(0.5, abs=1e-3)
    assert density_of_set([0, -3, 20], 10).tolist() == [0.0] * 10


def test_constant_series_has_empty_exceptional_set():
    flags, dens = exceptional_density(np.full(100, 3.0), 3.0, 1e-9)
    assert not flags.any() and dens[-1] == 0.0


def test_relative_and_absolute_thresholds_differ():
    vals = np.array([10.5, 10.05, 10.0])
    rel, _ = exceptional_density(vals, 10.0, 0.01)
    ab, _ = exceptional_density(vals, 10.0, 0.01, relative=False)
    assert rel.tolist() == [True, False, False]
    assert ab.tolist() == [True, True, False]


def test_nan_counts_as_exceptional():
    flags, dens = exceptional_density([1.0, np.nan], 1.0, 0.1)
    assert flags.tolist() == [False, True] and dens[-1] == 0.5


@given(st.lists(st.booleans(), min_size=1, max_size=300))
def test_incremental_matches_batch(flags):
    assert np.allclose(incremental_density(flags), density_profile(flags), rtol=0, atol=1e-15)


@given(st.lists(st.booleans(), min_size=1, max_size=300))
def test_counts_are_monotone(flags):
    q = density_profile(flags) * np.arange(1, len(flags) + 1)
    assert np.all(np.diff(np.rint(q)) >= 0)
