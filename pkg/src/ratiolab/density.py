"""Exceptional index sets and their counting densities ``q_n(N) / n``."""

from __future__ import annotations

from typing import Iterable

import numpy as np


def density_profile(flags) -> np.ndarray:
    """``d_n = q_n / n`` where ``q_n`` counts flagged indices among ``1..n``.

    ``flags[k]`` refers to index ``n = k + 1``.
    """
    flags = np.asarray(flags, dtype=bool)
    n = np.arange(1, flags.size + 1)
    return np.cumsum(flags) / n


def density_of_set(indices: Iterable[int], n_max: int) -> np.ndarray:
    """Density profile of an explicit set of positive integers up to ``n_max``."""
    flags = np.zeros(n_max, dtype=bool)
    for m in indices:
        if 1 <= m <= n_max:
            flags[m - 1] = True
    return density_profile(flags)


def exceptional_density(values, L: float, eps: float, relative: bool = True):
    """Flag ``n`` with ``|r_n - L| > eps`` (times ``|L|`` when relative).

    Undefined ratios (``nan``) are flagged too. Returns ``(flags, density)``.
    """
    values = np.asarray(values, dtype=float)
    bound = eps * abs(L) if relative else eps
    with np.errstate(invalid="ignore"):
        ok = np.abs(values - L) <= bound
    flags = ~ok
    return flags, density_profile(flags)


def incremental_density(flags) -> list[float]:
    """Same as :func:`density_profile`, accumulated one index at a time."""
    out, q = [], 0
    for n, flag in enumerate(flags, start=1):
        q += bool(flag)
        out.append(q / n)
    return out
