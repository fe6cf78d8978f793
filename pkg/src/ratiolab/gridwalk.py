"""Transition operator on the grid affine group.

Products ``x y`` of a grid point with a law atom land off the grid, so
``Pf(x) = sum_j w_j f(x y_j)`` is evaluated with bilinear interpolation of
``f`` in ``(u, b)``. Outside the window ``f`` is taken to be zero (absorbing
boundary); the quadrature weight that falls outside is reported as the
absorbed mass of the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .errors import GroupMismatch, PreconditionError, TruncationError
from .groups import GridAffine, bump
from .measures import WeightedSupport

_SNAP = 1e-9


@dataclass
class GridFunction:
    """Values of a function at every grid point, times ``exp(log_scale)``."""

    space: GridAffine
    values: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        if self.values.shape != self.space.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.space.shape}")

    @classmethod
    def from_callable(cls, space: GridAffine, g: Callable) -> "GridFunction":
        U, Bm = space.mesh()
        return cls(space, np.asarray(g(U, Bm), dtype=float))

    def at(self, x) -> float:
        return float(self.values[self.space.index(x)]) * math.exp(self.log_scale)

    def integral(self) -> float:
        """Right-Haar integral ``pi(f)``."""
        return float(self.values.sum()) * self.space.cell_weight * math.exp(self.log_scale)

    def renormalized(self) -> "GridFunction":
        m = float(np.max(np.abs(self.values)))
        if m == 0.0:
            return self
        return GridFunction(self.space, self.values / m, self.log_scale + math.log(m))


def product_bump(wu: float, wb: float, center=(0.0, 0.0)) -> Callable:
    """``g(u, b) = bump((u - u0)/wu) * bump((b - b0)/wb)``."""
    u0, b0 = center
    return lambda U, Bm: bump((U - u0) / wu) * bump((Bm - b0) / wb)


def grid_law(space: GridAffine, atoms) -> WeightedSupport:
    """A probability law on the affine group given as ``{(u, b): weight}`` atoms."""
    law = WeightedSupport.measure(space, {space.validate(x): w for x, w in dict(atoms).items()})
    if not law.nonnegative or abs(law.mass() - 1.0) > 1e-9:
        raise PreconditionError("grid law must be a probability measure")
    return law


def _interp_indices(t: np.ndarray, n: int):
    """Lower index and fractional weight for bilinear lookup in a zero-padded axis."""
    i0 = np.floor(t)
    fr = t - i0
    lo_snap = fr < _SNAP
    hi_snap = fr > 1 - _SNAP
    fr = np.where(lo_snap | hi_snap, 0.0, fr)
    i0 = np.where(hi_snap, i0 + 1, i0)
    outside = (i0 < -1) | (i0 > n - 1) | ((i0 == -1) & (fr == 0.0))
    i0 = np.clip(i0, -1, n - 1).astype(np.int64)
    return i0, fr, outside


class _GridOperator:
    """``P`` on one grid for one law, assembled once as a sparse matrix.

    Row ``x`` holds the bilinear weights of the nodes around every ``x y_j``
    scaled by ``v({y_j})``; ``absorbed[x]`` is the weight that fell outside.
    """

    def __init__(self, space: GridAffine, v: WeightedSupport):
        if v.group != space:
            raise GroupMismatch("law and grid live on different spaces")
        U, Bm = space.mesh()
        nu, nb = space.shape
        self.space = space
        scale = math.exp(v.log_scale)
        rows, cols, data = [], [], []
        absorbed = np.zeros(space.shape)
        ridx = np.arange(nu * nb).reshape(nu, nb)
        for (uy, by), w in v.atoms.items():
            if w == 0.0:
                continue
            w = w * scale
            tu = (U + uy + space.K * space.du) / space.du
            tb = (Bm + 2.0**U * by + space.B) / space.h
            iu, fu, out_u = _interp_indices(tu, nu)
            ib, fb, out_b = _interp_indices(tb, nb)
            dead = out_u | out_b
            kept = np.zeros(space.shape)
            for du_, db_, wt in (
                (0, 0, (1 - fu) * (1 - fb)),
                (1, 0, fu * (1 - fb)),
                (0, 1, (1 - fu) * fb),
                (1, 1, fu * fb),
            ):
                ju, jb = iu + du_, ib + db_
                ok = ~dead & (wt > 0) & (ju >= 0) & (ju < nu) & (jb >= 0) & (jb < nb)
                rows.append(ridx[ok])
                cols.append(ju[ok] * nb + jb[ok])
                data.append(w * wt[ok])
                kept += np.where(ok, wt, 0.0)
            absorbed += w * (1.0 - kept)
        self.matrix = sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(nu * nb, nu * nb)
        )
        self.absorbed = absorbed

    def __call__(self, values: np.ndarray):
        out = (self.matrix @ values.ravel()).reshape(values.shape)
        return out, self.absorbed


def apply_P_grid(f: GridFunction, v: WeightedSupport, max_absorbed: float | None = None):
    """One step of ``P`` on the grid; returns ``(Pf, absorbed)``.

    ``absorbed[x]`` is the law's quadrature weight that leaves the window from
    ``x``. With ``max_absorbed`` set, any point of ``supp Pf`` exceeding it
    raises :class:`TruncationError`.
    """
    out, absorbed = _GridOperator(f.space, v)(f.values)
    if max_absorbed is not None:
        hot = absorbed[np.abs(out) > 0]
        if hot.size and hot.max() > max_absorbed:
            raise TruncationError(float(hot.max()), max_absorbed)
    return GridFunction(f.space, out, f.log_scale + v.log_scale), absorbed


class GridTrajectory:
    """``P^n g`` at probe points for ``n = 0..n_max`` on the grid.

    Alongside the main iteration a second copy runs with the outermost cell
    layer of the window also absorbing. The relative gap between the two at
    a probe is the share of ``P^n g(x)`` carried by paths that reach the
    boundary layer; it is reported as the truncation mass.
    """

    def __init__(self, g: GridFunction, v: WeightedSupport, n_max: int, points: Sequence):
        space = g.space
        op = _GridOperator(space, v)
        idx = [space.index(x) for x in points]
        self.n_max = n_max
        self.points = list(points)
        self.log_values = np.full((n_max + 1, len(idx)), -np.inf)
        self.truncation = np.zeros((n_max + 1, len(idx)))
        inner = np.zeros(space.shape, dtype=bool)
        inner[1:-1, 1:-1] = True
        cur, shrunk = g.values.copy(), np.where(inner, g.values, 0.0)
        ls = g.log_scale
        for n in range(n_max + 1):
            if n:
                cur, _ = op(cur)
                shrunk, _ = op(shrunk)
                shrunk[~inner] = 0.0
                m = float(np.max(np.abs(cur)))
                if m == 0.0:
                    raise PreconditionError(f"P^{n} g vanished on the window")
                cur /= m
                shrunk /= m
                ls += math.log(m)
            for k, ij in enumerate(idx):
                a = cur[ij]
                self.log_values[n, k] = math.log(a) + ls if a > 0 else -math.inf
                self.truncation[n, k] = abs(a - shrunk[ij]) / a if a > 0 else 1.0
        self.final = GridFunction(space, cur, ls)

    def ratio(self, num: int, den: int, shift: int = 0) -> np.ndarray:
        """``P^{n+shift} g(points[num]) / P^n g(points[den])`` for ``n = 0..n_max-shift``."""
        a = self.log_values[shift:, num]
        b = self.log_values[: self.n_max + 1 - shift, den]
        with np.errstate(invalid="ignore"):
            return np.where(np.isfinite(b), np.exp(a - b), np.nan)
