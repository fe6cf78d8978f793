"""Ratio series for the strong ratio limit statements and their exceptional sets.

Every ratio here is computed from :class:`LogTrajectory` (discrete groups) or
:class:`GridTrajectory` (affine grid) so values far below the leading atom
stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .density import exceptional_density
from .errors import PreconditionError
from .groups import GridAffine
from .gridwalk import GridFunction, GridTrajectory, grid_law
from .measures import LogTrajectory, WeightedSupport, iterate_P, log_ratio
from .spectral import ExponentialSpec, exponential_for_modular, fit_exponential, laplace, nu_of, twist

DEFAULT_EPS = 1e-2


@dataclass
class RatioSeries:
    """``r_n`` for ``n = 1..n_max`` against a target ``L``.

    ``tol`` and ``n_from`` define the acceptance verdict: every ``r_n`` with
    ``n >= n_from`` must lie within ``tol`` of ``L``. The exceptional set uses
    ``eps`` (relative to ``|L|`` by default) and counts undefined ratios.
    """

    scenario: str
    name: str
    n: np.ndarray
    values: np.ndarray
    target: float
    provenance: str
    eps: float = DEFAULT_EPS
    relative: bool = True
    tol: float | None = None
    n_from: int | None = None
    window: tuple[int, int] | None = None
    truncation: np.ndarray | None = None
    truncation_bound: float | None = None
    exceptional: np.ndarray = field(init=False, repr=False)
    density: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        if self.n.shape != self.values.shape:
            raise ValueError("n and values differ in length")
        if self.n.size and self.n[0] != 1:
            raise ValueError("ratio series are indexed from n = 1")
        self.exceptional, self.density = exceptional_density(self.values, self.target, self.eps, self.relative)

    @property
    def abs_err(self) -> np.ndarray:
        return np.abs(self.values - self.target)

    @property
    def rel_err(self) -> np.ndarray:
        if self.target == 0:
            return np.full_like(self.values, np.nan)
        return self.abs_err / abs(self.target)

    def _mask(self) -> np.ndarray:
        lo, hi = self.window or (self.n_from or 1, int(self.n[-1]))
        return (self.n >= lo) & (self.n <= hi)

    def max_error(self) -> float:
        """Largest ``|r_n - L|`` over the acceptance range (``inf`` if undefined there)."""
        err = self.abs_err[self._mask()]
        if err.size == 0:
            return math.nan
        return float(np.max(np.where(np.isnan(err), np.inf, err)))

    def max_truncation(self) -> float | None:
        if self.truncation is None:
            return None
        return float(np.max(self.truncation[self._mask()]))

    @property
    def limit_estimate(self) -> float:
        """Last value inside the acceptance range."""
        vals = self.values[self._mask()]
        return float(vals[-1]) if vals.size else math.nan

    @property
    def final_density(self) -> float:
        return float(self.density[-1]) if self.density.size else 0.0

    def verdict(self) -> bool | None:
        if self.tol is None:
            return None
        ok = self.max_error() <= self.tol
        if self.truncation is not None and self.truncation_bound is not None:
            ok = ok and self.max_truncation() < self.truncation_bound
        return bool(ok)

    def rows(self):
        """CSV rows ``n, ratio, target, abs_err, rel_err, exceptional_flag, density_to_n``."""
        rel = self.rel_err
        for k in range(self.n.size):
            yield (
                int(self.n[k]),
                float(self.values[k]),
                float(self.target),
                float(self.abs_err[k]),
                float(rel[k]),
                int(self.exceptional[k]),
                float(self.density[k]),
            )

    def summary(self) -> dict:
        out = {
            "name": self.name,
            "target": {"value": self.target, "provenance": self.provenance},
            "eps": {"value": self.eps, "provenance": "relative" if self.relative else "absolute"},
            "n_max": {"value": int(self.n[-1]) if self.n.size else 0, "provenance": "last index of the series"},
            "final_density": {"value": self.final_density, "provenance": "q_n(N_eps) / n at n_max"},
            "limit_estimate": {"value": self.limit_estimate, "provenance": "last ratio in the acceptance range"},
            "verdict": self.verdict(),
        }
        if self.tol is not None:
            out["max_error"] = {"value": self.max_error(), "provenance": "max |r_n - L| over the acceptance range"}
            rng = list(self.window) if self.window else [self.n_from or 1, int(self.n[-1])]
            out["tol"] = {"value": self.tol, "provenance": "configured acceptance tolerance on |r_n - L|"}
            out["range"] = {"value": rng, "provenance": "configured n range of the acceptance check"}
        if self.truncation is not None:
            out["max_truncation"] = {
                "value": self.max_truncation(),
                "provenance": "relative change of P^n g at the probe when the outer cell layer also absorbs",
            }
        return out


def _series(scenario, name, values, target, provenance, **kw) -> RatioSeries:
    n = np.arange(1, len(values) + 1)
    return RatioSeries(scenario, name, n, values, target, provenance, **kw)


def _phi_R(v: WeightedSupport, phi: ExponentialSpec | None, R: float | None):
    if phi is None or R is None:
        fit = fit_exponential(v)
        phi = phi or fit.phi
        R = R if R is not None else fit.R
    return phi, R


def _require_nu(phi, g):
    nu_g = nu_of(phi, g)
    # cancellation leaves rounding noise rather than an exact zero
    if abs(nu_g) <= 1e-12 * nu_of(phi, g.abs()):
        raise PreconditionError("nu(g) = 0: the ratio limit is not defined")
    return nu_g


def _trajectories(f, g, v, n_max, f_points, g_points=None, f_measures=(), g_measures=()):
    """Trajectories of ``f`` and ``g``; one shared run when ``f`` and ``g`` coincide."""
    g_points = f_points if g_points is None else g_points
    if f is g or (f.atoms == g.atoms and f.log_scale == g.log_scale):
        pts = list(dict.fromkeys(list(f_points) + list(g_points)))
        tr = LogTrajectory(f, v, n_max, pts, list(f_measures) + list(g_measures))
        nf = len(f_measures)
        fp = [pts.index(x) for x in f_points]
        gp = [pts.index(x) for x in g_points]
        return (tr, fp, list(range(nf))), (tr, gp, list(range(nf, nf + len(g_measures))))
    tf = LogTrajectory(f, v, n_max, f_points, f_measures)
    tg = LogTrajectory(g, v, n_max, g_points, g_measures)
    return (
        (tf, list(range(len(f_points))), list(range(len(f_measures)))),
        (tg, list(range(len(g_points))), list(range(len(g_measures)))),
    )


# -- pointwise statements -----------------------------------------------------


def ratio_pointwise(
    f: WeightedSupport,
    g: WeightedSupport,
    x,
    y,
    v: WeightedSupport,
    n_max: int,
    *,
    phi: ExponentialSpec | None = None,
    scenario: str = "",
    **kw,
) -> RatioSeries:
    """``P^n f(x) / P^n g(y)`` against ``nu(f) phi(x) / (nu(g) phi(y))``."""
    G = v.group
    x, y = G.validate(x), G.validate(y)
    phi, _ = _phi_R(v, phi, 1.0)
    nu_g = _require_nu(phi, g)
    L = nu_of(phi, f) * phi(x) / (nu_g * phi(y))
    (tf, fp, _), (tg, gp, _) = _trajectories(f, g, v, n_max, [x], [y])
    vals = log_ratio(tf.point(fp[0]), tg.point(gp[0]))[1:]
    return _series(scenario, "pointwise", vals, L, "nu(f) phi(x) / (nu(g) phi(y)), nu = pi / phi", **kw)


def ratio_shift(
    g: WeightedSupport,
    y,
    m: int,
    v: WeightedSupport,
    n_max: int,
    *,
    R: float | None = None,
    scenario: str = "",
    **kw,
) -> RatioSeries:
    """``P^{n+m} g(y) / P^n g(y)`` against ``R^-m``."""
    if m < 1:
        raise PreconditionError("shift m must be a positive integer")
    y = v.group.validate(y)
    _, R = _phi_R(v, ExponentialSpec.trivial(v.group), R)
    tr = LogTrajectory(g, v, n_max + m, [y])
    s, l = tr.point(0)
    vals = log_ratio((s[m + 1 :], l[m + 1 :]), (s[1 : n_max + 1], l[1 : n_max + 1]))
    return _series(scenario, f"shift-m{m}", vals, R ** (-m), f"R^-{m}", **kw)


def ratio_twisted(
    f: WeightedSupport,
    g: WeightedSupport,
    x,
    y,
    vt: WeightedSupport,
    n_max: int,
    *,
    scenario: str = "",
    **kw,
) -> RatioSeries:
    """``P~^n f(x) / P~^n g(y)`` for the twisted law, against ``pi(f) / pi(g)``."""
    G = vt.group
    x, y = G.validate(x), G.validate(y)
    pi_g = nu_of(ExponentialSpec.trivial(G), g)
    if pi_g == 0.0:
        raise PreconditionError("pi(g) = 0: the ratio limit is not defined")
    L = nu_of(ExponentialSpec.trivial(G), f) / pi_g
    (tf, fp, _), (tg, gp, _) = _trajectories(f, g, vt, n_max, [x], [y])
    vals = log_ratio(tf.point(fp[0]), tg.point(gp[0]))[1:]
    return _series(scenario, "twisted", vals, L, "pi(f) / pi(g)", **kw)


# -- integrated statements ----------------------------------------------------


@dataclass
class IntegratedRatios:
    ratio: RatioSeries
    shifted: RatioSeries
    lower_ok: bool
    lower_margin: float

    def summary(self) -> dict:
        return {
            "integrated": self.ratio.summary(),
            "integrated_shift": self.shifted.summary(),
            "liminf_lower_bound": {
                "value": self.lower_margin,
                "provenance": "min over the acceptance range of r_n - L (must be >= -tol)",
                "ok": self.lower_ok,
            },
        }


def _probability(kappa: WeightedSupport, what: str):
    if not kappa.nonnegative or abs(kappa.mass() - 1.0) > 1e-9:
        raise PreconditionError(f"{what} must be a probability measure")


def ratio_integrated(
    kappa: WeightedSupport,
    mu: WeightedSupport,
    f: WeightedSupport,
    g: WeightedSupport,
    m: int,
    v: WeightedSupport,
    n_max: int,
    *,
    phi: ExponentialSpec | None = None,
    R: float | None = None,
    scenario: str = "",
    **kw,
) -> IntegratedRatios:
    """``kappa(P^n f) / mu(P^n g)`` and ``kappa(P^{n+m} g) / mu(P^n g)``.

    The second series tends to ``kappa(phi) / (mu(phi) R^m)``, which is
    ``R^-m`` only when ``kappa(phi) = mu(phi)`` (for instance ``kappa = mu``).
    The lower-bound check asks that the first series does not dip below its
    target by more than ``tol`` on the acceptance range.
    """
    _probability(kappa, "kappa")
    _probability(mu, "mu")
    if m < 1:
        raise PreconditionError("shift m must be a positive integer")
    phi, R = _phi_R(v, phi, R)
    nu_g = _require_nu(phi, g)
    kphi = math.fsum(w * phi(x) for x, w in kappa.atoms.items()) * math.exp(kappa.log_scale)
    mphi = math.fsum(w * phi(x) for x, w in mu.atoms.items()) * math.exp(mu.log_scale)
    L11 = kphi * nu_of(phi, f) / (mphi * nu_g)
    L12 = kphi / (mphi * R**m)

    (tf, _, fm), (tg, _, gm) = _trajectories(f, g, v, n_max + m, [], [], [kappa], [mu, kappa])
    num = tf.against(fm[0])
    den = tg.against(gm[0])
    cut = slice(1, n_max + 1)
    vals11 = log_ratio((num[0][cut], num[1][cut]), (den[0][cut], den[1][cut]))
    ks, kl = tg.against(gm[1])
    vals12 = log_ratio((ks[m + 1 :], kl[m + 1 :]), (den[0][cut], den[1][cut]))

    s11 = _series(scenario, "integrated", vals11, L11, "kappa(phi) nu(f) / (mu(phi) nu(g))", **kw)
    s12 = _series(scenario, f"integrated-shift-m{m}", vals12, L12, f"kappa(phi) / (mu(phi) R^{m})", **kw)
    tail = s11.values[s11._mask()] - L11
    margin = float(np.min(tail)) if tail.size else math.nan
    tol = s11.tol if s11.tol is not None else s11.eps * abs(L11)
    return IntegratedRatios(s11, s12, bool(margin >= -tol), margin)


# -- translation identities ---------------------------------------------------


@dataclass
class TranslationCheck:
    z: object
    max_atom_gap: float
    max_point_gap: float
    nu_ratio: float
    phi_z: float
    nu_residual: float
    target_pointwise: float
    target_translated: float

    @property
    def exact(self) -> bool:
        return self.max_atom_gap == 0.0 and self.max_point_gap == 0.0

    def summary(self) -> dict:
        return {
            "z": repr(self.z),
            "max_atom_gap": {"value": self.max_atom_gap, "provenance": "max_n,u |P^n g_z(u) - P^n g(z u)|"},
            "max_point_gap": {"value": self.max_point_gap, "provenance": "max_n |P^n g_z(x) - P^n g(y)|"},
            "nu_ratio": {"value": self.nu_ratio, "provenance": "nu(g_z) / nu(g)"},
            "phi_z": {"value": self.phi_z, "provenance": "phi(z), z = y x^-1"},
            "nu_residual": {"value": self.nu_residual, "provenance": "|nu(g_z) - phi(z) nu(g)| / |nu(g)|"},
            "target_pointwise": {"value": self.target_pointwise, "provenance": "nu(f) phi(x) / (nu(g) phi(y))"},
            "target_translated": {"value": self.target_translated, "provenance": "nu(f) / nu(g_z)"},
        }


def ratio_translation(
    g: WeightedSupport,
    x,
    y,
    v: WeightedSupport,
    n_max: int,
    *,
    f: WeightedSupport | None = None,
    phi: ExponentialSpec | None = None,
) -> TranslationCheck:
    """Check ``P^n g_z = (P^n g)_z`` atom by atom with ``z = y x^-1``.

    In particular ``P^n g_z(x) = P^n g(y)``. Also compares ``nu(g_z)`` with
    ``phi(z) nu(g)`` and the two routes to the limit of ``P^n f(x) / P^n g(y)``.
    """
    G = v.group
    x, y = G.validate(x), G.validate(y)
    z = G.mul(y, G.inv(x))
    phi, _ = _phi_R(v, phi, 1.0)
    gz = g.left_translate(z)
    atom_gap = point_gap = 0.0
    for a, b in zip(iterate_P(gz, v, n_max), iterate_P(g, v, n_max)):
        sa, sb = a.log_scale, b.log_scale
        for u, w in a.atoms.items():
            val_a = w * math.exp(sa)
            val_b = b.atoms.get(G.mul(z, u), 0.0) * math.exp(sb)
            atom_gap = max(atom_gap, abs(val_a - val_b))
        point_gap = max(point_gap, abs(a.value(x) - b.value(y)))
    nu_g = _require_nu(phi, g)
    nu_gz = nu_of(phi, gz)
    f = g if f is None else f
    nu_f = nu_of(phi, f)
    return TranslationCheck(
        z=z,
        max_atom_gap=atom_gap,
        max_point_gap=point_gap,
        nu_ratio=nu_gz / nu_g,
        phi_z=phi(z),
        nu_residual=abs(nu_gz - phi(z) * nu_g) / abs(nu_g),
        target_pointwise=nu_f * phi(x) / (nu_g * phi(y)),
        target_translated=nu_f / nu_gz,
    )


# -- modular obstruction on the affine grid ----------------------------------


@dataclass
class ModularReport:
    """Series of the non-unimodular mechanism on the affine grid.

    ``series_a[x]``: ``P^n g(x) / P^n g(e)`` against ``Delta(x)``.
    ``series_b[x]``: ``P^{n+1} g(x) / P^n g(e)`` against ``Delta(x) / r``.
    ``series_b_same[x]``: ``P^{n+1} g(x) / P^n g(x)``, whose limit is ``1/r``
    at every ``x``. ``twisted_integral``: ``P~^n f(e) / P~^n g(e)`` for the
    walk ``r Delta v`` against ``pi(f) / pi(g)``; ``plain_integral`` is the
    same ratio for ``v`` itself.
    """

    r: float
    delta_oracle: dict
    delta_closed: dict
    series_a: dict
    series_b: dict
    series_b_same: dict
    twisted_integral: RatioSeries
    plain_integral: RatioSeries
    window: tuple[int, int]

    @property
    def witness(self):
        """``(x, estimate)`` of the smallest series-B limit estimate."""
        key = min(self.series_b, key=lambda k: self.series_b[k].limit_estimate)
        return key, self.series_b[key].limit_estimate

    @property
    def contradiction_exhibited(self) -> bool:
        return self.witness[1] < 1.0

    def all_series(self):
        for label, group in (("A", self.series_a), ("B", self.series_b), ("B-same", self.series_b_same)):
            for key, s in group.items():
                yield f"{label}{key}", s
        yield "twisted-integral", self.twisted_integral
        yield "plain-integral", self.plain_integral

    def summary(self) -> dict:
        wx, west = self.witness
        return {
            "r": {"value": self.r, "provenance": "1 / sum_y v({y}) Delta(y)"},
            "delta_oracle": {k: {"value": d, "provenance": "pi(g_x) / pi(g) by quadrature"} for k, d in self.delta_oracle.items()},
            "delta_closed": {k: {"value": d, "provenance": "1/a"} for k, d in self.delta_closed.items()},
            "series": {name: s.summary() for name, s in self.all_series()},
            "witness": {
                "x": wx,
                "value": west,
                "provenance": "min over x of the P^{n+1} g(x) / P^n g(e) limit estimate; < 1 contradicts unimodular ratio limits",
                "exhibited": west < 1.0,
            },
            "window": {"value": list(self.window), "provenance": "n range for limit estimates"},
        }


def _label(space: GridAffine, x) -> str:
    a, b = space.to_ab(x)
    return f"({a:g},{b:g})"


def modular_ratio(
    space: GridAffine,
    g: Callable,
    law_atoms,
    xs: Sequence,
    n_max: int,
    *,
    f: Callable | None = None,
    window: tuple[int, int] | None = None,
    tol: float = 5e-2,
    truncation_bound: float = 1e-3,
    scenario: str = "",
) -> ModularReport:
    """Run the affine grid walk and build every modular-obstruction series.

    ``g`` and ``f`` are vectorised callables ``(u, b) -> value``; ``xs`` are
    grid points in ``(log2 a, b)`` coordinates. ``f`` defaults to ``g``
    translated one u-level up.
    """
    v = grid_law(space, law_atoms)
    window = window or (max(1, n_max // 2), n_max)
    delta = exponential_for_modular(space)
    r = 1.0 / laplace(v, delta)
    e = space.identity
    pts = [e] + [space.validate(x) for x in xs]
    gf = GridFunction.from_callable(space, g)
    tr = GridTrajectory(gf, v, n_max + 1, pts)
    kw = dict(eps=DEFAULT_EPS, tol=tol, window=window, truncation_bound=truncation_bound)

    def trunc(k_num, k_den, shift=0):
        a = tr.truncation[1 + shift : n_max + 1 + shift, k_num]
        b = tr.truncation[1 : n_max + 1, k_den]
        return np.maximum(a, b)

    oracle, closed, sa, sb, sc = {}, {}, {}, {}, {}
    for k, x in enumerate(pts[1:], start=1):
        key = _label(space, x)
        oracle[key] = space.modular_quadrature(x, g)
        closed[key] = space.modular(x)
        sa[key] = _series(
            scenario, f"A{key}", tr.ratio(k, 0)[1 : n_max + 1], oracle[key],
            "Delta(x) = pi(g_x) / pi(g) by quadrature", truncation=trunc(k, 0), **kw,
        )
        sb[key] = _series(
            scenario, f"B{key}", tr.ratio(k, 0, shift=1)[1 : n_max + 1], oracle[key] / r,
            "Delta(x) / r, r = 1 / sum v Delta", truncation=trunc(k, 0, 1), **kw,
        )
        sc[key] = _series(
            scenario, f"B-same{key}", tr.ratio(k, k, shift=1)[1 : n_max + 1], 1.0 / r,
            "1 / r", truncation=trunc(k, k, 1), **kw,
        )

    if f is None:
        f = lambda U, Bm: g(U - space.du, Bm)  # noqa: E731
    target14 = space.quadrature(f) / space.quadrature(g)
    vt = twist(v, r, delta)
    pair = []
    for law in (vt, v):
        tf = GridTrajectory(GridFunction.from_callable(space, f), law, n_max, [e])
        tg = GridTrajectory(gf, law, n_max, [e])
        with np.errstate(invalid="ignore"):
            vals = np.exp(tf.log_values[1:, 0] - tg.log_values[1:, 0])
        pair.append((vals, np.maximum(tf.truncation[1:, 0], tg.truncation[1:, 0])))
    twisted = _series(scenario, "twisted-integral", pair[0][0], target14, "pi(f) / pi(g)", truncation=pair[0][1], **kw)
    diag = dict(kw, tol=None)
    plain = _series(scenario, "plain-integral", pair[1][0], target14, "pi(f) / pi(g)", truncation=pair[1][1], **diag)
    return ModularReport(r, oracle, closed, sa, sb, sc, twisted, plain, window)
