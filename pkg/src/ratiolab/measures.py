"""Weighted-atom measures and functions, convolution and the transition operator.

The walk with law ``v`` acts on functions by ``Pf(x) = sum_y f(x y) v({y})`` and
on measures by ``mu P = mu * v``. Discrete groups are handled exactly; the
grid affine group goes through :mod:`ratiolab.gridwalk`.

Two representations coexist:

* :class:`WeightedSupport` - a finite map ``element -> weight`` times
  ``exp(log_scale)``. This is the public value type.
* :class:`LogTrajectory` - a log-domain engine used to follow ``P^n f`` at a
  few probe points for thousands of steps. A probe can sit hundreds of
  e-folds below the largest atom, which no single linear scale survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, GroupMismatch, PreconditionError
from .groups import GroupSpace, IntegerLattice

MEASURE = "measure"
FUNCTION = "function"


@dataclass(frozen=True)
class WeightedSupport:
    """Finitely many weighted atoms on a group.

    With ``role="measure"`` the weights are atom masses (Haar weight already
    folded in); with ``role="function"`` they are pointwise values. The true
    weight of ``x`` is ``atoms[x] * exp(log_scale)``.
    """

    group: GroupSpace
    atoms: Mapping
    role: str = MEASURE
    log_scale: float = 0.0
    nonnegative: bool | None = None

    def __post_init__(self):
        if self.role not in (MEASURE, FUNCTION):
            raise ValueError(f"role must be 'measure' or 'function', got {self.role!r}")
        atoms = {x: float(w) for x, w in dict(self.atoms).items()}
        if len(atoms) > self.group.budget:
            raise BudgetExceeded(len(atoms), self.group.budget)
        nonneg = all(w >= 0 for w in atoms.values())
        if self.nonnegative and not nonneg:
            raise ValueError("nonnegative flag set but some weights are negative")
        object.__setattr__(self, "atoms", MappingProxyType(atoms))
        object.__setattr__(self, "nonnegative", nonneg)

    # -- constructors -------------------------------------------------------

    @classmethod
    def measure(cls, group, atoms) -> "WeightedSupport":
        return cls(group, dict(atoms), MEASURE)

    @classmethod
    def function(cls, group, atoms) -> "WeightedSupport":
        return cls(group, dict(atoms), FUNCTION)

    @classmethod
    def delta(cls, group, x, role=MEASURE) -> "WeightedSupport":
        return cls(group, {x: 1.0}, role)

    @classmethod
    def indicator(cls, group, elements: Iterable) -> "WeightedSupport":
        return cls(group, {x: 1.0 for x in elements}, FUNCTION)

    # -- access -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __contains__(self, x) -> bool:
        return x in self.atoms

    def support(self) -> list:
        return [x for x, w in self.atoms.items() if w != 0.0]

    def value(self, x) -> float:
        w = self.atoms.get(x, 0.0)
        return w * math.exp(self.log_scale) if w else 0.0

    def mass(self) -> float:
        return math.fsum(self.atoms.values()) * math.exp(self.log_scale)

    def max_abs(self) -> float:
        return max((abs(w) for w in self.atoms.values()), default=0.0)

    # -- derived supports ---------------------------------------------------

    def with_atoms(self, atoms, log_scale: float | None = None, role: str | None = None):
        return WeightedSupport(
            self.group,
            atoms,
            role or self.role,
            self.log_scale if log_scale is None else log_scale,
        )

    def scaled(self, c: float) -> "WeightedSupport":
        return self.with_atoms({x: c * w for x, w in self.atoms.items()})

    def abs(self) -> "WeightedSupport":
        return self.with_atoms({x: abs(w) for x, w in self.atoms.items()})

    def unscaled(self) -> "WeightedSupport":
        """Same object with the log-scale folded back into the atoms."""
        s = math.exp(self.log_scale)
        return self.with_atoms({x: w * s for x, w in self.atoms.items()}, log_scale=0.0)

    def renormalized(self) -> "WeightedSupport":
        """Scale the largest atom to 1, folding the factor into ``log_scale``."""
        m = self.max_abs()
        if m == 0.0:
            return self
        return self.with_atoms(
            {x: w / m for x, w in self.atoms.items()}, log_scale=self.log_scale + math.log(m)
        )

    def times(self, func) -> "WeightedSupport":
        """Pointwise product with a callable, e.g. ``f * phi``."""
        return self.with_atoms({x: w * func(x) for x, w in self.atoms.items()})

    def left_translate(self, z) -> "WeightedSupport":
        """The translate ``g_z(u) = g(z u)``, supported on ``z^{-1} supp g``."""
        zi = self.group.inv(z)
        return self.with_atoms({self.group.mul(zi, w): c for w, c in self.atoms.items()})

    def plus(self, other: "WeightedSupport", a: float = 1.0, b: float = 1.0) -> "WeightedSupport":
        """``a * self + b * other`` on a common scale."""
        _same_group(self, other)
        s1, s2 = math.exp(self.log_scale), math.exp(other.log_scale)
        out = {x: a * w * s1 for x, w in self.atoms.items()}
        for x, w in other.atoms.items():
            out[x] = out.get(x, 0.0) + b * w * s2
        return self.with_atoms(out, log_scale=0.0)

    def positive_part(self) -> "WeightedSupport":
        return self.with_atoms({x: w for x, w in self.atoms.items() if w > 0})

    def negative_part(self) -> "WeightedSupport":
        return self.with_atoms({x: -w for x, w in self.atoms.items() if w < 0})

    def as_function(self) -> "WeightedSupport":
        return self.with_atoms(self.atoms, role=FUNCTION)

    def to_json(self) -> list:
        s = math.exp(self.log_scale)
        return [[self.group.to_json(x), w * s] for x, w in self.atoms.items()]


def _same_group(a: WeightedSupport, b: WeightedSupport) -> None:
    if a.group != b.group:
        raise GroupMismatch(f"{a.group.name} vs {b.group.name}")


def _reject_grid(group: GroupSpace, what: str) -> None:
    if group.kind == "grid-lie":
        raise PreconditionError(f"{what} is not defined on grid groups; use ratiolab.gridwalk")


# -- convolution and integration ---------------------------------------------


def convolve(mu: WeightedSupport, nu: WeightedSupport) -> WeightedSupport:
    """``(mu * nu)(z) = sum_{x y = z} mu(x) nu(y)``; log-scales add."""
    _same_group(mu, nu)
    G = mu.group
    _reject_grid(G, "atom convolution")
    out: dict = {}
    for x, a in mu.atoms.items():
        for y, b in nu.atoms.items():
            z = G.mul(x, y)
            out[z] = out.get(z, 0.0) + a * b
        if len(out) > G.budget:
            raise BudgetExceeded(_count_product(mu, nu), G.budget)
    return WeightedSupport(G, out, MEASURE, mu.log_scale + nu.log_scale)


def _count_product(mu, nu) -> int:
    G = mu.group
    return len({G.mul(x, y) for x in mu.atoms for y in nu.atoms})


def convolution_power(v: WeightedSupport, n: int) -> WeightedSupport:
    out = WeightedSupport.delta(v.group, v.group.identity)
    for _ in range(n):
        out = convolve(out, v)
    return out


def integrate(kappa: WeightedSupport, f: WeightedSupport) -> float:
    """``kappa(f) = sum_x kappa({x}) f(x)``."""
    _same_group(kappa, f)
    small, big = (kappa, f) if len(kappa) <= len(f) else (f, kappa)
    total = math.fsum(w * big.atoms.get(x, 0.0) for x, w in small.atoms.items())
    return total * math.exp(kappa.log_scale + f.log_scale)


# -- transition operator -----------------------------------------------------


def apply_P(f: WeightedSupport, v: WeightedSupport) -> WeightedSupport:
    """One step of the transition operator, ``Pf(x) = sum_y f(x y) v({y})``.

    Summation runs over ``v``'s atoms in insertion order for every ``x``, so
    the arithmetic does not depend on where ``x`` sits. That makes identities
    like ``P g_z(x) = P g(z x)`` hold bit for bit.
    """
    _same_group(f, v)
    G = f.group
    _reject_grid(G, "atom apply_P")
    law = [(y, G.inv(y), w) for y, w in v.atoms.items() if w != 0.0]
    cand: dict = {}
    for z in f.atoms:
        for _, yi, _ in law:
            cand[G.mul(z, yi)] = None
        if len(cand) > G.budget:
            raise BudgetExceeded(len(cand), G.budget)
    fa = f.atoms
    out = {}
    for x in cand:
        s = 0.0
        for y, _, w in law:
            s += w * fa.get(G.mul(x, y), 0.0)
        out[x] = s
    return WeightedSupport(G, out, FUNCTION, f.log_scale + v.log_scale)


def iterate_P(f: WeightedSupport, v: WeightedSupport, n: int) -> list[WeightedSupport]:
    """``[P f, P^2 f, ..., P^n f]`` with every entry max-renormalised.

    Entries carry their scale in ``log_scale``, so ``entry.value(x)`` is the
    ordinary value and ratios of entries are exact. For long runs on
    nonnegative functions prefer :class:`LogTrajectory`: a snapshot can only
    hold about 700 e-folds of dynamic range below its largest atom, and atoms
    further down are flushed to zero.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    out = []
    cur = f
    for k in range(1, n + 1):
        try:
            cur = apply_P(cur, v).renormalized()
        except BudgetExceeded as exc:
            raise BudgetExceeded(exc.required, exc.budget, step=k) from None
        out.append(cur)
    return out


def measure_step(mu: WeightedSupport, v: WeightedSupport) -> WeightedSupport:
    """``mu P``; for a random walk this is the convolution ``mu * v``."""
    return convolve(mu, v)


# -- log-domain engine --------------------------------------------------------


def _logsumexp(vals: list[float]) -> float:
    m = max(vals)
    if m == -math.inf:
        return m
    return m + math.log(math.fsum(math.exp(a - m) for a in vals))


class _AtomLogEngine:
    """Log-domain ``P`` on a dict of atoms; any discrete group."""

    def __init__(self, f: WeightedSupport, v: WeightedSupport):
        G = f.group
        self.group = G
        self.law = [(y, G.inv(y), math.log(w) + v.log_scale) for y, w in v.atoms.items() if w > 0]
        self.logs = {x: math.log(w) + f.log_scale for x, w in f.atoms.items() if w > 0}

    def step(self) -> None:
        G, L = self.group, self.logs
        cand: dict = {}
        for z in L:
            for _, yi, _ in self.law:
                cand[G.mul(z, yi)] = None
        if len(cand) > G.budget:
            raise BudgetExceeded(len(cand), G.budget)
        new = {}
        for x in cand:
            terms = [lw + L[xy] for y, _, lw in self.law if (xy := G.mul(x, y)) in L]
            new[x] = _logsumexp(terms)
        self.logs = new

    def log_value(self, x) -> float:
        return self.logs.get(x, -math.inf)

    def log_integral(self, kappa: WeightedSupport) -> float:
        terms = [
            math.log(w) + kappa.log_scale + self.logs[x]
            for x, w in kappa.atoms.items()
            if w > 0 and x in self.logs
        ]
        return _logsumexp(terms) if terms else -math.inf


class _LatticeLogEngine:
    """Log-domain ``P`` on a dense box of ``Z^d``."""

    def __init__(self, f: WeightedSupport, v: WeightedSupport):
        G = f.group
        self.group = G
        d = G.dim
        pts = np.array(list(f.atoms), dtype=np.int64).reshape(-1, d)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        self.origin = lo.copy()
        arr = np.full(tuple(hi - lo + 1), -np.inf)
        for x, w in f.atoms.items():
            if w > 0:
                arr[tuple(np.array(x) - lo)] = math.log(w) + f.log_scale
        self.arr = arr
        steps = [(np.array(y, dtype=np.int64), math.log(w) + v.log_scale) for y, w in v.atoms.items() if w > 0]
        self.steps = steps
        ys = np.array([s for s, _ in steps]).reshape(-1, d)
        self.kmin, self.kmax = ys.min(axis=0), ys.max(axis=0)

    def step(self) -> None:
        span = self.kmax - self.kmin
        old = self.arr
        new_shape = tuple(np.array(old.shape) + span)
        if int(np.prod(new_shape)) > self.group.budget:
            raise BudgetExceeded(int(np.prod(new_shape)), self.group.budget)
        padded = np.full(tuple(np.array(old.shape) + 2 * span), -np.inf)
        padded[tuple(slice(s, s + n) for s, n in zip(span, old.shape))] = old
        out = np.full(new_shape, -np.inf)
        # new[i] = logsumexp_k(log v_k + old[i + k - kmax])
        with np.errstate(invalid="ignore"):
            for k, lw in self.steps:
                start = k - self.kmin
                sl = tuple(slice(s, s + n) for s, n in zip(start, new_shape))
                out = np.logaddexp(out, padded[sl] + lw)
        self.arr = out
        self.origin = self.origin - self.kmax

    def log_value(self, x) -> float:
        idx = np.array(x) - self.origin
        if np.any(idx < 0) or np.any(idx >= self.arr.shape):
            return -math.inf
        return float(self.arr[tuple(idx)])

    def log_integral(self, kappa: WeightedSupport) -> float:
        terms = [
            math.log(w) + kappa.log_scale + self.log_value(x) for x, w in kappa.atoms.items() if w > 0
        ]
        terms = [t for t in terms if t > -math.inf]
        return _logsumexp(terms) if terms else -math.inf

    def to_support(self) -> WeightedSupport:
        m = float(np.max(self.arr))
        atoms = {}
        for idx in zip(*np.nonzero(np.isfinite(self.arr))):
            x = tuple(int(a) for a in np.array(idx) + self.origin)
            atoms[x] = math.exp(self.arr[idx] - m)
        return WeightedSupport(self.group, atoms, FUNCTION, m)


def _engine(f: WeightedSupport, v: WeightedSupport):
    _same_group(f, v)
    _reject_grid(f.group, "LogTrajectory")
    if not f.nonnegative or not v.nonnegative:
        raise PreconditionError("log-domain engine needs nonnegative f and v")
    if isinstance(f.group, IntegerLattice) and len(f.support()) > 0:
        return _LatticeLogEngine(f, v)
    return _AtomLogEngine(f, v)


class LogTrajectory:
    """Follow ``P^n f`` for ``n = 0..n_max`` at probe points and probe measures.

    Signed ``f`` is split as ``f+ - f-`` and both parts are propagated in the
    log domain. :meth:`point` and :meth:`against` return ``(sign, log|value|)``
    arrays indexed by ``n``.
    """

    def __init__(
        self,
        f: WeightedSupport,
        v: WeightedSupport,
        n_max: int,
        points: Sequence = (),
        measures: Sequence[WeightedSupport] = (),
    ):
        self.n_max = n_max
        self.points = list(points)
        self.measures = list(measures)
        parts = [f.positive_part(), f.negative_part()]
        if not any(part.support() for part in parts):
            raise PreconditionError("cannot follow the zero function")
        self._logs = []
        eng = None
        for part in parts:
            if not part.support():
                self._logs.append(None)
                continue
            eng = _engine(part, v)
            pts = np.full((n_max + 1, len(self.points)), -np.inf)
            ms = np.full((n_max + 1, len(self.measures)), -np.inf)
            for n in range(n_max + 1):
                if n:
                    try:
                        eng.step()
                    except BudgetExceeded as exc:
                        raise BudgetExceeded(exc.required, exc.budget, step=n) from None
                for i, x in enumerate(self.points):
                    pts[n, i] = eng.log_value(x)
                for i, m in enumerate(self.measures):
                    ms[n, i] = eng.log_integral(m)
            self._logs.append((pts, ms))
        self.engine = eng

    def _combine(self, which: int, i: int):
        pos, neg = self._logs
        lp = pos[which][:, i] if pos else np.full(self.n_max + 1, -np.inf)
        if neg is None:
            sign = np.where(np.isfinite(lp), 1.0, 0.0)
            return sign, lp
        ln = neg[which][:, i]
        return signed_log_difference(lp, ln)

    def point(self, i: int):
        return self._combine(0, i)

    def against(self, i: int):
        return self._combine(1, i)


def signed_log_difference(lp: np.ndarray, ln: np.ndarray):
    """``(sign, log|e^lp - e^ln|)`` computed without overflow."""
    hi = np.maximum(lp, ln)
    lo = np.minimum(lp, ln)
    with np.errstate(divide="ignore", invalid="ignore"):
        sign = np.sign(lp - ln)
        sign = np.where(np.isnan(sign), 0.0, sign)
        mag = hi + np.log1p(-np.exp(lo - hi))
    mag = np.where(sign == 0, -np.inf, mag)
    return sign, mag


def log_ratio(num, den) -> np.ndarray:
    """Ratio of two ``(sign, log|.|)`` series; ``nan`` where the denominator vanishes."""
    sn, ln = num
    sd, ld = den
    with np.errstate(invalid="ignore", over="ignore"):
        out = sn * sd * np.exp(ln - ld)
    out = np.where(sd == 0, np.nan, out)
    out = np.where((sn == 0) & (sd != 0), 0.0, out)
    return out


# -- free group radial chain ---------------------------------------------------


def radial_return_probabilities(k: int, laziness: float, n: int, log: bool = False) -> np.ndarray:
    """``P(X_m = e)`` for ``m = 0..n`` of the lazy simple random walk on ``F_k``.

    The word length of the walk is a birth-death chain: from length 0 it moves
    up with probability ``1 - laziness``; from length ``l >= 1`` it moves up
    with ``(1 - laziness)(2k - 1)/(2k)``, down with ``(1 - laziness)/(2k)`` and
    holds with ``laziness``. The distribution is renormalised every step, so
    ``log=True`` stays finite for any ``n``.
    """
    if k < 1 or not 0.0 <= laziness < 1.0 or n < 0:
        raise PreconditionError("need k >= 1, 0 <= laziness < 1, n >= 0")
    up = (1 - laziness) * (2 * k - 1) / (2 * k)
    down = (1 - laziness) / (2 * k)
    p = np.zeros(n + 2)
    p[0] = 1.0
    scale = 0.0
    out = np.empty(n + 1)
    with np.errstate(divide="ignore"):
        out[0] = 0.0
        for m in range(1, n + 1):
            new = laziness * p
            new[0] += down * p[1]
            new[1] += (1 - laziness) * p[0]
            new[1:-1] += down * p[2:]
            new[2:] += up * p[1:-1]
            s = new.max()
            p = new / s
            scale += math.log(s)
            out[m] = math.log(p[0]) + scale if p[0] > 0 else -math.inf
    return out if log else np.exp(out)


def lazy_srw_free(group, laziness: float) -> WeightedSupport:
    """Lazy simple random walk law on a free group."""
    atoms = {group.identity: laziness}
    w = (1 - laziness) / (2 * group.rank)
    for i in range(1, group.rank + 1):
        atoms[(i,)] = w
        atoms[(-i,)] = w
    return WeightedSupport.measure(group, atoms)
