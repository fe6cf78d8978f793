"""Feasibility witnesses: Condition A and small-function domination."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PreconditionError
from .measures import MEASURE, WeightedSupport, apply_P, convolve


@dataclass(frozen=True)
class ConditionWitness:
    """A found (or not found) witness.

    For ``kind="condition-A"``: ``index = j`` and ``coefficient = gamma`` with
    ``v^j >= gamma (f pi)`` atomwise. For ``kind="small-domination"``:
    ``index = m`` and ``coefficient = a`` with ``a P^m g >= f``. ``margin`` is the
    smallest slack of the inequality over ``supp f``.
    """

    kind: str
    found: bool
    index: int | None = None
    coefficient: float | None = None
    margin: float | None = None
    form: str = "function"

    @property
    def j(self):
        return self.index

    @property
    def gamma(self):
        return self.coefficient

    @property
    def m(self):
        return self.index

    @property
    def a(self):
        return self.coefficient

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "found": self.found,
            "index": self.index,
            "coefficient": self.coefficient,
            "margin": self.margin,
            "form": self.form,
            "provenance": "index/coefficient are (j, gamma) or (m, a); margin is the smallest slack over supp f",
        }


def _clip(margin: float, scale: float) -> float:
    # the minimising atom gives exactly zero slack up to rounding
    return 0.0 if -1e-12 * scale <= margin < 0.0 else margin


def _check_nonneg(*supports):
    for s in supports:
        if not s.nonnegative:
            raise PreconditionError("witness checks need nonnegative inputs")


def check_condition_A(v: WeightedSupport, f: WeightedSupport, j_max: int = 50) -> ConditionWitness:
    """Smallest ``j <= j_max`` and largest ``gamma`` with ``v^j({x}) >= gamma f(x) pi({x})``.

    Failure to find ``j`` is not a disproof of the condition.
    """
    _check_nonneg(v, f)
    G = f.group
    supp = f.support()
    if not supp:
        return ConditionWitness("condition-A", True, 1, float("inf"), float("inf"))
    power = v
    for j in range(1, j_max + 1):
        if j > 1:
            power = convolve(power, v)
        masses = [power.value(x) for x in supp]
        if all(m > 0 for m in masses):
            dens = [f.value(x) * G.haar_weight(x) for x in supp]
            gamma = min(m / d for m, d in zip(masses, dens))
            margin = _clip(min(m - gamma * d for m, d in zip(masses, dens)), max(masses))
            return ConditionWitness("condition-A", True, j, gamma, margin, form="measure")
    return ConditionWitness("condition-A", False, form="measure")


def check_small_domination(
    f: WeightedSupport,
    g: WeightedSupport,
    v: WeightedSupport,
    m_max: int = 50,
    form: str = "function",
) -> ConditionWitness:
    """Smallest ``m >= 1`` and minimal ``a`` with ``a P^m g >= f`` atomwise.

    ``form="measure"`` checks the dual statement for the measures ``g pi`` and
    ``f pi``: ``a (g pi) P^m >= f pi``. On ``Z`` with ``f = 1_{2}``,
    ``g = 1_{0}`` the function form needs the walk to move from 2 down to 0
    (weight ``q^2``) while the measure form needs 0 up to 2 (weight ``p^2``).
    """
    _check_nonneg(f, g, v)
    if form not in ("function", "measure"):
        raise ValueError("form must be 'function' or 'measure'")
    G = f.group
    supp = f.support()
    if not supp:
        return ConditionWitness("small-domination", True, 1, 0.0, 0.0, form=form)
    if not g.support():
        raise PreconditionError("g must have nonempty support")
    if form == "function":
        cur = g
    else:
        cur = WeightedSupport(G, {x: w * G.haar_weight(x) for x, w in g.atoms.items()}, MEASURE)
    for m in range(1, m_max + 1):
        cur = apply_P(cur, v) if form == "function" else convolve(cur, v)
        dominating = [cur.value(x) for x in supp]
        if all(d > 0 for d in dominating):
            target = [f.value(x) * (G.haar_weight(x) if form == "measure" else 1.0) for x in supp]
            a = max(t / d for t, d in zip(target, dominating))
            margin = _clip(min(a * d - t for t, d in zip(target, dominating)), max(target))
            return ConditionWitness("small-domination", True, m, a, margin, form=form)
    return ConditionWitness("small-domination", False, form=form)
