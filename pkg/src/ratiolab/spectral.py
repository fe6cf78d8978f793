"""Exponentials, Laplace-transform minimisation and the convergence parameter R.

An exponential is a positive homomorphism ``phi(xy) = phi(x) phi(y)``. Every
exponential kills commutators, so it is ``exp(s . ab(x))`` for a linear
functional ``s`` on the abelianisation ``ab``; that is how it is stored here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import NoInteriorMinimum, PreconditionError
from .groups import LN2, FreeGroup, GridAffine, GroupSpace
from .measures import MEASURE, WeightedSupport, apply_P

GRAD_TOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class ExponentialSpec:
    """``phi(x) = exp(coeffs . ab(x))``.

    Natural parameters per group (see :attr:`params`): the tilt ``t`` on
    ``Z^d``; generator values ``a_i = phi(g_i)`` on free groups; a tilt on the
    abelianisation ``Z^2`` for H3(Z) (the centre maps to 1); the power ``c`` in
    ``phi(a, b) = a^c`` for the affine group.
    """

    group: GroupSpace
    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.atleast_1d(self.coeffs)) if self.group.exp_dim else ()
        if len(coeffs) != self.group.exp_dim:
            raise ValueError(f"{self.group.name} exponentials take {self.group.exp_dim} coefficients")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def trivial(cls, group) -> "ExponentialSpec":
        return cls(group, (0.0,) * group.exp_dim)

    @classmethod
    def from_params(cls, group, params) -> "ExponentialSpec":
        p = np.atleast_1d(np.asarray(params, dtype=float)) if group.exp_dim else np.zeros(0)
        if isinstance(group, FreeGroup):
            if np.any(p <= 0):
                raise ValueError("generator values must be positive")
            return cls(group, tuple(np.log(p)))
        if isinstance(group, GridAffine):
            return cls(group, (float(p[0]) * LN2,))
        return cls(group, tuple(p))

    @property
    def params(self) -> tuple[float, ...]:
        if isinstance(self.group, FreeGroup):
            return tuple(math.exp(c) for c in self.coeffs)
        if isinstance(self.group, GridAffine):
            return (self.coeffs[0] / LN2,)
        return self.coeffs

    def log_value(self, x) -> float:
        return math.fsum(c * a for c, a in zip(self.coeffs, self.group.abelian_coords(x)))

    def __call__(self, x) -> float:
        return math.exp(self.log_value(x))

    def inverse(self, x) -> float:
        return math.exp(-self.log_value(x))

    def to_dict(self) -> dict:
        return {
            "group": self.group.name,
            "params": list(self.params),
            "log_coeffs": list(self.coeffs),
            "provenance": "phi(x) = exp(log_coeffs . ab(x)); params are the natural parameters of the group kind",
        }


@dataclass
class SpectralResult:
    """Estimate of the convergence parameter and whatever produced it."""

    R: float
    method: str
    phi: ExponentialSpec | None = None
    laplace_value: float | None = None
    residual: float = 0.0
    gradient_norm: float | None = None
    r_value: float | None = None
    window: tuple[int, int] | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "R": {"value": self.R, "provenance": _R_PROVENANCE[self.method]},
            "method": self.method,
            "residual": {"value": self.residual, "provenance": _RESID_PROVENANCE[self.method]},
        }
        if self.phi is not None:
            out["phi"] = self.phi.to_dict()
        if self.laplace_value is not None:
            out["laplace_value"] = {"value": self.laplace_value, "provenance": "sum_x v({x}) phi(x)"}
        if self.gradient_norm is not None:
            out["gradient_norm"] = {"value": self.gradient_norm, "provenance": "sup-norm of the Laplace gradient"}
        if self.r_value is not None:
            out["r_value"] = {"value": self.r_value, "provenance": "1 / sum_x v({x}) Delta(x)"}
        if self.window is not None:
            out["window"] = {"value": list(self.window), "provenance": "fit window of n, inclusive"}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


_R_PROVENANCE = {
    "laplace-min": "1 / min_phi sum_x v({x}) phi(x)",
    "log-fit": "exp(-slope) of least squares log v^n(e) ~ n, log n, 1",
}
_RESID_PROVENANCE = {
    "laplace-min": "gradient sup-norm at the minimiser",
    "log-fit": "rms residual of the log fit",
}


# -- Laplace transform ---------------------------------------------------------


def _design(v: WeightedSupport):
    G = v.group
    scale = math.exp(v.log_scale)
    xs = [x for x, w in v.atoms.items() if w != 0.0]
    Z = np.array([G.abelian_coords(x) for x in xs], dtype=float).reshape(len(xs), G.exp_dim)
    w = np.array([v.atoms[x] * scale for x in xs])
    return Z, w


def laplace(v: WeightedSupport, phi: ExponentialSpec) -> float:
    """``int phi dv = sum_x v({x}) phi(x)``; log-domain when exponents exceed 300."""
    if v.group != phi.group:
        raise PreconditionError("law and exponential live on different groups")
    logs = [(math.log(w) if w > 0 else None, phi.log_value(x), w) for x, w in v.atoms.items() if w != 0]
    if max((abs(e) for _, e, _ in logs), default=0.0) <= 300:
        return math.fsum(w * math.exp(e) for _, e, w in logs) * math.exp(v.log_scale)
    if any(lw is None for lw, _, _ in logs):
        raise PreconditionError("log-domain Laplace needs a nonnegative law")
    terms = [lw + e for lw, e, _ in logs]
    m = max(terms)
    return math.exp(m + v.log_scale + math.log(math.fsum(math.exp(t - m) for t in terms)))


def _laplace_parts(Z, w, s):
    e = w * np.exp(Z @ s)
    return e.sum(), Z.T @ e, (Z.T * e) @ Z


def _has_recession_direction(Z: np.ndarray) -> bool:
    """True when some direction ``d`` has ``Z d <= 0`` everywhere and ``< 0`` somewhere."""
    n, d = Z.shape
    if d == 0 or n == 0:
        return False
    res = linprog(
        c=np.zeros(d),
        A_ub=np.vstack([Z, Z.sum(axis=0, keepdims=True)]),
        b_ub=np.concatenate([np.zeros(n), [-1.0]]),
        bounds=[(None, None)] * d,
        method="highs",
    )
    return res.status == 0


def fit_exponential(v: WeightedSupport) -> SpectralResult:
    """Minimise ``s -> sum_x v({x}) exp(s . ab(x))`` over exponentials.

    The objective is convex. Newton steps with backtracking run for at most
    200 iterations; if a step fails to decrease the objective the search falls
    back to bisection on the directional derivative. Directions orthogonal to
    the span of the support leave the objective constant and are held at 0.

    The minimum value equals ``1/R`` only when the walk has a unique
    R-invariant measure; otherwise it is merely an upper bound for ``1/R``.
    """
    G = v.group
    if not v.nonnegative:
        raise PreconditionError("law must be nonnegative")
    Z, w = _design(v)
    if G.exp_dim == 0:
        val = float(w.sum())
        return SpectralResult(1.0 / val, "laplace-min", ExponentialSpec.trivial(G), val, 0.0, 0.0)
    if len(w) < 2:
        raise PreconditionError("need at least two support points")
    if _has_recession_direction(Z):
        raise NoInteriorMinimum("law lies in a half-space through the origin; Laplace transform has no minimum")

    s = np.zeros(G.exp_dim)
    val, grad, hess = _laplace_parts(Z, w, s)
    for _ in range(MAX_ITER):
        if np.max(np.abs(grad)) <= GRAD_TOL:
            break
        step = -np.linalg.pinv(hess, rcond=1e-13) @ grad
        t, accepted = 1.0, False
        while t > 1e-12:
            nv, ng, nh = _laplace_parts(Z, w, s + t * step)
            if np.isfinite(nv) and nv <= val + 1e-4 * t * (grad @ step):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            t = _bisect_direction(Z, w, s, step)
            nv, ng, nh = _laplace_parts(Z, w, s + t * step)
        s = s + t * step
        val, grad, hess = _laplace_parts(Z, w, s)
    gnorm = float(np.max(np.abs(grad)))
    phi = ExponentialSpec(G, tuple(s))
    return SpectralResult(
        R=1.0 / val,
        method="laplace-min",
        phi=phi,
        laplace_value=float(val),
        residual=gnorm,
        gradient_norm=gnorm,
    )


def _bisect_direction(Z, w, s, d, hi: float = 1.0) -> float:
    """Root of the directional derivative of the Laplace function on ``[0, hi]``."""

    def deriv(t):
        return float((w * np.exp(Z @ (s + t * d))) @ (Z @ d))

    lo = 0.0
    while deriv(hi) < 0 and hi < 1e6:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if deriv(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- log-fit estimation -------------------------------------------------------


def estimate_R_logfit(
    return_probs: Sequence[float],
    window: tuple[int, int] = (200, 2000),
    *,
    log: bool = False,
) -> SpectralResult:
    """Fit ``log v^n(e) = alpha n + beta log n + gamma`` on ``window`` (inclusive).

    ``return_probs[n]`` is ``v^n(e)`` (or its logarithm with ``log=True``).
    The ``log n`` term absorbs the polynomial prefactor of the local limit
    theorem, which otherwise biases short windows. ``R = exp(-alpha)``.
    """
    lo, hi = window
    if lo < 1 or hi >= len(return_probs) or hi - lo + 1 < 10:
        raise PreconditionError(f"window {window} needs >= 10 indices inside 1..{len(return_probs) - 1}")
    vals = np.asarray(return_probs[lo : hi + 1], dtype=float)
    if log:
        if not np.all(np.isfinite(vals)):
            raise PreconditionError("zero return probability inside the fit window")
        y = vals
    else:
        if np.any(vals <= 0):
            raise PreconditionError("zero return probability inside the fit window")
        y = np.log(vals)
    n = np.arange(lo, hi + 1, dtype=float)
    A = np.column_stack([n, np.log(n), np.ones_like(n)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return SpectralResult(R=math.exp(-coef[0]), method="log-fit", residual=resid, window=(lo, hi))


# -- R-invariant measure and twisted walk ------------------------------------


def build_nu(phi: ExponentialSpec, window) -> WeightedSupport:
    """``nu({x}) = haar_weight(x) / phi(x)`` on a finite window."""
    G = phi.group
    return WeightedSupport.measure(G, {x: G.haar_weight(x) * phi.inverse(x) for x in window})


def nu_of(phi: ExponentialSpec, f: WeightedSupport) -> float:
    """``nu(f) = pi(f / phi)``."""
    G = f.group
    scale = math.exp(f.log_scale)
    return math.fsum(w * G.haar_weight(x) * phi.inverse(x) for x, w in f.atoms.items()) * scale


def twist(v: WeightedSupport, R: float, phi: ExponentialSpec, tol: float = 1e-6) -> WeightedSupport:
    """The law ``R phi v`` of the similarity-transformed walk."""
    out = v.times(lambda x: R * phi(x)).unscaled()
    mass = out.mass()
    if abs(mass - 1.0) > tol:
        raise PreconditionError(f"twisted mass {mass!r} differs from 1; (R, phi) are inconsistent")
    return WeightedSupport(v.group, out.atoms, MEASURE)


def verify_similarity(
    f: WeightedSupport,
    v: WeightedSupport,
    R: float,
    phi: ExponentialSpec,
    n: int,
    *,
    exponent_n: bool = True,
) -> float:
    """Max relative gap between ``P~^n f`` and ``R^n phi^-1 P^n (f phi)``.

    ``P~`` is the operator of ``twist(v, R, phi)``. ``exponent_n=False`` uses a
    single factor ``R`` instead of ``R^n``, which breaks the identity for
    ``n >= 2``.
    """
    if n > 20:
        raise PreconditionError("verify_similarity is meant for n <= 20")
    vt = WeightedSupport(v.group, v.times(lambda x: R * phi(x)).unscaled().atoms, MEASURE)
    left = f
    right = f.times(phi)
    for _ in range(n):
        left = apply_P(left, vt)
        right = apply_P(right, v)
    factor = R**n if exponent_n else R
    worst = 0.0
    for x in set(left.support()) | set(right.support()):
        a = left.value(x)
        b = factor * phi.inverse(x) * right.value(x)
        scale = max(abs(a), abs(b))
        if scale > 0:
            worst = max(worst, abs(a - b) / scale)
    return worst


def nu_invariance_residual(
    phi: ExponentialSpec, v: WeightedSupport, R: float, window, *, relative: bool = True
) -> float:
    """``max |R (nu P)({x}) - nu({x})|`` over window points whose preimages stay inside.

    With ``relative=True`` each gap is divided by ``nu({x})``; ``nu`` spans many
    orders of magnitude over a window, so absolute gaps mostly measure ``nu``.
    """
    G = v.group
    win = set(window)
    nu = build_nu(phi, win)
    law = [(y, G.inv(y), w) for y, w in v.atoms.items() if w != 0.0]
    worst = 0.0
    for x in win:
        pre = [(G.mul(x, yi), w) for _, yi, w in law]
        if not all(z in win for z, _ in pre):
            continue
        val = R * math.fsum(nu.atoms[z] * w for z, w in pre)
        gap = abs(val - nu.atoms[x])
        worst = max(worst, gap / nu.atoms[x] if relative else gap)
    return worst


def exponential_for_modular(space: GridAffine) -> ExponentialSpec:
    """The modular function ``Delta(a, b) = 1/a`` as an exponential."""
    return ExponentialSpec.from_params(space, (-1.0,))


__all__ = [
    "ExponentialSpec",
    "SpectralResult",
    "laplace",
    "fit_exponential",
    "estimate_R_logfit",
    "build_nu",
    "nu_of",
    "twist",
    "verify_similarity",
    "nu_invariance_residual",
    "exponential_for_modular",
]
