"""The group zoo: element codecs, arithmetic, Haar weights and modular functions.

Discrete groups (``Z^d``, free groups, the integer Heisenberg group, cyclic
groups) use counting measure as Haar measure, so they are unimodular by
construction. :class:`GridAffine` is the one non-unimodular space: the
``ax + b`` group in ``(log2 a, b)`` coordinates on a finite quadrature window.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .errors import ConfigError, InvalidElement, OutsideWindow

DEFAULT_BUDGET = 5_000_000
LN2 = math.log(2.0)

Element = Hashable


class GroupSpace:
    """Common surface of every group in the zoo.

    Subclasses are frozen dataclasses, so two spaces compare equal exactly when
    they describe the same group.
    """

    kind = "discrete-fg"
    name = "group"

    @property
    def identity(self) -> Element:
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def haar_weight(self, x) -> float:
        return 1.0

    def modular(self, x) -> float:
        return 1.0

    @property
    def exp_dim(self) -> int:
        """Dimension of the real span of the abelianisation used for exponentials."""
        raise NotImplementedError

    def abelian_coords(self, x) -> tuple[float, ...]:
        """Image of ``x`` in the abelianisation; every exponential factors through it."""
        raise NotImplementedError

    def validate(self, x) -> Element:
        """Return the canonical form of ``x`` or raise :class:`InvalidElement`."""
        raise NotImplementedError

    def parse(self, obj: Any) -> Element:
        return self.validate(obj)

    def to_json(self, x) -> Any:
        return list(x) if isinstance(x, tuple) else x

    def format(self, x) -> str:
        return str(self.to_json(x))

    def descriptor(self) -> dict:
        raise NotImplementedError

    def random_element(self, rng: np.random.Generator, size: int = 4) -> Element:
        raise NotImplementedError

    def power(self, x, n: int):
        out = self.identity
        for _ in range(n):
            out = self.mul(out, x)
        return out


@dataclass(frozen=True)
class IntegerLattice(GroupSpace):
    """The additive group Z^d; elements are integer tuples of length ``dim``."""

    dim: int = 1
    budget: int = field(default=DEFAULT_BUDGET, compare=False)

    kind = "discrete-fg"

    @property
    def name(self) -> str:
        return f"Z^{self.dim}"

    @property
    def identity(self):
        return (0,) * self.dim

    def mul(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def inv(self, x):
        return tuple(-a for a in x)

    @property
    def exp_dim(self) -> int:
        return self.dim

    def abelian_coords(self, x):
        return tuple(float(a) for a in x)

    def validate(self, x):
        if isinstance(x, (int, np.integer)) and self.dim == 1:
            return (int(x),)
        try:
            out = tuple(x)
        except TypeError:
            raise InvalidElement(f"{x!r} is not an element of {self.name}") from None
        if len(out) != self.dim or not all(isinstance(a, (int, np.integer)) for a in out):
            raise InvalidElement(f"{x!r} is not an element of {self.name}")
        return tuple(int(a) for a in out)

    def descriptor(self) -> dict:
        return {"kind": "zd", "dim": self.dim}

    def random_element(self, rng, size=4):
        return tuple(int(a) for a in rng.integers(-size, size + 1, self.dim))


_SUPERSCRIPT_INV = "⁻¹"


@dataclass(frozen=True)
class FreeGroup(GroupSpace):
    """Free group on ``rank`` generators.

    A word is a tuple of nonzero ints: ``i`` stands for the ``i``-th generator
    (1-based) and ``-i`` for its inverse. Canonical words are freely reduced.
    Letters ``a, b, c, ...`` are used for display; an inverse prints as ``a⁻¹``.
    """

    rank: int = 2
    budget: int = field(default=DEFAULT_BUDGET, compare=False)

    kind = "discrete-fg"

    @property
    def name(self) -> str:
        return f"F_{self.rank}"

    @property
    def identity(self):
        return ()

    def mul(self, x, y):
        i, n = 0, min(len(x), len(y))
        while i < n and x[-1 - i] == -y[i]:
            i += 1
        return x[: len(x) - i] + y[i:]

    def inv(self, x):
        return tuple(-g for g in reversed(x))

    @property
    def exp_dim(self) -> int:
        return self.rank

    def abelian_coords(self, x):
        out = [0.0] * self.rank
        for g in x:
            out[abs(g) - 1] += 1.0 if g > 0 else -1.0
        return tuple(out)

    @property
    def generators(self) -> list[tuple[int]]:
        return [(i,) for i in range(1, self.rank + 1)]

    def validate(self, x):
        if isinstance(x, str):
            return self.parse(x)
        try:
            word = tuple(int(g) for g in x)
        except TypeError:
            raise InvalidElement(f"{x!r} is not a word in {self.name}") from None
        if any(g == 0 or abs(g) > self.rank for g in word):
            raise InvalidElement(f"{x!r} uses letters outside {self.name}")
        if any(word[i] == -word[i + 1] for i in range(len(word) - 1)):
            raise InvalidElement(f"{x!r} is not freely reduced")
        return word

    def parse(self, obj):
        """Parse ``"ab"``, ``"b⁻¹a"``, ``"b^-1a"`` or ``"Ba"`` (uppercase = inverse).

        Unlike :meth:`validate`, string input is reduced rather than rejected.
        """
        if not isinstance(obj, str):
            return self.validate(obj)
        s = obj.replace(" ", "").replace(_SUPERSCRIPT_INV, "^-1")
        word: tuple = ()
        for letter, neg in re.findall(r"([A-Za-z])(\^-1)?", s):
            idx = ord(letter.lower()) - ord("a") + 1
            if idx > self.rank:
                raise InvalidElement(f"letter {letter!r} outside {self.name}")
            sign = -1 if (neg or letter.isupper()) else 1
            word = self.mul(word, (sign * idx,))
        if re.sub(r"([A-Za-z])(\^-1)?", "", s):
            raise InvalidElement(f"cannot parse {obj!r} as a word")
        return word

    def format(self, x) -> str:
        if not x:
            return "e"
        return "".join(
            chr(ord("a") + abs(g) - 1) + ("" if g > 0 else _SUPERSCRIPT_INV) for g in x
        )

    def to_json(self, x):
        return self.format(x) if x else ""

    def descriptor(self) -> dict:
        return {"kind": "free", "rank": self.rank}

    def random_element(self, rng, size=4):
        word: tuple = ()
        for _ in range(int(rng.integers(0, size + 1))):
            g = int(rng.integers(1, self.rank + 1)) * int(rng.choice([-1, 1]))
            word = self.mul(word, (g,))
        return word


@dataclass(frozen=True)
class Heisenberg(GroupSpace):
    """Discrete Heisenberg group H3(Z) as triples ``(x, y, z)``.

    Product: ``(x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y')``.
    """

    budget: int = field(default=DEFAULT_BUDGET, compare=False)

    kind = "discrete-fg"
    name = "H3(Z)"

    @property
    def identity(self):
        return (0, 0, 0)

    def mul(self, p, q):
        return (p[0] + q[0], p[1] + q[1], p[2] + q[2] + p[0] * q[1])

    def inv(self, p):
        return (-p[0], -p[1], -p[2] + p[0] * p[1])

    @property
    def exp_dim(self) -> int:
        return 2

    def abelian_coords(self, p):
        return (float(p[0]), float(p[1]))

    def validate(self, x):
        try:
            out = tuple(x)
        except TypeError:
            raise InvalidElement(f"{x!r} is not an element of H3(Z)") from None
        if len(out) != 3 or not all(isinstance(a, (int, np.integer)) for a in out):
            raise InvalidElement(f"{x!r} is not an element of H3(Z)")
        return tuple(int(a) for a in out)

    def descriptor(self) -> dict:
        return {"kind": "heisenberg"}

    def random_element(self, rng, size=4):
        return tuple(int(a) for a in rng.integers(-size, size + 1, 3))


@dataclass(frozen=True)
class CyclicGroup(GroupSpace):
    """Z/mZ with elements ``0 .. m-1``. Only the trivial exponential exists."""

    order: int = 2
    budget: int = field(default=DEFAULT_BUDGET, compare=False)

    kind = "discrete-fg"

    @property
    def name(self) -> str:
        return f"Z/{self.order}Z"

    @property
    def identity(self):
        return 0

    def mul(self, x, y):
        return (x + y) % self.order

    def inv(self, x):
        return (-x) % self.order

    @property
    def exp_dim(self) -> int:
        return 0

    def abelian_coords(self, x):
        return ()

    def validate(self, x):
        if not isinstance(x, (int, np.integer)) or not 0 <= x < self.order:
            raise InvalidElement(f"{x!r} is not an element of {self.name}")
        return int(x)

    def descriptor(self) -> dict:
        return {"kind": "cyclic", "order": self.order}

    def random_element(self, rng, size=4):
        return int(rng.integers(0, self.order))


@dataclass(frozen=True)
class GridAffine(GroupSpace):
    """The affine group ``{x -> a x + b : a > 0}`` on a quadrature window.

    Elements are ``(u, b)`` with ``u = log2 a``; composition is
    ``(a1, b1)(a2, b2) = (a1 a2, a1 b2 + b1)``. The window holds the u-levels
    ``i * du`` for ``|i| <= K`` and the b-levels ``j * h`` for ``|j h| <= B``.
    Right Haar measure is ``da db / a``, which is ``ln 2 du db`` in these
    coordinates, so every grid cell carries the same weight. The modular
    function in closed form is ``1/a``; :meth:`modular_quadrature` recovers it
    from the defining identity ``pi(g_x) = Delta(x) pi(g)``.

    Products are returned unsnapped; interpolation happens in consumers.
    Outside the window the boundary is absorbing.
    """

    K: int = 16
    du: float = 1.0
    h: float = 1.0 / 128
    B: float = 4.0
    budget: int = field(default=DEFAULT_BUDGET, compare=False)

    kind = "grid-lie"

    def __post_init__(self):
        if self.K < 1 or self.du <= 0 or self.h <= 0 or self.B <= 0:
            raise ConfigError("grid parameters must be positive")
        nb = self.B / self.h
        if abs(nb - round(nb)) > 1e-9:
            raise ConfigError("B must be a multiple of h")
        if self.shape[0] * self.shape[1] > self.budget:
            raise ConfigError(f"grid of {self.shape} cells exceeds the support budget")

    @property
    def name(self) -> str:
        return "Aff(R)"

    # -- arithmetic ---------------------------------------------------------

    @property
    def identity(self):
        return (0.0, 0.0)

    def mul(self, x, y):
        return (x[0] + y[0], x[1] + 2.0 ** x[0] * y[1])

    def inv(self, x):
        return (-x[0], -x[1] * 2.0 ** (-x[0]))

    @staticmethod
    def from_ab(a: float, b: float):
        if a <= 0:
            raise InvalidElement("dilation a must be positive")
        return (math.log2(a), float(b))

    @staticmethod
    def to_ab(x) -> tuple[float, float]:
        return (2.0 ** x[0], x[1])

    @property
    def exp_dim(self) -> int:
        return 1

    def abelian_coords(self, x):
        # translations form the commutator subgroup, so exponentials see only u
        return (float(x[0]),)

    def modular(self, x) -> float:
        return 2.0 ** (-x[0])

    def validate(self, x):
        try:
            u, b = (float(c) for c in x)
        except (TypeError, ValueError):
            raise InvalidElement(f"{x!r} is not an element (log2 a, b)") from None
        if not (math.isfinite(u) and math.isfinite(b)):
            raise InvalidElement(f"{x!r} has non-finite coordinates")
        return (u, b)

    def descriptor(self) -> dict:
        return {"kind": "affine", "K": self.K, "du": self.du, "h": self.h, "B": self.B}

    def random_element(self, rng, size=4):
        return (float(rng.uniform(-2, 2)), float(rng.uniform(-1, 1)))

    # -- grid ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.K + 1, 2 * int(round(self.B / self.h)) + 1)

    @property
    def u_levels(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1) * self.du

    @property
    def b_levels(self) -> np.ndarray:
        nb = int(round(self.B / self.h))
        return np.arange(-nb, nb + 1) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.u_levels, self.b_levels, indexing="ij")

    @property
    def cell_weight(self) -> float:
        return LN2 * self.du * self.h

    def in_window(self, x, tol: float = 1e-9) -> bool:
        return abs(x[0]) <= self.K * self.du + tol and abs(x[1]) <= self.B + tol

    def index(self, x) -> tuple[int, int]:
        """Grid index of a grid point; raises if ``x`` is off the window."""
        if not self.in_window(x):
            raise OutsideWindow(f"{x!r} is outside the grid window")
        i = (x[0] + self.K * self.du) / self.du
        j = (x[1] + self.B) / self.h
        ii, jj = int(round(i)), int(round(j))
        if abs(i - ii) > 1e-9 or abs(j - jj) > 1e-9:
            raise InvalidElement(f"{x!r} is not a grid point")
        return ii, jj

    def haar_weight(self, x) -> float:
        if not self.in_window(x):
            raise OutsideWindow(f"{x!r} is outside the grid window")
        return self.cell_weight

    def quadrature(self, g: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
        """Right-Haar integral of a vectorised ``g(u, b)`` over the window."""
        U, Bm = self.mesh()
        return float(np.sum(g(U, Bm)) * self.cell_weight)

    def left_translate_integral(self, g, x) -> float:
        """``pi(g_x)`` with ``g_x(w) = g(x w)``."""
        U, Bm = self.mesh()
        return float(np.sum(g(x[0] + U, x[1] + 2.0 ** x[0] * Bm)) * self.cell_weight)

    def right_translate_integral(self, g, y) -> float:
        """``pi(g_{.y})`` with ``g_{.y}(w) = g(w y)``; equals ``pi(g)`` by right invariance."""
        U, Bm = self.mesh()
        return float(np.sum(g(U + y[0], Bm + 2.0 ** U * y[1])) * self.cell_weight)

    def default_test_bump(self) -> Callable:
        wu = max(2.0, 2 * self.du)
        wb = self.B / 4
        return lambda U, Bm: bump(U / wu) * bump(Bm / wb)

    def modular_quadrature(self, x, g: Callable | None = None) -> float:
        """Modular function from the quadrature ratio ``pi(g_x) / pi(g)``."""
        g = g or self.default_test_bump()
        return self.left_translate_integral(g, x) / self.quadrature(g)


def bump(t):
    """Smooth compactly supported bump on ``(-1, 1)`` with ``bump(0) = 1``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


GROUP_KINDS = {
    "zd": "Z^d, integer lattice (dim)",
    "free": "F_k, free group on k generators (rank)",
    "heisenberg": "H3(Z), discrete Heisenberg group",
    "cyclic": "Z/mZ, finite cyclic group (order)",
    "affine": "Aff(R) on a (log2 a, b) quadrature grid (K, du, h, B)",
}


def make_group(desc: dict) -> GroupSpace:
    """Build a group from its configuration descriptor."""
    desc = dict(desc)
    kind = desc.pop("kind", None)
    budget = desc.pop("budget", DEFAULT_BUDGET)
    try:
        if kind == "zd":
            return IntegerLattice(int(desc.get("dim", 1)), budget=budget)
        if kind == "free":
            return FreeGroup(int(desc.get("rank", 2)), budget=budget)
        if kind == "heisenberg":
            return Heisenberg(budget=budget)
        if kind == "cyclic":
            return CyclicGroup(int(desc["order"]), budget=budget)
        if kind == "affine":
            return GridAffine(
                K=int(desc.get("K", 16)),
                du=float(desc.get("du", 1.0)),
                h=float(desc.get("h", 1.0 / 128)),
                B=float(desc.get("B", 4.0)),
                budget=budget,
            )
    except KeyError as exc:
        raise ConfigError(f"group descriptor missing {exc}") from None
    raise ConfigError(f"unknown group kind {kind!r}; known: {sorted(GROUP_KINDS)}")


def parse_elements(group: GroupSpace, items: Sequence) -> list:
    return [group.parse(x) for x in items]
