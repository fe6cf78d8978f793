from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratiolab.errors import ConfigError, InvalidElement, OutsideWindow
from ratiolab.groups import (
    CyclicGroup,
    FreeGroup,
    GridAffine,
    Heisenberg,
    IntegerLattice,
    bump,
    make_group,
)

DISCRETE = [IntegerLattice(1), IntegerLattice(3), FreeGroup(2), FreeGroup(3), Heisenberg(), CyclicGroup(7)]


@pytest.mark.parametrize("G", DISCRETE, ids=lambda G: G.name)
def test_group_axioms_on_random_triples(G):
    rng = np.random.default_rng(7)
    e = G.identity
    for _ in range(1000):
        x, y, z = (G.random_element(rng) for _ in range(3))
        assert G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z))
        assert G.mul(x, G.inv(x)) == e
        assert G.mul(e, x) == x == G.mul(x, e)
        assert G.validate(x) == x
        assert G.haar_weight(x) == 1 and G.modular(x) == 1


def test_integer_examples():
    Z = IntegerLattice(1)
    assert Z.mul(Z.validate(2), Z.validate(3)) == (5,)
    assert Z.inv((5,)) == (-5,)
    assert Z.haar_weight((7,)) == 1
    with pytest.raises(InvalidElement):
        Z.validate((1, 2))
    with pytest.raises(InvalidElement):
        Z.validate(1.5)


def test_free_group_words():
    F = FreeGroup(2)
    ab = F.parse("ab")
    assert F.format(F.mul(ab, F.parse("b⁻¹"))) == "a"
    assert F.format(F.inv(ab)) == "b⁻¹a⁻¹"
    assert F.parse("b^-1") == F.parse("B") == (-2,)
    assert F.parse("aA") == () and F.format(()) == "e"
    with pytest.raises(InvalidElement):
        F.validate((1, -1))
    with pytest.raises(InvalidElement):
        F.parse("c")


@given(st.lists(st.sampled_from("aAbB"), max_size=12))
def test_free_group_round_trip(letters):
    F = FreeGroup(2)
    w = F.parse("".join(letters))
    assert F.parse(F.format(w) if w else "") == w
    assert all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def test_heisenberg_commutator_is_central():
    H = Heisenberg()
    x, y = (1, 0, 0), (0, 1, 0)
    comm = H.mul(H.mul(x, y), H.mul(H.inv(x), H.inv(y)))
    assert comm == (0, 0, 1)
    assert H.abelian_coords(comm) == (0.0, 0.0)


def test_affine_examples():
    A = GridAffine()
    x = A.from_ab(2, 1)
    y = A.from_ab(3, 4)
    assert A.to_ab(A.mul(x, y)) == pytest.approx((6.0, 9.0))
    assert A.to_ab(A.inv(x)) == pytest.approx((0.5, -0.5))
    assert A.to_ab(A.mul(x, A.inv(x))) == pytest.approx((1.0, 0.0))


def test_affine_modular_quadrature_oracle():
    A = GridAffine()
    assert A.modular_quadrature(A.from_ab(2, 0)) == pytest.approx(0.5, abs=1e-6)
    assert A.modular_quadrature(A.from_ab(0.5, 0)) == pytest.approx(2.0, abs=1e-6)
    assert A.modular_quadrature((0.0, 0.25)) == pytest.approx(1.0, abs=1e-6)


def test_affine_right_invariance_of_quadrature():
    A = GridAffine()
    g = A.default_test_bump()
    base = A.quadrature(g)
    for y in [(1.0, 0.0), (-1.0, 0.3), (2.0, -0.2), (0.0, 0.1)]:
        assert A.right_translate_integral(g, y) == pytest.approx(base, rel=1e-12)
    # off-lattice u shifts only agree to the Riemann-sum resolution of du = 1
    assert A.right_translate_integral(g, (0.5, -0.2)) == pytest.approx(base, rel=1e-2)


def test_affine_modular_is_exponential():
    A = GridAffine()
    rng = np.random.default_rng(3)
    for _ in range(100):
        x, y = A.random_element(rng), A.random_element(rng)
        assert abs(A.modular(A.mul(x, y)) - A.modular(x) * A.modular(y)) <= 1e-12
        assert A.modular(x) * A.modular(A.inv(x)) == pytest.approx(1.0, abs=1e-12)


def test_affine_window_errors():
    A = GridAffine(K=4)
    with pytest.raises(OutsideWindow):
        A.haar_weight((5.0, 0.0))
    with pytest.raises(InvalidElement):
        A.index((0.5, 0.0))
    assert A.haar_weight((1.0, 0.0)) == pytest.approx(math.log(2) * A.du * A.h)


def test_bump_shape():
    t = np.array([-1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
    b = bump(t)
    assert b[2] == 1.0 and b[0] == b[-1] == b[-2] == 0.0 and b[1] == b[3] > 0


@pytest.mark.parametrize(
    "desc, cls",
    [
        ({"kind": "zd", "dim": 2}, IntegerLattice),
        ({"kind": "free", "rank": 3}, FreeGroup),
        ({"kind": "heisenberg"}, Heisenberg),
        ({"kind": "cyclic", "order": 5}, CyclicGroup),
        ({"kind": "affine", "K": 8}, GridAffine),
    ],
)
def test_make_group(desc, cls):
    assert isinstance(make_group(desc), cls)


def test_make_group_rejects_unknown():
    with pytest.raises(ConfigError):
        make_group({"kind": "sl2"})
    with pytest.raises(ConfigError):
        make_group({"kind": "cyclic"})


@settings(max_examples=50)
@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_heisenberg_inverse(x, y, z):
    H = Heisenberg()
    p = (x, y, z)
    assert H.mul(p, H.inv(p)) == H.identity == H.mul(H.inv(p), p)
