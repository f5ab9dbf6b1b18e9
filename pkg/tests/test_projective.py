import random
from fractions import Fraction

import pytest

from arrange.polys import IntPoly
from arrange.projective import (CohClass, DegreeMismatch, NegativeCodim,
                                ProjProduct, SpaceMap, SpaceMismatch,
                                betti_poly, compose, cup, identity_map,
                                poincare_pair, power_inclusion, pullback,
                                pushforward)

P1 = ProjProduct((1,))
P2 = ProjProduct((2,))
P3 = ProjProduct((3,))
P1xP1 = ProjProduct((1, 1))


def test_cup_on_p1xp1():
    h1, h2 = P1xP1.generators()
    assert cup(h1, h2) == P1xP1.monomial_class((1, 1))


def test_cup_truncation_on_p2():
    h = P2.generator(0)
    assert cup(h, h) == P2.monomial_class((2,))
    assert cup(h, P2.monomial_class((2,))).is_zero()


def test_cup_square_of_sum():
    h1, h2 = P1xP1.generators()
    s = h1 + h2
    sq = cup(s, s)
    assert sq == P1xP1.monomial_class((1, 1)).scale(2)


def test_cup_space_mismatch():
    with pytest.raises(SpaceMismatch):
        cup(P1.generator(0), P2.generator(0))


def test_pullback_diagonal_truncates():
    delta = power_inclusion(P1, [0, 0])
    h1h2 = P1xP1.monomial_class((1, 1))
    assert pullback(delta, h1h2).is_zero()  # h^2 = 0 on P^1


def test_pullback_coordinate_inclusion():
    inc = SpaceMap(P1, P2, (P1.generator(0),))
    assert pullback(inc, P2.generator(0)) == P1.generator(0)


def test_pullback_projection():
    # projection P1xP1 -> P1 recorded on generators: h pulls to h1
    proj = SpaceMap(P1xP1, P1, (P1xP1.generator(0),))
    assert pullback(proj, P1.generator(0)) == P1xP1.generator(0)


def test_poincare_pair_p2():
    h = P2.generator(0)
    assert poincare_pair(h, h) == 1


def test_poincare_pair_p1xp1():
    h1, h2 = P1xP1.generators()
    assert poincare_pair(h1, h2) == 1
    assert poincare_pair(h1, h1) == 0
    assert poincare_pair(h1 + h2, h1) == 1


def test_poincare_pair_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        poincare_pair(P2.generator(0), P2.one())


def test_pushforward_subspace_inclusion():
    for m in (1, 2):
        src = ProjProduct((m,))
        dst = ProjProduct((m + 1,))
        inc = SpaceMap(src, dst, (src.generator(0),))
        for j in range(m + 1):
            assert pushforward(inc, src.monomial_class((j,))) == \
                dst.monomial_class((j + 1,))


def test_pushforward_diagonal():
    delta = power_inclusion(P1, [0, 0])
    assert pushforward(delta, P1.one()) == \
        P1xP1.monomial_class((1, 0)) + P1xP1.monomial_class((0, 1))
    assert pushforward(delta, P1.generator(0)) == P1xP1.monomial_class((1, 1))


def test_pushforward_diagonal_p2():
    # class of the diagonal in P^2 x P^2: full middle row of the pairing
    delta = power_inclusion(P2, [0, 0])
    got = pushforward(delta, P2.one())
    expect = (ProjProduct((2, 2)).monomial_class((2, 0))
              + ProjProduct((2, 2)).monomial_class((1, 1))
              + ProjProduct((2, 2)).monomial_class((0, 2)))
    assert got == expect


def test_pushforward_negative_codim_rejected():
    proj = SpaceMap(P1xP1, P1, (P1xP1.generator(0),))
    with pytest.raises(NegativeCodim):
        pushforward(proj, P1xP1.one())


def test_betti_poly_examples():
    assert betti_poly(P2) == IntPoly([1, 0, 1, 0, 1])
    assert betti_poly(P1xP1) == IntPoly([1, 0, 2, 0, 1])
    assert betti_poly(ProjProduct((1, 1, 1))) == IntPoly([1, 0, 3, 0, 3, 0, 1])


def _random_class(rng, space, degree):
    coeffs = {}
    for mono in space.monomials(degree // 2):
        if rng.random() < 0.6:
            coeffs[mono] = Fraction(rng.randint(-3, 3))
    return CohClass(space, degree, coeffs)


def test_projection_formula():
    # f_*(f^* b . a) = b . f_* a
    rng = random.Random(3)
    maps = [
        SpaceMap(P1, P2, (P1.generator(0),)),
        power_inclusion(P1, [0, 0]),
        power_inclusion(P2, [0, 0]),
    ]
    for f in maps:
        for _ in range(10):
            da = 2 * rng.randint(0, f.source.dim)
            db = 2 * rng.randint(0, (2 * f.target.dim - da - 2 * f.codim) // 2
                                 if 2 * f.target.dim >= da + 2 * f.codim else 0)
            a = _random_class(rng, f.source, da)
            b = _random_class(rng, f.target, db)
            lhs = pushforward(f, cup(pullback(f, b), a))
            rhs = cup(b, pushforward(f, a))
            assert lhs == rhs


def test_pushforward_functoriality():
    # coordinate chain P1 -> P2 -> P3
    f = SpaceMap(P1, P2, (P1.generator(0),))
    g = SpaceMap(P2, P3, (P2.generator(0),))
    gf = compose(g, f)
    for j in (0, 1):
        a = P1.monomial_class((j,))
        assert pushforward(gf, a) == pushforward(g, pushforward(f, a))


def test_self_intersection_is_euler_class():
    # hypersurface-type inclusion: pulling back its own pushforward of 1
    # gives the hyperplane class
    inc = SpaceMap(P2, P3, (P2.generator(0),))
    cls = pullback(inc, pushforward(inc, P2.one()))
    assert cls == P2.generator(0)


def test_pairing_matrix_is_antidiagonal_permutation():
    for space in (P2, P1xP1, ProjProduct((1, 2))):
        for k in range(space.dim + 1):
            monos = space.monomials(k)
            duals = space.monomials(space.dim - k)
            top = space.top()
            for e in monos:
                hits = [f for f in duals
                        if poincare_pair(space.monomial_class(e),
                                         space.monomial_class(f)) != 0]
                assert hits == [tuple(t - x for t, x in zip(top, e))]


def test_identity_map_roundtrip():
    ident = identity_map(P1xP1)
    a = _random_class(random.Random(9), P1xP1, 2)
    assert pullback(ident, a) == a
    assert pushforward(ident, a) == a


def test_point_factor():
    # a zero-dimensional factor contributes nothing but a unit
    pt = ProjProduct((0,))
    assert betti_poly(pt) == IntPoly([1])
    inc = SpaceMap(pt, P3, (pt.generator(0),))
    assert pushforward(inc, pt.one()) == P3.monomial_class((3,))
    assert pullback(inc, P3.generator(0)).is_zero()


def test_mixed_degree_rejected():
    with pytest.raises(DegreeMismatch):
        CohClass(P2, 2, {(0,): Fraction(1), (1,): Fraction(1)})
