"""Graded products, localization, towers, and conjugation operators."""

import random

import pytest
from conftest import cached_algebra, cached_tower

from qhc import flag, linalg
from qhc.flag import (BuildRequired, GradedFunction, LocalizedFunction,
                      ModuleTower, ore_stabilization_check, random_graded)
from qhc.linalg import ONE, ZERO, matvec
from qhc.modules import star_on_spherical
from qhc.scalars import QScalar


def degenerate_levels(n):
    return tuple((j,) for j in range(n + 1))


# -- the invariant generators -------------------------------------------------

def test_rank_one_invariant_is_the_middle_word():
    alg = cached_algebra("A", 1, 0)
    assert alg.generator_weights == ((2,),)
    v = alg.spherical_vector(0)
    m = alg.module((2,))
    assert m.words == ((), (0,), (0, 0))
    assert not v[0] and v[1] and not v[2]


def test_invariants_are_involution_fixed():
    for kind, rank, l0 in [("A", 1, 0), ("A", 2, 0), ("A", 3, 1), ("C", 2, 1)]:
        alg = cached_algebra(kind, rank, l0)
        for k in range(alg.rank):
            v = list(alg.spherical_vector(k))
            m = alg.module(alg.generator_weights[k])
            assert matvec(star_on_spherical(m), v) == v


def test_invariant_sign_is_positive_at_one_half():
    from fractions import Fraction
    for kind, rank, l0 in [("A", 2, 0), ("C", 2, 1)]:
        alg = cached_algebra(kind, rank, l0)
        for k in range(alg.rank):
            pivot = next(x for x in alg.spherical_vector(k) if x)
            assert alg.field.evaluate(pivot, Fraction(1, 2)).value > 0


def test_generator_order_follows_the_cascade():
    alg = cached_algebra("A", 3, 1)
    assert alg.generator_weights == ((1, 0, 1), (0, 2, 0))
    alg2 = cached_algebra("C", 2, 1)
    assert alg2.generator_weights == ((2, 0), (0, 2))


# -- the product ---------------------------------------------------------------

def test_unit_is_neutral():
    alg = cached_algebra("A", 1, 0)
    psi = alg.spherical(0)
    assert alg.multiply(alg.unit(), psi) == psi
    assert alg.multiply(psi, alg.unit()) == psi


def test_highest_vectors_multiply_to_highest():
    alg = cached_algebra("A", 2, 0)
    alg.ensure_mult((1, 1), (1, 1))
    top = GradedFunction({(1, 1): [ONE] + [ZERO] * 7})
    prod = alg.multiply(top, top)
    vec = prod.parts[(2, 2)]
    assert vec[0] == ONE and not any(vec[1:])


def test_squared_invariant_is_nonzero():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    sq = alg.multiply(alg.spherical(0), alg.spherical(0))
    assert sq.weights() == [(4,)]


@pytest.mark.parametrize("kind,rank,l0", [("A", 3, 1), ("C", 2, 1)])
def test_invariant_generators_commute(kind, rank, l0):
    alg = cached_algebra(kind, rank, l0)
    m1, m2 = alg.generator_weights
    alg.ensure_mult(m1, m2)
    alg.ensure_mult(m2, m1)
    a = alg.multiply(alg.spherical(0), alg.spherical(1))
    b = alg.multiply(alg.spherical(1), alg.spherical(0))
    assert a == b and not a.is_zero()


def test_products_of_random_sections_are_nonzero():
    alg = cached_algebra("A", 2, 0)
    alg.ensure_mult((1, 1), (1, 1))
    rng = random.Random(7)
    for _ in range(10):
        f = random_graded(alg, (1, 1), rng)
        g = random_graded(alg, (1, 1), rng)
        assert not alg.multiply(f, g).is_zero()


def test_multiply_requires_built_modules():
    pair = cached_algebra("A", 1, 0).pair
    alg = flag.SphericalAlgebra(pair)
    f = alg.spherical(0)
    with pytest.raises(BuildRequired):
        alg.multiply(f, f)


# -- serialization --------------------------------------------------------------

def test_graded_payload_roundtrip():
    alg = cached_algebra("A", 1, 0)
    f = alg.spherical(0) + alg.unit().scale(QScalar(3, -2))
    back = alg.graded_from_payload(alg.graded_to_payload(f))
    assert back == f


# -- localization ----------------------------------------------------------------

def test_localize_strips_removable_factors():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    sq = alg.multiply(alg.spherical(0), alg.spherical(0))
    x = alg.localize(sq, (1,))
    assert x.denom == (0,) and x.numer == alg.spherical(0)
    y = alg.localize(sq, (2,))
    assert y.denom == (0,) and y.numer == alg.unit()


def test_localized_equality_by_cross_multiplication():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    one_over = LocalizedFunction(alg.unit(), (1,))
    psi_over_sq = LocalizedFunction(alg.spherical(0), (2,))
    assert alg.loc_equal(one_over, psi_over_sq)
    assert not alg.loc_equal(one_over, LocalizedFunction(alg.unit(), (2,)))


def test_commute_past_the_invariant():
    alg = cached_algebra("A", 1, 0)
    sol, p = alg.commute_past(0, alg.spherical(0))
    assert p == 0 and sol == alg.unit()


def test_localized_product_cancels():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    x = LocalizedFunction(alg.spherical(0), (1,))
    prod = alg.loc_multiply(x, x)
    assert prod.denom == (0,) and prod.numer == alg.unit()


# -- the action through the localization -----------------------------------------

def test_torus_letters_act_componentwise():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    x = alg.localize(alg.unit(), (1,))
    for kind in ("K+", "K-"):
        out = alg.localized_action(kind, 0, x)
        assert alg.loc_equal(out, x)


def test_raising_letter_adds_one_denominator():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    x = alg.localize(alg.unit(), (1,))
    out = alg.localized_action("E", 0, x)
    assert out.denom == (2,)
    assert out.numer.weights() == [(2,)]


def test_compact_letters_annihilate_inverted_generators():
    alg = cached_algebra("A", 2, 0)
    alg.ensure_mult((1, 1), (1, 1))
    x = alg.localize(alg.unit(), (1,))
    out = alg.localized_action("E", 1, x)
    assert out.is_zero()
    out = alg.localized_action("F", 1, x)
    assert out.is_zero()


def test_inverted_generator_action_matches_leibniz():
    # knowing E(1) = 0 pins E(psi^{-1}) through the pair (psi^{-1}, psi)
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    inv = LocalizedFunction(alg.unit(), (1,))
    psi = alg.localize(alg.spherical(0), (0,))
    for kind in ("E", "F", "K+", "K-"):
        assert alg.leibniz_check(kind, 0, inv, psi)


def test_geometric_sum_matches_conjugation_powers():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    a = alg.conjugation_on((2,), 0)
    ainv = alg.conjugation_inverse((2,), 0)
    dim = len(a)
    ident = [[ONE if i == j else ZERO for j in range(dim)]
             for i in range(dim)]
    assert alg.geometric_conjugation_sum((2,), 0, 0) == [
        [ZERO] * dim for _ in range(dim)]
    assert alg.geometric_conjugation_sum((2,), 0, 1) == ident
    two = alg.geometric_conjugation_sum((2,), 0, 2)
    assert two == [[x + y for x, y in zip(r1, r2)]
                   for r1, r2 in zip(ident, a)]
    ainv2 = linalg.matmul(ainv, ainv)
    neg = alg.geometric_conjugation_sum((2,), 0, -2)
    assert neg == [[-(x + y) for x, y in zip(r1, r2)]
                   for r1, r2 in zip(ainv, ainv2)]


LEIBNIZ_CASES = [
    ("A", 1, 0, [("E", 0), ("F", 0), ("K+", 0), ("K-", 0)]),
    ("A", 2, 0, [("E", 0), ("E", 1), ("F", 0), ("F", 1), ("K+", 1)]),
    ("C", 2, 1, [("E", 0), ("E", 1), ("F", 1), ("K-", 0)]),
]


@pytest.mark.parametrize("kind,rank,l0,letters", LEIBNIZ_CASES)
def test_leibniz_on_generator_pairs(kind, rank, l0, letters):
    alg = cached_algebra(kind, rank, l0)
    mu = alg.generator_weights[alg.rank - 1]
    alg.ensure_mult(mu, mu)
    e_last = tuple(1 if i == alg.rank - 1 else 0 for i in range(alg.rank))
    f1 = alg.localize(alg.spherical(alg.rank - 1), (0,) * alg.rank)
    f2 = alg.localize(alg.unit(), e_last)
    for letter, node in letters:
        assert alg.leibniz_check(letter, node, f1, f2), (letter, node)


def test_leibniz_on_seeded_localized_pairs():
    alg = cached_algebra("A", 1, 0)
    for n in range(1, 5):
        alg.ensure_module((2 * n,))
    alg.ensure_mult((2,), (2,))
    alg.ensure_mult((4,), (2,))
    alg.ensure_mult((2,), (4,))
    alg.ensure_mult((4,), (4,))
    alg.ensure_mult((6,), (2,))
    alg.ensure_mult((2,), (6,))
    rng = random.Random(11)
    for trial in range(6):
        hw1 = (2 * rng.randint(0, 1),)
        hw2 = (2 * rng.randint(0, 1),)
        f1 = alg.localize(random_graded(alg, hw1, rng), (rng.randint(0, 1),))
        f2 = alg.localize(random_graded(alg, hw2, rng), (rng.randint(0, 1),))
        kind = rng.choice(("E", "F", "K+", "K-"))
        assert alg.leibniz_check(kind, 0, f1, f2), (trial, kind)


# -- stabilization ----------------------------------------------------------------

def test_rank_one_stabilization_examples():
    alg = cached_algebra("A", 1, 0)
    assert ore_stabilization_check(alg, (0,), (2,), (0,)) == 1
    # a type that never appears stabilizes trivially
    assert ore_stabilization_check(alg, (0,), (2,), (1,)) == 1
    assert ore_stabilization_check(alg, (2,), (2,), (0,)) == 1


def test_higher_rank_stabilization_battery():
    alg = cached_algebra("A", 2, 0)
    assert ore_stabilization_check(alg, (0, 0), (1, 1), (0, 0)) == 1
    assert ore_stabilization_check(alg, (0, 0), (1, 1), (1, 1)) == 2
    assert ore_stabilization_check(alg, (1, 1), (1, 1), (1, 1)) == 1


def test_stabilization_reports_monotone_growth():
    alg = cached_algebra("A", 1, 0)
    assert ore_stabilization_check(alg, (0,), (2,), (4,)) == 3


# -- towers -----------------------------------------------------------------------

def test_rank_one_tower_homes():
    tower = cached_tower("A", 1, 0, (0,), degenerate_levels(4))
    homes = {}
    for c in tower.components:
        homes[c.home] = homes.get(c.home, 0) + 1
    assert homes == {(0,): 1, (1,): 2, (2,): 2, (3,): 2, (4,): 2}
    assert all(c.dim == 1 for c in tower.components)


def test_tower_homes_count_new_types():
    tower = cached_tower("A", 2, 0, (0,), degenerate_levels(3))
    homes = {}
    for c in tower.components:
        homes[c.home] = homes.get(c.home, 0) + 1
    assert homes == {(0,): 1, (1,): 3, (2,): 5, (3,): 7}


def test_tower_rejects_gapped_level_sets():
    alg = cached_algebra("A", 1, 0)
    with pytest.raises(ValueError):
        ModuleTower(alg, (0,), [(0,), (2,)])


def test_tower_coords_invert_assemble():
    tower = cached_tower("A", 2, 0, (0,), degenerate_levels(3))
    data = tower.level((2,))
    rng = random.Random(3)
    vec = [QScalar(rng.randint(-2, 2)) for _ in range(data.module.dim)]
    coeffs = data.coords(vec)
    back = data.assemble(coeffs)
    assert back == vec


def test_two_direction_tower_is_consistent():
    # the two-parent level exercises the inclusion-path comparison
    tower = cached_tower("A", 3, 1, (0, 1),
                         ((0, 0), (1, 0), (0, 1), (1, 1)))
    sizes = {lv: len(data.gids) for lv, data in tower.levels.items()}
    assert sizes[(0, 0)] == 1
    total = sum(c.dim for c in tower.components
                if all(h <= n for h, n in zip(c.home, (1, 1))))
    assert total == tower.level((1, 1)).module.dim


# -- conjugation operators ----------------------------------------------------------

def test_conjugation_fixes_transported_constants():
    tower = cached_tower("A", 1, 0, (0,), degenerate_levels(4))
    op = tower.conjugation_operator(0, (0,), (2,))
    assert op.matrix == [[ONE]]


def test_conjugation_eigenvalue_is_a_q_power():
    tower = cached_tower("A", 1, 0, (0,), degenerate_levels(4))
    field = tower.alg.field
    op = tower.conjugation_operator(0, (2,), (1,))
    assert op.matrix == [[field.q_pow(-2)]]
    op2 = tower.conjugation_operator(0, (-2,), (1,))
    assert op2.matrix == [[field.q_pow(2)]]


def test_conjugation_matrices_are_invertible_and_pole_free():
    tower = cached_tower("A", 2, 0, (0,), degenerate_levels(3))
    data = tower.level((1,))
    seen = set()
    for gid in data.gids:
        mu = tower.components[gid].mu
        if mu in seen:
            continue
        seen.add(mu)
        op = tower.conjugation_operator(0, mu, (1,))
        linalg.invert(op.matrix)


def test_conjugation_on_module_space_matches_tower_block():
    alg = cached_algebra("A", 1, 0)
    alg.ensure_mult((2,), (2,))
    a = alg.conjugation_on((2,), 0)
    tower = cached_tower("A", 1, 0, (0,), degenerate_levels(4))
    data = tower.level((1,))
    for gid in data.gids:
        comp = tower.components[gid]
        if comp.home != (1,):
            continue
        img = matvec(a, data.highest[gid])
        coeffs = data.coords(img)
        assert set(coeffs) == {gid}
        op = tower.conjugation_operator(0, comp.mu, (1,))
        assert coeffs[gid][0] == op.matrix[0][0]
