from fractions import Fraction

import pytest

from qhc.rootdata import (
    CartanMatrix,
    NonFiniteType,
    NotHermitian,
    build_root_datum,
    check_hermitian,
    strongly_orthogonal_roots,
)


def closure_positive_roots(cm):
    """Oracle: orbit of the simple roots under simple reflections,
    intersected with the positive cone.  Independent of any convex order."""
    n = cm.rank

    def reflect(i, c):
        coeff = sum(cm.a[i][j] * c[j] for j in range(n))
        out = list(c)
        out[i] -= coeff
        return tuple(out)

    seen = {tuple(1 if j == i else 0 for j in range(n)) for i in range(n)}
    frontier = set(seen)
    while frontier:
        nxt = set()
        for c in frontier:
            for i in range(n):
                r = reflect(i, c)
                if r not in seen and all(x >= 0 for x in r):
                    nxt.add(r)
        seen |= nxt
        frontier = nxt
    return seen


A1 = build_root_datum(CartanMatrix.builtin("A", 1))
A2 = build_root_datum(CartanMatrix.builtin("A", 2))
A3 = build_root_datum(CartanMatrix.builtin("A", 3))
C2 = build_root_datum(CartanMatrix.builtin("C", 2))


def test_builtin_cartan_matrices():
    assert A2.cartan.a == ((2, -1), (-1, 2))
    assert C2.cartan.a == ((2, -2), (-1, 2))
    assert C2.cartan.d == (1, 2)
    b3 = CartanMatrix.builtin("B", 3)
    assert b3.a == ((2, -1, 0), (-1, 2, -1), (0, -2, 2))
    assert b3.d == (2, 2, 1)
    d4 = CartanMatrix.builtin("D", 4)
    assert d4.a[1] == (-1, 2, -1, -1)
    assert d4.d == (1, 1, 1, 1)


def test_from_matrix_validation():
    with pytest.raises(ValueError):
        CartanMatrix.from_matrix([[2, -1], [0, 2]])  # asymmetric zeros
    with pytest.raises(ValueError):
        CartanMatrix.from_matrix([[1, 0], [0, 2]])  # bad diagonal
    with pytest.raises(NonFiniteType) as exc:
        CartanMatrix.from_matrix([[2, -2], [-2, 2]])  # affine A1~
    assert exc.value.order == 2
    with pytest.raises(NonFiniteType):
        CartanMatrix.from_matrix([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_symmetrizer_is_recovered():
    cm = CartanMatrix.from_matrix([[2, -2], [-1, 2]])
    assert cm.d == (1, 2)
    cm = CartanMatrix.from_matrix([[2, -1], [-2, 2]])
    assert cm.d == (2, 1)


def test_positive_root_counts_and_delta():
    assert A1.num_positive == 1 and A1.delta == (1,)
    assert A2.num_positive == 3 and A2.delta == (1, 1)
    assert A3.num_positive == 6 and A3.delta == (1, 1, 1)
    assert C2.num_positive == 4 and C2.delta == (2, 1)


def test_convex_order_matches_closure_oracle():
    for datum in (A1, A2, A3, C2, build_root_datum(CartanMatrix.builtin("B", 3)),
                  build_root_datum(CartanMatrix.builtin("D", 4))):
        oracle = closure_positive_roots(datum.cartan)
        assert set(datum.positive_roots) == oracle
        assert len(datum.positive_roots) == len(oracle)
        assert len(datum.w0_word) == len(oracle)


def test_w0_negates_dominant_chamber():
    for datum in (A2, A3, C2):
        rho = (1,) * datum.rank
        image = datum.w0_on_weight(rho)
        # -w0(rho) is again rho since -w0 permutes the fundamental weights
        assert sorted(-x for x in image) == [1] * datum.rank


def test_pairing_values():
    assert A1.pairing == ((Fraction(1, 2),),)
    assert A2.pairing[0] == (Fraction(2, 3), Fraction(1, 3))
    assert C2.pairing == ((Fraction(1), Fraction(1)), (Fraction(1), Fraction(2)))
    assert A1.root_order() == 2
    assert A2.root_order() == 3
    assert A3.root_order() == 4
    assert C2.root_order() == 1


def test_pairing_of_simple_roots():
    for datum in (A2, A3, C2):
        n = datum.rank
        for i in range(n):
            for j in range(n):
                ai = tuple(1 if k == i else 0 for k in range(n))
                aj = tuple(1 if k == j else 0 for k in range(n))
                expected = datum.cartan.d[i] * datum.cartan.a[i][j]
                assert datum.pair_root_root(ai, aj) == expected
                assert datum.pair_weight_root(datum.root_to_weight(ai), aj) == expected


def test_weyl_dimension_formula():
    assert A1.weyl_dim((0,)) == 1
    assert A1.weyl_dim((3,)) == 4
    assert A2.weyl_dim((1, 0)) == 3
    assert A2.weyl_dim((1, 1)) == 8
    assert A2.weyl_dim((3, 3)) == 64
    assert A3.weyl_dim((1, 0, 1)) == 15
    assert A3.weyl_dim((0, 2, 0)) == 20
    assert A3.weyl_dim((1, 2, 1)) == 175
    assert A3.weyl_dim((2, 0, 2)) == 84
    assert C2.weyl_dim((1, 0)) == 4
    assert C2.weyl_dim((0, 1)) == 5
    assert C2.weyl_dim((2, 0)) == 10
    assert C2.weyl_dim((0, 2)) == 14


def test_check_hermitian():
    p = check_hermitian(A1, 0)
    assert p.h0 == (Fraction(1),)
    p = check_hermitian(A2, 0)
    assert p.k_nodes == (1,)
    p = check_hermitian(C2, 1)
    assert p.l0 == 1
    with pytest.raises(NotHermitian) as exc:
        check_hermitian(C2, 0)
    assert exc.value.coeff == 2
    for l0 in range(3):
        check_hermitian(A3, l0)  # every node of type A is admissible


def test_h0_pairs_correctly_with_simple_roots():
    pair = check_hermitian(A3, 1)
    at = pair.datum.cartan.a
    for j in range(3):
        val = sum(pair.h0[i] * at[i][j] for i in range(3))
        assert val == (2 if j == 1 else 0)


def test_grading_on_noncompact_roots():
    pair = check_hermitian(A3, 1)
    assert all(b[1] in (0, 1) for b in pair.datum.positive_roots)
    assert len(pair.noncompact_positive_roots()) == 4
    assert len(pair.compact_positive_roots()) == 2


def test_cascade_fixtures():
    got = strongly_orthogonal_roots(check_hermitian(A1, 0))
    assert got.gammas == ((1,),) and got.rank == 1
    got = strongly_orthogonal_roots(check_hermitian(A2, 0))
    assert got.gammas == ((1, 1),) and got.rank == 1
    got = strongly_orthogonal_roots(check_hermitian(A3, 1))
    assert got.gammas == ((1, 1, 1), (0, 1, 0)) and got.rank == 2
    got = strongly_orthogonal_roots(check_hermitian(C2, 1))
    assert got.gammas == ((2, 1), (0, 1)) and got.rank == 2


def test_cascade_orthogonality():
    for datum, l0 in ((A3, 1), (C2, 1)):
        pair = check_hermitian(datum, l0)
        sph = strongly_orthogonal_roots(pair)
        for i, g in enumerate(sph.gammas):
            assert g[l0] == 1
            for h in sph.gammas[i + 1:]:
                assert datum.pair_root_root(g, h) == 0


def test_k_weyl_dim():
    pair = check_hermitian(A3, 1)  # unmarked nodes carry A1 x A1
    assert pair.k_weyl_dim((0, 0, 0)) == 1
    assert pair.k_weyl_dim((1, 0, 1)) == 4
    assert pair.k_weyl_dim((2, 0, 0)) == 3
    pair = check_hermitian(A2, 0)
    assert pair.k_weyl_dim((0, 3)) == 4
