"""Root systems, Weyl combinatorics, and the data of a Hermitian pair.

Conventions, fixed once for the whole package:
  * a[i][j] = alpha_j(h_i), so the weight coordinates of alpha_j are the
    j-th column of the Cartan matrix;
  * the invariant pairing is (alpha_i, alpha_j) = d_i a[i][j];
  * weights are plain tuples in the fundamental-weight basis, roots are
    plain tuples of simple-root coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

Weight = tuple
Root = tuple


class NonFiniteType(ValueError):
    """Symmetrized matrix has a non-positive leading principal minor."""

    def __init__(self, order, minor):
        self.order = order
        self.minor = minor
        super().__init__(f"leading principal minor of order {order} is {minor}")


class NotHermitian(ValueError):
    """Marked node has highest-root coefficient != 1."""

    def __init__(self, node, coeff):
        self.node = node
        self.coeff = coeff
        super().__init__(f"node {node} has highest-root coefficient {coeff}")


class InsufficientBound(ValueError):
    """Spherical-weight search bound too small to see all generators."""

    def __init__(self, found, expected, bound):
        self.found = found
        self.expected = expected
        self.bound = bound
        super().__init__(
            f"found {found} semigroup generators, expected {expected}, "
            f"within weight-size bound {bound}")


def _det(rows):
    n = len(rows)
    m = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def _solve_fractions(rows, rhs):
    n = len(rows)
    m = [[Fraction(x) for x in row] + [Fraction(r)] for row, r in zip(rows, rhs)]
    for c in range(n):
        p = next(r for r in range(c, n) if m[r][c])
        m[c], m[p] = m[p], m[c]
        m[c] = [x / m[c][c] for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(row[n] for row in m)


@dataclass(frozen=True)
class CartanMatrix:
    a: tuple
    d: tuple

    @property
    def rank(self):
        return len(self.a)

    @classmethod
    def builtin(cls, kind: str, rank: int) -> "CartanMatrix":
        if rank < 1 or (kind == "D" and rank < 3):
            raise ValueError(f"rank {rank} invalid for type {kind}")
        n = rank
        a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

        def chain(i, j):
            a[i][j] = a[j][i] = -1

        if kind in ("A", "B", "C"):
            for i in range(n - 1):
                chain(i, i + 1)
        if kind == "A":
            d = [1] * n
        elif kind == "B":
            # last node short: d = (2,..,2,1), double bond points at it
            d = [2] * (n - 1) + [1]
            if n >= 2:
                a[n - 1][n - 2] = -2
        elif kind == "C":
            # last node long: d = (1,..,1,2)
            d = [1] * (n - 1) + [2]
            if n >= 2:
                a[n - 2][n - 1] = -2
        elif kind == "D":
            for i in range(n - 2):
                chain(i, i + 1)
            chain(n - 3, n - 1)
            d = [1] * n
        else:
            raise ValueError(f"unknown type {kind!r}")
        return cls.from_matrix(a, d=tuple(d))

    @classmethod
    def from_matrix(cls, rows, d=None) -> "CartanMatrix":
        a = tuple(tuple(int(x) for x in row) for row in rows)
        n = len(a)
        if any(len(row) != n for row in a):
            raise ValueError("matrix is not square")
        for i in range(n):
            if a[i][i] != 2:
                raise ValueError(f"diagonal entry a[{i}][{i}] != 2")
            for j in range(n):
                if i != j and a[i][j] > 0:
                    raise ValueError(f"positive off-diagonal entry a[{i}][{j}]")
                if (a[i][j] == 0) != (a[j][i] == 0):
                    raise ValueError(f"asymmetric zero pattern at ({i},{j})")
        if d is None:
            d = cls._symmetrizer(a)
        d = tuple(int(x) for x in d)
        if any(x < 1 for x in d):
            raise ValueError("symmetrizer entries must be positive")
        for i in range(n):
            for j in range(n):
                if d[i] * a[i][j] != d[j] * a[j][i]:
                    raise ValueError(f"d does not symmetrize a at ({i},{j})")
        for k in range(1, n + 1):
            minor = _det([[d[i] * a[i][j] for j in range(k)] for i in range(k)])
            if minor <= 0:
                raise NonFiniteType(k, minor)
        return cls(a, d)

    @staticmethod
    def _symmetrizer(a):
        n = len(a)
        ratio = [None] * n
        for start in range(n):
            if ratio[start] is not None:
                continue
            ratio[start] = Fraction(1)
            stack = [start]
            while stack:
                i = stack.pop()
                for j in range(n):
                    if i != j and a[i][j]:
                        want = ratio[i] * Fraction(a[i][j], a[j][i])
                        if ratio[j] is None:
                            ratio[j] = want
                            stack.append(j)
                        elif ratio[j] != want:
                            raise ValueError("matrix admits no symmetrizer")
        scale = lcm(*(r.denominator for r in ratio))
        d = [r * scale for r in ratio]
        g = 0
        for x in d:
            g = gcd_int(g, int(x))
        return tuple(int(x) // g for x in d)


def gcd_int(a, b):
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class RootDatum:
    cartan: CartanMatrix
    simple_roots: tuple          # weight coordinates, one per node
    positive_roots: tuple        # root coordinates, convex order
    delta: Root                  # root coordinates of the highest root
    w0_word: tuple
    pairing: tuple               # (varpi_i, varpi_j) as Fractions

    @property
    def rank(self):
        return self.cartan.rank

    @property
    def num_positive(self):
        return len(self.positive_roots)

    # -- basic coordinate plumbing -------------------------------------------

    def root_to_weight(self, c: Root) -> Weight:
        a = self.cartan.a
        return tuple(sum(a[i][j] * c[j] for j in range(self.rank))
                     for i in range(self.rank))

    def reflect_weight(self, i: int, w: Weight) -> Weight:
        ai = self.simple_roots[i]
        return tuple(w[j] - w[i] * ai[j] for j in range(self.rank))

    def reflect_root(self, i: int, c: Root) -> Root:
        coeff = sum(self.cartan.a[i][j] * c[j] for j in range(self.rank))
        return tuple(x - coeff * (1 if j == i else 0)
                     for j, x in enumerate(c))

    def w0_on_weight(self, w: Weight) -> Weight:
        for i in self.w0_word:
            w = self.reflect_weight(i, w)
        return w

    # -- the invariant bilinear form -----------------------------------------

    def pair_weight_weight(self, u: Weight, v: Weight) -> Fraction:
        W = self.pairing
        return sum(Fraction(u[i]) * W[i][j] * v[j]
                   for i in range(self.rank) for j in range(self.rank)
                   if u[i] and v[j])

    def pair_weight_root(self, u: Weight, c: Root) -> Fraction:
        d = self.cartan.d
        return sum(Fraction(u[j] * d[j] * c[j]) for j in range(self.rank))

    def pair_root_root(self, b: Root, c: Root) -> int:
        a, d = self.cartan.a, self.cartan.d
        return sum(b[i] * d[i] * a[i][j] * c[j]
                   for i in range(self.rank) for j in range(self.rank))

    def root_order(self) -> int:
        """Least D with every (varpi_i, varpi_j) in (1/D) * Z."""
        return lcm(*(x.denominator for row in self.pairing for x in row))

    # -- representation-theoretic helpers -------------------------------------

    def is_dominant(self, w: Weight) -> bool:
        return all(x >= 0 for x in w)

    def weyl_dim(self, hw: Weight) -> int:
        rho_plus = tuple(x + 1 for x in hw)
        num, den = Fraction(1), Fraction(1)
        rho = (1,) * self.rank
        for beta in self.positive_roots:
            num *= self.pair_weight_root(rho_plus, beta)
            den *= self.pair_weight_root(rho, beta)
        out = num / den
        if out.denominator != 1 or out <= 0:
            raise ArithmeticError(f"dimension formula gave {out} at {hw}")
        return int(out)


def build_root_datum(cartan: CartanMatrix) -> RootDatum:
    n = cartan.rank
    simple = tuple(tuple(cartan.a[i][j] for i in range(n)) for j in range(n))

    # greedy descent from rho to -rho; the recorded word is reduced for w0
    def reflect(i, w):
        col = simple[i]
        return tuple(w[j] - w[i] * col[j] for j in range(n))

    u = (1,) * n
    word = []
    while any(x > 0 for x in u):
        i = next(j for j in range(n) if u[j] > 0)
        word.append(i)
        u = reflect(i, u)
    if u != tuple(-1 for _ in range(n)):
        raise ArithmeticError("descent did not reach the antidominant chamber")

    # convex order: beta_m = s_{i_1}...s_{i_{m-1}} alpha_{i_m}, in root coords
    def reflect_root(i, c):
        coeff = sum(cartan.a[i][j] * c[j] for j in range(n))
        out = list(c)
        out[i] -= coeff
        return tuple(out)

    roots = []
    for m, im in enumerate(word):
        c = tuple(1 if j == im else 0 for j in range(n))
        for k in range(m - 1, -1, -1):
            c = reflect_root(word[k], c)
        roots.append(c)
    if len(set(roots)) != len(roots):
        raise ArithmeticError("convex order repeated a root")
    for c in roots:
        if any(x < 0 for x in c):
            raise ArithmeticError("convex order produced a negative root")

    heights = [sum(c) for c in roots]
    top = max(heights)
    if heights.count(top) != 1:
        raise ArithmeticError("highest root is not unique")
    delta = roots[heights.index(top)]

    # pairing of fundamental weights: d_i * (inverse Cartan matrix)
    cols = []
    for j in range(n):
        cols.append(_solve_fractions(cartan.a, [1 if i == j else 0 for i in range(n)]))
    inv = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
    pairing = tuple(tuple(Fraction(cartan.d[i]) * inv[i][j] for j in range(n))
                    for i in range(n))
    for i in range(n):
        for j in range(n):
            if pairing[i][j] != pairing[j][i]:
                raise ArithmeticError("pairing matrix is not symmetric")

    return RootDatum(cartan, simple, tuple(roots), delta, tuple(word), pairing)


@dataclass(frozen=True)
class HermitianPair:
    datum: RootDatum
    l0: int                      # marked node, 0-based
    h0: tuple                    # coefficients of h0 over the coroot basis
    k_nodes: tuple

    @property
    def rank(self):
        return self.datum.rank

    def is_compact(self, c: Root) -> bool:
        return c[self.l0] == 0

    def compact_positive_roots(self):
        return tuple(c for c in self.datum.positive_roots if c[self.l0] == 0)

    def noncompact_positive_roots(self):
        return tuple(c for c in self.datum.positive_roots if c[self.l0] == 1)

    def is_k_dominant(self, w: Weight) -> bool:
        return all(w[i] >= 0 for i in self.k_nodes)

    def k_weyl_dim(self, hw: Weight) -> int:
        """Dimension of the simple degree-zero-subalgebra module with
        highest weight hw (hw need only be dominant on the unmarked nodes)."""
        datum = self.datum
        rho_k = tuple(0 if j == self.l0 else 1 for j in range(self.rank))
        shifted = tuple(h + r for h, r in zip(hw, rho_k))
        num, den = Fraction(1), Fraction(1)
        for beta in self.compact_positive_roots():
            num *= datum.pair_weight_root(shifted, beta)
            den *= datum.pair_weight_root(rho_k, beta)
        out = num / den
        if out.denominator != 1 or out <= 0:
            raise ArithmeticError(f"k-dimension formula gave {out} at {hw}")
        return int(out)


def check_hermitian(datum: RootDatum, l0: int) -> HermitianPair:
    if not 0 <= l0 < datum.rank:
        raise ValueError(f"node {l0} out of range")
    c = datum.delta[l0]
    if c != 1:
        raise NotHermitian(l0, c)
    for beta in datum.positive_roots:
        if beta[l0] not in (0, 1):
            raise ArithmeticError(f"grading violated by root {beta}")
    at = [[datum.cartan.a[i][j] for i in range(datum.rank)]
          for j in range(datum.rank)]
    h0 = _solve_fractions(at, [2 if j == l0 else 0 for j in range(datum.rank)])
    k_nodes = tuple(i for i in range(datum.rank) if i != l0)
    return HermitianPair(datum, l0, h0, k_nodes)


@dataclass(frozen=True)
class SphericalData:
    gammas: tuple
    rank: int
    fundamental_spherical: tuple = ()


def strongly_orthogonal_roots(pair: HermitianPair) -> SphericalData:
    datum = pair.datum
    chosen = []
    pool = list(pair.noncompact_positive_roots())
    while pool:
        best = max(pool, key=lambda c: (sum(c), c))
        for other in pool:
            if other != best and any(b < o for b, o in zip(best, other)):
                raise ArithmeticError(
                    f"no maximal root among the remaining candidates: "
                    f"{best} does not dominate {other}")
        chosen.append(best)
        pool = [c for c in pool
                if c != best and datum.pair_root_root(best, c) == 0]
    if chosen[0] != datum.delta:
        raise ArithmeticError("cascade did not start at the highest root")
    for i, g in enumerate(chosen):
        for h in chosen[i + 1:]:
            if datum.pair_root_root(g, h) != 0:
                raise ArithmeticError("cascade output is not orthogonal")
        wt = datum.root_to_weight(g)
        back = tuple(-x for x in datum.w0_on_weight(wt))
        if back != wt:
            raise ArithmeticError(f"root {g} is not fixed by -w0")
    return SphericalData(tuple(chosen), len(chosen))


def _dominant_weights(rank, bound):
    out = []

    def rec(prefix, left):
        if len(prefix) == rank:
            out.append(tuple(prefix))
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v)

    rec([], bound)
    return out


def _invariant_dim_worker(args):
    kind_or_rows, d, l0, hw = args
    if isinstance(kind_or_rows, str):
        cm = CartanMatrix.builtin(kind_or_rows, len(hw))
    else:
        cm = CartanMatrix.from_matrix(kind_or_rows, d=d)
    pair = check_hermitian(build_root_datum(cm), l0)
    from .modules import invariant_vector, simple_module
    vecs = invariant_vector(simple_module(pair, hw))
    return hw, len(vecs)


def spherical_weight_semigroup(pair: HermitianPair, bound: int,
                               jobs: int = 1, builtin_kind=None) -> SphericalData:
    """Scan all dominant weights with coordinate sum <= bound for those whose
    simple module contains a one-dimensional space of degree-zero-subalgebra
    invariants, then extract the minimal generating set of that semigroup."""
    from .modules import invariant_vector, simple_module

    cascade = strongly_orthogonal_roots(pair)
    datum = pair.datum
    weights = [w for w in _dominant_weights(datum.rank, bound) if any(w)]
    weights.sort(key=lambda w: (sum(w), w))

    spherical = []
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        spec = (builtin_kind if builtin_kind is not None
                else [list(r) for r in pair.datum.cartan.a])
        args = [(spec, pair.datum.cartan.d, pair.l0, w) for w in weights]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for hw, ninv in pool.map(_invariant_dim_worker, args):
                if ninv == 1:
                    spherical.append(hw)
                elif ninv > 1:
                    raise ArithmeticError(f"invariants not multiplicity-free at {hw}")
    else:
        for hw in weights:
            vecs = invariant_vector(simple_module(pair, hw))
            if len(vecs) == 1:
                spherical.append(hw)
            elif len(vecs) > 1:
                raise ArithmeticError(f"invariants not multiplicity-free at {hw}")

    sph = set(spherical)
    gens = []
    for w in spherical:
        if not any(tuple(a - b for a, b in zip(w, v)) in sph
                   for v in spherical if v != w and all(a >= b for a, b in zip(w, v))):
            gens.append(w)

    # the discovered set must itself be the truncated semigroup on the gens
    span = {(0,) * datum.rank}
    for g in sorted(gens, key=sum):
        grown = set(span)
        for base in span:
            k = 1
            nxt = tuple(a + k * b for a, b in zip(base, g))
            while sum(nxt) <= bound:
                grown.add(nxt)
                k += 1
                nxt = tuple(a + k * b for a, b in zip(base, g))
        span = grown
    if span - {(0,) * datum.rank} != sph:
        raise ArithmeticError("spherical weights do not form the expected semigroup")

    if len(gens) != cascade.rank:
        raise InsufficientBound(len(gens), cascade.rank, bound)

    # each generator must lie in the rational span of the cascade roots
    gamma_wts = [datum.root_to_weight(g) for g in cascade.gammas]
    for mu in gens:
        if not _in_span(gamma_wts, mu):
            raise ArithmeticError(f"generator {mu} outside the cascade span")

    return SphericalData(cascade.gammas, cascade.rank, tuple(sorted(gens)))


def _in_span(vectors, target):
    rows = [[Fraction(v[i]) for v in vectors] for i in range(len(target))]
    rhs = [Fraction(x) for x in target]
    # eliminate; inconsistent row means target is outside the span
    cols = len(vectors)
    aug = [row + [r] for row, r in zip(rows, rhs)]
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, len(aug)) if aug[i][c]), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        aug[r] = [x / aug[r][c] for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        r += 1
    return all(row[cols] == 0 for row in aug[r:])
