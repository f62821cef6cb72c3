"""Multiplication, localization, and conjugation structure on the graded
union of the spherical highest-weight modules.

The spherical weights found by the semigroup scan generate a polynomial
monoid; the direct sum of the corresponding simple modules carries an exact
associative product realized through the diagonal embeddings.  This module
assembles that product, the right-fraction calculus obtained by inverting
the canonical invariant vectors, the component towers used to organize the
localization level by level, and the conjugation operators that make the
inverted generators quasi-commute with everything else.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import linalg
from .linalg import ONE, ZERO, EchelonBasis, matvec
from .modules import (WeightModule, _k_highest_vectors, cartan_multiplication,
                      invariant_vector, simple_module, star_on_spherical)
from .rootdata import HermitianPair, spherical_weight_semigroup
from .scalars import QScalar, ScalarField, pole_free_on_unit_interval


class BuildRequired(RuntimeError):
    """A module or product map outside the prepared range was requested."""


def _veq(u, v):
    return all((a - b).is_zero() for a, b in zip(u, v))


class GradedFunction:
    """Finitely supported map from dominant weights to module coordinates.

    Components with all-zero coordinate vectors are dropped, so structural
    equality of the `parts` dicts is exact equality of functions."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = {tuple(hw): tuple(vec) for hw, vec in parts.items()
                      if any(vec)}

    def is_zero(self):
        return not self.parts

    def __bool__(self):
        return bool(self.parts)

    def weights(self):
        return sorted(self.parts)

    def __add__(self, other):
        out = {hw: list(vec) for hw, vec in self.parts.items()}
        for hw, vec in other.parts.items():
            cur = out.get(hw)
            if cur is None:
                out[hw] = list(vec)
            else:
                out[hw] = [a + b for a, b in zip(cur, vec)]
        return GradedFunction(out)

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def scale(self, c):
        if not c:
            return GradedFunction({})
        return GradedFunction({hw: [c * x for x in vec]
                               for hw, vec in self.parts.items()})

    def __eq__(self, other):
        if not isinstance(other, GradedFunction):
            return NotImplemented
        if set(self.parts) != set(other.parts):
            return False
        return all(_veq(self.parts[hw], other.parts[hw]) for hw in self.parts)

    def __repr__(self):
        return f"GradedFunction({sorted(self.parts)})"


class LocalizedFunction:
    """Right fraction: a graded numerator over a monomial in the inverted
    spherical generators, recorded as the vector of exponents."""

    __slots__ = ("numer", "denom")

    def __init__(self, numer: GradedFunction, denom):
        self.numer = numer
        self.denom = tuple(denom)

    def is_zero(self):
        return self.numer.is_zero()

    def __repr__(self):
        return f"LocalizedFunction({self.numer!r}, denom={self.denom})"


# generator letters understood by the action routines
_PRIMITIVE = ("E", "KF")


class SphericalAlgebra:
    """The exact product on the multiplicity-free graded union of spherical
    modules, together with its Ore localization at the invariant vectors."""

    def __init__(self, pair: HermitianPair, field: ScalarField = None,
                 bound: int = 2, jobs: int = 1):
        self.pair = pair
        self.datum = pair.datum
        self.field = field or ScalarField(self.datum.root_order())
        sph = spherical_weight_semigroup(pair, bound, jobs=jobs)
        acc = (0,) * self.datum.rank
        gens = []
        for g in sph.gammas:
            acc = tuple(a + b for a, b in zip(acc, g))
            gens.append(self.datum.root_to_weight(acc))
        if set(gens) != set(sph.fundamental_spherical):
            raise ArithmeticError(
                "semigroup generators disagree with the orthogonal-root "
                f"partial sums: {sph.fundamental_spherical} vs {gens}")
        # partial sums of the orthogonal cascade fix the generator order
        self.generator_weights = tuple(gens)
        self.rank = len(gens)
        self._modules = {}
        self._mults = {}
        self._rmats = {}
        self._lmats = {}
        self._conj = {}
        self._conj_inv = {}
        self._powers = {}
        self._spherical = None
        self.ensure_module((0,) * self.datum.rank)

    # -- module and product-map caches ---------------------------------------

    def ensure_module(self, hw) -> WeightModule:
        hw = tuple(hw)
        m = self._modules.get(hw)
        if m is None:
            m = simple_module(self.pair, hw, self.field)
            self._modules[hw] = m
        return m

    def module(self, hw) -> WeightModule:
        m = self._modules.get(tuple(hw))
        if m is None:
            raise BuildRequired(f"module for weight {tuple(hw)} not built")
        return m

    def mult(self, a, b):
        key = (tuple(a), tuple(b))
        m = self._mults.get(key)
        if m is None:
            total = tuple(x + y for x, y in zip(*key))
            m = cartan_multiplication(self.module(a), self.module(b),
                                      self.module(total))
            self._mults[key] = m
        return m

    def ensure_mult(self, a, b):
        total = tuple(x + y for x, y in zip(a, b))
        self.ensure_module(a)
        self.ensure_module(b)
        self.ensure_module(total)
        return self.mult(a, b)

    # -- the invariant generators --------------------------------------------

    def _spherical_data(self):
        if self._spherical is None:
            vecs = []
            for mu in self.generator_weights:
                m = self.ensure_module(mu)
                inv = invariant_vector(m)
                if len(inv) != 1:
                    raise ArithmeticError(
                        f"invariant space at {mu} has dimension {len(inv)}")
                v = inv[0]
                fixed = matvec(star_on_spherical(m), v)
                if not _veq(fixed, v):
                    raise ArithmeticError(
                        f"normalized involution moves the invariant at {mu}")
                pivot = next(x for x in v if x)
                if self.field.evaluate(pivot, Fraction(1, 2)).value < 0:
                    v = [-x for x in v]
                vecs.append(tuple(v))
            self._spherical = tuple(vecs)
        return self._spherical

    def spherical_vector(self, k):
        """Coordinates of the k-th invariant generator in its module."""
        return self._spherical_data()[k]

    def spherical(self, k) -> GradedFunction:
        return GradedFunction({self.generator_weights[k]:
                               self.spherical_vector(k)})

    def unit(self) -> GradedFunction:
        return GradedFunction({(0,) * self.datum.rank: (ONE,)})

    # -- the graded product ---------------------------------------------------

    def multiply(self, f: GradedFunction, g: GradedFunction) -> GradedFunction:
        out = GradedFunction({})
        for a, u in f.parts.items():
            for b, v in g.parts.items():
                m = self.mult(a, b)
                total = tuple(x + y for x, y in zip(a, b))
                out = out + GradedFunction({total: m.apply(list(u), list(v))})
        return out

    def power(self, jvec) -> GradedFunction:
        """The ordered product of generator powers with the given exponents."""
        jvec = tuple(jvec)
        if len(jvec) != self.rank or any(j < 0 for j in jvec):
            raise ValueError(f"bad exponent vector {jvec}")
        got = self._powers.get(jvec)
        if got is not None:
            return got
        if not any(jvec):
            out = self.unit()
        else:
            k = max(i for i, j in enumerate(jvec) if j)
            prev = self.power(jvec[:k] + (jvec[k] - 1,) + jvec[k + 1:])
            hw = next(iter(prev.parts))
            self.ensure_mult(hw, self.generator_weights[k])
            out = self.multiply(prev, self.spherical(k))
        self._powers[jvec] = out
        return out

    # -- division by the generators and conjugation --------------------------

    def _rmat(self, k, src):
        """Right multiplication by the k-th generator out of weight src."""
        key = (k, tuple(src))
        m = self._rmats.get(key)
        if m is None:
            mu = self.generator_weights[k]
            m = self.mult(src, mu).right_mult_matrix(
                list(self.spherical_vector(k)))
            self._rmats[key] = m
        return m

    def _lmat(self, k, src):
        key = (k, tuple(src))
        m = self._lmats.get(key)
        if m is None:
            mu = self.generator_weights[k]
            m = self.mult(mu, src).left_mult_matrix(
                list(self.spherical_vector(k)))
            self._lmats[key] = m
        return m

    def right_divide(self, f: GradedFunction, k):
        """g with g * (k-th generator) = f, or None."""
        mu = self.generator_weights[k]
        out = {}
        for hw, vec in f.parts.items():
            src = tuple(a - b for a, b in zip(hw, mu))
            if any(x < 0 for x in src):
                return None
            self.ensure_module(src)
            sol = linalg.solve_rect(self._rmat(k, src), list(vec))
            if sol is None:
                return None
            out[src] = sol
        return GradedFunction(out)

    def left_divide(self, f: GradedFunction, k):
        """g with (k-th generator) * g = f, or None."""
        mu = self.generator_weights[k]
        out = {}
        for hw, vec in f.parts.items():
            src = tuple(a - b for a, b in zip(hw, mu))
            if any(x < 0 for x in src):
                return None
            self.ensure_module(src)
            sol = linalg.solve_rect(self._lmat(k, src), list(vec))
            if sol is None:
                return None
            out[src] = sol
        return GradedFunction(out)

    def conjugation_on(self, space_hw, k):
        """Matrix of x -> (k-th generator) x (k-th generator)^{-1} on the
        module of weight space_hw.  Raises when the conjugate of some basis
        vector fails to be polynomial, which the construction excludes."""
        key = (tuple(space_hw), k)
        a = self._conj.get(key)
        if a is None:
            src = tuple(space_hw)
            mu = self.generator_weights[k]
            self.ensure_mult(src, mu)
            self.ensure_mult(mu, src)
            r = self._rmat(k, src)
            lm = self._lmat(k, src)
            n = len(lm[0]) if lm else 0
            cols = linalg.solve_rect_many(r, [[row[j] for row in lm]
                                              for j in range(n)])
            if any(c is None for c in cols):
                raise ArithmeticError(
                    f"conjugation leaves the graded algebra on {src}")
            a = [[cols[j][i] for j in range(n)] for i in range(n)]
            for row in a:
                for x in row:
                    pole_free_on_unit_interval(x)
            self._conj[key] = a
        return a

    def conjugation_inverse(self, space_hw, k):
        key = (tuple(space_hw), k)
        a = self._conj_inv.get(key)
        if a is None:
            a = linalg.invert(self.conjugation_on(space_hw, k))
            self._conj_inv[key] = a
        return a

    def geometric_conjugation_sum(self, space_hw, k, n: int):
        """sum_{j=0}^{n-1} A^j for n >= 0, and -sum_{j=1}^{-n} A^{-j} for
        n < 0, where A is the conjugation by the k-th generator."""
        dim = self.module(space_hw).dim
        acc = [[ZERO] * dim for _ in range(dim)]
        if n >= 0:
            cur = linalg.identity(dim)
            step = self.conjugation_on(space_hw, k) if n > 1 else None
            for j in range(n):
                acc = [[x + y for x, y in zip(r1, r2)]
                       for r1, r2 in zip(acc, cur)]
                if j + 1 < n:
                    cur = linalg.matmul(step, cur)
        else:
            step = self.conjugation_inverse(space_hw, k)
            cur = step
            for j in range(-n):
                acc = [[x - y for x, y in zip(r1, r2)]
                       for r1, r2 in zip(acc, cur)]
                if j + 1 < -n:
                    cur = linalg.matmul(step, cur)
        return acc

    # -- localization ----------------------------------------------------------

    def localize(self, f: GradedFunction, denom) -> LocalizedFunction:
        return self._strip(LocalizedFunction(f, denom))

    def _strip(self, x: LocalizedFunction) -> LocalizedFunction:
        num, den = x.numer, list(x.denom)
        changed = True
        while changed and num:
            changed = False
            for k in range(self.rank):
                if den[k] <= 0:
                    continue
                q = self.right_divide(num, k)
                if q is not None:
                    num, den[k] = q, den[k] - 1
                    changed = True
        return LocalizedFunction(num, den)

    def loc_equal(self, x: LocalizedFunction, y: LocalizedFunction) -> bool:
        x, y = self._strip(x), self._strip(y)
        top = tuple(max(a, b) for a, b in zip(x.denom, y.denom))
        lhs = self.multiply(x.numer, self.power(
            tuple(t - d for t, d in zip(top, x.denom))))
        rhs = self.multiply(y.numer, self.power(
            tuple(t - d for t, d in zip(top, y.denom))))
        return lhs == rhs

    def loc_add(self, x: LocalizedFunction, y: LocalizedFunction):
        x, y = self._strip(x), self._strip(y)
        top = tuple(max(a, b) for a, b in zip(x.denom, y.denom))
        lhs = self.multiply(x.numer, self.power(
            tuple(t - d for t, d in zip(top, x.denom))))
        rhs = self.multiply(y.numer, self.power(
            tuple(t - d for t, d in zip(top, y.denom))))
        return self._strip(LocalizedFunction(lhs + rhs, top))

    def commute_past(self, k, b: GradedFunction, pmax: int = 6):
        """b' and least p >= 0 with g^{-1} b = b' g^{-p} for the k-th
        inverted generator g, found by left-dividing b g^p.  The
        localization property guarantees some p <= pmax."""
        for p in range(pmax + 1):
            sol = self.left_divide(b, k)
            if sol is not None:
                return sol, p
            hw = self.generator_weights[k]
            for comp in b.weights():
                self.ensure_mult(comp, hw)
            b = self.multiply(b, self.spherical(k))
        raise ArithmeticError(
            f"no commutation exponent up to {pmax} in direction {k}")

    def loc_multiply(self, x: LocalizedFunction, y: LocalizedFunction,
                     pmax: int = 6) -> LocalizedFunction:
        num, extra = y.numer, [0] * self.rank
        for k in range(self.rank):
            for _ in range(x.denom[k]):
                num, p = self.commute_past(k, num, pmax)
                extra[k] += p
        total = self.multiply(x.numer, num)
        den = tuple(e + d for e, d in zip(extra, y.denom))
        return self._strip(LocalizedFunction(total, den))

    # -- the action through the localization ----------------------------------

    def generator_image(self, kind, node, k):
        """Coordinates of the generator letter applied to the k-th invariant."""
        m = self.module(self.generator_weights[k])
        v = list(self.spherical_vector(k))
        if kind == "E":
            return m.apply_letter("E", node, v)
        if kind == "KF":
            return m.apply_letter("K+", node, m.apply_letter("F", node, v))
        raise ValueError(f"unknown primitive letter {kind!r}")

    def _apply_graded(self, kind, node, f: GradedFunction) -> GradedFunction:
        out = {}
        for hw, vec in f.parts.items():
            m = self.module(hw)
            if kind == "KF":
                img = m.apply_letter("K+", node,
                                     m.apply_letter("F", node, list(vec)))
            else:
                img = m.apply_letter(kind, node, list(vec))
            out[hw] = img
        return GradedFunction(out)

    def action_terms(self, kind, node, x: LocalizedFunction):
        """The action of a generator letter as a list of (numerator, denom)
        terms; the letters E and KF are twisted-primitive, so each inverted
        generator contributes one correction term of denominator one higher.

        The correction of generator k is conjugated past the inverted
        generators with larger index only.  The generators commute, so the
        denominator monomial can be normal ordered with larger indices on
        the left, and in that order every conjugation stays inside the
        graded algebra; conjugating by a smaller-index generator leaves it."""
        if kind in ("K+", "K-"):
            return [(self._apply_graded(kind, node, x.numer), x.denom)]
        if kind == "F":
            terms = self.action_terms("KF", node, x)
            return [(self._apply_graded("K-", node, num), den)
                    for num, den in terms]
        if kind not in _PRIMITIVE:
            raise ValueError(f"unknown generator letter {kind!r}")
        terms = [(self._apply_graded(kind, node, x.numer), x.denom)]
        kf = self._apply_graded("K+", node, x.numer)
        if not kf:
            return terms
        for k in range(self.rank):
            if x.denom[k] == 0:
                continue
            mu = self.generator_weights[k]
            base = self.generator_image(kind, node, k)
            if not any(base):
                continue
            s = self.geometric_conjugation_sum(mu, k, -x.denom[k])
            c = matvec(s, base)
            for b in range(k + 1, self.rank):
                if x.denom[b]:
                    ainv = self.conjugation_inverse(mu, b)
                    for _ in range(x.denom[b]):
                        c = matvec(ainv, c)
            if not any(c):
                continue
            num = self.multiply(kf, GradedFunction({mu: c}))
            den = tuple(d + (1 if i == k else 0)
                        for i, d in enumerate(x.denom))
            terms.append((num, den))
        return terms

    def localized_action(self, kind, node, x: LocalizedFunction):
        terms = [self._strip(LocalizedFunction(num, den))
                 for num, den in self.action_terms(kind, node, x)]
        out = LocalizedFunction(GradedFunction({}), (0,) * self.rank)
        for t in terms:
            out = self.loc_add(out, t)
        return out

    def leibniz_check(self, kind, node, f1: LocalizedFunction,
                      f2: LocalizedFunction) -> bool:
        """Compare the action on a product against the coproduct expansion."""
        lhs = self.localized_action(kind, node, self.loc_multiply(f1, f2))
        if kind in ("K+", "K-"):
            rhs = self.loc_multiply(self.localized_action(kind, node, f1),
                                    self.localized_action(kind, node, f2))
        elif kind == "E":
            rhs = self.loc_add(
                self.loc_multiply(self.localized_action("E", node, f1), f2),
                self.loc_multiply(self.localized_action("K+", node, f1),
                                  self.localized_action("E", node, f2)))
        elif kind == "F":
            rhs = self.loc_add(
                self.loc_multiply(self.localized_action("F", node, f1),
                                  self.localized_action("K-", node, f2)),
                self.loc_multiply(f1, self.localized_action("F", node, f2)))
        else:
            raise ValueError(f"unknown generator letter {kind!r}")
        return self.loc_equal(lhs, rhs)

    # -- serialization ---------------------------------------------------------

    def graded_to_payload(self, f: GradedFunction):
        return [[list(hw), [self.field.serialize(x) for x in vec]]
                for hw, vec in sorted(f.parts.items())]

    def graded_from_payload(self, payload) -> GradedFunction:
        return GradedFunction({tuple(hw): [self.field.parse(t) for t in vec]
                               for hw, vec in payload})


# ---------------------------------------------------------------------------
# component towers


class TowerComponent:
    """One copy of a simple degree-zero-subalgebra type inside the tower,
    tracked from the level where it first appears."""

    __slots__ = ("gid", "mu", "home", "words", "word_weights")

    def __init__(self, gid, mu, home, words, word_weights):
        self.gid = gid
        self.mu = mu
        self.home = home
        self.words = words
        self.word_weights = word_weights

    @property
    def dim(self):
        return len(self.words)


class LevelData:
    """A lattice level: its module and the anchored component bases."""

    __slots__ = ("nvec", "module", "gids", "highest", "basis", "_inv",
                 "_components")

    def __init__(self, nvec, module, gids, highest, basis):
        self.nvec = nvec
        self.module = module
        self.gids = gids
        self.highest = highest
        self.basis = basis
        self._inv = {}
        self._components = None

    def coords(self, vec):
        """Decompose a module vector over the anchored component bases."""
        out = {}
        for wt, full in self.module.weight_components(vec).items():
            idxs = self.module.blocks[wt]
            inv, owners = self._inverse(wt)
            sol = matvec(inv, [full[i] for i in idxs])
            for (gid, w), c in zip(owners, sol):
                if c:
                    out.setdefault(gid, {})[w] = c
        return out

    def _inverse(self, wt):
        got = self._inv.get(wt)
        if got is None:
            idxs = self.module.blocks[wt]
            cols = []
            owners = []
            for gid in self.gids:
                comp = self._components[gid]
                for w, wwt in enumerate(comp.word_weights):
                    if wwt == wt:
                        owners.append((gid, w))
                        cols.append([self.basis[gid][w][i] for i in idxs])
            if len(owners) != len(idxs):
                raise ArithmeticError(
                    f"anchored basis does not span weight {wt} at level "
                    f"{self.nvec}")
            mat = [[cols[j][i] for j in range(len(cols))]
                   for i in range(len(idxs))]
            got = (linalg.invert(mat), owners)
            self._inv[wt] = got
        return got

    def assemble(self, coeffs):
        """Module vector from {gid: {word index: coefficient}}."""
        v = self.module.zero_vector()
        for gid, byword in coeffs.items():
            vecs = self.basis[gid]
            for w, c in byword.items():
                if c:
                    col = vecs[w]
                    for i, x in enumerate(col):
                        if x:
                            v[i] = v[i] + c * x
        return v


class ConjugationOperator:
    """Conjugation by one inverted generator restricted to the copies of a
    single type, expressed on the anchored copy index."""

    __slots__ = ("direction", "mu", "gids", "level", "matrix")

    def __init__(self, direction, mu, gids, level, matrix):
        self.direction = direction
        self.mu = mu
        self.gids = gids
        self.level = level
        self.matrix = matrix


class ModuleTower:
    """Modules along a sublattice of generator exponents, with component
    copies aligned across levels through right multiplication by the
    invariant generators.

    Alignment makes the level-to-level identifications coefficient
    preserving: a component copy keeps its basis words from the level where
    it is born, and its basis at any higher level is the image of the basis
    below, so reading a vector in anchored coordinates is the same at every
    level where the copy lives."""

    def __init__(self, alg: SphericalAlgebra, dirs, levels, check=True):
        self.alg = alg
        self.dirs = tuple(dirs)
        self.lattice = sorted({tuple(n) for n in levels},
                              key=lambda n: (sum(n), n))
        present = set(self.lattice)
        for nvec in self.lattice:
            for a, n in enumerate(nvec):
                below = tuple(m - (1 if i == a else 0)
                              for i, m in enumerate(nvec))
                if n > 0 and below not in present:
                    raise ValueError(
                        f"level set is not downward closed at {nvec}")
        self.components = []
        self.levels = {}
        self._incl = {}
        self._lmul = {}
        self._rtensor = {}
        for nvec in self.lattice:
            self._build_level(nvec, check)

    def weight_of(self, nvec):
        rank = self.alg.datum.rank
        out = [0] * rank
        for n, k in zip(nvec, self.dirs):
            mu = self.alg.generator_weights[k]
            for i in range(rank):
                out[i] += n * mu[i]
        return tuple(out)

    def level(self, nvec) -> LevelData:
        got = self.levels.get(tuple(nvec))
        if got is None:
            raise BuildRequired(f"tower level {tuple(nvec)} not built")
        return got

    def inclusion(self, nvec, a):
        """Right multiplication by the a-th tower generator as a matrix from
        level nvec up to nvec + e_a."""
        key = (tuple(nvec), a)
        m = self._incl.get(key)
        if m is None:
            src = self.weight_of(nvec)
            m = self.alg._rmat(self.dirs[a], src)
            self._incl[key] = m
        return m

    def left_mult(self, nvec, a):
        key = (tuple(nvec), a)
        m = self._lmul.get(key)
        if m is None:
            src = self.weight_of(nvec)
            m = self.alg._lmat(self.dirs[a], src)
            self._lmul[key] = m
        return m

    def right_tensor(self, nvec, a):
        """For each basis vector e_q of the a-th generator module, the matrix
        of x -> x * e_q from level nvec up to nvec + e_a."""
        key = (tuple(nvec), a)
        got = self._rtensor.get(key)
        if got is None:
            src = self.weight_of(nvec)
            mu = self.alg.generator_weights[self.dirs[a]]
            mult = self.alg.mult(src, mu)
            dim = self.alg.module(mu).dim
            got = []
            for q in range(dim):
                y = [ZERO] * dim
                y[q] = ONE
                got.append(mult.right_mult_matrix(y))
            self._rtensor[key] = got
        return got

    def _build_level(self, nvec, check):
        alg = self.alg
        hw = self.weight_of(nvec)
        alg.ensure_module(hw)
        for a in range(len(self.dirs)):
            below = tuple(n - (1 if i == a else 0)
                          for i, n in enumerate(nvec))
            if all(x >= 0 for x in below) and below in self.levels:
                alg.ensure_mult(self.weight_of(below),
                                alg.generator_weights[self.dirs[a]])
        module = alg.module(hw)
        highest = {}
        for a in range(len(self.dirs)):
            below = tuple(n - (1 if i == a else 0)
                          for i, n in enumerate(nvec))
            if any(x < 0 for x in below) or below not in self.levels:
                continue
            prev = self.levels[below]
            r = self.inclusion(below, a)
            mapped = {gid: matvec(r, prev.highest[gid]) for gid in prev.gids}
            for gid, vec in mapped.items():
                if gid not in highest:
                    highest[gid] = vec
                elif check and not _veq(vec, highest[gid]):
                    raise ArithmeticError(
                        f"inclusion paths disagree at level {nvec} for "
                        f"component {gid}")
        old_gids = sorted(highest)
        null = _k_highest_vectors(module)
        echelons = {}
        for gid in old_gids:
            mu = self.components[gid].mu
            eb = echelons.setdefault(mu, EchelonBasis())
            if not eb.add(highest[gid]):
                raise ArithmeticError(
                    f"transported copies of {mu} collapse at level {nvec}")
        gids = list(old_gids)
        for mu in sorted(null):
            eb = echelons.setdefault(mu, EchelonBasis())
            for vec in null[mu]:
                if not eb.add(vec):
                    continue
                words, weights = self._select_words(module, mu, vec)
                gid = len(self.components)
                self.components.append(
                    TowerComponent(gid, mu, nvec, words, weights))
                highest[gid] = vec
                gids.append(gid)
            seen = sum(1 for g in gids if self.components[g].mu == mu)
            if seen > self.alg.pair.k_weyl_dim(mu):
                raise ArithmeticError(
                    f"multiplicity {seen} at {mu} exceeds the simple "
                    f"dimension bound at level {nvec}")
        basis = {}
        total = 0
        for gid in gids:
            comp = self.components[gid]
            by_word = {(): highest[gid]}
            ordered = [highest[gid]]
            for w in comp.words[1:]:
                img = module.apply_letter("F", w[0], by_word[w[1:]])
                by_word[w] = img
                ordered.append(img)
            basis[gid] = ordered
            total += len(ordered)
        if total != module.dim:
            raise ArithmeticError(
                f"anchored components cover {total} of {module.dim} "
                f"dimensions at level {nvec}")
        data = LevelData(nvec, module, tuple(gids), highest, basis)
        data._components = self.components
        self.levels[nvec] = data

    def _select_words(self, module, mu, vec):
        pair = self.alg.pair
        kdim = pair.k_weyl_dim(mu)
        words = [()]
        weights = [mu]
        echelon = EchelonBasis()
        echelon.add(vec)
        level = {(): (vec, mu)}
        while level:
            nxt = {}
            for w in sorted(level):
                cur, wt = level[w]
                for j in pair.k_nodes:
                    img = module.apply_letter("F", j, cur)
                    if any(img) and echelon.add(img):
                        nw = (j,) + w
                        alpha = module.datum.simple_roots[j]
                        nwt = tuple(a - b for a, b in zip(wt, alpha))
                        nxt[nw] = (img, nwt)
                        words.append(nw)
                        weights.append(nwt)
            level = nxt
        if len(words) != kdim:
            raise ArithmeticError(
                f"component at {mu} closed at dimension {len(words)}, "
                f"expected {kdim}")
        return tuple(words), tuple(weights)

    # -- conjugation on the copy index ----------------------------------------

    def conjugation_operator(self, a, mu, nvec, check=True):
        """Conjugation by the a-th tower generator on the copies of type mu
        at the given level, as a matrix over the anchored copy index.

        When check is set and the lattice allows it, the same matrix is
        recomputed one level up and the shared rows are compared."""
        nvec = tuple(nvec)
        mat, gids = self._conj_block(a, mu, nvec)
        if check:
            up = tuple(n + (1 if i == a else 0) for i, n in enumerate(nvec))
            up2 = tuple(n + (1 if i == a else 0) for i, n in enumerate(up))
            if up in self.levels and up2 in self.levels:
                mat2, gids2 = self._conj_block(a, mu, up)
                pos = {g: i for i, g in enumerate(gids2)}
                for i, gi in enumerate(gids):
                    for j, gj in enumerate(gids):
                        if not _veq([mat[i][j]], [mat2[pos[gi]][pos[gj]]]):
                            raise ArithmeticError(
                                f"conjugation block changed between levels "
                                f"{nvec} and {up} at type {mu}")
                for g2 in gids2:
                    if g2 in pos and g2 not in gids:
                        for gi in gids:
                            if mat2[pos[g2]][pos[gi]]:
                                raise ArithmeticError(
                                    f"transported copies of {mu} leak into "
                                    f"later ones above level {nvec}")
        linalg.invert(mat)
        for row in mat:
            for x in row:
                pole_free_on_unit_interval(x)
        return ConjugationOperator(a, mu, gids, nvec, mat)

    def _conj_block(self, a, mu, nvec):
        data = self.level(nvec)
        gids = tuple(g for g in data.gids if self.components[g].mu == mu)
        if not gids:
            raise ValueError(f"no copies of {mu} at level {nvec}")
        r = self.inclusion(nvec, a)
        lm = self.left_mult(nvec, a)
        images = [matvec(lm, data.highest[g]) for g in gids]
        sols = linalg.solve_rect_many(r, images)
        mat = [[ZERO] * len(gids) for _ in gids]
        for j, sol in enumerate(sols):
            if sol is None:
                raise ArithmeticError(
                    f"conjugation escapes level {nvec} on a copy of {mu}")
            for gid, byword in data.coords(sol).items():
                comp = self.components[gid]
                for w, c in byword.items():
                    if comp.mu != mu or w != 0:
                        raise ArithmeticError(
                            "conjugation image leaves the highest line of "
                            f"type {mu} at level {nvec}")
                    mat[gids.index(gid)][j] = c
        return mat, gids


# ---------------------------------------------------------------------------
# stabilization and sampling


def ore_stabilization_check(alg: SphericalAlgebra, lam, lamprime, mu,
                            jmax: int = 6, confirm: int = 1):
    """Least j in 1..jmax at which the multiplicity of the type mu stops
    growing between consecutive members of the ray lam + j*lamprime, or None
    when no stop fits inside jmax.  Multiplicities must never decrease;
    right multiplication by the invariant of lamprime is injective, so equal
    consecutive multiplicities give the subspace equality.  A stop only
    counts when it survives `confirm` further steps: multiplicity can sit at
    a plateau (often zero) before the type first enters, and a single equal
    pair does not distinguish that from the terminal value."""
    mults = []
    for j in range(jmax + confirm + 1):
        hw = tuple(a + j * b for a, b in zip(lam, lamprime))
        module = alg.ensure_module(hw)
        mult = len(_k_highest_vectors(module).get(tuple(mu), ()))
        if mults and mult < mults[-1]:
            raise ArithmeticError(
                f"multiplicity of {mu} dropped from {mults[-1]} to {mult} "
                f"at step {j}")
        mults.append(mult)
        j0 = j - confirm
        if 1 <= j0 <= jmax and len(set(mults[j0 - 1:])) == 1:
            return j0
    return None


def random_graded(alg: SphericalAlgebra, hw, rng: random.Random):
    """A nonzero homogeneous element with small random coordinates."""
    module = alg.ensure_module(hw)
    while True:
        vec = []
        for _ in range(module.dim):
            c = rng.randint(-2, 2)
            vec.append(QScalar(c, rng.randint(0, 2)) if c else ZERO)
        if any(vec):
            return GradedFunction({tuple(hw): vec})
