"""Spherical principal series with a continued exponent.

The localized function algebra acts on itself through the generator
letters; the twisted-primitive ones contribute one correction term per
inverted generator, and the correction coefficient is a geometric sum in
the conjugation operator whose length is the inversion exponent.  Replacing
that integer exponent by a formal parameter turns the action into a family
of representations.  Coefficients live in a Laurent-polynomial ring with
one pair (t_k, u_k) per inverted generator, where t_k stands for the
exponential s**u_k, so substituting an integer for u_k collapses t_k to a
power of s and recovers the integer-exponent action on the nose.

States are kept in the anchored component coordinates of a module tower.
The anchored bases are aligned across levels, so a finite sum of terms of
different inversion depths is zero precisely when every anchored
coefficient vanishes; no common-denominator assembly is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from . import linalg
from .flag import (BuildRequired, GradedFunction, LocalizedFunction,
                   ModuleTower, SphericalAlgebra)
from .linalg import ONE, ZERO, matvec
from .scalars import QScalar
from .uqg import UqElement, defining_relations


class SpectrumError(ArithmeticError):
    """A conjugation operator has an eigenvalue outside the group of
    q-powers, so its formal powers cannot be interpolated."""


# ---------------------------------------------------------------------------
# the coefficient ring of the continued exponent


class ContinuedScalar:
    """Finite sum of terms c * t^m * u^e over the base scalar field.

    Keys are pairs (m, e) of integer tuples, one slot per inverted
    generator; m may be negative, e may not.  t_k denotes s**u_k, so the
    substitution u_k = n sends t_k to s**n."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = {}
        if terms:
            for key, c in terms.items():
                if not c:
                    continue
                acc = self.terms.get(key)
                acc = c if acc is None else acc + c
                if acc:
                    self.terms[key] = acc
                else:
                    self.terms.pop(key, None)

    @classmethod
    def constant(cls, nvars, c):
        zero = (0,) * nvars
        return cls(nvars, {(zero, zero): c})

    @classmethod
    def monomial(cls, nvars, slot, m):
        mkey = tuple(m if i == slot else 0 for i in range(nvars))
        return cls(nvars, {(mkey, (0,) * nvars): ONE})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other):
        if self.nvars != other.nvars:
            raise ValueError("mixed parameter counts")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            acc = out.get(key)
            acc = c if acc is None else acc + c
            if acc:
                out[key] = acc
            else:
                out.pop(key, None)
        res = ContinuedScalar(self.nvars)
        res.terms = out
        return res

    def __neg__(self):
        res = ContinuedScalar(self.nvars)
        res.terms = {key: -c for key, c in self.terms.items()}
        return res

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        out = {}
        for (m1, e1), c1 in self.terms.items():
            for (m2, e2), c2 in other.terms.items():
                key = (tuple(a + b for a, b in zip(m1, m2)),
                       tuple(a + b for a, b in zip(e1, e2)))
                c = c1 * c2
                acc = out.get(key)
                acc = c if acc is None else acc + c
                if acc:
                    out[key] = acc
                else:
                    out.pop(key, None)
        res = ContinuedScalar(self.nvars)
        res.terms = out
        return res

    def scale(self, c):
        if not c:
            return ContinuedScalar(self.nvars)
        res = ContinuedScalar(self.nvars)
        res.terms = {key: x * c for key, x in self.terms.items()}
        return res

    def __eq__(self, other):
        if not isinstance(other, ContinuedScalar):
            return NotImplemented
        return self.nvars == other.nvars and not (self - other)

    def shift(self, slot, h, field):
        """Substitute u_slot - h for u_slot; h is an integer."""
        if h == 0:
            return self
        out = ContinuedScalar(self.nvars)
        for (m, e), c in self.terms.items():
            base = c * field.s_pow(-m[slot] * h)
            n = e[slot]
            for i in range(n + 1):
                coeff = base * QScalar(Fraction(comb(n, i) * (-h) ** (n - i)))
                key = (m, e[:slot] + (i,) + e[slot + 1:])
                out = out + ContinuedScalar(self.nvars, {key: coeff})
        return out

    def evaluate(self, u0, field) -> QScalar:
        """Substitute the integer vector u0 for the parameters."""
        acc = ZERO
        for (m, e), c in self.terms.items():
            expo = sum(mk * uk for mk, uk in zip(m, u0))
            poly = Fraction(1)
            for ek, uk in zip(e, u0):
                poly *= Fraction(uk) ** ek
            if poly:
                acc = acc + c * field.s_pow(expo) * QScalar(poly)
        return acc

    def payload(self, field):
        return [[list(m), list(e), field.serialize(c)]
                for (m, e), c in sorted(self.terms.items())]

    def __repr__(self):
        return f"ContinuedScalar({sorted(self.terms)})"


def _lift(nvars, vec):
    return [ContinuedScalar.constant(nvars, c) for c in vec]


def _cmatvec(rows, vec):
    """Matrix with QScalar or ContinuedScalar entries times a vector of
    ContinuedScalars."""
    out = []
    for row in rows:
        acc = None
        for a, c in zip(row, vec):
            if not a or not c:
                continue
            term = c.scale(a) if isinstance(a, QScalar) else a * c
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else ContinuedScalar(vec[0].nvars))
    return out


def _shift_matrix(rows, slot, h, field):
    if h == 0:
        return rows
    return [[x.shift(slot, h, field) for x in row] for row in rows]


# ---------------------------------------------------------------------------
# polynomials in the exponent variable


def _falling_poly(a):
    """Coefficients of w (w-1) ... (w-a+1), lowest degree first."""
    coeffs = [Fraction(1)]
    for i in range(a):
        coeffs = [0] + coeffs
        coeffs = [Fraction(c) - Fraction(i) * (coeffs[j + 1]
                  if j + 1 < len(coeffs) else 0)
                  for j, c in enumerate(coeffs)]
    return coeffs


def _poly_scalar(coeffs, slot, nvars):
    zero = (0,) * nvars
    terms = {}
    for j, c in enumerate(coeffs):
        if c:
            key = (zero, zero[:slot] + (j,) + zero[slot + 1:])
            terms[key] = QScalar(c)
    return ContinuedScalar(nvars, terms)


# ---------------------------------------------------------------------------
# spectra of the conjugation operators


def _minimal_polynomial(mat):
    """Monic minimal polynomial of a square QScalar matrix, coefficients
    lowest degree first."""
    n = len(mat)
    if n == 0:
        return [ONE]
    cur = linalg.identity(n)
    cols = [[x for row in cur for x in row]]
    for d in range(1, n + 1):
        cur = linalg.matmul(mat, cur)
        vec = [x for row in cur for x in row]
        a = [[cols[j][i] for j in range(d)] for i in range(n * n)]
        sol = linalg.solve_rect(a, vec)
        if sol is not None:
            return [-c for c in sol] + [ONE]
        cols.append(vec)
    raise ArithmeticError("minimal polynomial exceeded the matrix size")


def _poly_eval(coeffs, x):
    acc = ZERO
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _deflate(coeffs, lam):
    """coeffs / (x - lam) assuming lam is a root; lowest degree first."""
    out = [ZERO] * (len(coeffs) - 1)
    carry = coeffs[-1]
    for j in range(len(coeffs) - 2, -1, -1):
        out[j] = carry
        carry = coeffs[j] + lam * carry
    return out


def _q_power_roots(coeffs, field, candidates):
    """Root multiplicities {s-exponent: multiplicity} of a split polynomial
    whose roots are all powers of s."""
    roots = {}
    p = coeffs
    for m in candidates:
        lam = field.s_pow(m)
        while len(p) > 1 and not _poly_eval(p, lam):
            p = _deflate(p, lam)
            roots[m] = roots.get(m, 0) + 1
    if len(p) > 1:
        raise SpectrumError(
            f"minimal polynomial keeps a factor of degree {len(p) - 1} "
            f"with no root among the tested powers of s")
    return roots


def matrix_root_profile(mat, field, bound=None):
    """Multiplicities of the powers of s among the roots of the minimal
    polynomial of a square QScalar matrix; raises SpectrumError when some
    root is no such power within the sweep bound (default 4 per unit of the
    root order)."""
    if bound is None:
        bound = 4 * field.D
    return _q_power_roots(_minimal_polynomial(mat), field,
                          range(-bound, bound + 1))


def conjugation_spectrum(alg: SphericalAlgebra, space_hw, b, sweep=4):
    """Eigenvalue exponents of conjugation by the b-th generator on the
    module of weight space_hw, with minimal-polynomial multiplicities.

    Works block by block over weights; the candidate exponent of a block is
    the pairing of its weight with the generator weight, padded by a sweep
    of small exponents."""
    mat = alg.conjugation_on(space_hw, b)
    module = alg.module(space_hw)
    mu = alg.generator_weights[b]
    D = alg.field.D
    owner = {}
    for wt, idxs in module.blocks.items():
        for i in idxs:
            owner[i] = wt
    for i in range(len(mat)):
        for j in range(len(mat)):
            if mat[i][j] and owner[i] != owner[j]:
                raise ArithmeticError(
                    f"conjugation mixes weights {owner[i]} and {owner[j]} "
                    f"on {space_hw}")
    roots = {}
    for wt, idxs in module.blocks.items():
        block = [[mat[i][j] for j in idxs] for i in idxs]
        first = -D * alg.datum.pair_weight_weight(wt, mu)
        candidates = []
        if first.denominator == 1:
            candidates.append(int(first))
        candidates.extend(m for m in range(-sweep * D, sweep * D + 1)
                          if m not in candidates)
        found = _q_power_roots(_minimal_polynomial(block), alg.field,
                               candidates)
        for m, mult in found.items():
            roots[m] = max(roots.get(m, 0), mult)
    return roots


# ---------------------------------------------------------------------------
# formal powers and geometric sums by interpolation on the spectrum


def _hermite_conditions(roots):
    return [(m, d) for m in sorted(roots) for d in range(roots[m])]


def _hermite_solve(roots, rhs, field):
    """Coefficients of the polynomial matching the rhs values on the
    spectrum with multiplicities; rhs maps (exponent, derivative order) to a
    ContinuedScalar."""
    conds = _hermite_conditions(roots)
    n = len(conds)
    v = []
    for m, d in conds:
        lam = field.s_pow(m)
        row = []
        for j in range(n):
            if j < d:
                row.append(ZERO)
            else:
                fall = 1
                for i in range(d):
                    fall *= j - i
                row.append(QScalar(fall) * field.s_pow(m * (j - d)))
        v.append(row)
    vinv = linalg.invert(v)
    values = [rhs(m, d) for m, d in conds]
    out = []
    for j in range(n):
        acc = None
        for k in range(n):
            c = vinv[j][k]
            if not c:
                continue
            term = values[k].scale(c)
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else
                   ContinuedScalar(values[0].nvars))
    return out


def _matrix_polynomial(mat, coeffs):
    n = len(mat)
    powers = [linalg.identity(n)]
    for _ in range(len(coeffs) - 1):
        powers.append(linalg.matmul(mat, powers[-1]))
    nvars = coeffs[0].nvars
    out = [[ContinuedScalar(nvars) for _ in range(n)] for _ in range(n)]
    for k, c in enumerate(coeffs):
        if not c:
            continue
        pk = powers[k]
        for i in range(n):
            for j in range(n):
                if pk[i][j]:
                    out[i][j] = out[i][j] + c.scale(pk[i][j])
    return out


def formal_matrix_power(mat, roots, slot, nvars, field):
    """The matrix raised to the formal exponent u_slot, as a polynomial in
    the matrix interpolated through lambda**u on the spectrum."""

    def rhs(m, d):
        mono = ContinuedScalar.monomial(nvars, slot, m)
        base = _poly_scalar(_falling_poly(d), slot, nvars) * mono
        return base.scale(field.s_pow(-d * m))

    return _matrix_polynomial(mat, _hermite_solve(roots, rhs, field))


def formal_geometric_sum(mat, roots, slot, nvars, field):
    """The geometric sum of the matrix with formal length u_slot: the
    interpolation of (lambda**u - 1)/(lambda - 1), with the polynomial
    branch sum falling(w, d+1)/(d+1) on the eigenvalue one."""

    def rhs(m, d):
        if m == 0:
            coeffs = [c / (d + 1) for c in _falling_poly(d + 1)]
            return _poly_scalar(coeffs, slot, nvars)
        mono = ContinuedScalar.monomial(nvars, slot, m)
        lam1 = field.s_pow(m) - ONE
        acc = None
        for a in range(d + 1):
            b = d - a
            hval = QScalar((-1) ** b * factorial(b)) * (lam1 ** -(b + 1))
            if a == 0:
                g = mono - ContinuedScalar.constant(nvars, ONE)
            else:
                g = (_poly_scalar(_falling_poly(a), slot, nvars) *
                     mono).scale(field.s_pow(-a * m))
            term = g.scale(QScalar(comb(d, a)) * hval)
            acc = term if acc is None else acc + term
        return acc

    return _matrix_polynomial(mat, _hermite_solve(roots, rhs, field))


# ---------------------------------------------------------------------------
# the representations


def degenerate_levels(top):
    return tuple((n,) for n in range(top + 1))


def simplex_levels(nparams, bound):
    out = []

    def rec(prefix, left):
        if len(prefix) == nparams:
            out.append(tuple(prefix))
            return
        for n in range(left + 1):
            rec(prefix + [n], left - n)

    rec([], bound)
    return tuple(sorted(out, key=lambda n: (sum(n), n)))


class PrincipalSeriesRep:
    """A spherical principal series realized on a module tower.

    A state is a dict {component id: {word index: ContinuedScalar}} in the
    anchored coordinates of the tower; the component of id g at home level h
    stands for (basis vector) * psi**(u - h) with the product of inverted
    generators raised to the continued exponent.  The monomial is normal
    ordered with larger generator indices on the left; the generators
    commute, so the order only decides which conjugations appear in the
    correction terms, and this one keeps them all inside the graded
    algebra."""

    def __init__(self, tower: ModuleTower):
        self.tower = tower
        self.alg = tower.alg
        self.pair = self.alg.pair
        self.field = self.alg.field
        self.dirs = tower.dirs
        if tuple(sorted(set(self.dirs))) != self.dirs:
            # corrections are conjugated past larger-index generators only,
            # so the directions must come in increasing generator order
            raise ValueError(f"directions {self.dirs} are not increasing")
        self.nparams = len(self.dirs)
        self._spectra = {}
        self._powmats = {}
        self._summats = {}
        self._corr = {}

    # -- states ----------------------------------------------------------------

    def zero_state(self):
        return {}

    def basis_state(self, gid, w=0):
        one = ContinuedScalar.constant(self.nparams, ONE)
        return {gid: {w: one}}

    def spherical_state(self):
        origin = (0,) * self.nparams
        gid = self.tower.level(origin).gids[0]
        return self.basis_state(gid, 0)

    def state_is_zero(self, state):
        return not state

    def states_equal(self, s1, s2):
        diff = dict(s1)
        _state_accumulate(diff, s2, QScalar(-1))
        return not diff

    def evaluate_state(self, state, u0):
        u0 = tuple(u0)
        if len(u0) != self.nparams:
            raise ValueError(f"expected {self.nparams} parameters")
        out = {}
        for gid, byword in state.items():
            for w, c in byword.items():
                v = c.evaluate(u0, self.field)
                if v:
                    out[(gid, w)] = v
        return out

    def state_payload(self, state):
        return [[gid, w, c.payload(self.field)]
                for gid in sorted(state)
                for w, c in sorted(state[gid].items())]

    # -- the spectra and formal operator calculus ------------------------------

    def spectrum(self, a, b):
        """Root profile of conjugation by direction b on the generator
        module of direction a."""
        key = (a, b)
        got = self._spectra.get(key)
        if got is None:
            mu = self.alg.generator_weights[self.dirs[a]]
            got = conjugation_spectrum(self.alg, mu, self.dirs[b])
            self._spectra[key] = got
        return got

    def formal_power_matrix(self, b, a):
        """Conjugation by direction b on the generator module of direction
        a, raised to the formal exponent u_b."""
        key = (b, a)
        got = self._powmats.get(key)
        if got is None:
            mu = self.alg.generator_weights[self.dirs[a]]
            mat = self.alg.conjugation_on(mu, self.dirs[b])
            got = formal_matrix_power(mat, self.spectrum(a, b), b,
                                      self.nparams, self.field)
            self._powmats[key] = got
        return got

    def formal_sum_matrix(self, a):
        """Geometric sum of the self-conjugation of direction a with formal
        length u_a."""
        got = self._summats.get(a)
        if got is None:
            mu = self.alg.generator_weights[self.dirs[a]]
            mat = self.alg.conjugation_on(mu, self.dirs[a])
            got = formal_geometric_sum(mat, self.spectrum(a, a), a,
                                       self.nparams, self.field)
            self._summats[a] = got
        return got

    # -- correction data --------------------------------------------------------

    def correction_vector(self, kind, node, a, nvec):
        """Coefficients in the direction-a generator module of the
        correction produced by a twisted-primitive letter at the given
        level, or None when the letter kills the generator."""
        nvec = tuple(nvec)
        key = (kind, node, a, nvec)
        if key in self._corr:
            return self._corr[key]
        base = self.alg.generator_image(kind, node, self.dirs[a])
        if not any(base):
            self._corr[key] = None
            return None
        smat = _shift_matrix(self.formal_sum_matrix(a), a, nvec[a],
                             self.field)
        v = _cmatvec(smat, _lift(self.nparams, base))
        # the correction slides left past the larger-index factors only;
        # the smaller-index conjugations would leave the graded algebra
        for b in range(a + 1, self.nparams):
            pmat = _shift_matrix(self.formal_power_matrix(b, a), b, nvec[b],
                                 self.field)
            v = _cmatvec(pmat, v)
        self._corr[key] = v
        return v

    # -- the letter action -------------------------------------------------------

    def apply_letter(self, kind, node, state):
        if kind in ("K+", "K-"):
            return self._apply_torus(kind, node, state)
        if kind == "F":
            return self._apply_torus(
                "K-", node, self._apply_primitive("KF", node, state))
        if kind == "E":
            return self._apply_primitive("E", node, state)
        raise ValueError(f"unknown generator letter {kind!r}")

    def _apply_torus(self, kind, node, state):
        d = self.alg.datum.cartan.d[node]
        sign = 1 if kind == "K+" else -1
        out = {}
        for gid, byword in state.items():
            comp = self.tower.components[gid]
            res = {}
            for w, c in byword.items():
                wt = comp.word_weights[w][node]
                cc = c.scale(self.field.q_pow(sign * d * wt))
                if cc:
                    res[w] = cc
            if res:
                out[gid] = res
        return out

    def _apply_primitive(self, kind, node, state):
        byhome = {}
        for gid, byword in state.items():
            byhome.setdefault(self.tower.components[gid].home,
                              {})[gid] = byword
        bylevel = {}
        for home, part in byhome.items():
            data = self.tower.level(home)
            cvec = [ContinuedScalar(self.nparams)
                    for _ in range(data.module.dim)]
            for gid, byword in part.items():
                vecs = data.basis[gid]
                for w, c in byword.items():
                    col = vecs[w]
                    for i, x in enumerate(col):
                        if x:
                            cvec[i] = cvec[i] + c.scale(x)
            for nvec, vec in self._act_at_level(kind, node, home,
                                                cvec).items():
                acc = bylevel.get(nvec)
                if acc is None:
                    bylevel[nvec] = vec
                else:
                    bylevel[nvec] = [a + b for a, b in zip(acc, vec)]
        return _reduce_levels(self, bylevel)

    def _act_at_level(self, kind, node, nvec, cvec):
        """Action of a twisted-primitive letter on a coefficient vector
        over the level module, as {level: coefficient vector}."""
        data = self.tower.level(nvec)
        module = data.module
        dim = module.dim
        cols = module.act_e[node] if kind == "E" else module.act_f[node]
        main = [ContinuedScalar(self.nparams) for _ in range(dim)]
        for col, c in enumerate(cvec):
            if not c:
                continue
            for row, a in cols[col]:
                main[row] = main[row] + c.scale(a)
        d = self.alg.datum.cartan.d[node]
        if kind == "KF":
            main = [x.scale(self.field.q_pow(d * module.weights[i][node]))
                    if x else x for i, x in enumerate(main)]
        out = {tuple(nvec): main}
        if node in self.pair.k_nodes:
            return out
        kv = [c.scale(self.field.q_pow(d * module.weights[i][node]))
              if c else c for i, c in enumerate(cvec)]
        nonzero = [(i, c) for i, c in enumerate(kv) if c]
        if not nonzero:
            return out
        for a in range(self.nparams):
            cmat = self._correction_matrix(kind, node, a, nvec)
            if cmat is None:
                continue
            up = tuple(n + (1 if i == a else 0)
                       for i, n in enumerate(nvec))
            acc = out.get(up)
            if acc is None:
                updim = self.tower.level(up).module.dim
                acc = [ContinuedScalar(self.nparams) for _ in range(updim)]
                out[up] = acc
            for row, rowd in enumerate(cmat):
                s = None
                for col, c in nonzero:
                    entry = rowd.get(col)
                    if entry is not None:
                        term = entry * c
                        s = term if s is None else s + term
                if s:
                    acc[row] = acc[row] + s
        return out

    def _correction_matrix(self, kind, node, a, nvec):
        nvec = tuple(nvec)
        key = ("mat", kind, node, a, nvec)
        if key in self._corr:
            return self._corr[key]
        y = self.correction_vector(kind, node, a, nvec)
        if y is None:
            self._corr[key] = None
            return None
        tens = self.tower.right_tensor(nvec, a)
        updim = len(tens[0])
        mat = [{} for _ in range(updim)]
        for p, yp in enumerate(y):
            if not yp:
                continue
            tp = tens[p]
            for row in range(updim):
                for col, q in enumerate(tp[row]):
                    if q:
                        cur = mat[row].get(col)
                        add = yp.scale(q)
                        mat[row][col] = add if cur is None else cur + add
        for row in mat:
            for col in [c for c, v in row.items() if not v]:
                del row[col]
        self._corr[key] = mat
        return mat

    def _coords_mixed(self, nvec, cvec):
        """Anchored coordinates of a ContinuedScalar coefficient vector."""
        data = self.tower.level(nvec)
        module = data.module
        out = {}
        for wt, idxs in module.blocks.items():
            sub = [cvec[i] for i in idxs]
            if not any(sub):
                continue
            inv, owners = data._inverse(wt)
            for r, key in enumerate(owners):
                acc = None
                for j, c in enumerate(sub):
                    if c and inv[r][j]:
                        term = c.scale(inv[r][j])
                        acc = term if acc is None else acc + term
                if acc:
                    out[key] = acc
        return out

    # -- words and elements -------------------------------------------------------

    def apply_word(self, word, state):
        for kind, node in reversed(tuple(word)):
            state = self.apply_letter(kind, node, state)
            if not state:
                break
        return state

    def apply_element(self, x: UqElement, state):
        total = {}
        for word, c in x:
            _state_accumulate(total, self.apply_word(word, state), c)
        return _prune_state(total)

    # -- level guards ---------------------------------------------------------------

    def levels_allow(self, nvec, raise_count):
        """Whether every level reachable from nvec by raise_count
        corrections is prepared."""
        for v in _compositions(raise_count, self.nparams):
            probe = tuple(n + x for n, x in zip(nvec, v))
            if probe not in self.tower.levels:
                return False
        return True


def _prune_state(state):
    out = {}
    for gid, byword in state.items():
        res = {w: c for w, c in byword.items() if c}
        if res:
            out[gid] = res
    return out


def _state_accumulate(total, state, c):
    for gid, byword in state.items():
        dst = total.setdefault(gid, {})
        for w, x in byword.items():
            add = x.scale(c)
            cur = dst.get(w)
            acc = add if cur is None else cur + add
            if acc:
                dst[w] = acc
            else:
                dst.pop(w, None)
        if not dst:
            total.pop(gid, None)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def word_raise_count(word, pair) -> int:
    """Number of letters in the word that can produce corrections: raising
    or lowering letters at the noncompact node."""
    return sum(1 for kind, node in word
               if kind in ("E", "F") and node == pair.l0)


def element_raise_count(x: UqElement, pair) -> int:
    return max((word_raise_count(w, pair) for w, _ in x), default=0)


# ---------------------------------------------------------------------------
# construction helpers


def build_degenerate_series(alg: SphericalAlgebra, k, level,
                            check=True) -> PrincipalSeriesRep:
    """Series attached to one inverted generator; levels up to level + 1
    are prepared so states starting at level - 1 survive two corrections."""
    tower = ModuleTower(alg, (k,), degenerate_levels(level + 1), check=check)
    return PrincipalSeriesRep(tower)


def build_nondegenerate_series(alg: SphericalAlgebra, bound=2,
                               check=True) -> PrincipalSeriesRep:
    """Series with every generator inverted, prepared on the simplex of
    levels of total size at most the bound."""
    dirs = tuple(range(alg.rank))
    tower = ModuleTower(alg, dirs, simplex_levels(alg.rank, bound),
                        check=check)
    return PrincipalSeriesRep(tower)


# ---------------------------------------------------------------------------
# verification batteries


@dataclass(frozen=True)
class RelationOutcome:
    name: str
    start: tuple
    states: int
    raise_count: int
    checked: bool


@dataclass
class RelationReport:
    entries: list

    @property
    def checked(self):
        return sum(e.states for e in self.entries if e.checked)

    @property
    def skipped(self):
        return sum(e.states for e in self.entries if not e.checked)

    def summary(self) -> str:
        levels = sorted({e.start for e in self.entries})
        lines = []
        for nvec in levels:
            here = [e for e in self.entries if e.start == nvec]
            done = sum(1 for e in here if e.checked)
            lines.append(f"level {nvec}: {done}/{len(here)} relations on "
                         f"{here[0].states} states"
                         + ("" if done == len(here) else
                            " (rest exceed the prepared levels)"))
        return "\n".join(lines)


def verify_dj_relations(rep: PrincipalSeriesRep,
                        starts=None) -> RelationReport:
    """Apply every defining relation to every anchored basis state whose
    reachable levels are prepared; raise on any nonzero result.

    A relation that would push some start state past the prepared levels is
    recorded as skipped for that start, never silently dropped.  `starts`
    restricts the start levels; the default is the whole lattice."""
    rels = defining_relations(rep.alg.datum.cartan, rep.field)
    entries = []
    levels = (rep.tower.lattice if starts is None
              else [tuple(n) for n in starts])
    for nvec in levels:
        basis_here = []
        data = rep.tower.level(nvec)
        for gid in data.gids:
            comp = rep.tower.components[gid]
            if comp.home == nvec:
                basis_here.extend((gid, w) for w in range(comp.dim))
        for name, element in rels:
            rc = element_raise_count(element, rep.pair)
            if not rep.levels_allow(nvec, rc):
                entries.append(RelationOutcome(name, nvec, len(basis_here),
                                               rc, False))
                continue
            for gid, w in basis_here:
                out = rep.apply_element(element, rep.basis_state(gid, w))
                if out:
                    raise ArithmeticError(
                        f"relation {name} fails on component {gid} word "
                        f"{w} at level {nvec}")
            entries.append(RelationOutcome(name, nvec, len(basis_here),
                                           rc, True))
    return RelationReport(entries)


def spherical_vector_check(rep: PrincipalSeriesRep) -> bool:
    """The constant function is killed by the compact raising and lowering
    letters and fixed by every torus letter, at any parameter value."""
    sph = rep.spherical_state()
    for i in rep.pair.k_nodes:
        for kind in ("E", "F"):
            if rep.apply_letter(kind, i, sph):
                raise ArithmeticError(
                    f"compact letter {kind}{i + 1} moves the constant")
    for i in range(rep.alg.datum.rank):
        for kind in ("K+", "K-"):
            out = rep.apply_letter(kind, i, sph)
            if not rep.states_equal(out, sph):
                raise ArithmeticError(
                    f"torus letter {kind.rstrip('+-')}{i + 1} moves the "
                    f"constant")
    return True


def transport_consistency_check(rep: PrincipalSeriesRep, kind, node, nvec,
                                a) -> int:
    """Acting on a vector through its image one level up along direction a
    must give the same state as acting at its own level; this realizes the
    one-step functional equation of the continued geometric sum on the
    actual module data.  Returns the number of vectors compared."""
    nvec = tuple(nvec)
    data = rep.tower.level(nvec)
    up = tuple(n + (1 if i == a else 0) for i, n in enumerate(nvec))
    if not (rep.levels_allow(nvec, 1) and rep.levels_allow(up, 1)):
        raise BuildRequired(
            f"transport check at {nvec} along direction {a} needs one more "
            f"prepared level in every direction")
    incl = rep.tower.inclusion(nvec, a)
    dim = data.module.dim
    for j in range(dim):
        unit = [ZERO] * dim
        unit[j] = ONE
        low = _lift(rep.nparams, unit)
        s1 = _reduce_levels(rep, rep._act_at_level(kind, node, nvec, low))
        lifted = _lift(rep.nparams, [row[j] for row in incl])
        s2 = _reduce_levels(rep, rep._act_at_level(kind, node, up, lifted))
        if not rep.states_equal(s1, s2):
            raise ArithmeticError(
                f"transported action disagrees at level {nvec} along "
                f"direction {a} on basis vector {j}")
    return dim


def _reduce_levels(rep, bylevel):
    out = {}
    for nvec, vec in bylevel.items():
        for (gid, w), c in rep._coords_mixed(nvec, vec).items():
            dst = out.setdefault(gid, {})
            cur = dst.get(w)
            acc = c if cur is None else cur + c
            if acc:
                dst[w] = acc
            else:
                dst.pop(w, None)
    return _prune_state(out)


@dataclass(frozen=True)
class SpecializationOutcome:
    word: tuple
    u0: tuple
    terms: int
    checked: bool


def integer_specialization(rep: PrincipalSeriesRep, u0, words):
    """Compare the series action specialized at an integer parameter with
    the direct localized action started from the generator power u0.

    Both sides are reduced to anchored coordinates: the level of a direct
    term equals u0 plus its inversion depth throughout, so every term is
    read off at its own level and no cross-level products are formed."""
    u0 = tuple(u0)
    if len(u0) != rep.nparams:
        raise ValueError(f"expected {rep.nparams} parameters")
    alg = rep.alg
    rank = alg.rank
    pos = [0] * rank
    neg = [0] * rank
    for a, k in enumerate(rep.dirs):
        if u0[a] >= 0:
            pos[k] = u0[a]
        else:
            neg[k] = -u0[a]
    start = LocalizedFunction(alg.power(tuple(pos)), tuple(neg))
    base = tuple(max(x, 0) for x in u0)
    outcomes = []
    for word in words:
        word = tuple(word)
        rc = word_raise_count(word, rep.pair)
        if not rep.levels_allow(base, rc) or not rep.levels_allow(
                (0,) * rep.nparams, rc):
            outcomes.append(SpecializationOutcome(word, u0, 0, False))
            continue
        sdict = rep.evaluate_state(
            rep.apply_word(word, rep.spherical_state()), u0)
        terms = [start]
        for kind, node in reversed(word):
            nxt = []
            for t in terms:
                for num, den in alg.action_terms(kind, node, t):
                    if num:
                        nxt.append(alg._strip(LocalizedFunction(num, den)))
            terms = nxt
        ddict = {}
        for t in terms:
            if t.numer.is_zero():
                continue
            parts = t.numer.parts
            if len(parts) != 1:
                raise ArithmeticError("localized term is not homogeneous")
            lvl = tuple(u0[a] + t.denom[rep.dirs[a]]
                        for a in range(rep.nparams))
            for k in range(rank):
                if k not in rep.dirs and t.denom[k]:
                    raise ArithmeticError(
                        f"direct action inverted generator {k} outside "
                        f"the series directions")
            (hw, vec), = parts.items()
            if hw != rep.tower.weight_of(lvl):
                raise ArithmeticError(
                    f"term weight {hw} does not sit at level {lvl}")
            for gid, byword in rep.tower.level(lvl).coords(
                    list(vec)).items():
                for w, c in byword.items():
                    key = (gid, w)
                    acc = ddict.get(key, ZERO) + c
                    if acc:
                        ddict[key] = acc
                    else:
                        ddict.pop(key, None)
        keys = set(sdict) | set(ddict)
        for key in keys:
            delta = sdict.get(key, ZERO) - ddict.get(key, ZERO)
            if delta:
                raise ArithmeticError(
                    f"specialization at u = {u0} disagrees on {key} "
                    f"after {word}")
        outcomes.append(SpecializationOutcome(word, u0, len(keys), True))
    return outcomes
