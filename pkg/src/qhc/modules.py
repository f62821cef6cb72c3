"""Finite-dimensional simple modules over the quantized enveloping algebra.

Everything is anchored to the Shapovalov pairing on a Verma module: a basis
of each simple quotient is selected greedily by exact Gram rank, actions are
recovered by Gram-block solves, and the Weyl dimension formula certifies the
result.  No PBW normal form and no root vectors are ever needed.

Vectors are dense lists of QScalar in the module basis; action matrices are
kept column-sparse.
"""

from __future__ import annotations

import json

from . import linalg
from .linalg import ONE, ZERO, EchelonBasis
from .rootdata import (CartanMatrix, HermitianPair, RootDatum,
                       build_root_datum, check_hermitian)
from .scalars import QScalar, ScalarField
from .uqg import UqElement


class VermaEngine:
    """Shapovalov pairings of F-words on the Verma module with a fixed
    highest weight.  Both recursions are memoized; one engine is built per
    simple-module construction and thrown away afterwards."""

    def __init__(self, datum: RootDatum, field: ScalarField, hw):
        self.datum = datum
        self.field = field
        self.hw = tuple(hw)
        self._apply_cache = {}
        self._pair_cache = {}
        self._wt_cache = {(): self.hw}

    def weight_after(self, word):
        wt = self._wt_cache.get(word)
        if wt is None:
            tail = self.weight_after(word[1:])
            col = self.datum.simple_roots[word[0]]
            wt = tuple(t - c for t, c in zip(tail, col))
            self._wt_cache[word] = wt
        return wt

    def apply_e(self, i, word):
        """E_i F_word v as {word': coeff} over words one letter shorter."""
        key = (i, word)
        out = self._apply_cache.get(key)
        if out is not None:
            return out
        if not word:
            out = {}
        else:
            j, rest = word[0], word[1:]
            out = {}
            for w, c in self.apply_e(i, rest).items():
                out[(j,) + w] = c
            if i == j:
                nu = self.weight_after(rest)
                c = self.field.q_int(nu[i], self.datum.cartan.d[i])
                if c:
                    acc = out.get(rest)
                    acc = c if acc is None else acc + c
                    if acc:
                        out[rest] = acc
                    else:
                        del out[rest]
        self._apply_cache[key] = out
        return out

    def pair(self, left, right) -> QScalar:
        """<F_left v, F_right v>.  Words of different weight pair to zero."""
        if len(left) != len(right):
            return ZERO
        if not left:
            return ONE
        # the form is symmetric, so cache on the ordered pair
        key = (left, right) if left <= right else (right, left)
        out = self._pair_cache.get(key)
        if out is not None:
            return out
        left, right = key
        i, rest = left[0], left[1:]
        nu = self.weight_after(right)
        scale = self.field.q_pow(-self.datum.cartan.d[i] * nu[i])
        acc = ZERO
        for w, c in self.apply_e(i, right).items():
            sub = self.pair(rest, w)
            if sub and c:
                acc = acc + c * sub
        out = scale * acc
        self._pair_cache[key] = out
        return out


def shapovalov_pair(datum: RootDatum, field: ScalarField, hw, left, right):
    return VermaEngine(datum, field, hw).pair(tuple(left), tuple(right))


class WeightModule:
    """A simple highest-weight module with exact action matrices and the
    Gram blocks of the invariant form in the selected word basis."""

    def __init__(self, pair, field, hw, words, weights, gram):
        self.pair = pair
        self.datum = pair.datum
        self.field = field
        self.hw = tuple(hw)
        self.words = words
        self.weights = weights
        self.dim = len(words)
        self.blocks = {}
        for idx, wt in enumerate(weights):
            self.blocks.setdefault(wt, []).append(idx)
        self.gram = gram
        self._gram_inv = {}
        self.act_e = None
        self.act_f = None
        self._index = {w: i for i, w in enumerate(words)}
        self._pos = {}
        for wt, idxs in self.blocks.items():
            for a, idx in enumerate(idxs):
                self._pos[idx] = (wt, a)

    # -- plumbing -------------------------------------------------------------

    def zero_vector(self):
        return [ZERO] * self.dim

    def highest_vector(self):
        v = self.zero_vector()
        v[self._index[()]] = ONE
        return v

    def gram_inv(self, wt):
        out = self._gram_inv.get(wt)
        if out is None:
            out = linalg.invert(self.gram[wt])
            self._gram_inv[wt] = out
        return out

    def gram_entry(self, i, j) -> QScalar:
        wi, a = self._pos[i]
        wj, b = self._pos[j]
        if wi != wj:
            return ZERO
        return self.gram[wi][a][b]

    def form(self, u, v) -> QScalar:
        """The invariant bilinear form, block-diagonal over weights."""
        acc = ZERO
        for wt, idxs in self.blocks.items():
            g = self.gram[wt]
            for a, ia in enumerate(idxs):
                cu = u[ia]
                if not cu:
                    continue
                for b, ib in enumerate(idxs):
                    cv = v[ib]
                    if cv and g[a][b]:
                        acc = acc + cu * g[a][b] * cv
        return acc

    # -- the module action ------------------------------------------------------

    def _apply_sparse(self, cols, vec):
        out = [ZERO] * self.dim
        for col, c in enumerate(vec):
            if not c:
                continue
            for row, a in cols[col]:
                out[row] = out[row] + a * c
        return out

    def apply_letter(self, kind, node, vec):
        if kind == "E":
            return self._apply_sparse(self.act_e[node], vec)
        if kind == "F":
            return self._apply_sparse(self.act_f[node], vec)
        d = self.datum.cartan.d[node]
        sign = 1 if kind == "K+" else -1
        return [self.field.q_pow(sign * d * self.weights[i][node]) * c if c else c
                for i, c in enumerate(vec)]

    def act_word(self, word, vec):
        for kind, node in reversed(word):
            vec = self.apply_letter(kind, node, vec)
            if not any(vec):
                break
        return vec

    def act(self, x: UqElement, vec):
        out = [ZERO] * self.dim
        for word, c in x:
            img = self.act_word(word, vec)
            for i, a in enumerate(img):
                if a:
                    out[i] = out[i] + c * a
        return out

    def act_indexed(self, x: UqElement, t: int) -> dict:
        """Action on the t-th basis vector as an index-to-coefficient map.
        Equivalent to act() on a one-hot vector; sweeping thousands of basis
        vectors through many relations needs the sparse walk."""
        out = {}
        for word, c in x:
            vec = {t: ONE}
            for kind, node in reversed(word):
                if kind == "E":
                    cols = self.act_e[node]
                elif kind == "F":
                    cols = self.act_f[node]
                else:
                    d = self.datum.cartan.d[node]
                    sign = 1 if kind == "K+" else -1
                    vec = {i: self.field.q_pow(sign * d
                                               * self.weights[i][node]) * a
                           for i, a in vec.items()}
                    continue
                nxt = {}
                for col, a in vec.items():
                    for row, b in cols[col]:
                        prev = nxt.get(row)
                        nxt[row] = b * a if prev is None else prev + b * a
                vec = nxt
                if not vec:
                    break
            for i, a in vec.items():
                if a:
                    prev = out.get(i)
                    out[i] = c * a if prev is None else prev + c * a
        return {i: a for i, a in out.items() if a}

    def weight_components(self, vec):
        comps = {}
        for wt, idxs in self.blocks.items():
            if any(vec[i] for i in idxs):
                comp = [ZERO] * self.dim
                for i in idxs:
                    comp[i] = vec[i]
                comps[wt] = comp
        return comps


def act(x: UqElement, module: WeightModule, vec):
    return module.act(x, vec)


def simple_module(pair: HermitianPair, hw, field: ScalarField = None) -> WeightModule:
    """Breadth-first generation of F-words with greedy Gram-rank selection.
    The resulting dimension must match the Weyl formula or construction
    aborts; that is the correctness certificate for the whole basis."""
    datum = pair.datum
    if field is None:
        field = ScalarField(datum.root_order())
    hw = tuple(hw)
    if not datum.is_dominant(hw):
        raise ValueError(f"{hw} is not dominant")
    engine = VermaEngine(datum, field, hw)
    n = datum.rank

    words = [()]
    weights = [hw]
    gram = {hw: [[ONE]]}
    gram_inv = {hw: [[ONE]]}
    level = {hw: [()]}

    while level:
        # candidates for the next height level, grouped by weight
        cand = {}
        for wt, ws in level.items():
            for w in ws:
                for j in range(n):
                    nw = (j,) + w
                    target = engine.weight_after(nw)
                    cand.setdefault(target, set()).add(nw)
        nxt = {}
        for wt in sorted(cand):
            chosen = []
            g_rows = []
            g_inv = None
            for w in sorted(cand[wt]):
                row = [engine.pair(w, s) for s in chosen]
                diag = engine.pair(w, w)
                if not chosen:
                    if not diag:
                        continue
                    chosen = [w]
                    g_rows = [[diag]]
                    g_inv = [[diag.inverse()]]
                    continue
                # bordered-Gram test: Schur complement against current block
                sol = linalg.matvec(g_inv, row)
                schur = diag
                for rv, sv in zip(row, sol):
                    if rv and sv:
                        schur = schur - rv * sv
                if not schur:
                    continue
                # rank grew: extend the inverse by the Schur complement rule
                si = schur.inverse()
                m = len(chosen)
                new_inv = [[g_inv[a][b] + sol[a] * si * sol[b]
                            for b in range(m)] + [-(sol[a] * si)]
                           for a in range(m)]
                new_inv.append([-(si * sol[b]) for b in range(m)] + [si])
                g_inv = new_inv
                for r, rv in zip(g_rows, row):
                    r.append(rv)
                g_rows.append(row + [diag])
                chosen.append(w)
            if chosen:
                nxt[wt] = chosen
                gram[wt] = g_rows
                gram_inv[wt] = g_inv
                for w in chosen:
                    words.append(w)
                    weights.append(wt)
        level = nxt

    module = WeightModule(pair, field, hw, tuple(words), tuple(weights), gram)
    module._gram_inv = gram_inv

    expected = datum.weyl_dim(hw)
    if module.dim != expected:
        raise ArithmeticError(
            f"constructed dimension {module.dim} != Weyl dimension {expected} "
            f"at weight {hw}")

    # action matrices by Gram-block solves against the selected basis
    index = module._index
    act_f = [dict() for _ in range(n)]
    act_e = [dict() for _ in range(n)]
    for col, w in enumerate(words):
        wt = weights[col]
        for j in range(n):
            # F_j column
            target = engine.weight_after((j,) + w)
            idxs = module.blocks.get(target)
            entries = []
            if idxs:
                basis_here = [words[i] for i in idxs]
                rhs = [engine.pair((j,) + w, t) for t in basis_here]
                coords = linalg.matvec(gram_inv[target], rhs)
                entries = [(idxs[a], c) for a, c in enumerate(coords) if c]
            if entries:
                act_f[j][col] = entries
            # E_j column
            up = tuple(x + y for x, y in zip(wt, datum.simple_roots[j]))
            idxs = module.blocks.get(up)
            entries = []
            if idxs:
                image = engine.apply_e(j, w)
                if image:
                    basis_here = [words[i] for i in idxs]
                    rhs = []
                    for t in basis_here:
                        acc = ZERO
                        for iw, c in image.items():
                            p = engine.pair(iw, t)
                            if p and c:
                                acc = acc + c * p
                        rhs.append(acc)
                    coords = linalg.matvec(gram_inv[up], rhs)
                    entries = [(idxs[a], c) for a, c in enumerate(coords) if c]
            if entries:
                act_e[j][col] = entries
    module.act_f = [[m.get(c, []) for c in range(module.dim)] for m in act_f]
    module.act_e = [[m.get(c, []) for c in range(module.dim)] for m in act_e]
    return module


# ---------------------------------------------------------------------------

def invariant_vector(module: WeightModule):
    """Basis of the joint kernel of the unmarked-node raising and lowering
    operators on the zero-weight space: the degree-zero-subalgebra
    invariants.  Empty list when the module is not spherical."""
    pair = module.pair
    zero = (0,) * module.datum.rank
    idxs = module.blocks.get(zero)
    if not idxs:
        return []
    rows = []
    for i in pair.k_nodes:
        for cols in (module.act_e[i], module.act_f[i]):
            block = {}
            for a, col in enumerate(idxs):
                for row, c in cols[col]:
                    block.setdefault(row, [ZERO] * len(idxs))[a] = c
            rows.extend(block.values())
    if not rows:
        basis = [[ONE if k == a else ZERO for a in range(len(idxs))]
                 for k in range(len(idxs))]
    else:
        basis = linalg.nullspace(rows)
    out = []
    for b in basis:
        v = module.zero_vector()
        for a, col in enumerate(idxs):
            v[col] = b[a]
        out.append(v)
    return out


class IsotypicComponent:
    """One isotypic piece: every copy of the same simple degree-zero-subalgebra
    module, with bases aligned so equivariant maps act on the copy index
    alone."""

    def __init__(self, mu, highest, words, basis):
        self.mu = mu
        self.highest = highest
        self.words = words
        self.basis = basis

    @property
    def multiplicity(self):
        return len(self.highest)

    @property
    def dim(self):
        return len(self.highest) * len(self.words)


class IsotypicDecomposition:
    """Partition of a module into isotypic components for the subalgebra
    generated by the unmarked nodes and the whole torus.  The union of the
    component bases must be a basis of the module; the per-weight change of
    basis is inverted once and reused for projections."""

    def __init__(self, module: WeightModule, components):
        self.module = module
        self.components = components
        total = sum(c.dim for c in components)
        if total != module.dim:
            raise ArithmeticError(
                f"isotypic pieces cover {total} of {module.dim} dimensions")
        self._col_info = {}
        self._block_inv = {}
        cols = {}
        for ci, comp in enumerate(components):
            for j in range(comp.multiplicity):
                for wi in range(len(comp.words)):
                    vec = comp.basis[j][wi]
                    wt = self._weight_of(vec)
                    cols.setdefault(wt, []).append((ci, j, wi, vec))
        for wt, entries in cols.items():
            idxs = module.blocks[wt]
            if len(entries) != len(idxs):
                raise ArithmeticError(f"weight {wt}: component basis mismatch")
            mat = [[e[3][i] for e in entries] for i in idxs]
            self._block_inv[wt] = linalg.invert(mat)
            self._col_info[wt] = [(e[0], e[1], e[2]) for e in entries]

    def _weight_of(self, vec):
        for i, c in enumerate(vec):
            if c:
                return self.module.weights[i]
        raise ArithmeticError("zero vector has no weight")

    def coords(self, vec):
        """Component coordinates {comp: {(copy, word): scalar}} of a vector."""
        out = {}
        for wt, idxs in self.module.blocks.items():
            sub = [vec[i] for i in idxs]
            if not any(sub):
                continue
            local = linalg.matvec(self._block_inv[wt], sub)
            for (ci, j, wi), c in zip(self._col_info[wt], local):
                if c:
                    out.setdefault(ci, {})[(j, wi)] = c
        return out

    def assemble(self, ci, coeffs):
        """Inverse of coords for a single component."""
        comp = self.components[ci]
        vec = self.module.zero_vector()
        for (j, wi), c in coeffs.items():
            b = comp.basis[j][wi]
            for i, a in enumerate(b):
                if a:
                    vec[i] = vec[i] + c * a
        return vec

    def project(self, vec, ci):
        return self.assemble(ci, self.coords(vec).get(ci, {}))

    def component_index(self, mu):
        for ci, comp in enumerate(self.components):
            if comp.mu == tuple(mu):
                return ci
        raise KeyError(f"no isotypic component of type {mu}")


def _k_highest_vectors(module: WeightModule):
    """Per weight block, the joint kernel of the unmarked-node raising
    operators, grouped by weight."""
    pair = module.pair
    out = {}
    for wt, idxs in sorted(module.blocks.items()):
        rows = []
        for i in pair.k_nodes:
            block = {}
            for a, col in enumerate(idxs):
                for row, c in module.act_e[i][col]:
                    block.setdefault(row, [ZERO] * len(idxs))[a] = c
            rows.extend(block.values())
        if rows:
            basis = linalg.nullspace(rows)
        else:
            basis = [[ONE if k == a else ZERO for a in range(len(idxs))]
                     for k in range(len(idxs))]
        vecs = []
        for b in basis:
            v = module.zero_vector()
            for a, col in enumerate(idxs):
                v[col] = b[a]
            vecs.append(v)
        if vecs:
            if not pair.is_k_dominant(wt):
                raise ArithmeticError(
                    f"k-highest vector at non-k-dominant weight {wt}")
            out[wt] = vecs
    return out


def isotypic_decomposition(module: WeightModule) -> IsotypicDecomposition:
    pair = module.pair
    components = []
    for mu, vecs in sorted(_k_highest_vectors(module).items()):
        kdim = pair.k_weyl_dim(mu)
        if len(vecs) > kdim:
            raise ArithmeticError(
                f"multiplicity {len(vecs)} at {mu} exceeds the simple "
                f"dimension {kdim}")
        # one breadth-first word selection from the first copy; every other
        # copy reuses the same words, which keeps the bases aligned
        words = [()]
        echelon = EchelonBasis()
        echelon.add(vecs[0])
        level = {(): vecs[0]}
        while level:
            nxt = {}
            for w in sorted(level):
                for j in pair.k_nodes:
                    nw = (j,) + w
                    img = module.apply_letter("F", j, level[w])
                    if any(img) and echelon.add(img):
                        nxt[nw] = img
                        words.append(nw)
            level = nxt
        if len(words) != kdim:
            raise ArithmeticError(
                f"component at {mu} closed at dimension {len(words)}, "
                f"expected {kdim}")
        basis = []
        for h in vecs:
            row = {(): h}
            ordered = [h]
            for w in words[1:]:
                img = module.apply_letter("F", w[0], row[w[1:]])
                row[w] = img
                ordered.append(img)
            basis.append(ordered)
        components.append(IsotypicComponent(mu, vecs, tuple(words), basis))
    return IsotypicDecomposition(module, components)


# ---------------------------------------------------------------------------

class TensorModule:
    """Tensor product acted on through the coproduct.  Vectors are sparse
    {(i, j): scalar} dictionaries; the invariant form factorizes, so no
    product Gram matrix is ever materialized."""

    def __init__(self, left: WeightModule, right: WeightModule):
        if left.field is not right.field and left.field.D != right.field.D:
            raise ValueError("tensor factors over different scalar fields")
        self.left = left
        self.right = right
        self.field = left.field
        self.datum = left.datum
        self.hw = tuple(a + b for a, b in zip(left.hw, right.hw))
        self.dim = left.dim * right.dim

    def weight(self, key):
        p, q = key
        return tuple(a + b for a, b in
                     zip(self.left.weights[p], self.right.weights[q]))

    def highest_vector(self):
        return {(0, 0): ONE}

    def apply_letter(self, kind, node, vec):
        out = {}

        def bump(key, c):
            if not c:
                return
            acc = out.get(key)
            acc = c if acc is None else acc + c
            if acc:
                out[key] = acc
            elif key in out:
                del out[key]

        d = self.datum.cartan.d[node]
        if kind in ("K+", "K-"):
            sign = 1 if kind == "K+" else -1
            for (p, q), c in vec.items():
                wt = self.weight((p, q))
                bump((p, q), self.field.q_pow(sign * d * wt[node]) * c)
            return out
        if kind == "E":
            for (p, q), c in vec.items():
                for row, a in self.left.act_e[node][p]:
                    bump((row, q), a * c)
                k = self.field.q_pow(d * self.left.weights[p][node])
                for row, b in self.right.act_e[node][q]:
                    bump((p, row), k * b * c)
            return out
        for (p, q), c in vec.items():
            kinv = self.field.q_pow(-d * self.right.weights[q][node])
            for row, a in self.left.act_f[node][p]:
                bump((row, q), a * kinv * c)
            for row, b in self.right.act_f[node][q]:
                bump((p, row), b * c)
        return out

    def act_word(self, word, vec):
        for kind, node in reversed(word):
            vec = self.apply_letter(kind, node, vec)
            if not vec:
                break
        return vec

    def act(self, x: UqElement, vec):
        out = {}
        for word, c in x:
            for key, a in self.act_word(word, vec).items():
                acc = out.get(key, ZERO) + c * a
                if acc:
                    out[key] = acc
                elif key in out:
                    del out[key]
        return out

    def form(self, u, v) -> QScalar:
        acc = ZERO
        for (p, q), c in u.items():
            if not c:
                continue
            wl, wr = self.left.weights[p], self.right.weights[q]
            for (p2, q2), c2 in v.items():
                if not c2:
                    continue
                if self.left.weights[p2] != wl or self.right.weights[q2] != wr:
                    continue
                g = self.left.gram_entry(p, p2) * self.right.gram_entry(q, q2)
                if g:
                    acc = acc + c * c2 * g
        return acc


def tensor_product(left: WeightModule, right: WeightModule) -> TensorModule:
    return TensorModule(left, right)


class CartanEmbedding:
    """The unique (up to scale) module map L(a+b) -> L(a) (x) L(b) sending
    highest vector to the product of highest vectors.  Columns are computed
    by pushing each basis F-word through the coproduct action."""

    def __init__(self, left: WeightModule, right: WeightModule,
                 total: WeightModule, check: bool = True):
        exp = tuple(a + b for a, b in zip(left.hw, right.hw))
        if tuple(total.hw) != exp:
            raise ValueError(f"target weight {total.hw}, factors give {exp}")
        self.tensor = TensorModule(left, right)
        self.total = total
        cols = []
        top = self.tensor.highest_vector()
        for w in total.words:
            img = self.tensor.act_word(tuple(("F", j) for j in w), top)
            if not img:
                raise ArithmeticError(f"embedding vanishes on word {w}")
            cols.append(img)
        self.cols = cols
        if check:
            self._check()

    def _check(self):
        tens, tot = self.tensor, self.total
        for t, col in enumerate(self.cols):
            wt = tot.weights[t]
            for key in col:
                if tens.weight(key) != wt:
                    raise ArithmeticError("embedding is not weight-graded")
        for node in range(tot.datum.rank):
            for kind, mat in (("E", tot.act_e[node]), ("F", tot.act_f[node])):
                for t in range(tot.dim):
                    lhs = {}
                    for row, c in mat[t]:
                        for key, a in self.cols[row].items():
                            acc = lhs.get(key, ZERO) + c * a
                            if acc:
                                lhs[key] = acc
                            elif key in lhs:
                                del lhs[key]
                    rhs = tens.apply_letter(kind, node, self.cols[t])
                    if lhs != rhs:
                        raise ArithmeticError(
                            f"embedding fails to intertwine {kind}{node}")

    def apply(self, vec):
        """Image of a dense total-module vector as a sparse tensor."""
        out = {}
        for t, c in enumerate(vec):
            if not c:
                continue
            for key, a in self.cols[t].items():
                acc = out.get(key, ZERO) + c * a
                if acc:
                    out[key] = acc
                elif key in out:
                    del out[key]
        return out


class CartanMultiplication:
    """Form-adjoint of the embedding, normalized so that the product of the
    two highest vectors is the highest vector.  Composing with the embedding
    must give the identity; that is asserted on every basis vector."""

    def __init__(self, left, right, total, embedding=None, check=True):
        if embedding is None:
            embedding = CartanEmbedding(left, right, total, check=check)
        self.left = left
        self.right = right
        self.total = total
        self.embedding = embedding
        if check:
            for t in range(total.dim):
                img = self.apply_tensor(embedding.cols[t])
                ok = all((img[i] == ONE if i == t else not img[i])
                         for i in range(total.dim))
                if not ok:
                    raise ArithmeticError(
                        "multiplication does not invert the embedding")

    def _covector(self, module, vec):
        """Gram-paired coordinates {index: <b_index, vec>} of a dense vector."""
        out = {}
        for wt, idxs in module.blocks.items():
            sub = [vec[i] for i in idxs]
            if not any(sub):
                continue
            paired = linalg.matvec(module.gram[wt], sub)
            for i, c in zip(idxs, paired):
                if c:
                    out[i] = c
        return out

    def _solve(self, rhs):
        total = self.total
        out = total.zero_vector()
        for wt, idxs in total.blocks.items():
            sub = [rhs.get(i, ZERO) for i in idxs]
            if not any(sub):
                continue
            coords = linalg.matvec(total.gram_inv(wt), sub)
            for i, c in zip(idxs, coords):
                out[i] = c
        return out

    def apply(self, x, y):
        """Product of a dense left-module and dense right-module vector."""
        cov1 = self._covector(self.left, x)
        cov2 = self._covector(self.right, y)
        rhs = {}
        for t, col in enumerate(self.embedding.cols):
            acc = ZERO
            for (p, q), c in col.items():
                a = cov1.get(p)
                if a is None:
                    continue
                b = cov2.get(q)
                if b is None:
                    continue
                acc = acc + c * a * b
            if acc:
                rhs[t] = acc
        return self._solve(rhs)

    def apply_tensor(self, vec):
        """Product of a general sparse tensor vector."""
        left, right = self.left, self.right
        half = {}
        for (p, q), c in vec.items():
            wt, a = left._pos[p]
            col = [row[a] for row in left.gram[wt]]
            for pos, i in enumerate(left.blocks[wt]):
                g = col[pos]
                if g and c:
                    acc = half.get((i, q), ZERO) + g * c
                    if acc:
                        half[(i, q)] = acc
                    elif (i, q) in half:
                        del half[(i, q)]
        cov = {}
        for (p, q), c in half.items():
            wt, a = right._pos[q]
            col = [row[a] for row in right.gram[wt]]
            for pos, i in enumerate(right.blocks[wt]):
                g = col[pos]
                if g and c:
                    acc = cov.get((p, i), ZERO) + g * c
                    if acc:
                        cov[(p, i)] = acc
                    elif (p, i) in cov:
                        del cov[(p, i)]
        rhs = {}
        for t, col in enumerate(self.embedding.cols):
            acc = ZERO
            for key, c in col.items():
                b = cov.get(key)
                if b is not None:
                    acc = acc + c * b
            if acc:
                rhs[t] = acc
        return self._solve(rhs)

    def right_mult_matrix(self, y):
        """Columns m(b_p (x) y) over the left basis, as a dense matrix."""
        cols = []
        for p in range(self.left.dim):
            x = self.left.zero_vector()
            x[p] = ONE
            cols.append(self.apply(x, y))
        return [[cols[p][r] for p in range(self.left.dim)]
                for r in range(self.total.dim)]

    def left_mult_matrix(self, x):
        """Columns m(x (x) b_q) over the right basis, as a dense matrix."""
        cols = []
        for q in range(self.right.dim):
            y = self.right.zero_vector()
            y[q] = ONE
            cols.append(self.apply(x, y))
        return [[cols[q][r] for q in range(self.right.dim)]
                for r in range(self.total.dim)]


def cartan_embedding(left, right, total, check=True) -> CartanEmbedding:
    return CartanEmbedding(left, right, total, check=check)


def cartan_multiplication(left, right, total, embedding=None,
                          check=True) -> CartanMultiplication:
    return CartanMultiplication(left, right, total, embedding=embedding,
                                check=check)


# ---------------------------------------------------------------------------

def star_on_spherical(module: WeightModule):
    """The linear involution implementing the star structure on a module
    with a one-dimensional invariant subspace.  Built by transporting each
    basis F-word to the corresponding E-word on the lowest-weight vector,
    then normalized to fix the invariant line.  All intertwining relations
    and the involution property are asserted before returning the matrix."""
    datum = module.datum
    field = module.field
    low_wt = datum.w0_on_weight(module.hw)
    low_idxs = module.blocks.get(low_wt)
    if low_idxs is None or len(low_idxs) != 1:
        raise ArithmeticError(f"lowest weight space at {low_wt} is not a line")
    v_low = module.zero_vector()
    v_low[low_idxs[0]] = ONE

    cols = []
    for w in module.words:
        img = module.act_word(tuple(("E", j) for j in w), v_low)
        scale = ONE
        for j in w:
            scale = scale * -field.q_pow(2 * datum.cartan.d[j])
        cols.append([scale * c if c else c for c in img])

    inv = invariant_vector(module)
    if len(inv) != 1:
        raise ArithmeticError(
            f"invariant subspace has dimension {len(inv)}, need a line")
    psi = inv[0]

    def apply_cols(cs, vec):
        out = module.zero_vector()
        for t, c in enumerate(vec):
            if not c:
                continue
            for i, a in enumerate(cs[t]):
                if a:
                    out[i] = out[i] + c * a
        return out

    jpsi = apply_cols(cols, psi)
    pivot = next(i for i, c in enumerate(psi) if c)
    factor = jpsi[pivot] / psi[pivot]
    if not factor or any(jpsi[i] != factor * psi[i] for i in range(module.dim)):
        raise ArithmeticError("involution does not preserve the invariant line")
    inv_factor = factor.inverse()
    cols = [[inv_factor * c if c else c for c in col] for col in cols]

    # intertwining against every generator, plus the involution property
    for i in range(datum.rank):
        ce = -field.q_pow(-2 * datum.cartan.d[i])
        cf = -field.q_pow(2 * datum.cartan.d[i])
        for t in range(module.dim):
            base = module.zero_vector()
            base[t] = ONE
            lhs = apply_cols(cols, module.apply_letter("E", i, base))
            rhs = module.apply_letter("F", i, cols[t])
            if lhs != [ce * c if c else c for c in rhs]:
                raise ArithmeticError(f"involution fails against E{i}")
            lhs = apply_cols(cols, module.apply_letter("F", i, base))
            rhs = module.apply_letter("E", i, cols[t])
            if lhs != [cf * c if c else c for c in rhs]:
                raise ArithmeticError(f"involution fails against F{i}")
    for t in range(module.dim):
        wt = module.weights[t]
        flip = tuple(-x for x in wt)
        for i, c in enumerate(cols[t]):
            if c and module.weights[i] != flip:
                raise ArithmeticError("involution does not negate weights")
    for t in range(module.dim):
        sq = apply_cols(cols, cols[t])
        ok = all((sq[i] == ONE if i == t else not sq[i])
                 for i in range(module.dim))
        if not ok:
            raise ArithmeticError("normalized involution fails to square to 1")

    return [[cols[c][r] for c in range(module.dim)] for r in range(module.dim)]


# ---------------------------------------------------------------------------

def save_module(module: WeightModule, path):
    """Versioned textual snapshot of a constructed module: basis words,
    weights, Gram blocks and sparse action matrices with exact scalars."""
    field = module.field
    ser = field.serialize

    def pack(mats):
        out = []
        for cols in mats:
            out.append([[[row, ser(c)] for row, c in col] for col in cols])
        return out

    data = {
        "schema": 1,
        "cartan_a": [list(r) for r in module.datum.cartan.a],
        "cartan_d": list(module.datum.cartan.d),
        "l0": module.pair.l0,
        "hw": list(module.hw),
        "D": field.D,
        "words": [list(w) for w in module.words],
        "weights": [list(w) for w in module.weights],
        "gram": {",".join(map(str, wt)): [[ser(x) for x in row] for row in g]
                 for wt, g in module.gram.items()},
        "act_e": pack(module.act_e),
        "act_f": pack(module.act_f),
    }
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_module(path, pair: HermitianPair = None) -> WeightModule:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema") != 1:
        raise ValueError(f"unsupported cache schema in {path}")
    if pair is None:
        cm = CartanMatrix.from_matrix(
            tuple(tuple(r) for r in data["cartan_a"]),
            tuple(data["cartan_d"]))
        pair = check_hermitian(build_root_datum(cm), data["l0"])
    field = ScalarField(data["D"])
    par = field.parse

    words = tuple(tuple(w) for w in data["words"])
    weights = tuple(tuple(w) for w in data["weights"])
    gram = {tuple(map(int, k.split(","))): [[par(x) for x in row] for row in g]
            for k, g in data["gram"].items()}
    module = WeightModule(pair, field, tuple(data["hw"]), words, weights, gram)

    def unpack(mats):
        return [[[(row, par(c)) for row, c in col] for col in cols]
                for cols in mats]

    module.act_e = unpack(data["act_e"])
    module.act_f = unpack(data["act_f"])
    return module


def module_cache_name(label, pair: HermitianPair, hw, D) -> str:
    tag = "_".join(str(x) for x in hw)
    return f"{label}-l{pair.l0}-hw{tag}-D{D}.json"
