"""The quantized enveloping algebra as formal words in the generators.

No normal form is ever computed here.  An element is a linear combination
of words; it becomes concrete only when a module acts on a vector or a
Shapovalov pairing consumes it.  The defining relations are produced as
elements whose action must vanish identically, which is how every module
construction is certified.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .scalars import QScalar, ScalarField

# a letter is (kind, node) with kind in {"E", "F", "K+", "K-"}

_STAR_LETTER = {
    "E": lambda i: (("K+", i), ("F", i)),
    "F": lambda i: (("E", i), ("K-", i)),
    "K+": lambda i: (("K+", i),),
    "K-": lambda i: (("K-", i),),
}

_ANTIPODE_LETTER = {
    "E": lambda i: (-1, (("K-", i), ("E", i))),
    "F": lambda i: (-1, (("F", i), ("K+", i))),
    "K+": lambda i: (1, (("K-", i),)),
    "K-": lambda i: (1, (("K+", i),)),
}


def _coerce(c):
    if isinstance(c, QScalar):
        return c
    if isinstance(c, (int, Fraction)):
        return QScalar(c)
    raise TypeError(f"bad coefficient {c!r}")


_K_INVERSE = {"K+": "K-", "K-": "K+"}


def reduce_word(w):
    """Cancel adjacent K_i K_i^{-1} pairs.  This is the only rewriting the
    package ever performs on words; it keeps the torus letters a free group
    so the star map is an involution on the nose."""
    out = []
    for kind, i in w:
        if out and out[-1][1] == i and _K_INVERSE.get(out[-1][0]) == kind:
            out.pop()
        else:
            out.append((kind, i))
    return tuple(out)


class UqElement:
    """Finite linear combination of generator words over the scalar field."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for w, c in terms.items():
                if c:
                    w = reduce_word(w)
                    acc = self.terms.get(w)
                    acc = c if acc is None else acc + c
                    if acc:
                        self.terms[w] = acc
                    else:
                        self.terms.pop(w, None)

    @classmethod
    def unit(cls, coeff=1):
        c = _coerce(coeff)
        return cls({(): c}) if c else cls()

    @classmethod
    def generator(cls, kind: str, node: int):
        if kind not in ("E", "F", "K+", "K-"):
            raise ValueError(f"unknown generator kind {kind!r}")
        return cls({((kind, node),): QScalar(1)})

    @classmethod
    def word(cls, letters):
        return cls({tuple(letters): QScalar(1)})

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, UqElement):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, UqElement):
            return NotImplemented
        out = dict(self.terms)
        for w, c in other.terms.items():
            acc = out.get(w)
            acc = c if acc is None else acc + c
            if acc:
                out[w] = acc
            else:
                out.pop(w, None)
        e = UqElement.__new__(UqElement)
        e.terms = out
        return e

    def __neg__(self):
        e = UqElement.__new__(UqElement)
        e.terms = {w: -c for w, c in self.terms.items()}
        return e

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (QScalar, int, Fraction)):
            return self.scaled(other)
        if not isinstance(other, UqElement):
            return NotImplemented
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = reduce_word(w1 + w2)
                c = c1 * c2
                acc = out.get(w)
                acc = c if acc is None else acc + c
                if acc:
                    out[w] = acc
                else:
                    out.pop(w, None)
        e = UqElement.__new__(UqElement)
        e.terms = out
        return e

    def __rmul__(self, other):
        if isinstance(other, (QScalar, int, Fraction)):
            return self.scaled(other)
        return NotImplemented

    def scaled(self, c):
        c = _coerce(c)
        if not c:
            return UqElement()
        e = UqElement.__new__(UqElement)
        e.terms = {w: c * cv for w, cv in self.terms.items()}
        return e

    def __repr__(self):
        if not self.terms:
            return "UqElement(0)"
        bits = []
        for w, c in sorted(self.terms.items()):
            name = "*".join(f"{k[0]}{i}" + ("^-1" if k == "K-" else "")
                            for k, i in w) or "1"
            bits.append(f"({c!r})|{name}")
        return "UqElement[" + " + ".join(bits) + "]"


def coproduct(x: UqElement):
    """Image under the comultiplication, as a TensorElement."""
    out = TensorElement()
    for w, c in x.terms.items():
        pairs = {((), ()): c}
        for kind, i in w:
            if kind == "E":
                split = [((("E", i),), (), None), ((("K+", i),), (("E", i),), None)]
            elif kind == "F":
                split = [((("F", i),), (("K-", i),), None), ((), (("F", i),), None)]
            else:
                split = [(((kind, i),), ((kind, i),), None)]
            nxt = {}
            for (a, b), cv in pairs.items():
                for la, lb, _ in split:
                    key = (a + la, b + lb)
                    acc = nxt.get(key)
                    nxt[key] = cv if acc is None else acc + cv
            pairs = nxt
        for key, cv in pairs.items():
            out.accumulate(key, cv)
    return out


def counit(x: UqElement) -> QScalar:
    acc = QScalar(0)
    for w, c in x.terms.items():
        if all(kind in ("K+", "K-") for kind, _ in w):
            acc = acc + c
    return acc


def antipode(x: UqElement) -> UqElement:
    out = UqElement()
    for w, c in x.terms.items():
        sign = 1
        letters = []
        for kind, i in reversed(w):
            sg, ls = _ANTIPODE_LETTER[kind](i)
            sign *= sg
            letters.extend(ls)
        out = out + UqElement({tuple(letters): c * sign})
    return out


def star(x: UqElement) -> UqElement:
    """Conjugate-linear antiautomorphism; the scalar conjugation is the
    identity because the coefficient field is real with q fixed."""
    out = UqElement()
    for w, c in x.terms.items():
        letters = []
        for kind, i in reversed(w):
            letters.extend(_STAR_LETTER[kind](i))
        out = out + UqElement({tuple(letters): c})
    return out


def bar(x: UqElement) -> UqElement:
    """Conjugation fixing every generator; the identity map on this real
    coefficient field.  Present so the symmetry is explicit at call sites."""
    return UqElement(dict(x.terms))


def is_in_k(word, pair) -> bool:
    return not any(kind in ("E", "F") and i == pair.l0 for kind, i in word)


class TensorElement:
    """Sum of two-leg word tensors with the coefficient kept on the left."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for k, v in (terms or {}).items():
            if v:
                self.accumulate(k, v)

    def accumulate(self, key, c):
        key = (reduce_word(key[0]), reduce_word(key[1]))
        acc = self.terms.get(key)
        acc = c if acc is None else acc + c
        if acc:
            self.terms[key] = acc
        else:
            self.terms.pop(key, None)

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.terms == other.terms

    def __mul__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        out = TensorElement()
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                out.accumulate((a1 + a2, b1 + b2), c1 * c2)
        return out


# ---------------------------------------------------------------------------

def defining_relations(cartan, field: ScalarField):
    """All defining relations as elements whose module action must vanish.
    Returns a list of (name, element) pairs."""
    n = len(cartan.a)
    a, d = cartan.a, cartan.d
    E = lambda i: UqElement.generator("E", i)
    F = lambda i: UqElement.generator("F", i)
    Kp = lambda i: UqElement.generator("K+", i)
    Km = lambda i: UqElement.generator("K-", i)
    one = UqElement.unit()
    rels = []

    for i in range(n):
        rels.append((f"K{i+1} K{i+1}^-1 = 1", Kp(i) * Km(i) - one))
        for j in range(i + 1, n):
            rels.append((f"K{i+1} K{j+1} commute", Kp(i) * Kp(j) - Kp(j) * Kp(i)))

    for i in range(n):
        for j in range(n):
            qiaij = field.q_pow(d[i] * a[i][j])
            rels.append((f"K{i+1} E{j+1} rescaling",
                         Kp(i) * E(j) - E(j).scaled(qiaij) * Kp(i)))
            rels.append((f"K{i+1} F{j+1} rescaling",
                         Kp(i) * F(j) - F(j).scaled(qiaij.inverse()) * Kp(i)))

    for i in range(n):
        for j in range(n):
            lhs = E(i) * F(j) - F(j) * E(i)
            if i == j:
                denom = field.q_pow(d[i]) - field.q_pow(-d[i])
                lhs = lhs - (Kp(i) - Km(i)).scaled(denom.inverse())
            rels.append((f"[E{i+1}, F{j+1}] commutator", lhs))

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            m_top = 1 - a[i][j]
            for gen, tag in ((E, "E"), (F, "F")):
                acc = UqElement()
                for m in range(m_top + 1):
                    coeff = field.q_binom(m_top, m, d[i])
                    if m % 2:
                        coeff = -coeff
                    term = UqElement.unit()
                    for _ in range(m_top - m):
                        term = term * gen(i)
                    term = term * gen(j)
                    for _ in range(m):
                        term = term * gen(i)
                    acc = acc + term.scaled(coeff)
                rels.append((f"Serre {tag}{i+1},{tag}{j+1}", acc))
    return rels


# ---------------------------------------------------------------------------

_WORD_TOKEN = re.compile(r"^([EFK])(\d+)(\^-1)?$")


def parse_word(text: str) -> UqElement:
    """CLI/config syntax: factors joined by '*', e.g. 'E1*F2*K1^-1'.
    Node numbers are 1-based in the textual form."""
    letters = []
    stripped = text.strip()
    if stripped in ("", "1"):
        return UqElement.unit()
    for tok in stripped.split("*"):
        m = _WORD_TOKEN.match(tok.strip())
        if not m:
            raise ValueError(f"bad generator token {tok!r}")
        kind, node, inv = m.group(1), int(m.group(2)) - 1, m.group(3)
        if node < 0:
            raise ValueError(f"node in {tok!r} must be >= 1")
        if inv:
            if kind != "K":
                raise ValueError(f"only K admits ^-1, got {tok!r}")
            letters.append(("K-", node))
        else:
            letters.append(("K+", node) if kind == "K" else (kind, node))
    return UqElement.word(letters)
