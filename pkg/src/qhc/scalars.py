"""Exact coefficient field for the whole package.

Every coefficient is a rational function of a formal symbol s with s**D = q,
where D is a fixed positive integer chosen once per root datum.  Values are
kept in a canonical factored form, so equality is tuple equality and hashing
is cheap.  Nothing here ever rounds; numeric evaluation lives in
NumericValue and is used for cross-checks only.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd

# ---------------------------------------------------------------------------
# integer polynomials as coefficient tuples, lowest degree first
# the zero polynomial is the empty tuple

def pstrip(a):
    n = len(a)
    while n and a[n - 1] == 0:
        n -= 1
    return tuple(a[:n])


def padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return pstrip(out)


def pneg(a):
    return tuple(-c for c in a)


def psub(a, b):
    return padd(a, pneg(b))


def pmul(a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, c in enumerate(a):
        if c:
            for j, d in enumerate(b):
                if d:
                    out[i + j] += c * d
    return pstrip(out)


def pmul_int(a, k):
    if k == 0:
        return ()
    return tuple(c * k for c in a)


def pcontent(a):
    g = 0
    for c in a:
        g = gcd(g, c)
        if g == 1:
            return 1
    return g


def pval(a):
    """Index of the lowest nonzero coefficient (s-adic valuation)."""
    for i, c in enumerate(a):
        if c:
            return i
    raise ValueError("valuation of zero polynomial")


def pshift(a, k):
    """Multiply by s**k, k >= 0."""
    if not a:
        return ()
    return (0,) * k + tuple(a)


def psubst_pow(a, k):
    """a(s) -> a(s**k) for k >= 1."""
    if not a:
        return ()
    out = [0] * ((len(a) - 1) * k + 1)
    for i, c in enumerate(a):
        out[i * k] = c
    return tuple(out)


def pderiv(a):
    return pstrip([i * c for i, c in enumerate(a) if i])


def peval(a, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def prem(a, b):
    """Pseudo-remainder of a by b over the integers: each elimination step
    scales the tail by lc(b) before subtracting, so no fractions appear."""
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) > db:
        top = a.pop()
        for i in range(len(a)):
            a[i] *= lb
        if top:
            off = len(a) - db
            for i in range(db):
                a[off + i] -= top * b[i]
    return pstrip(a)


def _pdivtry(a, b):
    """Quotient a/b, or None when the division is not exact."""
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    if len(a) <= db:
        return None
    out = [0] * (len(a) - db)
    for k in range(len(out) - 1, -1, -1):
        c = a[k + db]
        if c % lb:
            return None
        t = c // lb
        out[k] = t
        if t:
            for i, bc in enumerate(b):
                a[k + i] -= t * bc
    if pstrip(a):
        return None
    return pstrip(out)


def pgcd(a, b):
    """Primitive gcd with positive leading coefficient.  Tries the
    evaluation-reconstruction heuristic first and falls back to a primitive
    remainder sequence when it fails to certify."""
    a, b = pstrip(a), pstrip(b)
    if not a:
        a, b = b, a
    if not b:
        if not a:
            return ()
        c = pcontent(a)
        if a[-1] < 0:
            c = -c
        return tuple(x // c for x in a)
    if len(a) < len(b):
        a, b = b, a
    ca, cb = pcontent(a), pcontent(b)
    g = gcd(ca, cb)
    a = tuple(x // ca for x in a)
    b = tuple(x // cb for x in b)
    if len(b) == 1:
        return (g,)

    xi = 2 * max(max(abs(x) for x in a), max(abs(x) for x in b)) + 2
    for _ in range(3):
        va = sum(c * xi ** k for k, c in enumerate(a))
        vb = sum(c * xi ** k for k, c in enumerate(b))
        gv = gcd(va, vb)
        digits = []
        while gv:
            d = gv % xi
            if d > xi // 2:
                d -= xi
            digits.append(d)
            gv = (gv - d) // xi
        cand = pstrip(digits)
        if cand:
            cc = pcontent(cand)
            cand = tuple(x // cc for x in cand)
            if cand[-1] < 0:
                cand = pneg(cand)
            if _pdivtry(a, cand) is not None and _pdivtry(b, cand) is not None:
                return pmul_int(cand, g) if g != 1 else cand
        xi = xi * 2 + 29

    while b:
        r = prem(a, b)
        if r:
            cr = pcontent(r)
            r = tuple(x // cr for x in r)
        a, b = b, r
    if a[-1] < 0:
        a = pneg(a)
    return pmul_int(a, g) if g != 1 else a


def pdivexact(a, b):
    """Quotient a/b when b divides a exactly.  Integer long division."""
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    out = [0] * (len(a) - db)
    for k in range(len(out) - 1, -1, -1):
        c = a[k + db]
        if c % lb:
            raise ArithmeticError("inexact polynomial division")
        t = c // lb
        out[k] = t
        if t:
            for i, bc in enumerate(b):
                a[k + i] -= t * bc
    if pstrip(a):
        raise ArithmeticError("inexact polynomial division")
    return pstrip(out)


def ppow(a, k):
    out = (1,)
    base = a
    while k:
        if k & 1:
            out = pmul(out, base)
        base = pmul(base, base)
        k >>= 1
    return out


# ---------------------------------------------------------------------------

class QScalar:
    """c * s**e * num(s)/den(s) with num, den primitive coprime integer
    polynomials, positive leading coefficients, nonzero constant terms.
    The normal form is unique, so __eq__ and __hash__ are structural."""

    __slots__ = ("c", "e", "num", "den", "_hash")

    def __init__(self, c, e=0, num=(1,), den=(1,), _raw=False):
        if not isinstance(c, Fraction):
            c = Fraction(c)
        if _raw:
            self.c, self.e, self.num, self.den = c, e, num, den
            self._hash = None
            return
        num, den = pstrip(num), pstrip(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num or c == 0:
            self.c, self.e, self.num, self.den = Fraction(0), 0, (1,), (1,)
            self._hash = None
            return
        vn, vd = pval(num), pval(den)
        e += vn - vd
        num, den = num[vn:], den[vd:]
        cn, cd = pcontent(num), pcontent(den)
        if num[-1] < 0:
            cn = -cn
        if den[-1] < 0:
            cd = -cd
        num = tuple(x // cn for x in num)
        den = tuple(x // cd for x in den)
        c = c * Fraction(cn, cd)
        if len(num) > 1 and len(den) > 1:
            g = pgcd(num, den)
            if len(g) > 1:
                num = pdivexact(num, g)
                den = pdivexact(den, g)
        self.c, self.e, self.num, self.den = c, e, num, den
        self._hash = None

    # -- predicates ---------------------------------------------------------

    def is_zero(self):
        return self.c == 0

    def __bool__(self):
        return self.c != 0

    def is_laurent(self):
        """True when the value is a Laurent polynomial in s."""
        return self.den == (1,)

    # -- ring structure ------------------------------------------------------

    def __mul__(self, other):
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                return QScalar(self.c * other, self.e, self.num, self.den, _raw=(other != 0)) \
                    if other != 0 else _ZERO
            return NotImplemented
        if self.c == 0 or other.c == 0:
            return _ZERO
        # cross-cancel before multiplying to keep degrees down
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if len(n1) > 1 and len(d2) > 1:
            g = pgcd(n1, d2)
            if len(g) > 1:
                n1, d2 = pdivexact(n1, g), pdivexact(d2, g)
        if len(n2) > 1 and len(d1) > 1:
            g = pgcd(n2, d1)
            if len(g) > 1:
                n2, d1 = pdivexact(n2, g), pdivexact(d1, g)
        return QScalar(self.c * other.c, self.e + other.e, pmul(n1, n2), pmul(d1, d2))

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        if self.c == 0:
            return other
        if other.c == 0:
            return self
        e = min(self.e, other.e)
        a1, b1 = self.c.numerator, self.c.denominator
        a2, b2 = other.c.numerator, other.c.denominator
        lb = b1 * b2 // gcd(b1, b2)
        t1 = pmul_int(pshift(pmul(self.num, other.den), self.e - e), a1 * (lb // b1))
        t2 = pmul_int(pshift(pmul(other.num, self.den), other.e - e), a2 * (lb // b2))
        return QScalar(Fraction(1, lb), e, padd(t1, t2), pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        if self.c == 0:
            return self
        return QScalar(-self.c, self.e, self.num, self.den, _raw=True)

    def __sub__(self, other):
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def inverse(self):
        if self.c == 0:
            raise ZeroDivisionError("inverting zero")
        c = 1 / self.c
        num, den = self.den, self.num
        return QScalar(c, -self.e, num, den)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError
            return QScalar(self.c / other, self.e, self.num, self.den, _raw=True)
        if not isinstance(other, QScalar):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k == 0:
            return QScalar(1)
        base = self if k > 0 else self.inverse()
        k = abs(k)
        # factored form powers componentwise; primitivity and signs survive
        return QScalar(base.c ** k, base.e * k, ppow(base.num, k), ppow(base.den, k), _raw=True)

    # -- substitutions -------------------------------------------------------

    def subst_pow(self, k: int) -> "QScalar":
        """Replace s by s**k (k >= 1).  Canonical form is preserved."""
        if k == 1 or self.c == 0:
            return self
        if k < 1:
            raise ValueError("substitution power must be >= 1")
        return QScalar(self.c, self.e * k, psubst_pow(self.num, k),
                       psubst_pow(self.den, k), _raw=True)

    def dds(self) -> "QScalar":
        """Derivative with respect to s."""
        if self.c == 0:
            return self
        n, d, e = self.num, self.den, self.e
        core = padd(pmul_int(pmul(n, d), e),
                    pshift(psub(pmul(pderiv(n), d), pmul(n, pderiv(d))), 1))
        return QScalar(self.c, e - 1, core, pmul(d, d))

    def eval_fraction(self, s0: Fraction) -> Fraction:
        if self.c == 0:
            return Fraction(0)
        if s0 == 0:
            raise ZeroDivisionError("evaluation at s = 0")
        db = peval(self.den, s0)
        if db == 0:
            raise ZeroDivisionError("pole at sample point")
        return self.c * s0 ** self.e * peval(self.num, s0) / db

    # -- comparisons / hashing ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, QScalar):
            return (self.c == other.c and self.e == other.e
                    and self.num == other.num and self.den == other.den)
        if isinstance(other, (int, Fraction)):
            return self.num == (1,) and self.den == (1,) and self.e == 0 and self.c == other
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.c, self.e, self.num, self.den))
            self._hash = h
        return h

    def __repr__(self):
        if self.c == 0:
            return "QScalar(0)"
        return f"QScalar({self.c}, s^{self.e}, {list(self.num)}/{list(self.den)})"


_ZERO = QScalar(0)
_ONE = QScalar(1)


# ---------------------------------------------------------------------------

class PoleOnInterval(ValueError):
    """Raised when a sample point sits on a pole of the value."""


def _sturm_chain(p):
    """Sturm sequence of a squarefree Fraction-coefficient polynomial."""
    def frem(a, b):
        a = list(a)
        while len(a) >= len(b):
            t = a[-1] / b[-1]
            off = len(a) - len(b)
            for i, c in enumerate(b):
                a[off + i] -= t * c
            a.pop()
            while a and a[-1] == 0:
                a.pop()
            if not a:
                break
        return a
    chain = [list(p), [Fraction(i) * c for i, c in enumerate(p) if i]]
    while chain[-1]:
        r = frem(chain[-2], chain[-1])
        chain.append([-c for c in r])
    chain.pop()
    return chain


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = peval(p, x)
        if v:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots_open(p, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots of the integer polynomial p in (lo, hi]; p(lo) != 0."""
    sf = pdivexact(p, pgcd(p, pderiv(p))) if len(p) > 2 else p
    chain = _sturm_chain([Fraction(c) for c in sf])
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


def pole_free_on_unit_interval(x: QScalar):
    """True plus None when the denominator has no root with s in (0, 1],
    else False plus an isolating rational interval around an offending root.
    The canonical form guarantees den(0) != 0, so the left endpoint is safe."""
    den = x.den
    if len(den) == 1:
        return True, None
    if peval(den, Fraction(1)) == 0:
        return False, (Fraction(1), Fraction(1))
    lo, hi = Fraction(0), Fraction(1)
    n = count_roots_open(den, lo, hi)
    if n == 0:
        return True, None
    for _ in range(40):
        mid = (lo + hi) / 2
        if peval(den, mid) == 0:
            return False, (mid, mid)
        left = count_roots_open(den, lo, mid)
        if left:
            hi = mid
        else:
            lo = mid
        if count_roots_open(den, lo, hi) == 1 and hi - lo < Fraction(1, 1024):
            break
    return False, (lo, hi)


# ---------------------------------------------------------------------------

def _int_nth_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) by Newton iteration on integers."""
    if n < 0:
        raise ValueError
    if n == 0:
        return 0
    x = 1 << ((n.bit_length() + k - 1) // k + 1)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def _rational_root(q0: Fraction, k: int):
    """Exact k-th root of q0 when one exists, else None."""
    a = _int_nth_root(q0.numerator, k)
    b = _int_nth_root(q0.denominator, k)
    if a ** k == q0.numerator and b ** k == q0.denominator:
        return Fraction(a, b)
    return None


class NumericValue:
    """A QScalar evaluated at a concrete q0 in (0,1).  The evaluation is a
    single pass of exact rational arithmetic; when q0**(1/D) is irrational
    the root itself is approximated to `bits` bits first and that is the
    only source of error."""

    __slots__ = ("value", "exact", "bits")

    def __init__(self, value: Fraction, exact: bool, bits: int):
        self.value = value
        self.exact = exact
        self.bits = bits

    def __float__(self):
        return float(self.value)

    def close_to(self, other, tol=Fraction(1, 2 ** 96)) -> bool:
        v = other.value if isinstance(other, NumericValue) else Fraction(other)
        return abs(self.value - v) <= tol

    def __repr__(self):
        tag = "exact" if self.exact else f"~{self.bits}b"
        return f"NumericValue({float(self.value):.12g}, {tag})"


# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"^-?\d+(?:/-?\d+)?$")


class ScalarField:
    """Constructors and q-combinatorics for a fixed root order D (s**D = q)."""

    def __init__(self, D: int):
        if D < 1:
            raise ValueError("root order must be positive")
        self.D = D
        self.zero = _ZERO
        self.one = _ONE
        self._qint_cache = {}
        self._qfact_cache = {}

    def scalar(self, x) -> QScalar:
        return QScalar(Fraction(x))

    def s_pow(self, m: int) -> QScalar:
        return QScalar(1, m, (1,), (1,), _raw=True)

    def q_pow(self, m) -> QScalar:
        """q**m for integer or Fraction m with denominator dividing D."""
        em = Fraction(m) * self.D
        if em.denominator != 1:
            raise ValueError(f"exponent {m} is not a multiple of 1/{self.D}")
        return self.s_pow(int(em))

    def q_int(self, n: int, d: int = 1) -> QScalar:
        """[n] in base q**d, assembled as a monomial sum so no division occurs."""
        key = (n, d)
        v = self._qint_cache.get(key)
        if v is not None:
            return v
        if n == 0:
            v = _ZERO
        elif n < 0:
            v = -self.q_int(-n, d)
        else:
            step = 2 * self.D * d
            coeffs = [0] * (step * (n - 1) + 1)
            for j in range(n):
                coeffs[step * j] = 1
            v = QScalar(1, -self.D * d * (n - 1), tuple(coeffs), (1,), _raw=True)
        self._qint_cache[key] = v
        return v

    def q_fact(self, n: int, d: int = 1) -> QScalar:
        key = (n, d)
        v = self._qfact_cache.get(key)
        if v is None:
            v = _ONE
            for j in range(2, n + 1):
                v = v * self.q_int(j, d)
            self._qfact_cache[key] = v
        return v

    def q_binom(self, m: int, n: int, d: int = 1) -> QScalar:
        if not 0 <= n <= m:
            raise ValueError(f"binomial ({m},{n}) out of range")
        return self.q_fact(m, d) / (self.q_fact(n, d) * self.q_fact(m - n, d))

    # -- textual form, used in every JSON output -----------------------------

    def serialize(self, x: QScalar) -> str:
        num = pmul_int(pshift(x.num, max(x.e, 0)), x.c.numerator)
        den = pmul_int(pshift(x.den, max(-x.e, 0)), x.c.denominator)
        if not num:
            num, den = (0,), (1,)
        ns = ",".join(str(c) for c in num)
        ds = ",".join(str(c) for c in den)
        return f"{ns}/{ds}@{self.D}"

    def parse(self, text: str) -> QScalar:
        body, _, dtag = text.rpartition("@")
        if not body or int(dtag) != self.D:
            raise ValueError(f"bad scalar literal {text!r}")
        candidates = []
        for i, ch in enumerate(body):
            if ch != "/":
                continue
            left, right = body[:i], body[i + 1:]
            try:
                nl = [Fraction(t) for t in left.split(",") if _TOKEN.match(t)]
                dl = [Fraction(t) for t in right.split(",") if _TOKEN.match(t)]
            except (ValueError, ZeroDivisionError):
                continue
            if len(nl) != left.count(",") + 1 or len(dl) != right.count(",") + 1:
                continue
            if not any(dl):
                continue
            candidates.append(self._from_fraction_polys(nl, dl))
        if not candidates:
            raise ValueError(f"unparseable scalar literal {text!r}")
        if any(c != candidates[0] for c in candidates[1:]):
            raise ValueError(f"ambiguous scalar literal {text!r}")
        return candidates[0]

    @staticmethod
    def _from_fraction_polys(nl, dl) -> QScalar:
        bn = 1
        for f in nl:
            bn = bn * f.denominator // gcd(bn, f.denominator)
        bd = 1
        for f in dl:
            bd = bd * f.denominator // gcd(bd, f.denominator)
        num = tuple(int(f * bn) for f in nl)
        den = tuple(int(f * bd) for f in dl)
        return QScalar(Fraction(bd, bn), 0, num, den)

    # -- numerics -------------------------------------------------------------

    def evaluate(self, x: QScalar, q0, bits: int = 128) -> NumericValue:
        q0 = Fraction(q0)
        if not 0 < q0 < 1:
            raise ValueError("sample point must lie in (0,1)")
        # exact pole test: s0 is the unique positive root of b*s^D - a
        rootpoly = pstrip((-q0.numerator,) + (0,) * (self.D - 1) + (q0.denominator,))
        if len(x.den) > 1:
            g = pgcd(x.den, rootpoly)
            if len(g) > 1 and count_roots_open(g, Fraction(0), Fraction(1)) > 0:
                raise PoleOnInterval(f"pole at q0 = {q0}")
        s0 = _rational_root(q0, self.D)
        if s0 is not None:
            return NumericValue(x.eval_fraction(s0), True, bits)
        k = bits + 16
        scaled = (q0.numerator << (self.D * k)) // q0.denominator
        s0 = Fraction(_int_nth_root(scaled, self.D), 1 << k)
        return NumericValue(x.eval_fraction(s0), False, bits)
