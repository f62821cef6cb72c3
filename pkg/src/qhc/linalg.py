"""Dense exact linear algebra over the rational-function field.

Matrices are lists of row lists of QScalar.  Everything is plain Gaussian
elimination; the weight-space block structure used by callers keeps the
matrices small, so no fraction-free tricks are needed beyond picking the
cheapest pivot.
"""

from __future__ import annotations

from .scalars import QScalar

ZERO = QScalar(0)
ONE = QScalar(1)


def _cost(x: QScalar) -> int:
    return len(x.num) + len(x.den) + abs(x.e)


def matvec(rows, v):
    out = []
    for row in rows:
        acc = ZERO
        for a, b in zip(row, v):
            if a and b:
                acc = acc + a * b
        out.append(acc)
    return out


def matmul(a, b):
    bt = list(zip(*b))
    return [[_dot(row, col) for col in bt] for row in a]


def _dot(u, v):
    acc = ZERO
    for a, b in zip(u, v):
        if a and b:
            acc = acc + a * b
    return acc


def transpose(a):
    return [list(col) for col in zip(*a)]


def identity(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def scale_vec(c, v):
    return [c * x for x in v]


def add_vec(u, v):
    return [a + b for a, b in zip(u, v)]


def sub_vec(u, v):
    return [a - b for a, b in zip(u, v)]


class EchelonBasis:
    """Incremental echelon form.  reduce() expresses a vector against the
    stored rows; add() inserts the residual when it is nonzero.  With
    track=True every stored row remembers its expansion in the original
    inserted vectors, which is what minimal-polynomial extraction needs."""

    def __init__(self, track: bool = False):
        self.rows = []
        self.pivots = []
        self.track = track
        self.combos = []
        self.count = 0

    def __len__(self):
        return len(self.rows)

    def reduce(self, v):
        v = list(v)
        combo = {}
        for row, p, cb in zip(self.rows, self.pivots, self.combos if self.track
                              else iter(dict, None)):
            c = v[p]
            if c:
                for j, rj in enumerate(row):
                    if rj:
                        v[j] = v[j] - c * rj
                if self.track:
                    for k, w in cb.items():
                        combo[k] = combo.get(k, ZERO) - c * w
        return v, combo

    def add(self, v) -> bool:
        """Insert v; True if it enlarged the span."""
        red, combo = self.reduce(v)
        idx = self.count
        self.count += 1
        p = next((j for j, x in enumerate(red) if x), None)
        if p is None:
            if self.track:
                self.last_dependency = combo
            return False
        inv = red[p].inverse()
        row = [inv * x for x in red]
        if self.track:
            combo[idx] = ONE
            self.combos.append({k: inv * w for k, w in combo.items()})
        self.rows.append(row)
        self.pivots.append(p)
        return True


def rank(a) -> int:
    eb = EchelonBasis()
    for row in a:
        eb.add(row)
    return len(eb)


def _eliminate(aug, ncols):
    """Row-reduce in place; returns list of (pivot_row, pivot_col)."""
    pivots = []
    r = 0
    for c in range(ncols):
        best, cost = None, None
        for i in range(r, len(aug)):
            x = aug[i][c]
            if x:
                k = _cost(x)
                if best is None or k < cost:
                    best, cost = i, k
        if best is None:
            continue
        aug[r], aug[best] = aug[best], aug[r]
        inv = aug[r][c].inverse()
        aug[r] = [inv * x for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append((r, c))
        r += 1
        if r == len(aug):
            break
    return pivots


def solve_rect(a, b):
    """One exact solution of a @ x = b, or None when inconsistent.
    Free variables are set to zero."""
    m = len(a)
    n = len(a[0]) if m else 0
    aug = [list(row) + [bv] for row, bv in zip(a, b)]
    pivots = _eliminate(aug, n)
    pivot_rows = {r for r, _ in pivots}
    for i in range(m):
        if i not in pivot_rows and aug[i][n]:
            return None
    x = [ZERO] * n
    for r, c in pivots:
        x[c] = aug[r][n]
    return x


def solve_rect_many(a, bs):
    """One exact solution of a @ x = b for each b in bs, sharing a single
    elimination of a.  Entries are None where the system is inconsistent;
    free variables are set to zero."""
    m = len(a)
    n = len(a[0]) if m else 0
    aug = [list(row) + [b[i] for b in bs] for i, row in enumerate(a)]
    pivots = _eliminate(aug, n)
    pivot_rows = {r for r, _ in pivots}
    out = []
    for k in range(len(bs)):
        if any(aug[i][n + k] for i in range(m) if i not in pivot_rows):
            out.append(None)
            continue
        x = [ZERO] * n
        for r, c in pivots:
            x[c] = aug[r][n + k]
        out.append(x)
    return out


def solve_square(a, bs):
    """Solve a @ x = b for each column b in bs; a must be invertible."""
    n = len(a)
    aug = [list(row) + [b[i] for b in bs] for i, row in enumerate(a)]
    pivots = _eliminate(aug, n)
    if len(pivots) < n:
        raise ArithmeticError("singular matrix")
    out = [[ZERO] * n for _ in bs]
    for r, c in pivots:
        for k in range(len(bs)):
            out[k][c] = aug[r][n + k]
    return out


def invert(a):
    n = len(a)
    cols = solve_square(a, [[ONE if i == j else ZERO for i in range(n)]
                            for j in range(n)])
    return transpose(cols)


def det(a) -> QScalar:
    """Determinant by elimination with the cheapest-pivot rule."""
    n = len(a)
    if n == 0:
        return ONE
    m = [list(row) for row in a]
    acc = ONE
    for c in range(n):
        best, cost = None, None
        for i in range(c, n):
            x = m[i][c]
            if x:
                k = _cost(x)
                if best is None or k < cost:
                    best, cost = i, k
        if best is None:
            return ZERO
        if best != c:
            m[c], m[best] = m[best], m[c]
            acc = -acc
        piv = m[c][c]
        acc = acc * piv
        inv = piv.inverse()
        for i in range(c + 1, n):
            f = m[i][c]
            if f:
                f = f * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return acc


def nullspace(a):
    """Basis of the right kernel of a."""
    m = len(a)
    n = len(a[0]) if m else 0
    aug = [list(row) for row in a]
    pivots = _eliminate(aug, n)
    pivot_cols = {c for _, c in pivots}
    basis = []
    for free in range(n):
        if free in pivot_cols:
            continue
        v = [ZERO] * n
        v[free] = ONE
        for r, c in pivots:
            v[c] = -aug[r][free]
        basis.append(v)
    return basis
