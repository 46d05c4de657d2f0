"""Exact sublattices of Z^n in column Hermite normal form.

Every subgroup of a free abelian vertex or edge group is a ``LatticeBasis``.
Two lattices are equal as records exactly when they generate the same
subgroup, which is what lets graphs be hashed canonically.
"""

from fractions import Fraction
from functools import reduce as _fold
from math import gcd

__all__ = [
    "AmbientMismatch", "LatticeBasis", "Relation", "canonicalize", "compare",
    "meet_join", "join", "meet", "INFINITE", "Mono", "smith_diagonal",
    "quotient_invariants", "lattice_from_gens", "full", "trivial",
    "intermediate_lattices",
]


class AmbientMismatch(ValueError):
    pass


INFINITE = float("inf")


def _xgcd(a, b):
    # returns (g, x, y) with a*x + b*y = g >= 0
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _hnf_columns(cols, n):
    """Column-style Hermite form of the span of ``cols`` (lists of length n)."""
    cols = [list(c) for c in cols if any(c)]
    basis = []
    for row in range(n):
        live = [c for c in cols if c[row] != 0]
        if not live:
            continue
        rest = [c for c in cols if c[row] == 0]
        piv = live[0]
        for c in live[1:]:
            g, x, y = _xgcd(piv[row], c[row])
            a, b = piv[row] // g, c[row] // g
            new_piv = [x * p + y * q for p, q in zip(piv, c)]
            other = [b * p - a * q for p, q in zip(piv, c)]
            piv = new_piv
            if any(other):
                rest.append(other)
        if piv[row] < 0:
            piv = [-v for v in piv]
        basis.append((row, piv))
        cols = [c for c in rest if any(c)]
    # reduce earlier columns against later pivots
    for j in range(len(basis)):
        prow, pcol = basis[j]
        p = pcol[prow]
        for k in range(j):
            col = basis[k][1]
            q = col[prow] // p
            if q:
                basis[k] = (basis[k][0], [u - q * v for u, v in zip(col, pcol)])
    return tuple(tuple(c) for _, c in basis)


class LatticeBasis:
    """A sublattice of Z^n stored by its unique Hermite basis (columns)."""

    __slots__ = ("n", "basis", "_pivots", "_hash")

    def __init__(self, n, basis):
        self.n = n
        self.basis = basis
        self._pivots = tuple(next(i for i, v in enumerate(c) if v) for c in basis)
        self._hash = hash((n, basis))

    @property
    def rank(self):
        return len(self.basis)

    def __eq__(self, other):
        return (isinstance(other, LatticeBasis) and self.n == other.n
                and self.basis == other.basis)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "LatticeBasis(%d, %r)" % (self.n, self.basis)

    def is_full(self):
        return self.rank == self.n and all(self.basis[j][p] == 1
                                           for j, p in enumerate(self._pivots))

    def det(self):
        """Covolume of a full-rank lattice (product of pivots)."""
        if self.rank != self.n:
            raise ValueError("determinant of a non full-rank lattice")
        out = 1
        for j, p in enumerate(self._pivots):
            out *= self.basis[j][p]
        return out

    def reduce(self, x):
        """Canonical representative of ``x`` modulo the lattice."""
        x = list(x)
        for col, p in zip(self.basis, self._pivots):
            q = x[p] // col[p]
            if q:
                x = [u - q * v for u, v in zip(x, col)]
        return tuple(x)

    def coordinates(self, x):
        """Coefficients of ``x`` in the basis, or None if x is not a member."""
        x = list(x)
        coeffs = []
        for col, p in zip(self.basis, self._pivots):
            if x[p] % col[p]:
                return None
            q = x[p] // col[p]
            coeffs.append(q)
            if q:
                x = [u - q * v for u, v in zip(x, col)]
        if any(x):
            return None
        return tuple(coeffs)

    def __contains__(self, x):
        return self.coordinates(x) is not None

    def contains_lattice(self, other):
        _check(self, other)
        return all(c in self for c in other.basis)

    def matrix(self):
        """n x r matrix (tuple of rows) whose columns are the basis."""
        return tuple(tuple(c[i] for c in self.basis) for i in range(self.n))


def _check(a, b):
    if a.n != b.n:
        raise AmbientMismatch("ambient ranks %d and %d differ" % (a.n, b.n))


def canonicalize(matrix, n):
    """Hermite basis of the column span of an n-row matrix (tuple of rows)."""
    rows = [list(r) for r in matrix]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix")
    if rows and len(rows) != n:
        raise ValueError("matrix has %d rows, expected %d" % (len(rows), n))
    ncols = len(rows[0]) if rows else 0
    cols = [[rows[i][j] for i in range(n)] for j in range(ncols)]
    return LatticeBasis(n, _hnf_columns(cols, n))


def lattice_from_gens(gens, n):
    """Lattice spanned by a list of vectors of length n."""
    return LatticeBasis(n, _hnf_columns([list(g) for g in gens], n))


def full(n):
    return LatticeBasis(n, tuple(tuple(int(i == j) for i in range(n)) for j in range(n)))


def trivial(n):
    return LatticeBasis(n, ())


class Relation:
    """Outcome of ``compare``: kind is EQUAL, SUB, SUP or INCOMPARABLE."""

    EQUAL, SUB, SUP, INCOMPARABLE = "Equal", "ProperSub", "ProperSup", "Incomparable"
    __slots__ = ("kind", "index")

    def __init__(self, kind, index=None):
        self.kind = kind
        self.index = index

    def __eq__(self, other):
        return (isinstance(other, Relation) and self.kind == other.kind
                and self.index == other.index)

    def __repr__(self):
        if self.index is None:
            return self.kind
        return "%s(index=%s)" % (self.kind, self.index)


def _index(sub, sup):
    # sub is contained in sup
    if sub.rank != sup.rank:
        return INFINITE
    coords = [sup.coordinates(c) for c in sub.basis]
    return abs(_det([list(c) for c in coords]))


def _det(m):
    """Exact determinant of a square integer matrix (Bareiss)."""
    n = len(m)
    if n == 0:
        return 1
    m = [list(r) for r in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def compare(a, b):
    _check(a, b)
    if a == b:
        return Relation(Relation.EQUAL)
    if b.contains_lattice(a):
        return Relation(Relation.SUB, _index(a, b))
    if a.contains_lattice(b):
        return Relation(Relation.SUP, _index(b, a))
    return Relation(Relation.INCOMPARABLE)


def join(a, b):
    _check(a, b)
    return LatticeBasis(a.n, _hnf_columns([list(c) for c in a.basis + b.basis], a.n))


def _kernel(cols, n):
    """Integer kernel basis of the n x k matrix with the given columns."""
    k = len(cols)
    aug = [list(c) + [int(i == j) for i in range(k)] for j, c in enumerate(cols)]
    work = aug
    for row in range(n):
        live = [c for c in work if c[row] != 0]
        if not live:
            continue
        work = [c for c in work if c[row] == 0]
        piv = live[0]
        for c in live[1:]:
            g, x, y = _xgcd(piv[row], c[row])
            a, b = piv[row] // g, c[row] // g
            new_piv = [x * p + y * q for p, q in zip(piv, c)]
            other = [b * p - a * q for p, q in zip(piv, c)]
            piv = new_piv
            work.append(other)
        # piv has a nonzero entry in this row, so it is not a kernel vector
    return [c[n:] for c in work if not any(c[:n]) and any(c[n:])]


def meet(a, b):
    _check(a, b)
    if not a.basis or not b.basis:
        return trivial(a.n)
    cols = [list(c) for c in a.basis] + [[-v for v in c] for c in b.basis]
    ker = _kernel(cols, a.n)
    ra = a.rank
    gens = []
    for vec in ker:
        gens.append([sum(vec[j] * a.basis[j][i] for j in range(ra)) for i in range(a.n)])
    return lattice_from_gens(gens, a.n)


def meet_join(a, b):
    return meet(a, b), join(a, b)


def smith_diagonal(matrix):
    """Nonzero Smith invariants d1 | d2 | ... of an integer matrix (rows)."""
    m = [list(r) for r in matrix]
    if not m or not m[0]:
        return []
    rows, cols = len(m), len(m[0])

    def bring_min(t, only_cross=False):
        cand = [(abs(m[i][j]), i, j) for i in range(t, rows) for j in range(t, cols)
                if m[i][j] and (not only_cross or i == t or j == t)]
        if not cand:
            return False
        _, i, j = min(cand)
        m[t], m[i] = m[i], m[t]
        for r in m:
            r[t], r[j] = r[j], r[t]
        return True

    diag = []
    for t in range(min(rows, cols)):
        if not bring_min(t):
            break
        while True:
            piv = m[t][t]
            dirty = False
            for i in range(t + 1, rows):
                q = m[i][t] // piv
                if q:
                    m[i] = [u - q * v for u, v in zip(m[i], m[t])]
                dirty = dirty or m[i][t] != 0
            for j in range(t + 1, cols):
                q = m[t][j] // piv
                if q:
                    for r in m:
                        r[j] -= q * r[t]
                dirty = dirty or m[t][j] != 0
            if dirty:
                bring_min(t, only_cross=True)
                continue
            bad = next((i for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if m[i][j] % piv), None)
            if bad is None:
                break
            m[t] = [u + v for u, v in zip(m[t], m[bad])]
        diag.append(abs(m[t][t]))
    return diag


def quotient_invariants(sub, sup):
    """Invariant factors (all > 1) of sup/sub, plus the free rank of the quotient."""
    _check(sub, sup)
    if not sup.contains_lattice(sub):
        raise ValueError("not a sublattice")
    coords = [sup.coordinates(c) for c in sub.basis]
    rows = [[coords[j][i] for j in range(len(coords))] for i in range(sup.rank)]
    diag = smith_diagonal(rows) if coords else []
    free = sup.rank - len(diag)
    return [d for d in diag if d > 1], free


def intermediate_lattices(low, high, limit=None):
    """All lattices L with low <= L <= high, both of full rank; may be capped."""
    _check(low, high)
    if low.rank != low.n or high.rank != high.n:
        raise ValueError("intermediate lattices need full-rank bounds")
    n = low.n
    hb = high.matrix()
    low_in_high = [high.coordinates(c) for c in low.basis]
    index = _index(low, high)

    def divisors(k):
        return [d for d in range(1, k + 1) if k % d == 0]

    out = []
    # enumerate Hermite bases H (in high coordinates) with det dividing index
    def rec(j, cols, det_so_far):
        if limit is not None and len(out) >= limit:
            return
        if j == n:
            sub = LatticeBasis(n, _hnf_columns([list(c) for c in cols], n))
            if all(sub.coordinates(c) is not None for c in low_in_high):
                out.append(sub)
            return
        for d in divisors(index // det_so_far):
            # column j: zeros above j, pivot d at j, entries below in range of later pivots
            # enumerate later entries freely modulo the index (reduced by HNF later)
            for tail in _tails(n - j - 1, index):
                col = [0] * j + [d] + list(tail)
                rec(j + 1, cols + [col], det_so_far * d)

    rec(0, [], 1)
    seen, result = set(), []
    for sub in out:
        if sub not in seen:
            seen.add(sub)
            # map back to ambient coordinates
            amb = [[sum(hb[i][k] * c[k] for k in range(n)) for i in range(n)] for c in sub.basis]
            result.append(LatticeBasis(n, _hnf_columns(amb, n)))
    return sorted(set(result), key=lambda L: L.basis)


def _tails(length, modulus):
    if length == 0:
        yield ()
        return
    for head in range(modulus):
        for rest in _tails(length - 1, modulus):
            yield (head,) + rest


class Mono:
    """An injective homomorphism Z^r -> Z^n given by an n x r integer matrix."""

    __slots__ = ("rows", "n", "r", "_image")

    def __init__(self, rows):
        rows = tuple(tuple(int(v) for v in row) for row in rows)
        self.rows = rows
        self.n = len(rows)
        self.r = len(rows[0]) if rows else 0
        self._image = None

    @classmethod
    def scalar(cls, m):
        return cls(((m,),))

    def __eq__(self, other):
        return isinstance(other, Mono) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        if self.n == 1 and self.r == 1:
            return "Mono[%d]" % self.rows[0][0]
        return "Mono(%r)" % (self.rows,)

    @property
    def label(self):
        """The integer label of a rank-1 injection."""
        return self.rows[0][0]

    def image(self):
        if self._image is None:
            self._image = canonicalize(self.rows, self.n)
        return self._image

    def is_injective(self):
        return self.image().rank == self.r

    def is_surjective(self):
        return self.image().is_full()

    def apply(self, x):
        return tuple(sum(a * b for a, b in zip(row, x)) for row in self.rows)

    def compose(self, other):
        """self o other."""
        if self.r != other.n:
            raise ValueError("dimension mismatch in composition")
        return Mono(tuple(tuple(sum(self.rows[i][k] * other.rows[k][j] for k in range(self.r))
                                for j in range(other.r)) for i in range(self.n)))

    def preimage(self, x):
        """The unique y with self(y) = x, or None when x is not in the image."""
        sol = _solve(self.rows, x)
        if sol is None or any(v.denominator != 1 for v in sol):
            return None
        y = tuple(int(v) for v in sol)
        return y if self.apply(y) == tuple(x) else None

    def det(self):
        return _det([list(r) for r in self.rows])

    def columns(self):
        return [tuple(self.rows[i][j] for i in range(self.n)) for j in range(self.r)]

    @classmethod
    def from_columns(cls, cols, n):
        return cls(tuple(tuple(c[i] for c in cols) for i in range(n)))

    @classmethod
    def identity(cls, n):
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def pull(self, m):
        """self^-1 o m, or None when the image of m is not inside the image of self."""
        cols = []
        for c in m.columns():
            y = self.preimage(c)
            if y is None:
                return None
            cols.append(y)
        return Mono.from_columns(cols, self.r)


def _solve(rows, x):
    """Rational solution of rows * y = x for an injective matrix, or None."""
    n = len(rows)
    r = len(rows[0]) if rows else 0
    m = [[Fraction(v) for v in rows[i]] + [Fraction(x[i])] for i in range(n)]
    piv_cols = []
    row = 0
    for col in range(r):
        p = next((i for i in range(row, n) if m[i][col] != 0), None)
        if p is None:
            continue
        m[row], m[p] = m[p], m[row]
        pv = m[row][col]
        m[row] = [v / pv for v in m[row]]
        for i in range(n):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        piv_cols.append(col)
        row += 1
    if any(m[i][r] != 0 for i in range(row, n)):
        return None
    y = [Fraction(0)] * r
    for i, col in enumerate(piv_cols):
        y[col] = m[i][r]
    return y


def rational_inverse(rows):
    """Inverse of a square integer matrix as Fractions (raises if singular)."""
    n = len(rows)
    m = [[Fraction(v) for v in rows[i]] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        p = next((i for i in range(col, n) if m[i][col] != 0), None)
        if p is None:
            raise ValueError("singular matrix")
        m[col], m[p] = m[p], m[col]
        pv = m[col][col]
        m[col] = [v / pv for v in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return [row[n:] for row in m]


def matmul(a, b):
    """Product of two matrices given as sequences of rows (ints or Fractions)."""
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(len(a))]


def integral(m):
    """Convert a Fraction matrix to an int tuple matrix, or None if not integral."""
    out = []
    for row in m:
        if any(Fraction(v).denominator != 1 for v in row):
            return None
        out.append(tuple(int(v) for v in row))
    return tuple(out)


def gcd_all(values):
    return _fold(gcd, values, 0)
