"""Exact integer linear algebra.

Matrices are numpy arrays of dtype object holding Python ints, so entries
never overflow.  Linear maps follow the row convention used throughout the
package: row ``i`` of a map matrix is the image of the i-th source basis
vector, so a map ``A -> B`` is stored as a ``rank(A) x rank(B)`` matrix and
composition ``A -> B -> C`` is the product ``M_AB @ M_BC``.

Exterior powers use lexicographically ordered subsets of basis indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb, gcd

import numpy as np

from .errors import TroplefError


class NotSublattice(TroplefError):
    pass


# ---------------------------------------------------------------------------
# coefficient rings


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class CoeffRing:
    """One of Z, Q or F_p (p prime)."""

    tag: str
    p: int = 0

    def __post_init__(self):
        if self.tag not in ("Z", "Q", "F"):
            raise ValueError(f"unknown ring tag {self.tag!r}")
        if self.tag == "F" and not _is_prime(self.p):
            raise ValueError(f"F_p needs p prime, got {self.p}")

    @classmethod
    def modp(cls, p: int) -> "CoeffRing":
        return cls("F", p)

    @classmethod
    def parse(cls, text: str) -> "CoeffRing":
        text = text.strip()
        if text in ("Z", "INT"):
            return INT
        if text in ("Q", "RAT"):
            return RAT
        if text[:1] == "F" and text[1:].isdigit():
            return cls.modp(int(text[1:]))
        raise ValueError(f"bad coefficient ring {text!r}, expected Z, Q or F<p>")

    @property
    def is_field(self) -> bool:
        return self.tag != "Z"

    def reduce(self, m):
        """Entries of ``m`` mapped into the ring (only F_p changes them)."""
        if self.tag == "F":
            return np.vectorize(lambda x: int(x) % self.p, otypes=[object])(m) if m.size else m
        return m

    def contains_inverse(self, n: int) -> bool:
        """True when the integer n is a unit of the ring."""
        if self.tag == "Z":
            return abs(n) == 1
        if self.tag == "Q":
            return n != 0
        return n % self.p != 0

    def __str__(self):
        return f"F{self.p}" if self.tag == "F" else self.tag


INT = CoeffRing("Z")
RAT = CoeffRing("Q")


# ---------------------------------------------------------------------------
# dense helpers


def imat(rows, shape=None) -> np.ndarray:
    """Integer matrix from nested sequences; ``shape`` is needed for empty input."""
    rows = [[int(x) for x in r] for r in rows]
    if not rows:
        if shape is None:
            raise ValueError("shape required for an empty matrix")
        return np.zeros(shape, dtype=object)
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, r in enumerate(rows):
        if len(r) != out.shape[1]:
            raise ValueError("ragged matrix")
        out[i, :] = r
    if shape is not None and out.shape != tuple(shape):
        raise ValueError(f"shape mismatch {out.shape} != {shape}")
    return out


def zeros(r: int, c: int) -> np.ndarray:
    return np.zeros((r, c), dtype=object)


def identity(n: int) -> np.ndarray:
    m = zeros(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def as_imat(m) -> np.ndarray:
    if isinstance(m, np.ndarray) and m.dtype == object:
        return m
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = int(x)
    return out


def _rows(m) -> list[list[int]]:
    m = as_imat(m)
    return [[int(x) for x in m[i]] for i in range(m.shape[0])]


def det(m) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    a = _rows(m)
    n = len(a)
    if n == 0:
        return 1
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# normal forms


def hnf(m):
    """Row Hermite normal form ``h = u @ m`` with ``u`` unimodular.

    Pivots are positive, entries above a pivot lie in ``[0, pivot)`` and zero
    rows come last.
    """
    m = as_imat(m)
    r, c = m.shape
    h = _rows(m)
    u = [[int(i == j) for j in range(r)] for i in range(r)]

    def sub(i, k, q):
        if q:
            hi, hk, ui, uk = h[i], h[k], u[i], u[k]
            for j in range(c):
                if hk[j]:
                    hi[j] -= q * hk[j]
            for j in range(r):
                if uk[j]:
                    ui[j] -= q * uk[j]

    row = 0
    for j in range(c):
        if row == r:
            break
        while True:
            nz = [i for i in range(row, r) if h[i][j] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(h[i][j]))
            for i in nz:
                if i != i0:
                    sub(i, i0, h[i][j] // h[i0][j])
            if all(h[i][j] == 0 for i in nz if i != i0):
                break
        if not any(h[i][j] for i in range(row, r)):
            continue
        i0 = next(i for i in range(row, r) if h[i][j] != 0)
        h[row], h[i0] = h[i0], h[row]
        u[row], u[i0] = u[i0], u[row]
        if h[row][j] < 0:
            h[row] = [-x for x in h[row]]
            u[row] = [-x for x in u[row]]
        piv = h[row][j]
        for i in range(row):
            sub(i, row, h[i][j] // piv)
        row += 1
    return imat(h, (r, c)), imat(u, (r, r))


def snf(m):
    """Smith normal form.

    Returns ``(d, s, t)`` with ``s @ m @ t`` diagonal with entries ``d``
    (length ``min(rows, cols)``), ``s`` and ``t`` unimodular, ``d`` nonnegative,
    each nonzero entry dividing the next and zeros last.
    """
    m = as_imat(m)
    r, c = m.shape
    a = _rows(m)
    s = [[int(i == j) for j in range(r)] for i in range(r)]
    t = [[int(i == j) for j in range(c)] for i in range(c)]

    def row_sub(i, k, q):  # row_i -= q row_k
        for j in range(c):
            if a[k][j]:
                a[i][j] -= q * a[k][j]
        for j in range(r):
            if s[k][j]:
                s[i][j] -= q * s[k][j]

    def col_sub(j, k, q):  # col_j -= q col_k
        for i in range(r):
            if a[i][k]:
                a[i][j] -= q * a[i][k]
        for i in range(c):
            if t[i][k]:
                t[i][j] -= q * t[i][k]

    def row_swap(i, k):
        a[i], a[k] = a[k], a[i]
        s[i], s[k] = s[k], s[i]

    def col_swap(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in t:
            row[j], row[k] = row[k], row[j]

    n = min(r, c)
    for k in range(n):
        while True:
            best = None
            for i in range(k, r):
                for j in range(k, c):
                    if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            row_swap(k, best[0])
            col_swap(k, best[1])
            piv = a[k][k]
            dirty = False
            for i in range(k + 1, r):
                if a[i][k]:
                    row_sub(i, k, a[i][k] // piv)
                    dirty = dirty or a[i][k] != 0
            for j in range(k + 1, c):
                if a[k][j]:
                    col_sub(j, k, a[k][j] // piv)
                    dirty = dirty or a[k][j] != 0
            if dirty:
                continue
            bad = next((i for i in range(k + 1, r)
                        if any(a[i][j] % piv for j in range(k + 1, c))), None)
            if bad is None:
                break
            row_sub(k, bad, -1)
        if a[k][k] < 0:
            a[k] = [-x for x in a[k]]
            s[k] = [-x for x in s[k]]
    d = [a[i][i] for i in range(n)]
    return d, imat(s, (r, r)), imat(t, (c, c))


def invariant_factors(m) -> list[int]:
    return snf(m)[0]


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class GroupStructure:
    """A finitely generated abelian group Z^free_rank + sum Z/d_i."""

    free_rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(d) for d in self.torsion))
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion {self.torsion} is not a divisibility chain")
        if any(d < 2 for d in self.torsion):
            raise ValueError("torsion factors must be at least 2")

    @classmethod
    def from_factors(cls, factors, free_rank: int = 0) -> "GroupStructure":
        """Normalize arbitrary cyclic orders (0 = free, 1 = trivial) to a chain."""
        free = free_rank + sum(1 for d in factors if d == 0)
        diag = [abs(d) for d in factors if abs(d) > 1]
        if diag:
            d, _, _ = snf(imat([[x if i == j else 0 for j in range(len(diag))]
                                for i, x in enumerate(diag)]))
            diag = [x for x in d if x > 1]
        return cls(free, tuple(diag))

    @property
    def exponent(self) -> int:
        return self.torsion[-1] if self.torsion else 1

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def to_json(self) -> dict:
        return {"rank": self.free_rank, "torsion": list(self.torsion)}

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True, eq=False)
class Lattice:
    """A sublattice of Z^ambient_rank with its canonical HNF basis."""

    ambient_rank: int
    basis: np.ndarray = field(repr=False)

    @classmethod
    def span(cls, vectors, ambient_rank: int) -> "Lattice":
        m = as_imat(vectors) if len(vectors) else zeros(0, ambient_rank)
        if m.shape[1] != ambient_rank:
            raise ValueError("vector length does not match ambient rank")
        h, _ = hnf(m)
        k = sum(1 for i in range(h.shape[0]) if any(h[i]))
        return cls(ambient_rank, h[:k].copy())

    @classmethod
    def full(cls, n: int) -> "Lattice":
        return cls(n, identity(n))

    @classmethod
    def zero(cls, n: int) -> "Lattice":
        return cls(n, zeros(0, n))

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def __eq__(self, other):
        return (isinstance(other, Lattice) and self.ambient_rank == other.ambient_rank
                and self.basis.shape == other.basis.shape
                and all(int(a) == int(b) for a, b in zip(self.basis.flat, other.basis.flat)))

    def __hash__(self):
        return hash((self.ambient_rank, tuple(int(x) for x in self.basis.flat)))

    def __add__(self, other: "Lattice") -> "Lattice":
        return Lattice.span(np.vstack([self.basis, other.basis]), self.ambient_rank)

    def contains(self, v) -> bool:
        return solve_in_lattice(self, v) is not None

    def is_sublattice_of(self, other: "Lattice") -> bool:
        return all(other.contains(row) for row in self.basis)

    def saturation(self) -> "Lattice":
        return saturation(self)

    def vectors(self) -> list[list[int]]:
        return _rows(self.basis)


def kernel_lattice(m) -> Lattice:
    """The saturated left kernel ``{v : v @ m = 0}``."""
    m = as_imat(m)
    h, u = hnf(m)
    k = sum(1 for i in range(h.shape[0]) if any(h[i]))
    return Lattice.span(u[k:], m.shape[0])


def solve_in_lattice(l: Lattice, v):
    """Integer coordinates ``x`` with ``x @ l.basis == v``, or None."""
    res = [int(x) for x in v]
    if len(res) != l.ambient_rank:
        raise ValueError("vector length does not match ambient rank")
    x = []
    for row in l.basis:
        j = next(j for j, a in enumerate(row) if a)
        q, rem = divmod(res[j], int(row[j]))
        if rem:
            return None
        x.append(q)
        if q:
            for jj in range(j, len(res)):
                if row[jj]:
                    res[jj] -= q * int(row[jj])
    if any(res):
        return None
    return x


def coordinates(l: Lattice, vectors) -> np.ndarray:
    """Coordinate matrix of each row of ``vectors`` in the basis of ``l``."""
    out = []
    for v in vectors:
        x = solve_in_lattice(l, v)
        if x is None:
            raise NotSublattice(f"vector {list(v)} is not in the lattice")
        out.append(x)
    return imat(out, (0, l.rank)) if not out else imat(out)


def quotient_structure(sub: Lattice, sup: Lattice) -> GroupStructure:
    """Structure of ``sup / sub``."""
    c = coordinates(sup, sub.basis)
    d = snf(c)[0] if c.size else []
    nonzero = [x for x in d if x]
    return GroupStructure(sup.rank - len(nonzero), tuple(x for x in nonzero if x > 1))


def saturation(l: Lattice) -> Lattice:
    """``(l (x) Q) ∩ Z^n``."""
    ann = kernel_lattice(l.basis.T) if l.rank else Lattice.full(l.ambient_rank)
    if ann.rank == 0:
        return Lattice.full(l.ambient_rank)
    return kernel_lattice(ann.basis.T)


def annihilator(l: Lattice) -> Lattice:
    """``{w : w . v = 0 for all v in l}``, always saturated."""
    if l.rank == 0:
        return Lattice.full(l.ambient_rank)
    return kernel_lattice(l.basis.T)


def right_inverse(m):
    """Integer ``s`` with ``s @ m = I`` for a surjective ``m`` (rows -> cols)."""
    m = as_imat(m)
    h, u = hnf(m)
    k = m.shape[1]
    if h.shape[0] < k or any(int(h[i, j]) != int(i == j) for i in range(k) for j in range(k)):
        raise ValueError("map is not surjective over Z")
    return u[:k].copy()


# ---------------------------------------------------------------------------
# exterior algebra


def subsets(n: int, p: int) -> list[tuple]:
    """Lexicographically ordered p-subsets of range(n)."""
    if p < 0 or p > n:
        return []
    return list(combinations(range(n), p))


def wedge_power_map(m, p: int) -> np.ndarray:
    """Matrix of the p-th exterior power; entries are p x p minors."""
    m = as_imat(m)
    r, c = m.shape
    rows, cols = subsets(r, p), subsets(c, p)
    out = zeros(len(rows), len(cols))
    for a, I in enumerate(rows):
        sub = m[list(I)]
        for b, J in enumerate(cols):
            out[a, b] = det(sub[:, list(J)]) if p else 1
    return out


def shuffle_sign(first, second) -> int:
    """Sign of the permutation sorting the concatenation of two sorted tuples."""
    inv = sum(1 for a in first for b in second if a > b)
    return -1 if inv % 2 else 1


def contraction_map(omega, n: int, p: int, r: int | None = None) -> np.ndarray:
    """Matrix of ``v -> omega . v`` from wedge^p Z^n to wedge^(p-r) Z^n.

    ``omega`` lists the coefficients of an r-form in the lexicographic basis of
    wedge^r of the dual.  The contraction is characterised by
    ``alpha(omega . v) = (alpha ^ omega)(v)`` for every (p-r)-form alpha.
    """
    omega = [int(x) for x in omega]
    if r is None:
        cands = [k for k in range(n + 1) if comb(n, k) == len(omega)]
        if len(cands) != 1:
            raise ValueError("degree of omega is ambiguous, pass r explicitly")
        r = cands[0]
    if len(omega) != comb(n, r):
        raise ValueError("omega has the wrong number of coordinates")
    src = subsets(n, p)
    if p < r:
        return zeros(len(src), 0 if p - r < 0 else comb(n, p - r))
    tgt = subsets(n, p - r)
    tindex = {J: j for j, J in enumerate(tgt)}
    out = zeros(len(src), len(tgt))
    for I, w in zip(subsets(n, r), omega):
        if not w:
            continue
        Iset = set(I)
        for a, K in enumerate(src):
            if not Iset <= set(K):
                continue
            J = tuple(x for x in K if x not in Iset)
            out[a, tindex[J]] += w * shuffle_sign(J, I)
    return out


def wedge_vector_map(f, n: int, p: int) -> np.ndarray:
    """Matrix of ``v -> f ^ v`` from wedge^p Z^n to wedge^(p+1) Z^n."""
    src, tgt = subsets(n, p), subsets(n, p + 1)
    tindex = {J: j for j, J in enumerate(tgt)}
    out = zeros(len(src), len(tgt))
    for a, K in enumerate(src):
        for i, fi in enumerate(f):
            if fi and i not in K:
                J = tuple(sorted(K + (i,)))
                out[a, tindex[J]] += int(fi) * shuffle_sign((i,), K)
    return out


# ---------------------------------------------------------------------------
# ranks


def rref_mod(rows, ncols: int, p: int, pivot_cols=None):
    """Reduced row echelon form over F_p: (nonzero rows, pivot columns).

    Pivots are only searched among ``pivot_cols`` (default: all columns).
    """
    rows = [[int(x) % p for x in r] for r in rows]
    pivots = []
    r = 0
    for j in (range(ncols) if pivot_cols is None else pivot_cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][j]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][j], -1, p)
        prow = [(x * inv) % p for x in rows[r]]
        rows[r] = prow
        for i in range(len(rows)):
            if i != r and rows[i][j]:
                f = rows[i][j]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], prow)]
        pivots.append(j)
        r += 1
    return rows[:r], pivots


def _rank_mod(rows: list[list[int]], p: int) -> int:
    return len(rref_mod(rows, len(rows[0]) if rows else 0, p)[1])


def left_kernel_mod(m, p: int) -> list[list[int]]:
    """Basis of ``{x : x @ m = 0}`` over F_p, in reduced echelon form."""
    m = as_imat(m)
    r, c = m.shape
    aug = [list(m[i]) + [int(i == k) for k in range(r)] for i in range(r)]
    rows, pivots = rref_mod(aug, c + r, p)
    # rows whose m-part vanished carry the kernel; reduce them among themselves
    ker = [row[c:] for row in rows if not any(row[:c])]
    out, _ = rref_mod(ker, r, p)
    return out


def solve_mod(basis, v, p: int):
    """Coefficients ``x`` with ``x @ basis = v`` over F_p, or None."""
    basis = [[int(x) % p for x in b] for b in basis]
    n = len(v)
    k = len(basis)
    aug = [b + [int(i == j) for j in range(k)] for i, b in enumerate(basis)]
    rows, pivots = rref_mod(aug, n + k, p, pivot_cols=range(n))
    res = [int(x) % p for x in v]
    x = [0] * k
    for row, j in zip(rows, pivots):
        c = res[j]
        if c:
            res = [(a - c * b) % p for a, b in zip(res, row[:n])]
            x = [(a + c * b) % p for a, b in zip(x, row[n:])]
    if any(res):
        return None
    return x


def _rank_q(rows: list[list[int]]) -> int:
    a = [r[:] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for j in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][j]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        pr = a[rank]
        for i in range(rank + 1, len(a)):
            if a[i][j]:
                f, g = a[i][j], pr[j]
                row = [g * x - f * y for x, y in zip(a[i], pr)]
                cont = 0
                for x in row:
                    cont = gcd(cont, x)
                a[i] = [x // cont for x in row] if cont > 1 else row
        rank += 1
    return rank


def rank_over(m, ring: CoeffRing = RAT) -> int:
    """Rank of ``m`` tensored with the ring."""
    rows = _rows(m)
    if not rows or not rows[0]:
        return 0
    if ring.tag == "F":
        return _rank_mod(rows, ring.p)
    return _rank_q(rows)


# ---------------------------------------------------------------------------
# sparse matrices (used for chain complexes)


class SparseMatrix:
    """Row-dictionary sparse matrix with arbitrary-precision entries."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows=None):
        self.nrows, self.ncols = nrows, ncols
        self.rows = rows if rows is not None else [dict() for _ in range(nrows)]

    @classmethod
    def from_dense(cls, m) -> "SparseMatrix":
        m = as_imat(m)
        out = cls(*m.shape)
        for i in range(m.shape[0]):
            out.rows[i] = {j: int(x) for j, x in enumerate(m[i]) if x}
        return out

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def to_dense(self) -> np.ndarray:
        out = zeros(self.nrows, self.ncols)
        for i, row in enumerate(self.rows):
            for j, x in row.items():
                out[i, j] = x
        return out

    def add(self, i: int, j: int, x: int):
        if x:
            row = self.rows[i]
            v = row.get(j, 0) + x
            if v:
                row[j] = v
            else:
                row.pop(j, None)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = SparseMatrix(self.nrows, other.ncols)
        for i, row in enumerate(self.rows):
            acc = {}
            for k, a in row.items():
                for j, b in other.rows[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            out.rows[i] = {j: v for j, v in acc.items() if v}
        return out

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        out = self.copy()
        for i, row in enumerate(other.rows):
            for j, x in row.items():
                out.add(i, j, -x)
        return out

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.shape == other.shape
                and self.rows == other.rows)

    def copy(self) -> "SparseMatrix":
        return SparseMatrix(self.nrows, self.ncols, [dict(r) for r in self.rows])

    def transpose(self) -> "SparseMatrix":
        out = SparseMatrix(self.ncols, self.nrows)
        for i, row in enumerate(self.rows):
            for j, x in row.items():
                out.rows[j][i] = x
        return out

    def scaled(self, c: int) -> "SparseMatrix":
        return SparseMatrix(self.nrows, self.ncols,
                            [{j: c * x for j, x in r.items()} for r in self.rows]) if c else \
            SparseMatrix(self.nrows, self.ncols)

    def mod(self, p: int) -> "SparseMatrix":
        rows = []
        for r in self.rows:
            rows.append({j: x % p for j, x in r.items() if x % p})
        return SparseMatrix(self.nrows, self.ncols, rows)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def row_vector(self, i: int) -> list[int]:
        v = [0] * self.ncols
        for j, x in self.rows[i].items():
            v[j] = x
        return v

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"
