"""Chain complexes of cosheaves, exact homology, and the duality pipeline.

Matrices act on row vectors: the boundary ``d[k]`` has one row per basis
element of ``C_k`` and one column per basis element of ``C_{k-1}``.

Homology is computed by eliminating unit entries of the boundary matrices
(each elimination splits off an acyclic two-term summand), then, over Z,
taking Smith normal forms of what is left.  The eliminations are logged, so
chains can be pushed into the reduced complex and cycles pulled back out;
this is how representatives and induced maps are obtained.
"""

from __future__ import annotations

from collections import defaultdict

from .complex import Complex, MissingCarrier
from .cosheaf import (
    Cosheaf, dihom_subdivide, fix_first_localize, fix_first_morphism, subdivide_cosheaf,
)
from .errors import HypothesisError, TroplefError
from .lattice import (
    INT, CoeffRing, GroupStructure, Lattice, SparseMatrix, as_imat, coordinates,
    imat, kernel_lattice, left_kernel_mod, quotient_structure, rank_over, right_inverse,
    snf, solve_in_lattice, solve_mod, zeros,
)


class NotAComplex(TroplefError):
    pass


class NotChainMap(TroplefError):
    pass


class NotFinite(TroplefError):
    pass


class DimensionMismatch(TroplefError):
    pass


class HypothesisFailed(HypothesisError):
    """Local homology is not concentrated in the top degree."""

    def __init__(self, cell, degrees, n):
        self.cell, self.degrees, self.n = cell, tuple(degrees), n
        super().__init__(f"local homology at cell {cell} lives in degrees {list(degrees)}, "
                         f"not only in degree {n}")


def _sparse(m, nrows, ncols, ring):
    if m is None:
        return SparseMatrix(nrows, ncols)
    if not isinstance(m, SparseMatrix):
        m = SparseMatrix.from_dense(as_imat(m)) if nrows and ncols else SparseMatrix(nrows, ncols)
    if m.shape != (nrows, ncols):
        raise ValueError(f"matrix shape {m.shape}, expected {(nrows, ncols)}")
    return m.mod(ring.p) if ring.tag == "F" else m


def _is_zero(m: SparseMatrix, ring) -> bool:
    return (m.mod(ring.p) if ring.tag == "F" else m).is_zero()


def _apply(vec: dict, m: SparseMatrix, p=None) -> dict:
    out: dict = {}
    for i, x in vec.items():
        for j, y in m.rows[i].items():
            out[j] = out.get(j, 0) + x * y
    if p:
        return {j: v % p for j, v in out.items() if v % p}
    return {j: v for j, v in out.items() if v}


class ChainComplex:
    """Finite chain complex of free modules over Z, Q or F_p."""

    def __init__(self, ranks, boundary=None, ring: CoeffRing = INT, tags=None, check=True):
        self.ranks = {int(k): int(v) for k, v in ranks.items()}
        self.ring = ring
        self.tags = tags or {}
        boundary = boundary or {}
        self.d = {k: _sparse(boundary.get(k), self.ranks[k], self.rank(k - 1), ring)
                  for k in self.ranks}
        if check:
            self.check()

    @property
    def degrees(self) -> list[int]:
        return sorted(self.ranks)

    def rank(self, k: int) -> int:
        return self.ranks.get(k, 0)

    def boundary(self, k: int) -> SparseMatrix:
        if k in self.d:
            return self.d[k]
        return SparseMatrix(self.rank(k), self.rank(k - 1))

    def check(self):
        for k in self.degrees:
            if k - 1 in self.ranks:
                if not _is_zero(self.boundary(k) @ self.boundary(k - 1), self.ring):
                    raise NotAComplex(f"boundary squares to a nonzero map from degree {k} to {k - 2}")
        return True

    def tensor(self, ring: CoeffRing) -> "ChainComplex":
        return ChainComplex(self.ranks, self.d, ring, self.tags)

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * r for k, r in self.ranks.items())

    def __repr__(self):
        return f"ChainComplex(ring={self.ring}, ranks={[self.rank(k) for k in self.degrees]})"


class ChainMap:
    """Degreewise matrices ``source_k -> target_k`` commuting with the boundaries."""

    def __init__(self, source: ChainComplex, target: ChainComplex, maps, check=True):
        self.source, self.target = source, target
        ring = source.ring
        degs = set(source.ranks) | set(target.ranks)
        self.maps = {k: _sparse(maps.get(k), source.rank(k), target.rank(k), ring) for k in degs}
        if check:
            self.check()

    def __getitem__(self, k):
        return self.maps.get(k, SparseMatrix(self.source.rank(k), self.target.rank(k)))

    def check(self):
        ring = self.source.ring
        for k in self.maps:
            lhs = self.source.boundary(k) @ self[k - 1]
            rhs = self[k] @ self.target.boundary(k)
            if not _is_zero(lhs - rhs, ring):
                raise NotChainMap(f"map does not commute with the boundary in degree {k}")
        return True

    def compose(self, other: "ChainMap") -> "ChainMap":
        """``other`` after ``self``."""
        return ChainMap(self.source, other.target,
                        {k: self[k] @ other[k] for k in self.maps}, check=False)


# ---------------------------------------------------------------------------
# reduction engine


class _Reduction:
    def __init__(self, C: ChainComplex):
        self.p = C.ring.p if C.ring.tag == "F" else None
        self.rows = {}
        self.cols = {}
        self.alive = {k: set(range(C.rank(k))) for k in C.ranks}
        for k in C.ranks:
            d = C.boundary(k)
            self.rows[k] = {i: dict(r) for i, r in enumerate(d.rows)}
            cols = defaultdict(set)
            for i, r in enumerate(d.rows):
                for j in r:
                    cols[j].add(i)
            self.cols[k] = cols
        self.log = []
        self._run()

    def _unit(self, v) -> bool:
        return bool(v) if self.p else abs(v) == 1

    def _inv(self, u):
        return pow(u, -1, self.p) if self.p else u

    def _run(self):
        changed = True
        while changed:
            changed = False
            for k in sorted(self.rows):
                rows, cols = self.rows[k], self.cols[k]
                for i in sorted(rows):
                    row = rows.get(i)
                    if not row:
                        continue
                    best = None
                    for j, v in row.items():
                        if self._unit(v):
                            c = len(cols[j])
                            if best is None or c < best[0]:
                                best = (c, j)
                    if best is not None:
                        self._eliminate(k, i, best[1])
                        changed = True

    def _eliminate(self, k, i, j):
        p = self.p
        rows, cols = self.rows[k], self.cols[k]
        ri = rows.pop(i)
        uinv = self._inv(ri[j])
        colj = {}
        for a in list(cols[j]):
            if a == i:
                continue
            ra = rows[a]
            c = ra[j]
            colj[a] = c
            f = c * uinv
            for jj, v in ri.items():
                nv = ra.get(jj, 0) - f * v
                if p:
                    nv %= p
                if nv:
                    if jj not in ra:
                        cols[jj].add(a)
                    ra[jj] = nv
                elif jj in ra:
                    del ra[jj]
                    cols[jj].discard(a)
        for jj in ri:
            cols[jj].discard(i)
        cols.pop(j, None)
        if k + 1 in self.rows:
            up = self.rows[k + 1]
            for r in self.cols[k + 1].pop(i, ()):
                del up[r][i]
        if k - 1 in self.rows:
            rj = self.rows[k - 1].pop(j, None)
            for jj in rj or ():
                self.cols[k - 1][jj].discard(j)
        self.alive[k].discard(i)
        self.alive[k - 1].discard(j)
        self.log.append((k, i, j, uinv, ri, colj))

    def project(self, d: int, chain: dict) -> dict:
        """Image of an original chain in the reduced complex."""
        p = self.p
        v = dict(chain)
        for k, i, j, uinv, ri, _ in self.log:
            if k == d:
                v.pop(i, None)
            elif k - 1 == d:
                c = v.get(j)
                if c:
                    f = c * uinv
                    for jj, x in ri.items():
                        nv = v.get(jj, 0) - f * x
                        if p:
                            nv %= p
                        if nv:
                            v[jj] = nv
                        else:
                            v.pop(jj, None)
        return v

    def lift(self, d: int, chain: dict) -> dict:
        """Original chain representing a reduced chain (a chain-map section)."""
        p = self.p
        v = dict(chain)
        for k, i, j, uinv, ri, colj in reversed(self.log):
            if k == d:
                s = sum(v.get(a, 0) * c for a, c in colj.items())
                if p:
                    s %= p
                if s:
                    x = -s * uinv
                    v[i] = x % p if p else x
        return v

    def dense(self, k: int):
        """Reduced boundary in degree k with its row and column index lists."""
        r = sorted(self.alive.get(k, ()))
        c = sorted(self.alive.get(k - 1, ()))
        cidx = {j: n for n, j in enumerate(c)}
        m = zeros(len(r), len(c))
        rows = self.rows.get(k, {})
        for n, i in enumerate(r):
            for j, v in rows.get(i, {}).items():
                m[n, cidx[j]] = v
        return m, r, c


class _Degree:
    """Homology data of one degree of a reduced complex."""

    def __init__(self, red: _Reduction, k: int, ring: CoeffRing):
        self.k = k
        self.ring = ring
        self.idx = sorted(red.alive.get(k, ()))
        self.pos = {i: n for n, i in enumerate(self.idx)}
        n = len(self.idx)
        if ring.tag == "F":
            self.orders = [0] * n
            self.reduced_reps = [{i: 1} for i in self.idx]
            return
        dk, _, _ = red.dense(k)
        dk1, _, _ = red.dense(k + 1)
        self.cycles = kernel_lattice(dk) if dk.shape[1] else Lattice.full(n)
        r = self.cycles.rank
        if r == 0:
            self.orders, self.t, self.reduced_reps = [], zeros(0, 0), []
            return
        x = coordinates(self.cycles, dk1) if dk1.shape[0] else zeros(0, r)
        if x.shape[0]:
            d, _, t = snf(x)
        else:
            d, t = [], imat([[int(a == b) for b in range(r)] for a in range(r)])
        gens = right_inverse(t) @ self.cycles.basis
        orders = [d[a] if a < len(d) else 0 for a in range(r)]
        keep = [a for a in range(r) if orders[a] == 0] + [a for a in range(r) if orders[a] > 1]
        if ring.tag == "Q":
            keep = [a for a in keep if orders[a] == 0]
        self.t = t
        self.keep = keep
        self.orders = [orders[a] for a in keep]
        self.reduced_reps = [{self.idx[j]: int(gens[a, j]) for j in range(n) if gens[a, j]}
                             for a in keep]

    def coordinates(self, reduced: dict) -> list[int]:
        if self.ring.tag == "F":
            return [reduced.get(i, 0) % self.ring.p for i in self.idx]
        if not self.orders:
            return []
        y = [0] * len(self.idx)
        for i, v in reduced.items():
            y[self.pos[i]] = v
        x = solve_in_lattice(self.cycles, y)
        if x is None:
            raise NotAComplex(f"chain in degree {self.k} is not a cycle")
        c = (imat([x]) @ self.t)[0]
        out = []
        for a, o in zip(self.keep, self.orders):
            out.append(int(c[a]) % o if o else int(c[a]))
        return out


class HomologyResult:
    """Homology groups with explicit generators."""

    def __init__(self, C: ChainComplex):
        self.complex = C
        self.ring = C.ring
        self._red = _Reduction(C)
        self._deg = {k: _Degree(self._red, k, C.ring) for k in C.degrees}
        self._reps = {}

    def group(self, k: int) -> GroupStructure:
        deg = self._deg.get(k)
        if deg is None:
            return GroupStructure(0, ())
        free = sum(1 for o in deg.orders if o == 0)
        return GroupStructure(free, tuple(o for o in deg.orders if o))

    @property
    def groups(self) -> dict:
        return {k: self.group(k) for k in self.complex.degrees}

    def orders(self, k: int) -> list[int]:
        """Order of each generator in degree k (0 for free generators)."""
        deg = self._deg.get(k)
        return list(deg.orders) if deg else []

    def betti(self, k: int) -> int:
        return self.group(k).free_rank

    def representatives(self, k: int) -> list[dict]:
        """Generating cycles as sparse vectors in the original basis."""
        if k not in self._reps:
            deg = self._deg.get(k)
            reps = [self._red.lift(k, r) for r in deg.reduced_reps] if deg else []
            self._reps[k] = reps
        return self._reps[k]

    def coordinates(self, k: int, chain) -> list[int]:
        """Coordinates of the class of an original cycle in the generators of degree k."""
        if not isinstance(chain, dict):
            chain = {i: int(v) for i, v in enumerate(chain) if v}
        deg = self._deg.get(k)
        if deg is None:
            return []
        return deg.coordinates(self._red.project(k, chain))

    def nonzero_degrees(self) -> list[int]:
        return [k for k in self.complex.degrees if not self.group(k).is_zero]

    def to_json(self) -> dict:
        return {"ring": str(self.ring),
                "groups": {str(k): self.group(k).to_json() for k in self.complex.degrees}}

    def __repr__(self):
        return "HomologyResult(" + ", ".join(f"H{k}={self.group(k)}" for k in self.complex.degrees) + ")"


def homology(C: ChainComplex) -> HomologyResult:
    C.check()
    return HomologyResult(C)


# ---------------------------------------------------------------------------
# induced maps


def _map_structure(m, ox, oy, ring):
    """Kernel and cokernel of the homomorphism given by m between groups with orders ox, oy."""
    gx, gy = len(ox), len(oy)
    if ring.tag != "Z":
        rows = [list(r) for r in m] if gx and gy else []
        r = rank_over(imat(rows, (gx, gy)), ring) if rows else 0
        return GroupStructure(gx - r, ()), GroupStructure(gy - r, ())
    rel_y = [[o if j == i else 0 for j in range(gy)] for i, o in enumerate(oy) if o]
    stacked = [list(r) for r in m] + rel_y
    if gy == 0:
        return GroupStructure.from_factors(list(ox)), GroupStructure(0, ())
    if stacked:
        d = snf(imat(stacked, (len(stacked), gy)))[0]
    else:
        d = []
    cok = GroupStructure.from_factors(list(d) + [0] * (gy - len(d)))
    if gx == 0:
        return GroupStructure(0, ()), cok
    ker = kernel_lattice(imat(stacked, (len(stacked), gy)))
    proj = [list(v[:gx]) for v in ker.basis] if ker.rank else []
    kx = Lattice.span(proj, gx) if proj else Lattice.zero(gx)
    rel_x = [[o if j == i else 0 for j in range(gx)] for i, o in enumerate(ox) if o]
    ra = Lattice.span(rel_x, gx) if rel_x else Lattice.zero(gx)
    return quotient_structure(ra, kx), cok


class HomologyMap:
    """Per-degree matrices of an induced map in the generator bases."""

    def __init__(self, phi: ChainMap, hx: HomologyResult, hy: HomologyResult):
        self.chain_map = phi
        self.source, self.target = hx, hy
        self.ring = hx.ring
        self.matrix, self.kernel, self.cokernel = {}, {}, {}
        p = self.ring.p if self.ring.tag == "F" else None
        for k in sorted(set(hx.complex.degrees) | set(hy.complex.degrees)):
            rows = []
            for rep in hx.representatives(k):
                rows.append(hy.coordinates(k, _apply(rep, phi[k], p)))
            self.matrix[k] = rows
            self.kernel[k], self.cokernel[k] = _map_structure(rows, hx.orders(k), hy.orders(k), self.ring)

    def injective(self, k) -> bool:
        return self.kernel[k].is_zero

    def surjective(self, k) -> bool:
        return self.cokernel[k].is_zero

    def iso(self, k) -> bool:
        return self.injective(k) and self.surjective(k)

    def classify(self, k) -> str:
        if self.iso(k):
            return "iso"
        if self.surjective(k):
            return "surjective"
        if self.injective(k):
            return "injective"
        return "neither"

    def to_json(self) -> dict:
        return {str(k): {"matrix": self.matrix[k], "kernel": self.kernel[k].to_json(),
                         "cokernel": self.cokernel[k].to_json(), "class": self.classify(k)}
                for k in self.matrix}


def induced_map(phi: ChainMap, hx: HomologyResult | None = None,
                hy: HomologyResult | None = None) -> HomologyMap:
    phi.check()
    hx = hx or homology(phi.source)
    hy = hy or homology(phi.target)
    return HomologyMap(phi, hx, hy)


# ---------------------------------------------------------------------------
# complexes of cosheaves


def chain_complex(K: Complex, F: Cosheaf) -> ChainComplex:
    """Cellular chains ``C_k(K;F)``; basis (cell, value index) in cell order."""
    ring = F.ring
    off, tags = {}, {}
    for k in range(K.dim + 1):
        n = 0
        tags[k] = []
        for c in K.cells_of_dim(k):
            off[c] = n
            tags[k] += [(c, a) for a in range(F.rank(c))]
            n += F.rank(c)
    ranks = {k: len(tags[k]) for k in tags}
    bd = {}
    for k in range(1, K.dim + 1):
        m = SparseMatrix(ranks[k], ranks[k - 1])
        for c in K.cells_of_dim(k):
            rc = F.rank(c)
            if not rc:
                continue
            for f, s in K.faces(c).items():
                e = F.ext(c, f)
                for a in range(rc):
                    for b in range(F.rank(f)):
                        if e[a, b]:
                            m.add(off[c] + a, off[f] + b, s * int(e[a, b]))
        bd[k] = m
    return ChainComplex(ranks, bd, ring, tags)


def dihom_chain_complex(G: Cosheaf) -> ChainComplex:
    """Dihomologic chains of a cosheaf on a dihomologic subdivision; tags (lo, hi, a)."""
    D = G.base
    C = chain_complex(D, G)
    C.tags = {k: [D.pairs[c] + (a,) for c, a in t] for k, t in C.tags.items()}
    return C


class Bicomplex:
    """The splitting of dihomologic chains into blocks ``Omega_{p,q}``.

    ``d1`` raises the first coordinate, ``d2`` lowers the second; both are
    stored as matrices on total degree ``q - p``.
    """

    def __init__(self, G: Cosheaf, total: ChainComplex | None = None):
        self.cosheaf = G
        self.D = G.base
        self.K = self.D.parent
        self.total = total or dihom_chain_complex(G)
        T = self.total
        self.d1, self.d2 = {}, {}
        for k in T.degrees:
            a = SparseMatrix(T.rank(k), T.rank(k - 1))
            b = SparseMatrix(T.rank(k), T.rank(k - 1))
            src, dst = T.tags.get(k, []), T.tags.get(k - 1, [])
            for i, row in enumerate(T.boundary(k).rows):
                for j, v in row.items():
                    (a if src[i][0] != dst[j][0] else b).add(i, j, v)
            self.d1[k], self.d2[k] = a, b
        dim = self.K.dim
        self._blocks = defaultdict(list)
        for k in T.degrees:
            for i, (lo, hi, _) in enumerate(T.tags.get(k, [])):
                self._blocks[(self.K.cells[lo].dim, self.K.cells[hi].dim)].append(i)
        self.n = dim

    def block(self, p: int, q: int) -> list[int]:
        """Indices (in total degree q - p) of the basis of ``Omega_{p,q}``."""
        return self._blocks.get((p, q), [])

    def tag(self, k: int, i: int):
        return self.total.tags[k][i]

    def check(self) -> bool:
        ring = self.total.ring
        for k in self.total.degrees:
            if k - 1 not in self.total.ranks:
                continue
            for x, y in ((self.d1, self.d1), (self.d2, self.d2)):
                if not _is_zero(x[k] @ y[k - 1], ring):
                    raise NotAComplex(f"a partial differential squares to nonzero in degree {k}")
            s = (self.d1[k] @ self.d2[k - 1]).rows
            t = (self.d2[k] @ self.d1[k - 1])
            tot = SparseMatrix(t.nrows, t.ncols, [dict(r) for r in s])
            for i, r in enumerate(t.rows):
                for j, v in r.items():
                    tot.add(i, j, v)
            if not _is_zero(tot, ring):
                raise NotAComplex(f"d1 and d2 do not anticommute in degree {k}")
        return True


def bicomplex(G: Cosheaf) -> Bicomplex:
    return Bicomplex(G)


class CellularSheaf:
    """Free modules on cells with restriction maps ``G(face) -> G(cell)`` (row convention)."""

    def __init__(self, base: Complex, ranks, res, ring: CoeffRing = INT):
        self.base, self.ranks, self.ring = base, list(ranks), ring
        self.res = dict(res)

    @classmethod
    def constant(cls, K: Complex, rank: int = 1, ring: CoeffRing = INT) -> "CellularSheaf":
        eye = imat([[int(a == b) for b in range(rank)] for a in range(rank)], (rank, rank))
        return cls(K, [rank] * len(K), {(f, c): eye for f, c, _ in K.covers()}, ring)

    def restriction(self, f: int, c: int):
        m = self.res.get((f, c))
        return zeros(self.ranks[f], self.ranks[c]) if m is None else m


def cochain_complex_compact(K: Complex, G: CellularSheaf | None = None,
                            ring: CoeffRing | None = None) -> ChainComplex:
    """Compactly supported cochains, stored with chain degree ``-k`` for ``C^k``."""
    if not isinstance(K, Complex):
        raise NotFinite("compactly supported cochains need a finite Complex")
    G = G or CellularSheaf.constant(K, 1, ring or INT)
    ring = ring or G.ring
    off, tags = {}, {}
    for k in range(K.dim + 1):
        n = 0
        tags[-k] = []
        for c in K.cells_of_dim(k):
            off[c] = n
            tags[-k] += [(c, a) for a in range(G.ranks[c])]
            n += G.ranks[c]
    ranks = {d: len(t) for d, t in tags.items()}
    bd = {}
    for k in range(K.dim):
        m = SparseMatrix(ranks[-k], ranks[-k - 1])
        for f in K.cells_of_dim(k):
            for c, s in K.cofaces(f).items():
                r = G.restriction(f, c)
                for a in range(G.ranks[f]):
                    for b in range(G.ranks[c]):
                        if r[a, b]:
                            m.add(off[f] + a, off[c] + b, s * int(r[a, b]))
        bd[-k] = m
    return ChainComplex(ranks, bd, ring, tags)


# ---------------------------------------------------------------------------
# subdivision maps


def _index(C: ChainComplex):
    return {k: {t: i for i, t in enumerate(tags)} for k, tags in C.tags.items()}


def subdivision_chain_map(F: Cosheaf, Ksub: Complex) -> ChainMap:
    """``C(K;F) -> C(K';F')``: each cell goes to the oriented sum of the cells it carries."""
    K = F.base
    Fs = subdivide_cosheaf(F, Ksub)
    X, Y = chain_complex(K, F), chain_complex(Ksub, Fs)
    xi, yi = _index(X), _index(Y)
    maps = {k: SparseMatrix(X.rank(k), Y.rank(k)) for k in X.degrees}
    for c in Ksub.cells:
        car = c.carrier
        if K.cells[car].dim != c.dim:
            continue
        if c.id not in Ksub.orient:
            raise MissingCarrier(f"cell {c.id} has no orientation relative to its carrier")
        s = Ksub.orient[c.id]
        for a in range(F.rank(car)):
            maps[c.dim].add(xi[c.dim][(car, a)], yi[c.dim][(c.id, a)], s)
    return ChainMap(X, Y, maps)


def dihom_subdivision_chain_map(F: Cosheaf, D: Complex | None = None) -> ChainMap:
    """``C(K;F) -> Omega(K;F')``: a k-cell c goes to the sum of (v, c) over its vertices v."""
    K = F.base
    G = dihom_subdivide(F, D)
    D = G.base
    X, Y = chain_complex(K, F), chain_complex(D, G)
    xi, yi = _index(X), _index(Y)
    pair = {lab: i for i, lab in enumerate(D.pairs)}
    maps = {k: SparseMatrix(X.rank(k), Y.rank(k)) for k in X.degrees}
    for c in K.cells:
        verts = [v for v in K.below(c.id) if K.cells[v].dim == 0]
        for a in range(F.rank(c.id)):
            for v in verts:
                maps[c.dim].add(xi[c.dim][(c.id, a)], yi[c.dim][(pair[(v, c.id)], a)], 1)
    return ChainMap(X, Y, maps)


# ---------------------------------------------------------------------------
# the Phi isomorphism


def phi_sign(p: int, q: int) -> int:
    return -1 if (p * (p + 1) // 2 + q * (q + 1) // 2) % 2 else 1


def _local_tags(B: Bicomplex, p: int, q: int):
    """Basis of the sum over p-cells e of the local q-chains ``C_q(K;F_e)``."""
    K, G = B.K, B.cosheaf
    pair = {lab: i for i, lab in enumerate(B.D.pairs)}
    out = []
    for e in K.cells_of_dim(p):
        for c in K.cells_of_dim(q):
            if K.leq(e, c):
                out += [(e, c, a) for a in range(G.rank(pair[(e, c)]))]
    return out


def phi_map(B: Bicomplex, p: int, q: int):
    """Phi_{p,q} as (matrix, source indices in Omega_{q-p}, target tags (e^p, e^q, a))."""
    src = B.block(p, q)
    tgt = _local_tags(B, p, q)
    tix = {t: i for i, t in enumerate(tgt)}
    s = phi_sign(p, q)
    m = SparseMatrix(len(src), len(tgt))
    for n, i in enumerate(src):
        m.add(n, tix[B.tag(q - p, i)], s)
    return m, src, tgt


def local_boundary(B: Bicomplex, p: int, q: int) -> SparseMatrix:
    """Boundary of the local chains, from the (p, q) target basis to the (p, q-1) one."""
    K, G = B.K, B.cosheaf
    src, dst = _local_tags(B, p, q), _local_tags(B, p, q - 1)
    dix = {t: i for i, t in enumerate(dst)}
    m = SparseMatrix(len(src), len(dst))
    for e in K.cells_of_dim(p):
        L = chain_complex(K, fix_first_localize(G, e))
        if q not in L.ranks or q - 1 not in L.ranks:
            continue
        rows, cols = L.tags[q], L.tags[q - 1]
        six = {t: i for i, t in enumerate(src)}
        for i, r in enumerate(L.boundary(q).rows):
            c, a = rows[i]
            if c is None or (e, c, a) not in six:
                continue
            for j, v in r.items():
                c2, b = cols[j]
                m.add(six[(e, c, a)], dix[(e, c2, b)], v)
    return m


def local_coboundary(B: Bicomplex, p: int, q: int) -> SparseMatrix:
    """Coboundary from the (p, q) target basis to the (p+1, q) one, through localization morphisms."""
    K, G = B.K, B.cosheaf
    src, dst = _local_tags(B, p, q), _local_tags(B, p + 1, q)
    six = {t: i for i, t in enumerate(src)}
    dix = {t: i for i, t in enumerate(dst)}
    m = SparseMatrix(len(src), len(dst))
    for e in K.cells_of_dim(p):
        for e2, s in K.cofaces(e).items():
            mor = fix_first_morphism(G, e, e2)
            for c in K.cells_of_dim(q):
                if not K.leq(e2, c):
                    continue
                comp = mor.components[c]
                for a in range(comp.shape[0]):
                    for b in range(comp.shape[1]):
                        if comp[a, b]:
                            m.add(six[(e, c, a)], dix[(e2, c, b)], s * int(comp[a, b]))
    return m


def _sub(m: SparseMatrix, rows, cols) -> SparseMatrix:
    cix = {j: n for n, j in enumerate(cols)}
    out = SparseMatrix(len(rows), len(cols))
    for n, i in enumerate(rows):
        for j, v in m.rows[i].items():
            if j in cix:
                out.add(n, cix[j], v)
    return out


def phi_check(B: Bicomplex) -> dict:
    """Verify, for every (p, q), that Phi is a signed bijection and satisfies both identities."""
    ring = B.total.ring
    out = {"bijective": True, "boundary": True, "coboundary": True}
    n = B.n
    for p in range(n + 1):
        for q in range(p, n + 1):
            m, src, tgt = phi_map(B, p, q)
            if len(src) != len(tgt) or any(len(r) != 1 for r in m.rows) or \
                    any(len(c) != 1 for c in m.transpose().rows):
                out["bijective"] = False
            if q - 1 >= p:
                m2, src2, _ = phi_map(B, p, q - 1)
                d2 = _sub(B.d2[q - p], src, src2)
                lhs = m @ local_boundary(B, p, q)
                rhs = (d2 @ m2).scaled((-1) ** (q - p))
                if not _is_zero(lhs - rhs, ring):
                    out["boundary"] = False
            if p + 1 <= q:
                m3, src3, _ = phi_map(B, p + 1, q)
                d1 = _sub(B.d1[q - p], src, src3)
                if not _is_zero(d1 @ m3 - m @ local_coboundary(B, p, q), ring):
                    out["coboundary"] = False
    return out


# ---------------------------------------------------------------------------
# local homology and the duality pipeline


def local_homology_profile(G: Cosheaf) -> dict:
    """For each cell e of K, the degrees where ``H_*(K; G_e)`` is nonzero."""
    K = G.base.parent
    return {e: tuple(homology(chain_complex(K, fix_first_localize(G, e))).nonzero_degrees())
            for e in range(len(K))}


def concentrated(profile: dict, n: int) -> bool:
    return all(set(d) <= {n} for d in profile.values())


class _CellKernel:
    """Kernel of d2 on the block of one cell, with a solver for coordinates."""

    def __init__(self, rows, m, ring):
        self.rows = rows
        self.ring = ring
        if ring.tag == "F":
            self.basis = left_kernel_mod(m, ring.p) if rows else []
        elif not rows:
            self.basis = []
        elif m.shape[1] == 0:
            self.lattice = Lattice.full(len(rows))
            self.basis = self.lattice.vectors()
        else:
            self.lattice = kernel_lattice(m)
            self.basis = self.lattice.vectors()

    def solve(self, part):
        if not self.basis:
            return [] if not any(part) else None
        if self.ring.tag == "F":
            return solve_mod(self.basis, part, self.ring.p)
        return solve_in_lattice(self.lattice, part)


def pl_dual_complex(G: Cosheaf, n: int | None = None, B: Bicomplex | None = None,
                    profile: dict | None = None):
    """The complex of top-degree local cycles and its inclusion into dihomologic chains.

    Degree ``n - p`` holds ``ker d2`` on ``Omega_{p,n}``, one block per p-cell;
    the differential is ``d1``.  Returns ``(dual, inclusion)``.
    """
    B = B or Bicomplex(G)
    K = B.K
    if n is None:
        n = K.dim
    if n != K.dim:
        raise DimensionMismatch(f"complex has dimension {K.dim}, expected {n}")
    profile = profile if profile is not None else local_homology_profile(G)
    for e, degs in sorted(profile.items()):
        if not set(degs) <= {n}:
            raise HypothesisFailed(e, degs, n)
    T = B.total
    ring = T.ring
    pm = ring.p if ring.tag == "F" else None
    kers, bases, tags = {}, {}, {}
    for p in range(n + 1):
        k = n - p
        cols = B.block(p, n - 1) if n - 1 >= p else []
        by_cell = defaultdict(list)
        for i in B.block(p, n):
            by_cell[B.tag(k, i)[0]].append(i)
        vecs, tg = [], []
        for e in K.cells_of_dim(p):
            rows = by_cell.get(e, [])
            sub = _sub(B.d2[k], rows, cols).to_dense() if cols else zeros(len(rows), 0)
            ker = _CellKernel(rows, sub, ring)
            kers[e] = (ker, len(vecs))
            for a, z in enumerate(ker.basis):
                vecs.append({rows[j]: int(x) for j, x in enumerate(z) if x})
                tg.append((e, a))
        bases[k], tags[k] = vecs, tg
    ranks = {k: len(v) for k, v in bases.items()}
    bd = {}
    for k in ranks:
        if k - 1 not in ranks:
            continue
        m = SparseMatrix(ranks[k], ranks[k - 1])
        p2 = n - k + 1
        for r, z in enumerate(bases[k]):
            img = _apply(z, B.d1[k], pm)
            seen = set()
            for e2 in K.cells_of_dim(p2):
                ker, start = kers[e2]
                part = [img.get(i, 0) for i in ker.rows]
                seen.update(ker.rows)
                if not any(part):
                    continue
                x = ker.solve(part)
                if x is None:
                    raise NotAComplex("d1 does not preserve top-degree local cycles")
                for a, v in enumerate(x):
                    if v:
                        m.add(r, start + a, v)
            if any(i not in seen for i in img):
                raise NotAComplex("d1 leaves the top-degree blocks")
        bd[k] = m
    dual = ChainComplex(ranks, bd, ring, tags)
    incl = {}
    for k in ranks:
        m = SparseMatrix(ranks[k], T.rank(k))
        for r, z in enumerate(bases[k]):
            for i, v in z.items():
                m.add(r, i, v)
        incl[k] = m
    return dual, ChainMap(dual, T, incl)


def pl_verify(G: Cosheaf, B: Bicomplex | None = None) -> dict:
    """Compare ``H_k`` of the dihomologic chains with the dual complex in every degree."""
    B = B or Bicomplex(G)
    n = B.K.dim
    profile = local_homology_profile(G)
    report = {"n": n, "ring": str(G.ring), "concentrated": concentrated(profile, n), "degrees": []}
    try:
        dual, incl = pl_dual_complex(G, n, B, profile)
        hx = homology(B.total)
        hd = homology(dual)
        imap = induced_map(incl, hd, hx)
    except NotAComplex as exc:
        report.update(ok=False, error=str(exc))
        return report
    ok = True
    for k in range(n + 1):
        a, b = hx.group(k), hd.group(k)
        row = {"k": k, "homology": a.to_json(), "dual": b.to_json(),
               "equal": a == b, "iso": imap.iso(k)}
        ok = ok and row["equal"] and row["iso"]
        report["degrees"].append(row)
    above = all(hx.group(k).is_zero for k in hx.complex.degrees if k > n)
    report["vanishing_above_n"] = above
    report["ok"] = ok and above
    return report


def morphism_chain_map(f, X: ChainComplex | None = None, Y: ChainComplex | None = None) -> ChainMap:
    """Chain map induced by a cosheaf morphism on the cellular chains of its base."""
    K = f.source.base
    X = X or chain_complex(K, f.source)
    Y = Y or chain_complex(K, f.target)
    xi, yi = _index(X), _index(Y)
    maps = {k: SparseMatrix(X.rank(k), Y.rank(k)) for k in X.degrees}
    for c in K.cells:
        comp = f.components[c.id]
        for a in range(comp.shape[0]):
            for b in range(comp.shape[1]):
                if comp[a, b]:
                    maps[c.dim].add(xi[c.dim][(c.id, a)], yi[c.dim][(c.id, b)], int(comp[a, b]))
    return ChainMap(X, Y, maps)
