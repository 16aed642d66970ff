"""Tropical invariants and cosheaves of a subdivided integer polytope.

The polytope P lives in the dual lattice (forms); sedentarity groups and the
values of the tropical cosheaves live in the lattice of vectors ``Z^n``.  For
a face Q with tangent basis ``B_Q`` (rows), the quotient ``Z^n / Sed(Q)`` is
identified with ``Z^dim Q`` through ``v -> v @ B_Q.T``.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, factorial, gcd, lcm

from .complex import (
    Complex, _normal, affine_rank, attach_carrier, build_polyhedral, dihomologic_subdivision,
    polytope_faces, polytope_vertices, tangent_lattice,
)
from .cosheaf import Cosheaf, CosheafMorphism, dihom_subdivide, subdivide_cosheaf
from .errors import ValidationError
from .homology import (
    ChainComplex, HomologyResult, chain_complex, homology, induced_map, morphism_chain_map,
)
from .lattice import (
    INT, CoeffRing, GroupStructure, Lattice, SparseMatrix, annihilator, contraction_map,
    coordinates, det, identity, imat, kernel_lattice, quotient_structure, right_inverse,
    saturation, subsets, wedge_power_map, wedge_vector_map, zeros,
)


class NotSimple(ValidationError):
    pass


class NonIntegerVertices(ValidationError):
    pass


class DegenerateSpan(ValidationError):
    pass


class NotSaturated(ValidationError):
    pass


# ---------------------------------------------------------------------------
# setup


class TropicalSetup:
    """A full-dimensional integer polytope P together with a subdivision K carried by P."""

    def __init__(self, P: Complex, K: Complex):
        self.P = P
        self.K = K
        self.n = P.ambient_rank
        if P.dim != self.n:
            raise ValidationError(f"polytope has dimension {P.dim} in rank {self.n}")
        if K.parent is not P or any(c.carrier is None for c in K.cells):
            raise ValidationError("every cell of K needs a carrier face of P")
        self._D = None
        self._cache = {}
        self._lock = threading.Lock()

    @classmethod
    def from_complexes(cls, P: Complex, K: Complex, carrier=None) -> "TropicalSetup":
        Kc = attach_carrier(K, P)
        if carrier:
            for c, q in carrier.items():
                if Kc.cells[c].carrier != q:
                    raise ValidationError(f"declared carrier {q} of cell {c} differs from "
                                          f"the computed carrier {Kc.cells[c].carrier}")
        return cls(P, Kc)

    @property
    def D(self) -> Complex:
        # worker threads must share one D, or their cosheaves live on different bases
        with self._lock:
            if self._D is None:
                self._D = dihomologic_subdivision(self.K)
        return self._D

    def basis(self, q: int):
        """Tangent lattice basis of the face q of P (rows)."""
        return self.P.lattices[q].basis

    def carrier(self, c: int) -> int:
        return self.K.cells[c].carrier


# ---------------------------------------------------------------------------
# polytope invariants


def validate_simple(P: Complex) -> bool:
    n = P.dim
    facets = P.cells_of_dim(n - 1)
    for v in P.cells_of_dim(0):
        if sum(1 for f in facets if P.leq(v, f)) != n:
            return False
    return True


@dataclass
class SedData:
    sed: dict
    sed1: dict
    delta: dict


def _sed(P: Complex, q: int) -> Lattice:
    return annihilator(P.lattices[q])


def sedentarity(P: Complex) -> SedData:
    """Sed, Sed_(1) and the quotient Delta for every face of P."""
    n = P.dim
    facets = P.cells_of_dim(n - 1)
    sed, sed1, delta = {}, {}, {}
    for q in range(len(P)):
        sed[q] = _sed(P, q)
        s1 = Lattice.zero(P.ambient_rank)
        for f in facets:
            if P.leq(q, f):
                s1 = s1 + _sed(P, f)
        sed1[q] = s1
        delta[q] = quotient_structure(s1, sed[q])
    return SedData(sed, sed1, delta)


def delta_invariant(P: Complex) -> int:
    """lcm of the exponents of Delta(V) over the vertices V of a simple polytope."""
    if not validate_simple(P):
        raise NotSimple("delta is only defined for simple polytopes")
    data = sedentarity(P)
    out = 1
    for v in P.cells_of_dim(0):
        out = lcm(out, data.delta[v].exponent)
    return out


def _omega(basis) -> list[int]:
    """Coordinates of the top exterior power of a lattice basis, first nonzero entry positive."""
    w = [int(x) for x in wedge_power_map(basis, basis.shape[0])[0]]
    first = next(x for x in w if x)
    return w if first > 0 else [-x for x in w]


def _contraction_kernel(basis, n: int, p: int) -> Lattice:
    r = basis.shape[0]
    c = contraction_map(_omega(basis), n, p, r=r)
    if c.shape[1] == 0:
        return Lattice.full(comb(n, p))
    return kernel_lattice(c)


def theta_cell(points) -> int:
    """Exponent of ker(omega(Q).) modulo the sum of the edge kernels, lcm over all degrees."""
    for pt in points:
        if any(not isinstance(x, int) and not float(x).is_integer() for x in pt):
            raise NonIntegerVertices(f"vertex {list(pt)} is not integral")
    points = [tuple(int(x) for x in pt) for pt in points]
    n = len(points[0])
    lat = tangent_lattice(points)
    if lat.rank <= 1:
        return 1
    faces = polytope_faces(points)
    edges = [sorted(f) for f, d in faces.items() if d == 1]
    edge_bases = [tangent_lattice([points[i] for i in e]).basis for e in edges]
    out = 1
    for p in range(n + 1):
        big = _contraction_kernel(lat.basis, n, p)
        small = Lattice.zero(comb(n, p))
        for b in edge_bases:
            small = small + _contraction_kernel(b, n, p)
        g = quotient_structure(small, big)
        if g.free_rank:
            raise ValidationError("edge kernels do not have full rank")
        out = lcm(out, g.exponent)
    return out


def theta_complex(K: Complex) -> int:
    out = 1
    for c in K.cells:
        if c.dim >= 2:
            out = lcm(out, theta_cell(K.vertex_coords(c.id)))
    return out


def _lattice_volume(points) -> Fraction:
    """Lattice-normalized volume of a simplex (full-dimensional in its affine span)."""
    lat = tangent_lattice(points)
    d = lat.rank
    base = points[0]
    vecs = [[a - b for a, b in zip(pt, base)] for pt in points[1:]]
    c = coordinates(lat, vecs)
    return Fraction(abs(det(c)), factorial(d))


def theta_triangle(T):
    """Closed formula 2 vol(T) gcd(edge volumes) / prod(edge volumes)."""
    T = [tuple(int(x) for x in pt) for pt in T]
    if len(T) != 3 or affine_rank(T) != 2:
        raise DegenerateSpan("theta_triangle needs three affinely independent points")
    vol = _lattice_volume(T)
    lengths = [_lattice_volume([T[i], T[j]]) for i, j in ((0, 1), (1, 2), (0, 2))]
    g = 0
    for x in lengths:
        g = gcd(g, int(x))
    val = Fraction(2) * vol * g / (lengths[0] * lengths[1] * lengths[2])
    return int(val) if val.denominator == 1 else val


def h_number_formula(P: Complex, p: int) -> int:
    if not validate_simple(P):
        raise NotSimple("h-numbers need a simple polytope")
    n = P.dim
    f = P.f_vector()
    return sum((-1) ** (p - k) * comb(n - k, p - k) * f[n - k] for k in range(p + 1))


# ---------------------------------------------------------------------------
# cosheaves


def _projection_change(setup: TropicalSetup, q: int, q2: int):
    """Matrix M with B_q.T @ M = B_q2.T for a face q2 <= q of P."""
    if q == q2:
        return identity(setup.P.cells[q].dim)
    c = coordinates(setup.P.lattices[q], setup.basis(q2))
    return imat([[int(c[j, i]) for j in range(c.shape[0])] for i in range(c.shape[1])],
                (c.shape[1], c.shape[0]))


def f0_face_cosheaf(setup: TropicalSetup, p: int, ring: CoeffRing = INT) -> Cosheaf:
    """Cellular cosheaf ``Q -> wedge^p (Z^n / Sed(Q))`` on the faces of P."""
    P = setup.P
    ranks = [comb(P.cells[q].dim, p) for q in range(len(P))]
    ext = {}
    for f, e, _ in P.covers():
        ext[(e, f)] = wedge_power_map(_projection_change(setup, e, f), p)
    F = Cosheaf(P, ranks, ext, ring)
    F.ambient = [setup.basis(q).T for q in range(len(P))]
    return F


def f0_cosheaf(setup: TropicalSetup, p: int, ring: CoeffRing = INT) -> Cosheaf:
    """F0_p on the dihomologic cells of K, pulled back through the carriers."""
    key = ("f0", p, ring)
    if key not in setup._cache:
        FK = subdivide_cosheaf(f0_face_cosheaf(setup, p, ring), setup.K)
        setup._cache.setdefault(key, dihom_subdivide(FK, setup.D))
    return setup._cache[key]


def _edge_wedges(setup: TropicalSetup, p: int, q: int, edges):
    """Rows spanning the sum over edges of wedge^p of the edge annihilators, mod Sed(q)."""
    pi = setup.basis(q).T
    rows = []
    for e in edges:
        ann = annihilator(setup.K.lattices[e]).basis
        rows += [list(r) for r in wedge_power_map(ann @ pi, p)]
    return rows


def f1_cosheaf(setup: TropicalSetup, p: int, ring: CoeffRing = INT):
    """F1_p on the dihomologic cells of K and its inclusion into F0_p.

    Values are the HNF bases of the (unsaturated) sums of images, stored in
    the coordinates of the F0 values.
    """
    key = ("f1", p, ring)
    if key in setup._cache:
        return setup._cache[key]
    K, D = setup.K, setup.D
    F0z = f0_cosheaf(setup, p)
    lats = []
    for lo, hi in D.pairs:
        q = setup.carrier(hi)
        amb = comb(setup.P.cells[q].dim, p)
        edges = [c for c in K.below(lo) if K.cells[c].dim == 1]
        rows = _edge_wedges(setup, p, q, edges)
        lats.append(Lattice.span(rows, amb) if rows else Lattice.zero(amb))
    ranks = [l.rank for l in lats]
    ext = {}
    for f, c, _ in D.covers():
        if not ranks[c] or not ranks[f]:
            continue
        img = lats[c].basis @ F0z.ext(c, f) if lats[c].rank else None
        ext[(c, f)] = coordinates(lats[f], img)
    F1 = Cosheaf(D, ranks, ext, INT)
    F1.ambient = [l.basis for l in lats]
    comps = [lats[c].basis if ranks[c] else zeros(0, F0z.rank(c)) for c in range(len(D))]
    F1 = F1 if ring == INT else F1.tensor(ring)
    incl = CosheafMorphism(F1, f0_cosheaf(setup, p, ring), comps)
    return setup._cache.setdefault(key, (F1, incl))


# ---------------------------------------------------------------------------
# Hodge diamonds and Lefschetz maps


@dataclass
class HodgeDiamond:
    which: str
    ring: CoeffRing
    n: int
    groups: dict

    def group(self, p: int, q: int) -> GroupStructure:
        return self.groups.get((p, q), GroupStructure(0, ()))

    def to_json(self) -> dict:
        return {"which": self.which, "ring": str(self.ring), "n": self.n,
                "groups": [{"p": p, "q": q, **g.to_json()} for (p, q), g in sorted(self.groups.items())]}

    def render(self) -> str:
        """Text diamond, highest p + q on top, p growing to the right."""
        def show(g):
            if not self.ring.is_field or g.is_zero:
                return str(g)
            sym = str(self.ring)
            return sym if g.free_rank == 1 else f"{sym}^{g.free_rank}"

        cells = {k: show(g) for k, g in self.groups.items()}
        width = max(len(s) for s in cells.values()) + 2
        top = max(p + q for p, q in cells)
        lines = [f"H_pq({self.which}; {self.ring})"]
        for s in range(top, -1, -1):
            row = [cells[(p, s - p)].center(width) for p in range(s + 1) if (p, s - p) in cells]
            lines.append(" ".join(row).center(width * (top + 2)) + f"  p+q={s}")
        return "\n".join(lines)


def _pool_map(fn, items, threads: int):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _complex_for(setup, which, p, ring):
    key = ("cc", which, p, ring)
    if key not in setup._cache:
        F = f0_cosheaf(setup, p, ring) if which == "Y" else f1_cosheaf(setup, p, ring)[0]
        setup._cache.setdefault(key, chain_complex(setup.D, F))
    return setup._cache[key]


def _homology_for(setup, which, p, ring) -> HomologyResult:
    key = ("h", which, p, ring)
    if key not in setup._cache:
        setup._cache.setdefault(key, homology(_complex_for(setup, which, p, ring)))
    return setup._cache[key]


def hodge_diamond(setup: TropicalSetup, which: str = "Y", ring: CoeffRing = INT,
                  threads: int = 1) -> HodgeDiamond:
    """``H_{p,q} = H_q(K; F_p)`` with F0 for Y and F1 for X."""
    if which not in ("X", "Y"):
        raise ValueError("which must be 'X' or 'Y'")
    n = setup.n
    top = n if which == "Y" else n - 1
    results = _pool_map(lambda p: _homology_for(setup, which, p, ring), range(top + 1), threads)
    groups = {}
    for p, h in enumerate(results):
        for q in range(top + 1):
            groups[(p, q)] = h.group(q)
        for q in h.complex.degrees:
            if q > top and not h.group(q).is_zero:
                groups[(p, q)] = h.group(q)
    return HodgeDiamond(which, ring, n, groups)


def lefschetz_analysis(setup: TropicalSetup, ring: CoeffRing = INT, threads: int = 1) -> dict:
    """Classify every ``i_{p,q}: H_{p,q}(X) -> H_{p,q}(Y)`` and compare with the theorem's ranges."""
    n = setup.n
    delta = delta_invariant(setup.P)
    theta = theta_complex(setup.K)

    def job(p):
        F1, incl = f1_cosheaf(setup, p, ring)
        phi = morphism_chain_map(incl, _complex_for(setup, "X", p, ring), _complex_for(setup, "Y", p, ring))
        return induced_map(phi, _homology_for(setup, "X", p, ring), _homology_for(setup, "Y", p, ring))

    maps = _pool_map(job, range(n), threads)
    entries = []
    compliant = True
    for p, m in enumerate(maps):
        for q in range(n):
            cls = m.classify(q)
            if p + q < n - 1:
                need = "iso"
                ok = m.iso(q)
            elif p + q == n - 1:
                need = "surjective"
                ok = m.surjective(q)
            else:
                need, ok = None, True
            compliant = compliant and ok
            entries.append({"p": p, "q": q, "class": cls, "required": need, "ok": ok,
                            "source": m.source.group(q).to_json(), "target": m.target.group(q).to_json(),
                            "kernel": m.kernel[q].to_json(), "cokernel": m.cokernel[q].to_json()})
    return {"ring": str(ring), "n": n, "delta": delta, "theta": theta,
            "hypotheses": ring.contains_inverse(delta) and ring.contains_inverse(theta),
            "compliant": compliant, "maps": entries}


# ---------------------------------------------------------------------------
# Koszul resolution


def _quotient_projection(vectors, n: int):
    """Projection ``Z^n -> Z^n/<vectors>`` and a section, for a saturated span."""
    if not vectors:
        return identity(n), identity(n)
    span = Lattice.span(vectors, n)
    if span != saturation(span):
        raise NotSaturated(f"the span of {vectors} is not saturated")
    ker = kernel_lattice(imat(vectors).T)
    if ker.rank == 0:
        return zeros(n, 0), zeros(0, n)
    pi = ker.basis.T.copy()
    return pi, right_inverse(pi)


def koszul_resolution(n: int, G, p: int):
    """``C_k = sum over k-subsets F of G of wedge^(p-k)(Z^n/<F>)``, ``d v = sum f ^ v``.

    Returns the complex and the augmentation matrix from ``C_0 = wedge^p Z^n``
    to ``wedge^p(Z^n/<G>)``.
    """
    G = [tuple(int(x) for x in g) for g in G]
    proj = {}
    for k in range(len(G) + 1):
        for F in combinations(range(len(G)), k):
            proj[F] = _quotient_projection([list(G[i]) for i in F], n)
    tags, ranks = {}, {}
    for k in range(min(p, len(G)) + 1):
        tags[k] = []
        for F in combinations(range(len(G)), k):
            d = proj[F][0].shape[1]
            tags[k] += [(F, J) for J in subsets(d, p - k)]
        ranks[k] = len(tags[k])
    index = {k: {t: i for i, t in enumerate(tags[k])} for k in tags}
    bd = {}
    for k in range(1, max(tags) + 1):
        m = SparseMatrix(ranks[k], ranks[k - 1])
        for F in combinations(range(len(G)), k):
            pi_f, sec = proj[F]
            for f in F:
                rest = tuple(x for x in F if x != f)
                pi_r = proj[rest][0]
                mat = wedge_power_map(sec, p - k) @ wedge_vector_map(G[f], n, p - k) @ \
                    wedge_power_map(pi_r, p - k + 1)
                src = subsets(pi_f.shape[1], p - k)
                dst = subsets(pi_r.shape[1], p - k + 1)
                for a, I in enumerate(src):
                    for b, J in enumerate(dst):
                        if mat[a, b]:
                            m.add(index[k][(F, I)], index[k - 1][(rest, J)], int(mat[a, b]))
        bd[k] = m
    C = ChainComplex(ranks, bd, INT, tags)
    aug = wedge_power_map(proj[tuple(range(len(G)))][0], p)
    return C, aug


# ---------------------------------------------------------------------------
# regular subdivisions


def _omitted(h) -> bool:
    return h is None or (isinstance(h, float) and h in (float("inf"), float("-inf")))


def regular_subdivision(points, lifts, min_convention: bool = False) -> Complex:
    """Subdivision induced by the upper faces of the lifted points (lower faces with the min convention)."""
    pts, hs = [], []
    for pt, h in zip(points, lifts):
        if _omitted(h):
            continue
        pts.append(tuple(int(x) for x in pt))
        hs.append(Fraction(h))
    if not pts:
        raise DegenerateSpan("no points")
    n = len(pts[0])
    if affine_rank(pts) < n:
        raise DegenerateSpan("points do not affinely span the ambient space")
    if min_convention:
        hs = [-h for h in hs]
    scale = 1
    for h in hs:
        scale = lcm(scale, h.denominator)
    lifted = [pt + (int(h * scale),) for pt, h in zip(pts, hs)]
    facets = set()
    for sub in combinations(range(len(pts)), n + 1):
        a = lifted[sub[0]]
        rows = [[x - y for x, y in zip(lifted[s], a)] for s in sub[1:]]
        nrm = _normal(rows)
        if nrm[-1] == 0:
            continue
        if nrm[-1] < 0:
            nrm = [-x for x in nrm]
        vals = [sum(w * (x - y) for w, x, y in zip(nrm, q, a)) for q in lifted]
        if all(v <= 0 for v in vals):
            facets.add(frozenset(i for i, v in enumerate(vals) if v == 0))
    tops = []
    for fac in facets:
        idx = sorted(fac)
        verts = polytope_vertices([pts[i] for i in idx])
        tops.append(sorted(idx[v] for v in verts))
    used = sorted({v for t in tops for v in t})
    new = {v: i for i, v in enumerate(used)}
    coords = [pts[v] for v in used]
    cells = {}
    for t in tops:
        local = [new[v] for v in t]
        for f, d in polytope_faces([coords[v] for v in local]).items():
            if d > 0:
                cells.setdefault(tuple(sorted(local[i] for i in f)), d)
    return build_polyhedral(coords, [(d, list(vs)) for vs, d in sorted(cells.items(), key=lambda kv: (kv[1], kv[0]))])
