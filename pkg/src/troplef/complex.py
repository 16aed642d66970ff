"""Regular CW and integer polyhedral complexes.

A :class:`Complex` is a graded face poset with a signed incidence number for
every codimension-one pair.  Cells are numbered ``0..N-1`` by dimension; in
polyhedral mode the 0-cells come first, in vertex order, so vertex ``i`` is
cell ``i``.

Reference orientations of polyhedral cells are the HNF bases of their tangent
lattices, and the incidence of a facet ``f`` in ``e`` is the sign of the
determinant of (outward vector, basis of f) written in the basis of e.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import ValidationError
from .lattice import Lattice, det, imat, rank_over, saturation, solve_in_lattice


class DimMismatch(ValidationError):
    pass


class DiamondViolation(ValidationError):
    pass


class DanglingFace(ValidationError):
    pass


class NotAVertex(ValidationError):
    pass


class UngradedPoset(ValidationError):
    pass


class IntersectionViolation(ValidationError):
    pass


class UnknownCell(ValidationError):
    pass


class GapTooSmall(ValidationError):
    pass


class MissingCarrier(ValidationError):
    pass


@dataclass(frozen=True)
class Cell:
    id: int
    dim: int
    vertices: tuple | None = None
    label: object = None
    carrier: int | None = None


DihomCell = namedtuple("DihomCell", "lo hi dim")


# ---------------------------------------------------------------------------
# polytope geometry


def tangent_lattice(points) -> Lattice:
    """Saturated lattice of integer vectors parallel to the affine span."""
    points = [tuple(int(x) for x in p) for p in points]
    n = len(points[0])
    base = min(points)
    vecs = [[a - b for a, b in zip(p, base)] for p in points if p != base]
    if not vecs:
        return Lattice.zero(n)
    return saturation(Lattice.span(vecs, n))


def affine_rank(points) -> int:
    return tangent_lattice(points).rank


def _local_coords(points, lat: Lattice):
    base = points[0]
    out = []
    for p in points:
        x = solve_in_lattice(lat, [a - b for a, b in zip(p, base)])
        out.append(tuple(x))
    return out


def _normal(rows) -> list[int]:
    """Integer normal vector to d-1 vectors in Z^d by cofactor expansion."""
    d = len(rows) + 1
    out = []
    for j in range(d):
        minor = [[r[k] for k in range(d) if k != j] for r in rows]
        out.append((-1) ** j * det(imat(minor, (d - 1, d - 1))) if rows else 1)
    return out


def _facets(coords: list[tuple], idx: list[int]):
    """Facets of conv(coords[i] for i in idx), each as a frozenset of indices."""
    d = len(coords[idx[0]])
    if d == 0:
        return []
    if d == 1:
        vals = [coords[i][0] for i in idx]
        lo, hi = min(vals), max(vals)
        return [frozenset(i for i in idx if coords[i][0] == lo),
                frozenset(i for i in idx if coords[i][0] == hi)]
    out = set()
    for sub in combinations(idx, d):
        a = coords[sub[0]]
        rows = [[x - y for x, y in zip(coords[s], a)] for s in sub[1:]]
        nrm = _normal(rows)
        if not any(nrm):
            continue
        vals = {i: sum(w * (x - y) for w, x, y in zip(nrm, coords[i], a)) for i in idx}
        if all(v >= 0 for v in vals.values()) or all(v <= 0 for v in vals.values()):
            out.add(frozenset(i for i, v in vals.items() if v == 0))
    return sorted(out, key=lambda s: sorted(s))


def polytope_faces(points) -> dict:
    """All nonempty faces of conv(points).

    Returns ``{frozenset of point indices on the face: face dimension}``; points
    that are not vertices appear inside the faces containing them.
    """
    points = [tuple(int(x) for x in p) for p in points]
    faces: dict = {}

    def rec(idx: frozenset):
        if idx in faces:
            return
        sub = sorted(idx)
        lat = tangent_lattice([points[i] for i in sub])
        faces[idx] = lat.rank
        if lat.rank == 0:
            return
        local = _local_coords([points[i] for i in sub], lat)
        coords = {i: c for i, c in zip(sub, local)}
        for f in _facets(coords, sub):
            rec(f)

    rec(frozenset(range(len(points))))
    return faces


def polytope_vertices(points) -> list[int]:
    """Indices of the points that are vertices of their convex hull."""
    faces = polytope_faces(points)
    return sorted(next(iter(f)) for f, d in faces.items() if d == 0)


def _lp_feasible(A, b) -> bool:
    """Exact feasibility of ``A x <= b`` (x free) by a two-phase simplex with Bland's rule."""
    m = len(A)
    if m == 0:
        return True
    n = len(A[0])
    # x = xp - xm; rows with negative rhs get multiplied by -1 and an artificial
    rows, rhs, basis = [], [], []
    ncols = 2 * n + m + m
    for i in range(m):
        row = [Fraction(0)] * ncols
        sgn = -1 if b[i] < 0 else 1
        for j in range(n):
            row[j] = Fraction(sgn * A[i][j])
            row[n + j] = Fraction(-sgn * A[i][j])
        row[2 * n + i] = Fraction(sgn)
        row[2 * n + m + i] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(sgn * b[i]))
        basis.append(2 * n + m + i)
    # phase 1: minimize the sum of artificials
    cost = [Fraction(0)] * ncols
    for i in range(m):
        cost[2 * n + m + i] = Fraction(1)
    while True:
        red = [cost[j] - sum(cost[basis[i]] * rows[i][j] for i in range(m)) for j in range(ncols)]
        enter = next((j for j in range(ncols) if red[j] < 0), None)
        if enter is None:
            break
        ratios = [(rhs[i] / rows[i][enter], basis[i], i) for i in range(m) if rows[i][enter] > 0]
        if not ratios:
            break
        _, _, leave = min(ratios)
        piv = rows[leave][enter]
        rows[leave] = [x / piv for x in rows[leave]]
        rhs[leave] /= piv
        for i in range(m):
            if i != leave and rows[i][enter]:
                f = rows[i][enter]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[leave])]
                rhs[i] -= f * rhs[leave]
        basis[leave] = enter
    value = sum(rhs[i] for i in range(m) if basis[i] >= 2 * n + m)
    return value == 0


def _meet_properly(P1, P2) -> bool:
    """True when conv(P1) and conv(P2) meet exactly in conv of their common points.

    Decided by searching for a separating hyperplane through the common points.
    """
    common = set(P1) & set(P2)
    A, b = [], []
    # unknowns (w_1..w_n, c): h(v) = w.v - c
    for v in set(P1) | set(P2):
        row = list(v) + [-1]
        if v in common:
            A.append(row)
            b.append(0)
            A.append([-x for x in row])
            b.append(0)
        elif v in P1:
            A.append(row)
            b.append(-1)
        else:
            A.append([-x for x in row])
            b.append(-1)
    return _lp_feasible(A, b)


# ---------------------------------------------------------------------------
# the complex


class Complex:
    """A validated graded face poset with incidence signs."""

    def __init__(self, cells, covers, mode="cw", ambient_rank=None, coords=None,
                 bases=None, parent=None, orient=None, validate=True):
        self.cells: list[Cell] = list(cells)
        self.mode = mode
        self.ambient_rank = ambient_rank
        self.coords = coords
        self.bases = bases
        self.parent = parent
        self.orient = dict(orient or {})
        n = len(self.cells)
        for i, c in enumerate(self.cells):
            if c.id != i:
                raise ValueError("cell ids must be 0..N-1 in order")
        self._faces = [dict() for _ in range(n)]
        self._cofaces = [dict() for _ in range(n)]
        for f, c, s in covers:
            if s not in (1, -1):
                raise ValidationError(f"incidence sign {s} between {f} and {c} is not +-1")
            if f in self._faces[c]:
                raise ValidationError(f"duplicate incidence {f} < {c}")
            self._faces[c][f] = s
            self._cofaces[f][c] = s
        self._below = None
        self._above = None
        self._label_index = {c.label: c.id for c in self.cells} if all(
            c.label is not None for c in self.cells) else {}
        self._by_dim = {}
        for c in self.cells:
            self._by_dim.setdefault(c.dim, []).append(c.id)
        if validate:
            self.validate()

    # -- queries ----------------------------------------------------------------

    def __len__(self):
        return len(self.cells)

    @property
    def dim(self) -> int:
        return max((c.dim for c in self.cells), default=-1)

    def cells_of_dim(self, k: int) -> list[int]:
        return self._by_dim.get(k, [])

    def f_vector(self) -> list[int]:
        return [len(self.cells_of_dim(k)) for k in range(self.dim + 1)]

    def faces(self, c: int) -> dict:
        """Codimension-one faces of c with their incidence signs."""
        return self._faces[c]

    def cofaces(self, c: int) -> dict:
        return self._cofaces[c]

    def incidence(self, face: int, cell: int) -> int:
        return self._faces[cell].get(face, 0)

    def covers(self):
        for c in range(len(self.cells)):
            for f, s in self._faces[c].items():
                yield f, c, s

    def index(self, label) -> int:
        """Cell id from a label (or an id)."""
        if label in self._label_index:
            return self._label_index[label]
        if isinstance(label, (int, np.integer)) and 0 <= label < len(self.cells):
            return int(label)
        raise UnknownCell(f"unknown cell {label!r}")

    def _check(self, e) -> int:
        if not isinstance(e, (int, np.integer)) or not 0 <= e < len(self.cells):
            raise UnknownCell(f"unknown cell {e!r}")
        return int(e)

    def below(self, c: int) -> frozenset:
        """All faces of c, including c."""
        if self._below is None:
            below = [None] * len(self.cells)
            for c2 in sorted(range(len(self.cells)), key=lambda i: self.cells[i].dim):
                s = {c2}
                for f in self._faces[c2]:
                    s |= below[f]
                below[c2] = frozenset(s)
            self._below = below
        return self._below[c]

    def above(self, c: int) -> frozenset:
        """All cofaces of c, including c (the open star)."""
        if self._above is None:
            above = [set() for _ in self.cells]
            for c2 in range(len(self.cells)):
                for f in self.below(c2):
                    above[f].add(c2)
            self._above = [frozenset(s) for s in above]
        return self._above[c]

    def leq(self, a: int, b: int) -> bool:
        return a in self.below(b)

    def vertex_coords(self, c: int) -> list[tuple]:
        return [self.coords[v] for v in self.cells[c].vertices]

    def carrier(self, c: int) -> int:
        car = self.cells[c].carrier
        if car is None:
            raise MissingCarrier(f"cell {c} has no carrier")
        return car

    # -- validation -------------------------------------------------------------

    def validate(self):
        for c in self.cells:
            if c.dim < 0:
                raise UngradedPoset(f"cell {c.id} has negative dimension")
            for f in self._faces[c.id]:
                if self.cells[f].dim != c.dim - 1:
                    raise UngradedPoset(
                        f"cover {f} < {c.id} joins dimensions {self.cells[f].dim} and {c.dim}")
            if c.dim >= 1 and len(self._faces[c.id]) < 2:
                raise DiamondViolation(f"cell {c.id} of dim {c.dim} has fewer than two facets")
            if c.dim == 1:
                signs = sorted(self._faces[c.id].values())
                if signs != [-1, 1]:
                    raise DiamondViolation(
                        f"edge {c.id} must have two endpoints of opposite sign, got {signs}")
        for c in self.cells:
            if c.dim < 2:
                continue
            paths: dict = {}
            for a, s1 in self._faces[c.id].items():
                for f, s2 in self._faces[a].items():
                    paths.setdefault(f, []).append(s1 * s2)
            for f, prods in paths.items():
                if len(prods) != 2 or sum(prods) != 0:
                    raise DiamondViolation(
                        f"pair {f} < {c.id}: intermediate sign products {prods} "
                        "(need exactly two, cancelling)")

    def check_intersections(self):
        """Pairs of maximal polyhedral cells must meet in a common face."""
        if self.mode != "polyhedral":
            return
        maximal = [c.id for c in self.cells if not self._cofaces[c.id]]
        vsets = {c.vertices: c.id for c in self.cells}
        for a, b in combinations(maximal, 2):
            va, vb = self.cells[a].vertices, self.cells[b].vertices
            common = tuple(sorted(set(va) & set(vb)))
            if common and common not in vsets:
                raise IntersectionViolation(f"cells {a} and {b} share vertices {common} that span no cell")
            pa = [self.coords[v] for v in va]
            pb = [self.coords[v] for v in vb]
            if not _meet_properly(pa, pb):
                raise IntersectionViolation(f"cells {a} and {b} do not meet in a common face")

    # -- subcomplexes -----------------------------------------------------------

    def open_star(self, e) -> frozenset:
        return self.above(self._check(e))

    def closed_star(self, e) -> frozenset:
        return self.smallest_subcomplex(self.open_star(e))

    def complex_minus(self, e) -> frozenset:
        """K - e: cells whose closure misses e."""
        star = self.open_star(e)
        return frozenset(c for c in range(len(self.cells)) if c not in star)

    def smallest_subcomplex(self, cells) -> frozenset:
        out = set()
        for c in cells:
            out |= self.below(self._check(c))
        return frozenset(out)

    def is_subcomplex(self, cells) -> bool:
        cells = frozenset(cells)
        return all(self.below(c) <= cells for c in cells)

    def restrict(self, cells) -> "Complex":
        """A subcomplex as a standalone complex (cells renumbered, labels kept)."""
        cells = sorted(self.smallest_subcomplex(cells), key=lambda c: (self.cells[c].dim, c))
        new = {c: i for i, c in enumerate(cells)}
        out = [replace(self.cells[c], id=new[c],
                       label=self.cells[c].label if self.cells[c].label is not None else c)
               for c in cells]
        covers = [(new[f], new[c], s) for f, c, s in self.covers() if c in new]
        return Complex(out, covers, mode="cw", validate=True)

    def with_incidence(self, face: int, cell: int, sign: int, validate=True) -> "Complex":
        """Copy with one incidence sign replaced (used for negative controls)."""
        covers = [(f, c, sign if (f, c) == (face, cell) else s) for f, c, s in self.covers()]
        return Complex(self.cells, covers, mode=self.mode, ambient_rank=self.ambient_rank,
                       coords=self.coords, bases=self.bases, parent=self.parent,
                       orient=self.orient, validate=validate)

    def __repr__(self):
        return f"Complex(mode={self.mode}, f={self.f_vector()})"


# ---------------------------------------------------------------------------
# builders


def build_abstract_cw(cells, incidences) -> Complex:
    """Complex from ``cells = [(label, dim)]`` and ``incidences = [(face, cell, sign)]``."""
    cells = list(cells)
    labels = [lab for lab, _ in cells]
    if len(set(labels)) != len(labels):
        raise ValidationError("duplicate cell ids")
    order = sorted(range(len(cells)), key=lambda i: (int(cells[i][1]), i))
    index = {cells[i][0]: k for k, i in enumerate(order)}
    out = [Cell(k, int(cells[i][1]), None, cells[i][0]) for k, i in enumerate(order)]
    covers = []
    for f, c, s in incidences:
        if f not in index or c not in index:
            raise UnknownCell(f"incidence ({f}, {c}) names an unknown cell")
        covers.append((index[f], index[c], int(s)))
    return Complex(out, covers, mode="cw")


def _orientation_sign(outward, face_basis, cell_lat: Lattice) -> int:
    rows = [list(outward)] + [list(r) for r in face_basis]
    coords = [solve_in_lattice(cell_lat, r) for r in rows]
    d = det(imat(coords, (len(rows), cell_lat.rank)))
    if d == 0:
        raise DimMismatch("degenerate orientation determinant")
    return 1 if d > 0 else -1


def build_polyhedral(vertices, cells, close=False, strict=False) -> Complex:
    """Polyhedral complex from integer vertices and cells given by vertex ids.

    ``cells`` holds ``(dim, vertex ids)`` pairs or dicts with those keys.
    Every vertex is a 0-cell.  With ``close`` missing faces are added instead
    of raising :class:`DanglingFace`.
    """
    coords = [tuple(int(x) for x in v) for v in vertices]
    if not coords:
        raise ValidationError("no vertices")
    n = len(coords[0])
    if any(len(v) != n for v in coords):
        raise ValidationError("vertices have different lengths")
    if len(set(coords)) != len(coords):
        raise ValidationError("repeated vertex coordinates")

    listed: dict = {}
    order: list = []

    def add(vs: tuple, dim: int, source: str):
        if vs in listed:
            if listed[vs] != dim:
                raise DimMismatch(f"cell {list(vs)} listed with dims {listed[vs]} and {dim}")
            return
        listed[vs] = dim
        order.append(vs)

    for v in range(len(coords)):
        add((v,), 0, "vertex")
    for cell in cells:
        if isinstance(cell, dict):
            dim, vs = int(cell["dim"]), cell["vertices"]
        else:
            dim, vs = int(cell[0]), cell[1]
        vs = tuple(sorted(int(v) for v in vs))
        if len(set(vs)) != len(vs) or any(not 0 <= v < len(coords) for v in vs):
            raise ValidationError(f"cell {list(vs)} has bad vertex ids")
        rank = affine_rank([coords[v] for v in vs])
        if rank != dim:
            raise DimMismatch(f"cell {list(vs)} stated dim {dim} but affine rank is {rank}")
        add(vs, dim, "input")

    # facets of every cell; close or complain
    facets: dict = {}
    queue = list(order)
    while queue:
        vs = queue.pop(0)
        dim = listed[vs]
        if dim == 0:
            facets[vs] = []
            continue
        pts = [coords[v] for v in vs]
        faces = polytope_faces(pts)
        verts = {next(iter(f)) for f, d in faces.items() if d == 0}
        if len(verts) != len(vs):
            bad = [vs[i] for i in range(len(vs)) if i not in verts]
            raise NotAVertex(f"cell {list(vs)}: points {bad} are not vertices of its hull")
        fl = []
        for f, d in faces.items():
            if d == dim - 1:
                fvs = tuple(sorted(vs[i] for i in f))
                if fvs not in listed:
                    if not close:
                        raise DanglingFace(f"face {list(fvs)} of cell {list(vs)} is not listed")
                    add(fvs, d, "closure")
                    queue.append(fvs)
                fl.append(fvs)
        facets[vs] = fl

    ordered = sorted(order, key=lambda vs: listed[vs])
    ids = {vs: i for i, vs in enumerate(ordered)}
    out = [Cell(i, listed[vs], vs, i) for i, vs in enumerate(ordered)]

    lats = [tangent_lattice([coords[v] for v in vs]) for vs in ordered]
    bases = [l.basis for l in lats]
    covers = []
    for vs in ordered:
        e = ids[vs]
        for fvs in facets[vs]:
            f = ids[fvs]
            inside = next(v for v in vs if v not in fvs)
            outward = [a - b for a, b in zip(coords[fvs[0]], coords[inside])]
            covers.append((f, e, _orientation_sign(outward, bases[f], lats[e])))
    K = Complex(out, covers, mode="polyhedral", ambient_rank=n, coords=coords, bases=bases)
    K.lattices = lats
    for c in K.cells:
        for f in K.below(c.id):
            if not set(K.cells[f].vertices) <= set(c.vertices):
                raise ValidationError("face poset disagrees with vertex containment")
    if strict:
        K.check_intersections()
    return K


def attach_carrier(K: Complex, P: Complex) -> Complex:
    """Copy of K (polyhedral, subdividing the polyhedral P) with carriers into P.

    The carrier of a cell is the smallest cell of P containing it; same-dimension
    pairs get the sign comparing their reference orientations.
    """
    if K.mode != "polyhedral" or P.mode != "polyhedral":
        raise MissingCarrier("geometric carriers need polyhedral complexes")
    cells, orient = [], {}
    for c in K.cells:
        pts = K.vertex_coords(c.id)
        best = None
        for q in P.cells:
            if best is not None and q.dim >= P.cells[best].dim:
                continue
            base = P.coords[q.vertices[0]]
            lat = P.lattices[q.id]
            if all(lat.contains([a - b for a, b in zip(p, base)]) for p in pts) and \
                    _inside(pts, P, q.id):
                best = q.id
        if best is None:
            raise MissingCarrier(f"cell {c.id} of K lies in no cell of P")
        cells.append(replace(c, carrier=best))
        if P.cells[best].dim == c.dim and c.dim > 0:
            coords = [solve_in_lattice(P.lattices[best], r) for r in K.bases[c.id]]
            orient[c.id] = 1 if det(imat(coords)) > 0 else -1
        elif c.dim == 0:
            orient[c.id] = 1
    out = Complex(cells, list(K.covers()), mode="polyhedral", ambient_rank=K.ambient_rank,
                  coords=K.coords, bases=K.bases, parent=P, orient=orient, validate=False)
    out.lattices = K.lattices
    return out


def in_hull(point, verts) -> bool:
    """Exact test of ``point`` in conv(verts)."""
    k = len(verts)
    A, b = [], []
    for j in range(len(point)):
        row = [v[j] for v in verts]
        A.append(row)
        b.append(point[j])
        A.append([-x for x in row])
        b.append(-point[j])
    A.append([1] * k)
    b.append(1)
    A.append([-1] * k)
    b.append(-1)
    for i in range(k):
        A.append([-int(i == j) for j in range(k)])
        b.append(0)
    return _lp_feasible(A, b)


def _halfspaces(P: Complex, q: int):
    """Facet inequalities ``w.x <= c`` of the cell q in its local lattice coordinates."""
    cache = P.__dict__.setdefault("_halfspace_cache", {})
    if q not in cache:
        lat = P.lattices[q]
        local = _local_coords([P.coords[v] for v in P.cells[q].vertices], lat)
        idx = list(range(len(local)))
        out = []
        for fac in _facets(local, idx) if lat.rank else []:
            if lat.rank == 1:
                a = local[next(iter(fac))]
                nrm = [1]
            else:
                pts = sorted(fac)
                a = local[pts[0]]
                rows = [[x - y for x, y in zip(local[i], a)] for i in pts[1:]]
                nrm = _normal(_independent(rows, lat.rank - 1))
            off = sum(w * x for w, x in zip(nrm, a))
            other = next(i for i in idx if i not in fac)
            if sum(w * x for w, x in zip(nrm, local[other])) > off:
                nrm, off = [-w for w in nrm], -off
            out.append((nrm, off))
        cache[q] = (P.coords[P.cells[q].vertices[0]], out)
    return cache[q]


def _independent(rows, k):
    """The first k linearly independent rows."""
    chosen = []
    for r in rows:
        if rank_over(imat(chosen + [r], (len(chosen) + 1, len(r)))) > len(chosen):
            chosen.append(r)
        if len(chosen) == k:
            break
    return chosen


def _inside(points, P: Complex, q: int) -> bool:
    base, ineqs = _halfspaces(P, q)
    for p in points:
        x = solve_in_lattice(P.lattices[q], [a - b for a, b in zip(p, base)])
        if x is None:
            return False
        if any(sum(w * int(v) for w, v in zip(nrm, x)) > off for nrm, off in ineqs):
            return False
    return True


# ---------------------------------------------------------------------------
# subdivisions


def _all_flags(K: Complex):
    """Flags as tuples of cell ids of strictly increasing dimension."""
    by_top: dict = {}
    for c in sorted(range(len(K)), key=lambda i: K.cells[i].dim):
        chains = [(c,)]
        for f in K.below(c):
            if f != c:
                chains += [ch + (c,) for ch in by_top[f]]
        by_top[c] = chains
    flags = []
    for c in range(len(K)):
        flags += by_top[c]
    return flags


def barycentric_subdivision(K: Complex) -> Complex:
    """Abstract simplicial complex of flags of K, with carriers and orientations."""
    flags = sorted(_all_flags(K), key=lambda fl: (len(fl), fl))
    ids = {fl: i for i, fl in enumerate(flags)}
    cells, covers, orient = [], [], {}
    for i, fl in enumerate(flags):
        cells.append(Cell(i, len(fl) - 1, None, fl, fl[-1]))
        if len(fl) > 1:
            for j in range(len(fl)):
                covers.append((ids[fl[:j] + fl[j + 1:]], i, -1 if j % 2 else 1))
        k = len(fl) - 1
        if K.cells[fl[-1]].dim == k:
            s = -1 if (k * (k + 1) // 2) % 2 else 1
            for a, b in zip(fl, fl[1:]):
                s *= K.incidence(a, b)
            orient[i] = s
    return Complex(cells, covers, mode="cw", parent=K, orient=orient)


def dihomologic_cells(K: Complex) -> list:
    out = []
    for hi in range(len(K)):
        for lo in K.below(hi):
            out.append(DihomCell(lo, hi, K.cells[hi].dim - K.cells[lo].dim))
    return sorted(out, key=lambda c: (c.dim, c.lo, c.hi))


def dihom_faces(K: Complex, c) -> list:
    """Codimension-one faces of a pseudo-cell with their signs."""
    lo, hi = c[0], c[1]
    p = K.cells[lo].dim
    out = []
    for nxt, s in K.cofaces(lo).items():
        if K.leq(nxt, hi):
            out.append((DihomCell(nxt, hi, c[2] - 1 if len(c) > 2 else None), (-1) ** (p + 1) * s))
    for prev, s in K.faces(hi).items():
        if K.leq(lo, prev):
            out.append((DihomCell(lo, prev, c[2] - 1 if len(c) > 2 else None), (-1) ** p * s))
    return out


def dihomologic_subdivision(K: Complex) -> Complex:
    """The pseudo-cells (lo <= hi) as a complex whose labels are (lo, hi)."""
    dcells = dihomologic_cells(K)
    ids = {(c.lo, c.hi): i for i, c in enumerate(dcells)}
    cells, covers, orient = [], [], {}
    for i, c in enumerate(dcells):
        cells.append(Cell(i, c.dim, None, (c.lo, c.hi), c.hi))
        for f, s in dihom_faces(K, c):
            covers.append((ids[(f.lo, f.hi)], i, s))
        if K.cells[c.lo].dim == 0:
            orient[i] = 1
    D = Complex(cells, covers, mode="cw", parent=K, orient=orient)
    D.pairs = [(c.lo, c.hi) for c in dcells]
    return D


def link_complex(K: Complex, lo: int, hi: int) -> Complex:
    """Simplicial complex of flags strictly between lo and hi."""
    lo, hi = K._check(lo), K._check(hi)
    if not K.leq(lo, hi) or lo == hi:
        raise UnknownCell(f"cells {lo} and {hi} are not strictly adjacent")
    if K.cells[hi].dim - K.cells[lo].dim < 2:
        raise GapTooSmall("link complexes need a dimension gap of at least 2")
    between = {c for c in K.below(hi) if c not in (lo, hi) and K.leq(lo, c)}
    flags = [fl for fl in _all_flags(K) if set(fl) <= between]
    flags = sorted(flags, key=lambda fl: (len(fl), fl))
    ids = {fl: i for i, fl in enumerate(flags)}
    cells, covers = [], []
    for i, fl in enumerate(flags):
        cells.append(Cell(i, len(fl) - 1, None, fl))
        if len(fl) > 1:
            for j in range(len(fl)):
                covers.append((ids[fl[:j] + fl[j + 1:]], i, -1 if j % 2 else 1))
    return Complex(cells, covers, mode="cw")
