from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from troplef.complex import (
    DanglingFace, DiamondViolation, DimMismatch, GapTooSmall, NotAVertex, UngradedPoset,
    UnknownCell, _all_flags, barycentric_subdivision, build_abstract_cw, build_polyhedral,
    dihom_faces, dihomologic_cells, dihomologic_subdivision, link_complex,
)
from troplef.cosheaf import constant_cosheaf
from troplef.homology import chain_complex, homology
from troplef.tropical import regular_subdivision

from conftest import FIXTURES, complex_of


def octahedron_cw():
    """Boundary of the octahedron as an abstract CW complex with alternating signs."""
    K = complex_of("octahedron")
    cells = [(c.id, c.dim) for c in K.cells]
    return build_abstract_cw(cells, list(K.covers()))


def flag_oracle(K):
    """Every chain c0 < c1 < ... in the face poset, by brute force over subsets."""
    order = {c.id: set(K.below(c.id)) for c in K.cells}
    out = []
    for r in range(1, K.dim + 2):
        for sub in combinations(range(len(K)), r):
            sub = sorted(sub, key=lambda c: K.cells[c].dim)
            if all(sub[i] in order[sub[i + 1]] and sub[i] != sub[i + 1] for i in range(len(sub) - 1)):
                out.append(tuple(sub))
    return out


def test_segment_signs():
    K = complex_of("segment")
    e = K.cells_of_dim(1)[0]
    v0 = next(v for v in K.cells_of_dim(0) if K.coords[v] == (0,))
    v1 = next(v for v in K.cells_of_dim(0) if K.coords[v] == (1,))
    assert K.incidence(v0, e) == -1 and K.incidence(v1, e) == 1


@pytest.mark.parametrize("name,f", [
    ("triangle-p112", [4, 5, 2]), ("cube-222", [16, 32, 22, 5]), ("octahedron", [6, 12, 8]),
    ("square-22", [7, 10, 4]), ("segment", [2, 1]),
])
def test_fixture_f_vectors(name, f):
    assert complex_of(name).f_vector() == f


def test_dim_mismatch_and_dangling_face():
    with pytest.raises(DimMismatch):
        build_polyhedral([(0, 0), (1, 0), (0, 1)], [(1, [0, 1, 2])])
    with pytest.raises(DanglingFace):
        build_polyhedral([(0, 0), (1, 0), (0, 1)], [(2, [0, 1, 2])])
    K = build_polyhedral([(0, 0), (1, 0), (0, 1)], [(2, [0, 1, 2])], close=True)
    assert K.f_vector() == [3, 3, 1]


def test_not_a_vertex():
    with pytest.raises(NotAVertex):
        build_polyhedral([(0,), (1,), (2,)], [(1, [0, 1, 2])], close=True)


def test_abstract_cw_examples():
    assert octahedron_cw().f_vector() == [6, 12, 8]
    assert build_abstract_cw([("v", 0)], []).f_vector() == [1]
    # a circle made of one vertex and two loops: each edge has a single distinct face
    with pytest.raises((DiamondViolation, UngradedPoset)):
        build_abstract_cw([("v", 0), ("a", 1), ("b", 1)], [("v", "a", 1), ("v", "b", 1)])


def test_flipped_sign_is_caught():
    K = complex_of("triangle-p112")
    f, c, s = next((f, c, s) for f, c, s in K.covers() if K.cells[c].dim == 2)
    with pytest.raises(DiamondViolation):
        K.with_incidence(f, c, -s)


def test_stars_and_minus():
    K = complex_of("segment")
    e = K.cells_of_dim(1)[0]
    v0, v1 = K.cells_of_dim(0)
    assert K.open_star(e) == {e}
    assert K.complex_minus(v0) == {v1}
    T = complex_of("triangle-p112")
    mid = next(v for v in T.cells_of_dim(0) if T.coords[v] == (0, 1))
    star = T.open_star(mid)
    assert sorted(T.cells[c].dim for c in star) == [0, 1, 1, 1, 2, 2]
    with pytest.raises(UnknownCell):
        T.open_star(99)


def test_smallest_subcomplex_is_downward_closure():
    T = complex_of("triangle-p112")
    top = T.cells_of_dim(2)[0]
    assert T.smallest_subcomplex([top]) == set(T.below(top))


def test_barycentric_examples():
    assert barycentric_subdivision(complex_of("segment")).f_vector() == [3, 2]
    tri = build_polyhedral([(0, 0), (1, 0), (0, 1)], [(2, [0, 1, 2])], close=True)
    assert barycentric_subdivision(tri).f_vector() == [7, 12, 6]
    pt = build_polyhedral([(0,)], [])
    assert barycentric_subdivision(pt).f_vector() == [1]


def test_dihomologic_examples():
    seg = complex_of("segment")
    cells = dihomologic_cells(seg)
    assert len(cells) == 5
    assert sorted(c.dim for c in cells) == [0, 0, 0, 1, 1]
    tri = build_polyhedral([(0, 0), (1, 0), (0, 1)], [(2, [0, 1, 2])], close=True)
    D = dihomologic_subdivision(tri)
    assert D.f_vector() == [7, 9, 3]
    for c in D.cells_of_dim(2):
        assert len(D.faces(c)) == 4


@pytest.mark.parametrize("name", FIXTURES)
def test_dihomologic_boundary_squares_to_zero(name):
    K = complex_of(name)
    for c in dihomologic_cells(K):
        if c.dim < 2:
            continue
        acc = {}
        for f, s in dihom_faces(K, c):
            for g, t in dihom_faces(K, f):
                key = (g.lo, g.hi)
                acc[key] = acc.get(key, 0) + s * t
        assert all(v == 0 for v in acc.values())


@pytest.mark.parametrize("name", FIXTURES)
def test_diamond_on_subdivisions(name):
    K = complex_of(name)
    barycentric_subdivision(K).validate()
    dihomologic_subdivision(K).validate()


@pytest.mark.parametrize("name", ["segment", "triangle-p112", "square-22", "octahedron"])
def test_flag_count_matches_pseudo_cells(name):
    K = complex_of(name)
    flags = flag_oracle(K)
    assert sorted(flags) == sorted(_all_flags(K))
    # each pseudo-cell (lo <= hi) is the union of flags starting at lo and ending at hi
    for c in dihomologic_cells(K):
        inside = [fl for fl in flags if fl[0] == c.lo and fl[-1] == c.hi]
        top = [fl for fl in inside if len(fl) - 1 == c.dim]
        assert inside and (c.dim == 0 or top)


def sphere_homology(L, d):
    h = homology(chain_complex(L, constant_cosheaf(L)))
    groups = {k: h.group(k) for k in h.complex.degrees}
    want = {0: (1, ())} if d > 0 else {0: (2, ())}
    if d > 0:
        want[d] = (1, ())
    return all((g.free_rank, g.torsion) == want.get(k, (0, ())) for k, g in groups.items())


@pytest.mark.parametrize("name", ["triangle-p112", "square-22", "octahedron", "cube-222"])
def test_links_are_spheres(name):
    K = complex_of(name)
    for hi in K.cells:
        for lo in K.below(hi.id):
            gap = hi.dim - K.cells[lo].dim
            if gap >= 2:
                assert sphere_homology(link_complex(K, lo, hi.id), gap - 2)


def test_link_examples():
    K = complex_of("triangle-p112")
    top = K.cells_of_dim(2)[0]
    v = next(iter(c for c in K.below(top) if K.cells[c].dim == 0))
    assert link_complex(K, v, top).f_vector() == [2]
    edge = next(c for c in K.below(top) if K.cells[c].dim == 1)
    with pytest.raises(GapTooSmall):
        link_complex(K, edge, top)
    C = complex_of("cube-222")
    prism = C.cells_of_dim(3)[0]
    w = next(c for c in C.below(prism) if C.cells[c].dim == 0)
    L = link_complex(C, w, prism)
    assert L.dim == 1 and sphere_homology(L, 1)


@settings(max_examples=120, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=6, max_size=6))
def test_random_regular_subdivisions_satisfy_diamond(lifts):
    pts = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2)]
    K = regular_subdivision(pts, lifts)
    K.validate()
    for c in K.cells:
        if K.cells[c.id].dim > 0:
            assert len(c.vertices) >= c.dim + 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-1, 3), min_size=3, max_size=3))
def test_carrier_inequalities_agree_with_lp(point):
    from troplef.complex import _inside, in_hull
    from conftest import setup_of
    P = setup_of("cube-222").P
    for q in range(len(P)):
        verts = [P.coords[v] for v in P.cells[q].vertices]
        assert _inside([tuple(point)], P, q) == in_hull(point, verts)
