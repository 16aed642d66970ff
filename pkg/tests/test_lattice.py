import pytest
from hypothesis import given, settings, strategies as st

from troplef.lattice import (
    INT, RAT, CoeffRing, GroupStructure, Lattice, NotSublattice, SparseMatrix,
    contraction_map, det, hnf, identity, imat, kernel_lattice, quotient_structure,
    rank_over, saturation, snf, solve_in_lattice, subsets, wedge_power_map,
)

import oracles


def small_matrix(max_rows=5, max_cols=5, lo=-9, hi=9):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                               min_size=r, max_size=r)))


def is_hnf(h) -> bool:
    last = -1
    seen_zero = False
    for i in range(h.shape[0]):
        nz = [j for j in range(h.shape[1]) if h[i, j]]
        if not nz:
            seen_zero = True
            continue
        if seen_zero:
            return False
        j = nz[0]
        if j <= last or h[i, j] <= 0:
            return False
        if any(not (0 <= h[k, j] < h[i, j]) for k in range(i)):
            return False
        last = j
    return True


# ---------------------------------------------------------------- examples

def test_hnf_examples():
    h, u = hnf(identity(3))
    assert (h == identity(3)).all() and (u == identity(3)).all()
    h, u = hnf(imat([[0, 1], [1, 0]]))
    assert (h == identity(2)).all()
    assert abs(det(u)) == 1


def test_snf_examples():
    assert snf(imat([[4, 0], [0, 6]]))[0] == [2, 12]
    assert snf(identity(4))[0] == [1, 1, 1, 1]
    assert snf(imat([[2]]))[0] == [2]


def test_kernel_examples():
    assert kernel_lattice(imat([[0, 0], [0, 0]])) == Lattice.full(2)
    k = kernel_lattice(imat([[1], [1]]))
    assert k.vectors() in ([[1, -1]], [[-1, 1]])
    m = [[2, 0], [0, 3], [2, 3]]
    k = kernel_lattice(imat(m))
    assert k.rank == 1
    assert not (k.basis @ imat(m)).any()
    # every small kernel vector is an integer multiple of the basis vector
    for v in oracles.brute_kernel(m, 3):
        assert solve_in_lattice(k, v) is not None


def test_solve_examples():
    assert solve_in_lattice(Lattice.full(2), [3, 5]) == [3, 5]
    assert solve_in_lattice(Lattice.span([[2, 0]], 2), [1, 0]) is None
    l = Lattice.span([[2, 1], [0, 3]], 2)
    x = solve_in_lattice(l, [2, 4])
    assert (imat([x]) @ l.basis).tolist() == [[2, 4]]
    # direct expansion 1*(2,1) + 1*(0,3) = (2,4); the HNF basis differs but spans the same lattice
    assert l.contains([2, 1]) and l.contains([0, 3])


def test_quotient_examples():
    z2 = Lattice.full(2)
    assert quotient_structure(z2, z2) == GroupStructure(0, ())
    assert quotient_structure(Lattice.span([[2, 0], [0, 1]], 2), z2) == GroupStructure(0, (2,))
    assert quotient_structure(Lattice.span([[1, 0]], 2), z2) == GroupStructure(1, ())
    with pytest.raises(NotSublattice):
        quotient_structure(z2, Lattice.span([[2, 0], [0, 1]], 2))


def test_wedge_examples():
    m = imat([[1, 2], [3, 4]])
    assert (wedge_power_map(m, 1) == m).all()
    assert wedge_power_map(m, 2).tolist() == [[-2]]
    assert wedge_power_map(imat([[1, 1, 0], [0, 1, 1]]), 2).tolist() == [[1, 1, 1]]
    assert wedge_power_map(m, 0).tolist() == [[1]]


def test_contraction_examples():
    # omega = dx in Z^2, v = dx^dy basis vector; dx . (dx^dy) = -dy
    c = contraction_map([1, 0], 2, 2)
    assert c.tolist() == [[0, -1]]
    assert contraction_map([1, 0], 2, 0).shape == (1, 0)
    # omega = dx^dz in Z^3 (2-subsets lex: xy, xz, yz)
    c = contraction_map([0, 1, 0], 3, 2, r=2)
    k = kernel_lattice(c)
    assert k == Lattice.span([[1, 0, 0], [0, 0, 1]], 3)


def test_rank_examples():
    assert rank_over(identity(3), CoeffRing.modp(2)) == 3
    assert rank_over(imat([[2]]), CoeffRing.modp(2)) == 0
    assert rank_over(imat([[2]]), RAT) == 1
    assert rank_over(imat([[2, 0], [0, 12]]), CoeffRing.modp(3)) == 1


def test_ring_parsing():
    assert CoeffRing.parse("Z") == INT
    assert CoeffRing.parse("Q") == RAT
    assert CoeffRing.parse("F3") == CoeffRing.modp(3)
    for bad in ("F4", "Z/6", "R", "F"):
        with pytest.raises(ValueError):
            CoeffRing.parse(bad)


def test_group_structure():
    g = GroupStructure.from_factors([4, 6, 0, 1])
    assert g == GroupStructure(1, (2, 12))
    assert g.exponent == 12
    assert str(g) == "Z + Z/2 + Z/12"
    with pytest.raises(ValueError):
        GroupStructure(0, (4, 6))


def test_empty_matrices():
    z = imat([], (0, 3))
    assert hnf(z)[0].shape == (0, 3)
    assert snf(z)[0] == []
    assert kernel_lattice(imat([], (3, 0))) == Lattice.full(3)
    assert rank_over(z) == 0


# ---------------------------------------------------------------- properties

@settings(max_examples=200, deadline=None)
@given(small_matrix())
def test_hnf_property(m):
    m = imat(m)
    h, u = hnf(m)
    assert (u @ m == h).all()
    assert abs(det(u)) == 1
    assert is_hnf(h)


@settings(max_examples=200, deadline=None)
@given(small_matrix())
def test_snf_property(m):
    mm = imat(m)
    d, s, t = snf(mm)
    prod = s @ mm @ t
    r, c = mm.shape
    for i in range(r):
        for j in range(c):
            assert prod[i, j] == (d[i] if i == j else 0)
    assert abs(det(s)) == 1 and abs(det(t)) == 1
    nz = [x for x in d if x]
    assert d[:len(nz)] == nz and all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert sorted(nz) == oracles.sympy_invariants(m)


@settings(max_examples=150, deadline=None)
@given(small_matrix(max_rows=4, max_cols=3, lo=-4, hi=4))
def test_kernel_is_saturated(m):
    k = kernel_lattice(imat(m))
    assert not (k.basis @ imat(m)).any() if k.rank else True
    assert k.rank == len(m) - oracles.rational_rank(m)
    assert quotient_structure(k, saturation(k)) == GroupStructure(0, ())


@settings(max_examples=150, deadline=None)
@given(small_matrix(max_rows=4, max_cols=4), st.integers(0, 4))
def test_wedge_minors_match_leibniz(m, p):
    w = wedge_power_map(imat(m), p)
    rows, cols = subsets(len(m), p), subsets(len(m[0]), p)
    for a, I in enumerate(rows):
        for b, J in enumerate(cols):
            sub = [[m[i][j] for j in J] for i in I]
            assert w[a, b] == oracles.leibniz_det(sub)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 3), st.data())
def test_wedge_functorial(a, b, c, p, data):
    A = imat(data.draw(st.lists(st.lists(st.integers(-5, 5), min_size=b, max_size=b), min_size=a, max_size=a)))
    B = imat(data.draw(st.lists(st.lists(st.integers(-5, 5), min_size=c, max_size=c), min_size=b, max_size=b)))
    assert (wedge_power_map(A @ B, p) == wedge_power_map(A, p) @ wedge_power_map(B, p)).all()


def test_contraction_pairing_exhaustive():
    """alpha(omega . v) = (alpha ^ omega)(v) on all basis data for n <= 4."""
    for n in range(1, 5):
        for r in range(0, n + 1):
            for I in subsets(n, r):
                omega = [int(J == I) for J in subsets(n, r)]
                for p in range(0, n + 1):
                    c = contraction_map(omega, n, p, r=r)
                    for a, K in enumerate(subsets(n, p)):
                        if p < r:
                            assert c.shape[1] == 0
                            continue
                        for b, J in enumerate(subsets(n, p - r)):
                            expected = oracles.form_eval(oracles.wedge_forms({J: 1}, {I: 1}), {K: 1})
                            assert c[a, b] == expected


@settings(max_examples=150, deadline=None)
@given(small_matrix(max_rows=5, max_cols=5, lo=-6, hi=6), st.sampled_from([2, 3, 5, 7]))
def test_rank_over(m, p):
    mm = imat(m)
    assert rank_over(mm, RAT) == oracles.rational_rank(m)
    assert rank_over(mm, RAT) == sum(1 for x in snf(mm)[0] if x)
    assert rank_over(mm, CoeffRing.modp(p)) == oracles.mod_rank(m, p)


@settings(max_examples=100, deadline=None)
@given(small_matrix(max_rows=3, max_cols=3, lo=-5, hi=5), st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_solve_roundtrip(m, x):
    m = [row + [0] * (3 - len(row)) for row in m]
    l = Lattice.span(m, 3)
    v = (imat([x[:len(m)]]) @ imat(m))[0]
    coords = solve_in_lattice(l, v)
    assert coords is not None
    assert (imat([coords]) @ l.basis)[0].tolist() == v.tolist() if l.rank else not any(v)


def test_big_entries():
    m = imat([[2 ** 80, 3], [5, 7 * 2 ** 70]])
    d, s, t = snf(m)
    assert d[0] * d[1] == abs(det(m))
    assert (s @ m @ t)[0, 0] == d[0]


def test_sparse_roundtrip():
    m = imat([[0, 2, 0], [1, 0, -1]])
    s = SparseMatrix.from_dense(m)
    assert (s.to_dense() == m).all()
    assert (s @ s.transpose()).to_dense().tolist() == [[4, 0], [0, 2]]
    assert s.mod(2).to_dense().tolist() == [[0, 0, 0], [1, 0, 1]]
