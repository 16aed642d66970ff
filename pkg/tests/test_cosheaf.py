import numpy as np
import pytest

from troplef.complex import barycentric_subdivision, dihomologic_subdivision
from troplef.cosheaf import (
    Cosheaf, CosheafMorphism, FunctorialityViolation, IntegerCokernelUnsupported,
    NaturalityViolation, NotAdjacent, NotNested, characteristic_cosheaf, constant_cosheaf,
    dihom_subdivide, fix_first_localize, localization_morphism, localize, morphism_cokernel,
    subdivide_cosheaf, tensor_ring, validate_morphism,
)
from troplef.homology import chain_complex, homology
from troplef.lattice import RAT, CoeffRing, identity, imat
from troplef.tropical import f0_cosheaf, f1_cosheaf

from conftest import FIXTURES, complex_of, setup_of

F2, F3 = CoeffRing.modp(2), CoeffRing.modp(3)


def same(F, G):
    """Literal equality of ranks and of every stored extension matrix."""
    if F.ranks != G.ranks:
        return False
    for f, e, _ in F.base.covers():
        a, b = F.ext(e, f), G.ext(e, f)
        if a.shape != b.shape or any(int(x) != int(y) for x, y in zip(a.flat, b.flat)):
            return False
    return True


def test_constant_examples():
    K = complex_of("segment")
    assert constant_cosheaf(K).ranks == [1, 1, 1]
    assert constant_cosheaf(K, 0).support() == []


def test_functoriality_violation():
    K = complex_of("triangle-p112")
    F = constant_cosheaf(K)
    ext = dict(F._ext)
    f, e, _ = next(t for t in K.covers() if K.cells[t[1]].dim == 2)
    ext[(e, f)] = imat([[-1]])
    with pytest.raises(FunctorialityViolation):
        Cosheaf(K, F.ranks, ext)


def test_characteristic_cosheaf():
    K = complex_of("segment")
    v0, v1 = K.cells_of_dim(0)
    e = K.cells_of_dim(1)[0]
    everything = set(range(len(K)))
    assert same(characteristic_cosheaf(K, everything, set()), constant_cosheaf(K))
    local = characteristic_cosheaf(K, everything, K.complex_minus(v0))
    assert set(local.support()) == {v0, e}
    closure = characteristic_cosheaf(K, K.smallest_subcomplex([e]), set())
    assert set(closure.support()) == everything
    with pytest.raises(NotNested):
        characteristic_cosheaf(K, {v0}, {v1})
    with pytest.raises(NotNested):
        characteristic_cosheaf(K, {e}, set())


def test_relative_homology_of_characteristic():
    K = complex_of("segment")
    v0, v1 = K.cells_of_dim(0)
    everything = set(range(len(K)))
    h = homology(chain_complex(K, characteristic_cosheaf(K, everything, {v0, v1})))
    assert h.group(0).is_zero and h.group(1).free_rank == 1


def test_localize_examples():
    K = complex_of("triangle-p112")
    F = constant_cosheaf(K)
    top = K.cells_of_dim(2)[0]
    Fe, proj = localize(F, top)
    assert Fe.support() == [top]
    v = K.cells_of_dim(0)[0]
    Fv, _ = localize(F, v)
    assert set(Fv.support()) == set(K.open_star(v))
    Fvv, _ = localize(Fv, v)
    assert same(Fvv, Fv)
    proj.validate()


def test_localization_morphisms_surjective_and_nested():
    K = complex_of("triangle-p112")
    F = constant_cosheaf(K)
    for e in range(len(K)):
        Fe, _ = localize(F, e)
        for e2 in K.above(e):
            m = localization_morphism(F, e, e2)
            assert validate_morphism(m)["natural"]
            for c in range(len(K)):
                comp = m.components[c]
                assert comp.shape[1] == 0 or np.linalg.matrix_rank(comp.astype(float)) == comp.shape[1]
            Fee2, _ = localize(Fe, e2)
            Fe2, _ = localize(F, e2)
            assert same(Fee2, Fe2)
    e = K.cells_of_dim(2)[0]
    v = next(c for c in K.cells_of_dim(0) if not K.leq(c, e))
    with pytest.raises(NotAdjacent):
        localization_morphism(F, e, v)


def test_subdivision_of_local_cosheaf():
    K = complex_of("segment")
    v0 = K.cells_of_dim(0)[0]
    everything = set(range(len(K)))
    local = characteristic_cosheaf(K, everything, K.complex_minus(v0))
    B = barycentric_subdivision(K)
    sub = subdivide_cosheaf(local, B)
    v1 = K.cells_of_dim(0)[1]
    w1 = next(c.id for c in B.cells if c.label == (v1,))
    expected = characteristic_cosheaf(B, set(range(len(B))), {w1})
    assert same(sub, expected)


def test_dihom_subdivided_constant_is_constant():
    K = complex_of("square-22")
    G = dihom_subdivide(constant_cosheaf(K))
    assert same(G, constant_cosheaf(G.base))


@pytest.mark.parametrize("name", FIXTURES)
def test_fix_first_localize_closes_diagram(name):
    K = complex_of(name)
    F = constant_cosheaf(K, 2)
    G = dihom_subdivide(F)
    for e in range(len(K)):
        assert same(fix_first_localize(G, e), localize(F, e)[0])


def test_fix_first_at_top_cell_is_skyscraper():
    K = complex_of("triangle-p112")
    G = dihom_subdivide(constant_cosheaf(K))
    top = K.cells_of_dim(2)[1]
    assert fix_first_localize(G, top).support() == [top]


def test_tensor_ring():
    K = complex_of("segment")
    F = constant_cosheaf(K)
    assert same(tensor_ring(F, F2), constant_cosheaf(K, 1, F2))
    v0, v1 = K.cells_of_dim(0)
    e = K.cells_of_dim(1)[0]
    G = Cosheaf(K, [1, 1, 1], {(e, v0): imat([[2]]), (e, v1): imat([[1]])})
    assert not tensor_ring(G, F2).ext(e, v0).any()


@pytest.mark.parametrize("ring", [F2, F3])
def test_tensor_commutes_with_constructions(ring):
    K = complex_of("triangle-p112")
    F = constant_cosheaf(K, 2)
    D = dihomologic_subdivision(K)
    assert same(dihom_subdivide(F, D).tensor(ring), dihom_subdivide(F.tensor(ring), D))
    for e in range(len(K)):
        assert same(localize(F, e)[0].tensor(ring), localize(F.tensor(ring), e)[0])


def test_tensor_commutes_with_f0():
    S = setup_of("triangle-p112")
    for p in range(3):
        a = f0_cosheaf(S, p).tensor(F3)
        b = f0_cosheaf(S, p, F3)
        assert same(a, b)


def test_cokernels():
    K = complex_of("triangle-p112")
    F = constant_cosheaf(K, 2, RAT)
    ident = CosheafMorphism(F, F, [identity(2)] * len(K))
    assert morphism_cokernel(ident).support() == []
    with pytest.raises(IntegerCokernelUnsupported):
        morphism_cokernel(CosheafMorphism(constant_cosheaf(K), constant_cosheaf(K), [identity(1)] * len(K)))


def test_cokernel_of_subcomplex_inclusion():
    K = complex_of("segment")
    v0, v1 = K.cells_of_dim(0)
    everything = set(range(len(K)))
    small = characteristic_cosheaf(K, {v0}, set(), ring=RAT)
    big = constant_cosheaf(K, 1, RAT)
    comps = [identity(1) if c == v0 else imat([], (0, 1)) for c in range(len(K))]
    q = morphism_cokernel(CosheafMorphism(small, big, comps))
    want = characteristic_cosheaf(K, everything, {v0}, ring=RAT)
    assert q.ranks == want.ranks


@pytest.mark.parametrize("name", ["triangle-p112", "square-22"])
def test_f1_cokernel_ranks(name):
    S = setup_of(name)
    for p in range(S.n):
        F1, inc = f1_cosheaf(S, p, RAT)
        q = morphism_cokernel(inc)
        F0 = f0_cosheaf(S, p, RAT)
        assert q.ranks == [F0.rank(c) - F1.rank(c) for c in range(len(F0.ranks))]


def test_naturality_violation():
    K = complex_of("segment")
    F = constant_cosheaf(K)
    e = K.cells_of_dim(1)[0]
    comps = [identity(1)] * len(K)
    comps[e] = imat([[2]])
    with pytest.raises(NaturalityViolation):
        CosheafMorphism(F, F, comps)
    bad = CosheafMorphism(F, F, comps, validate=False)
    assert validate_morphism(bad)["natural"] is False


def test_f1_inclusion_is_natural():
    S = setup_of("cube-222")
    for p in range(S.n):
        _, inc = f1_cosheaf(S, p)
        assert validate_morphism(inc)["natural"]
