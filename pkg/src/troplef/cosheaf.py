"""Cellular cosheaves with values in free modules.

A cosheaf on a complex stores a rank per cell and, for every codimension-one
pair ``face < cell``, the extension matrix from the value at ``cell`` to the
value at ``face`` (row convention, shape ``rank(cell) x rank(face)``).
Dihomologic cosheaves are cellular cosheaves on the complex returned by
:func:`troplef.complex.dihomologic_subdivision`, whose cells are the pairs
``(lo, hi)``.
"""

from __future__ import annotations

from .complex import Complex, MissingCarrier, dihomologic_subdivision
from .errors import TroplefError, ValidationError
from .lattice import (
    INT, CoeffRing, identity, kernel_lattice, right_inverse, rref_mod, zeros,
)


class FunctorialityViolation(ValidationError):
    pass


class NaturalityViolation(ValidationError):
    pass


class NotNested(ValidationError):
    pass


class NotAdjacent(ValidationError):
    pass


class IntegerCokernelUnsupported(TroplefError):
    pass


def _eq(a, b, ring: CoeffRing) -> bool:
    if a.shape != b.shape:
        return False
    if ring.tag == "F":
        return all((int(x) - int(y)) % ring.p == 0 for x, y in zip(a.flat, b.flat))
    return all(int(x) == int(y) for x, y in zip(a.flat, b.flat))


class Cosheaf:
    """Free-module valued cosheaf on a complex."""

    def __init__(self, base: Complex, ranks, ext, ring: CoeffRing = INT, ambient=None,
                 validate=True):
        self.base = base
        self.ranks = [int(r) for r in ranks]
        self.ring = ring
        self.ambient = ambient
        self._ext = {}
        for (e, f), m in ext.items():
            if base.incidence(f, e) == 0:
                raise ValidationError(f"extension given for non-adjacent pair {e} > {f}")
            self._ext[(e, f)] = ring.reduce(m)
        self._cache = {}
        if len(self.ranks) != len(base):
            raise ValidationError("one rank per cell is required")
        if validate:
            self.validate()

    def rank(self, c: int) -> int:
        return self.ranks[c]

    def ext(self, e: int, f: int):
        """Extension matrix along the cover f < e."""
        m = self._ext.get((e, f))
        if m is None:
            return zeros(self.ranks[e], self.ranks[f])
        return m

    def extension(self, e: int, f: int):
        """Extension along any face relation f <= e (composed along a chain, memoized)."""
        if e == f:
            return identity(self.ranks[e])
        key = (e, f)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        K = self.base
        if not K.leq(f, e):
            raise NotAdjacent(f"{f} is not a face of {e}")
        mid = next(a for a in K.faces(e) if K.leq(f, a))
        out = self.ring.reduce(self.ext(e, mid) @ self.extension(mid, f))
        self._cache[key] = out
        return out

    def validate(self):
        K = self.base
        for (e, f), m in self._ext.items():
            if m.shape != (self.ranks[e], self.ranks[f]):
                raise ValidationError(f"extension {e}->{f} has shape {m.shape}, "
                                      f"expected {(self.ranks[e], self.ranks[f])}")
        for c in K.cells:
            if c.dim < 2:
                continue
            paths: dict = {}
            for a in K.faces(c.id):
                for f in K.faces(a):
                    paths.setdefault(f, []).append(a)
            for f, mids in paths.items():
                first = self.ext(c.id, mids[0]) @ self.ext(mids[0], f)
                for a in mids[1:]:
                    if not _eq(first, self.ext(c.id, a) @ self.ext(a, f), self.ring):
                        raise FunctorialityViolation(
                            f"square {c.id} > {{{mids[0]}, {a}}} > {f} does not commute")
        return True

    def support(self) -> list[int]:
        return [c for c, r in enumerate(self.ranks) if r]

    def tensor(self, ring: CoeffRing) -> "Cosheaf":
        return tensor_ring(self, ring)

    def __repr__(self):
        return f"Cosheaf(ring={self.ring}, total_rank={sum(self.ranks)}, cells={len(self.ranks)})"


class CosheafMorphism:
    """Natural transformation between two cosheaves on the same complex."""

    def __init__(self, source: Cosheaf, target: Cosheaf, components, validate=True):
        if source.base is not target.base:
            raise ValidationError("morphism between cosheaves on different complexes")
        self.source, self.target = source, target
        ring = source.ring
        self.components = []
        for c in range(len(source.base)):
            m = components[c]
            if m is None:
                m = zeros(source.ranks[c], target.ranks[c])
            if m.shape != (source.ranks[c], target.ranks[c]):
                raise ValidationError(f"component at {c} has shape {m.shape}")
            self.components.append(ring.reduce(m))
        if validate:
            self.validate()

    def validate(self):
        S, T = self.source, self.target
        for f, e, _ in S.base.covers():
            lhs = S.ext(e, f) @ self.components[f]
            rhs = self.components[e] @ T.ext(e, f)
            if not _eq(lhs, rhs, S.ring):
                raise NaturalityViolation(f"naturality fails on the cover {f} < {e}")
        return True


def validate_morphism(f: CosheafMorphism) -> dict:
    """Report on naturality and cellwise shapes."""
    try:
        f.validate()
        ok, msg = True, ""
    except NaturalityViolation as exc:
        ok, msg = False, str(exc)
    return {"natural": ok, "message": msg, "cells": len(f.components)}


# ---------------------------------------------------------------------------
# constructions


def constant_cosheaf(K: Complex, rank: int = 1, ring: CoeffRing = INT) -> Cosheaf:
    ext = {(e, f): identity(rank) for f, e, _ in K.covers()}
    return Cosheaf(K, [rank] * len(K), ext, ring)


def characteristic_cosheaf(K: Complex, sub1, sub2, rank: int = 1, ring: CoeffRing = INT) -> Cosheaf:
    """The cosheaf [sub1; sub2; Z^rank]."""
    sub1, sub2 = frozenset(sub1), frozenset(sub2)
    for s in (sub1, sub2):
        if not K.is_subcomplex(s):
            raise NotNested("arguments must be subcomplexes")
    if not sub2 <= sub1:
        raise NotNested("the second subcomplex must lie in the first")
    support = sub1 - sub2
    ranks = [rank if c in support else 0 for c in range(len(K))]
    ext = {(e, f): identity(rank) for f, e, _ in K.covers() if e in support and f in support}
    return Cosheaf(K, ranks, ext, ring)


def localize(F: Cosheaf, e):
    """``F_e`` (F restricted to the open star of e) and the projection ``F -> F_e``."""
    K = F.base
    e = K._check(e)
    star = K.above(e)
    ranks = [F.ranks[c] if c in star else 0 for c in range(len(K))]
    ext = {(a, b): F.ext(a, b) for (a, b) in F._ext if a in star and b in star}
    Fe = Cosheaf(K, ranks, ext, F.ring, validate=False)
    comps = [identity(F.ranks[c]) if c in star else zeros(F.ranks[c], 0) for c in range(len(K))]
    return Fe, CosheafMorphism(F, Fe, comps, validate=False)


def localization_morphism(F: Cosheaf, e, e2) -> CosheafMorphism:
    """The surjection ``F_e -> F_e2`` for ``e <= e2``."""
    K = F.base
    e, e2 = K._check(e), K._check(e2)
    if not K.leq(e, e2):
        raise NotAdjacent(f"cell {e} is not a face of {e2}")
    Fe, _ = localize(F, e)
    Fe2, _ = localize(F, e2)
    star2 = K.above(e2)
    comps = [identity(Fe.ranks[c]) if c in star2 else zeros(Fe.ranks[c], 0) for c in range(len(K))]
    return CosheafMorphism(Fe, Fe2, comps)


def subdivide_cosheaf(F: Cosheaf, Ksub: Complex) -> Cosheaf:
    """Pull F back along the carrier map of a subdivision: ``F'(e') = F(carrier e')``."""
    if Ksub.parent is not F.base:
        raise MissingCarrier("the subdivision's parent is not the cosheaf's base")
    car = []
    for c in Ksub.cells:
        if c.carrier is None:
            raise MissingCarrier(f"cell {c.id} of the subdivision has no carrier")
        car.append(c.carrier)
    ranks = [F.ranks[car[c]] for c in range(len(Ksub))]
    ext = {}
    for f, e, _ in Ksub.covers():
        ext[(e, f)] = F.extension(car[e], car[f])
    out = Cosheaf(Ksub, ranks, ext, F.ring, validate=False)
    if F.ambient is not None:
        out.ambient = [F.ambient[car[c]] for c in range(len(Ksub))]
    return out


def dihom_subdivide(F: Cosheaf, D: Complex | None = None) -> Cosheaf:
    """``F'(e^p; e^q) = F(e^q)`` on the dihomologic subdivision."""
    if D is None:
        D = dihomologic_subdivision(F.base)
    return subdivide_cosheaf(F, D)


def _pair_index(D: Complex):
    idx = getattr(D, "_pair_index", None)
    if idx is None:
        idx = {c.label: c.id for c in D.cells}
        D._pair_index = idx
    return idx


def fix_first_localize(G: Cosheaf, e) -> Cosheaf:
    """Cellular cosheaf ``e' -> G(e; e')`` for ``e' >= e`` on the parent complex."""
    D = G.base
    K = D.parent
    if K is None or not hasattr(D, "pairs"):
        raise ValidationError("fix_first_localize needs a cosheaf on a dihomologic subdivision")
    e = K._check(e)
    idx = _pair_index(D)
    star = K.above(e)
    ranks = [G.ranks[idx[(e, c)]] if c in star else 0 for c in range(len(K))]
    ext = {}
    for f, c, _ in K.covers():
        if c in star and f in star:
            ext[(c, f)] = G.ext(idx[(e, c)], idx[(e, f)])
    return Cosheaf(K, ranks, ext, G.ring, validate=False)


def fix_first_morphism(G: Cosheaf, e, e2) -> CosheafMorphism:
    """``G_e -> G_e2`` for a cover ``e < e2``, induced by raising the first coordinate."""
    D = G.base
    K = D.parent
    if K.incidence(e, e2) == 0:
        raise NotAdjacent(f"{e} < {e2} is not a cover")
    idx = _pair_index(D)
    Ge, Ge2 = fix_first_localize(G, e), fix_first_localize(G, e2)
    star2 = K.above(e2)
    comps = []
    for c in range(len(K)):
        if c in star2:
            comps.append(G.ext(idx[(e, c)], idx[(e2, c)]))
        else:
            comps.append(zeros(Ge.ranks[c], Ge2.ranks[c]))
    return CosheafMorphism(Ge, Ge2, comps, validate=False)


def tensor_ring(F: Cosheaf, ring: CoeffRing) -> Cosheaf:
    """Same ranks, matrices reduced into the ring."""
    if F.ring == ring:
        return F
    if F.ring.tag == "F" and ring != F.ring:
        raise ValidationError("cannot change the ring of an F_p cosheaf")
    out = Cosheaf(F.base, F.ranks, dict(F._ext), ring, validate=False)
    out.ambient = F.ambient
    return out


def tensor_morphism(f: CosheafMorphism, ring: CoeffRing) -> CosheafMorphism:
    return CosheafMorphism(tensor_ring(f.source, ring), tensor_ring(f.target, ring),
                           f.components, validate=False)


def _quotient_maps(image, n: int, ring: CoeffRing):
    """Projection Q (n x k) onto a complement of the row space and a section S (k x n)."""
    if ring.tag == "F":
        rows, pivots = rref_mod([list(r) for r in image], n, ring.p)
        free = [j for j in range(n) if j not in pivots]
        Q = zeros(n, len(free))
        for a, j in enumerate(free):
            Q[j, a] = 1
        for r, j in zip(rows, pivots):
            for a, jj in enumerate(free):
                Q[j, a] = (-r[jj]) % ring.p
        S = zeros(len(free), n)
        for a, j in enumerate(free):
            S[a, j] = 1
        return Q, S
    ann = kernel_lattice(image.T) if image.shape[0] else None
    if ann is None:
        return identity(n), identity(n)
    Q = ann.basis.T.copy() if ann.rank else zeros(n, 0)
    S = right_inverse(Q) if ann.rank else zeros(0, n)
    return Q, S


def morphism_cokernel(f: CosheafMorphism) -> Cosheaf:
    """Cellwise cokernel of a morphism (field coefficients only)."""
    ring = f.source.ring
    if not ring.is_field:
        raise IntegerCokernelUnsupported("cokernels are only formed over a field (Q or F_p)")
    T = f.target
    K = T.base
    maps = [_quotient_maps(f.components[c], T.ranks[c], ring) for c in range(len(K))]
    ranks = [maps[c][0].shape[1] for c in range(len(K))]
    ext = {}
    for fc, e, _ in K.covers():
        Qf = maps[fc][0]
        Se = maps[e][1]
        ext[(e, fc)] = Se @ T.ext(e, fc) @ Qf
    out = Cosheaf(K, ranks, ext, ring, validate=True)
    out.quotient_maps = [m[0] for m in maps]
    return out


def inclusion_morphism(sub: Cosheaf, sup: Cosheaf, components) -> CosheafMorphism:
    return CosheafMorphism(sub, sup, components)
