"""Decreasing filtrations by subcomplexes and exactness of short sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .complexes import (
    ChainMap,
    CochainComplex,
    ComplexError,
    is_chain_map,
    validate_complex,
)
from .linalg import (
    LinAlgError,
    RatMatrix,
    column_space_basis,
    quotient_with_section,
    rank,
    solve,
    subspace_contains,
)


class FiltrationError(ValueError):
    pass


@dataclass(frozen=True)
class FilteredComplex:
    """A complex ``ambient = F^0`` with subcomplexes ``F^1 ⊇ ... ⊇ F^{n+1} = 0``.

    ``levels[p][m]`` is a matrix whose columns span ``(F^p)^m`` inside the
    ambient degree-m space.  Missing entries mean the zero subspace.  Levels
    below 0 are read as ``F^0`` and levels above ``n`` as zero.
    """

    ambient: CochainComplex
    levels: Mapping[int, Mapping[int, RatMatrix]] = field(repr=False)
    n: int

    def span(self, p: int, m: int) -> RatMatrix:
        dim = self.ambient.dim(m)
        if p <= 0:
            p = 0
        if p > self.n + 1 or p not in self.levels:
            return RatMatrix.zeros(dim, 0)
        mat = self.levels[p].get(m)
        return mat if mat is not None else RatMatrix.zeros(dim, 0)


def filtration_violation(F: FilteredComplex) -> str | None:
    """Describe the first violated filtration axiom, or ``None``."""
    A = F.ambient
    degs = list(A.degrees)
    for m in degs:
        if rank(F.span(0, m)) != A.dim(m):
            return f"F^0 is not the whole ambient in degree {m}"
    for p in range(0, F.n + 2):
        for m in degs:
            S = F.span(p, m)
            if S.rows != A.dim(m):
                return f"F^{p} in degree {m} has {S.rows} rows, expected {A.dim(m)}"
    for p in range(0, F.n + 1):
        for m in degs:
            if not subspace_contains(F.span(p, m), F.span(p + 1, m)):
                return f"F^{p + 1} not inside F^{p} in degree {m}"
    for p in range(0, F.n + 2):
        for m in degs:
            if not subspace_contains(F.span(p, m + 1), A.diff(m) @ F.span(p, m)):
                return f"d(F^{p}) not inside F^{p} in degree {m}"
    for m in degs:
        if rank(F.span(F.n + 1, m)):
            return f"F^{F.n + 1} is not zero in degree {m}"
    return None


def validate_filtration(F: FilteredComplex) -> bool:
    return filtration_violation(F) is None


def bete_filtration(c: CochainComplex) -> FilteredComplex:
    """The stupid filtration: ``F^p`` is everything in degrees ``>= p``."""
    if not validate_complex(c):
        raise ComplexError("bete_filtration needs a valid complex")
    if not c.is_zero() and c.lo < 0:
        raise FiltrationError("bete filtration with F^0 = ambient needs lo >= 0")
    n = max(c.hi, 0)
    levels = {}
    for p in range(0, n + 2):
        levels[p] = {
            m: (RatMatrix.identity(c.dim(m)) if m >= p else RatMatrix.zeros(c.dim(m), 0))
            for m in c.degrees
        }
    return FilteredComplex(c, levels, n)


def independent_columns(span: RatMatrix) -> RatMatrix:
    if span.cols == 0:
        return span
    if rank(span) == span.cols:
        return span
    return column_space_basis(span)


def restrict_to_basis(d: RatMatrix, src: RatMatrix, dst: RatMatrix) -> RatMatrix:
    """Matrix of ``d`` from the columns of ``src`` into coordinates on ``dst``."""
    try:
        return solve(dst, d @ src)
    except LinAlgError:
        raise FiltrationError("image is not contained in the target span") from None


@dataclass(frozen=True)
class SubComplex:
    complex: CochainComplex
    include: ChainMap
    basis: Mapping[int, RatMatrix] = field(repr=False)


def sub_complex_data(F: FilteredComplex, p: int, *, clamp: bool = False) -> SubComplex:
    if clamp:
        p = max(p, 0)
    if not 0 <= p <= F.n + 1:
        raise FiltrationError(f"level {p} outside [0, {F.n + 1}]")
    A = F.ambient
    basis = {m: independent_columns(F.span(p, m)) for m in A.degrees}
    dims = {m: basis[m].cols for m in A.degrees}
    d = {}
    for m in A.degrees:
        if m + 1 in basis:
            d[m] = restrict_to_basis(A.diff(m), basis[m], basis[m + 1])
    sub = CochainComplex.build(dims, d, A.twist_weight)
    include = ChainMap.build(sub, A, {m: basis[m] for m in A.degrees if basis[m].cols})
    return SubComplex(sub, include, basis)


def sub_complex(F: FilteredComplex, p: int) -> tuple[CochainComplex, ChainMap]:
    s = sub_complex_data(F, p)
    return s.complex, s.include


@dataclass(frozen=True)
class Quotient:
    """``C / S`` with its projection and a chosen linear section per degree."""

    complex: CochainComplex
    project: ChainMap
    section: Mapping[int, RatMatrix] = field(repr=False)


def quotient_complex(c: CochainComplex, sub: Mapping[int, RatMatrix]) -> Quotient:
    """Quotient of ``c`` by the subcomplex spanned (degreewise) by ``sub``.

    Induced differentials are computed by lifting through the section,
    applying ``d`` and projecting back.  Raises if ``sub`` is not stable under d.
    """
    Q, S, k = {}, {}, {}
    for m in c.degrees:
        span = sub.get(m, RatMatrix.zeros(c.dim(m), 0))
        span = independent_columns(span)
        Q[m], S[m], k[m] = quotient_with_section(c.dim(m), span)
    for m in c.degrees:
        span = sub.get(m, RatMatrix.zeros(c.dim(m), 0))
        if m + 1 in Q and span.cols and not (Q[m + 1] @ c.diff(m) @ span).is_zero():
            raise FiltrationError(f"subspace is not a subcomplex in degree {m}")
    d = {}
    for m in c.degrees:
        if m + 1 in Q:
            d[m] = Q[m + 1] @ c.diff(m) @ S[m]
    qc = CochainComplex.build(k, d, c.twist_weight)
    proj = ChainMap.build(c, qc, {m: Q[m] for m in c.degrees if k[m]})
    return Quotient(qc, proj, {m: S[m] for m in c.degrees})


def induced_on_quotients(f: ChainMap, qs: Quotient, qt: Quotient) -> ChainMap:
    """The map ``source/S -> target/T`` induced by ``f`` (assumes ``f(S) ⊆ T``)."""
    mats = {}
    for m in qs.complex.degrees:
        lift = qs.section.get(m)
        if lift is None:
            continue
        mats[m] = qt.project.mat(m + f.degree) @ f.mat(m) @ lift
    return ChainMap.build(qs.complex, qt.complex, mats, f.degree)


def graded_piece(F: FilteredComplex, p: int) -> CochainComplex:
    """``F^p / F^{p+1}`` with the induced differential, in ``F^p``'s sub-basis."""
    return graded_piece_data(F, p).complex


def graded_piece_data(F: FilteredComplex, p: int) -> Quotient:
    if not 0 <= p <= F.n:
        raise FiltrationError(f"graded piece index {p} outside [0, {F.n}]")
    top = sub_complex_data(F, p)
    below = sub_complex_data(F, p + 1)
    sub = {m: restrict_to_basis(RatMatrix.identity(F.ambient.dim(m)), below.basis[m], top.basis[m])
           for m in F.ambient.degrees}
    return quotient_complex(top.complex, sub)


def ses_violation(a: ChainMap, b: ChainMap) -> str | None:
    """First failure of exactness of ``0 -> A -a-> B -b-> C -> 0``, or ``None``."""
    if a.degree or b.degree:
        raise ComplexError("check_ses needs degree-0 maps")
    if a.target != b.source:
        if a.target.twist_weight != b.source.twist_weight:
            raise ComplexError(
                f"weights inconsistent: {a.target.twist_weight} vs {b.source.twist_weight}")
        raise ComplexError("the middle complexes of the sequence differ")
    if not is_chain_map(a):
        raise ComplexError("first map is not a chain map")
    if not is_chain_map(b):
        raise ComplexError("second map is not a chain map")
    B = a.target
    degs = set(a.source.degrees) | set(B.degrees) | set(b.target.degrees)
    for m in sorted(degs):
        am, bm = a.mat(m), b.mat(m)
        if rank(am) != a.source.dim(m):
            return f"first map not injective in degree {m}"
        if rank(bm) != b.target.dim(m):
            return f"second map not surjective in degree {m}"
        if not (bm @ am).is_zero():
            return f"composite nonzero in degree {m}"
        if a.source.dim(m) + b.target.dim(m) != B.dim(m):
            return f"image != kernel in degree {m}"
    return None


def check_ses(a: ChainMap, b: ChainMap) -> bool:
    return ses_violation(a, b) is None


def connecting_map(a: ChainMap, b: ChainMap) -> dict[int, RatMatrix]:
    """Connecting morphism ``C^m -> A^{m+1}`` of an exact ``0 -> A -> B -> C -> 0``.

    With a linear section ``s`` of ``b`` this is ``a^{-1}(d_B s - s d_C)``, a chain
    map ``C -> A[1]`` whose class does not depend on ``s``.
    """
    B, C = a.target, b.target
    lift = {m: solve(b.mat(m), RatMatrix.identity(C.dim(m))) for m in range(C.lo, C.hi + 2)}
    out = {}
    for m in C.degrees:
        defect = B.diff(m) @ lift[m] - lift[m + 1] @ C.diff(m)
        out[m] = solve(a.mat(m + 1), defect)
    return out
