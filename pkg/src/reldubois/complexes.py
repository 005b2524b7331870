"""Bounded cochain complexes of finite-dimensional rational vector spaces.

A complex is stored by its nonzero degrees ``lo..hi``, the dimension in each
degree and the differentials ``d[m]: C^m -> C^{m+1}``.  Each complex also
carries a ``twist_weight``: the formal power of the pulled-back canonical
bundle it has been tensored with.  In every model that bundle is trivial, so
the weight changes no matrices; it only records which side of a twist an
object lives on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .linalg import (
    LinAlgError,
    RatMatrix,
    block,
    block_diag,
    hstack,
    kernel_basis,
    rank,
    vstack,
)


class ComplexError(ValueError):
    pass


class WeightMismatch(ComplexError):
    pass


@dataclass(frozen=True, eq=True)
class CochainComplex:
    lo: int
    hi: int
    dims: tuple[int, ...]
    d: tuple[RatMatrix, ...] = field(repr=False)
    twist_weight: int = 0

    # ``dims[i]`` is the dimension in degree lo+i; ``d[i]`` maps degree lo+i to lo+i+1.

    @classmethod
    def build(cls, dims: Mapping[int, int], d: Mapping[int, RatMatrix] | None = None,
              twist_weight: int = 0) -> "CochainComplex":
        """Assemble a complex from sparse degree maps, trimming zero ends."""
        d = dict(d or {})
        nz = [m for m, k in dims.items() if k]
        if not nz:
            return cls.zero(twist_weight)
        lo, hi = min(nz), max(nz)
        dl = tuple(dims.get(m, 0) for m in range(lo, hi + 1))
        mats = []
        for m in range(lo, hi + 1):
            rows = dims.get(m + 1, 0) if m + 1 <= hi else 0
            cols = dims.get(m, 0)
            mat = d.get(m)
            if mat is None:
                mat = RatMatrix.zeros(rows, cols)
            elif mat.shape != (rows, cols):
                raise ComplexError(
                    f"differential in degree {m} has shape {mat.shape}, expected {(rows, cols)}"
                )
            mats.append(mat)
        for m, mat in d.items():
            if (m < lo - 1 or m > hi) and not mat.is_zero() and mat.rows and mat.cols:
                raise ComplexError(f"nonzero differential outside support in degree {m}")
        return cls(lo, hi, dl, tuple(mats), twist_weight)

    @classmethod
    def zero(cls, twist_weight: int = 0) -> "CochainComplex":
        return cls(0, -1, (), (), twist_weight)

    def dim(self, m: int) -> int:
        if self.lo <= m <= self.hi:
            return self.dims[m - self.lo]
        return 0

    def diff(self, m: int) -> RatMatrix:
        if self.lo <= m <= self.hi:
            return self.d[m - self.lo]
        return RatMatrix.zeros(self.dim(m + 1), self.dim(m))

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def is_zero(self) -> bool:
        return not any(self.dims)

    def dims_map(self) -> dict[int, int]:
        return {m: self.dim(m) for m in self.degrees}

    def euler_characteristic(self) -> int:
        return sum((-1) ** m * self.dim(m) for m in self.degrees)

    def __str__(self) -> str:
        body = ", ".join(f"{m}:{self.dim(m)}" for m in self.degrees)
        return f"Complex[{body}; w={self.twist_weight}]"


def validate_complex(c: CochainComplex) -> bool:
    """True iff every differential has the right shape and d∘d = 0."""
    for m in range(c.lo - 1, c.hi + 1):
        dm = c.diff(m)
        if dm.shape != (c.dim(m + 1), c.dim(m)):
            raise ComplexError(f"differential in degree {m} has shape {dm.shape}")
    for m in range(c.lo, c.hi):
        if not (c.diff(m + 1) @ c.diff(m)).is_zero():
            return False
    return True


def complex_violation(c: CochainComplex) -> str | None:
    for m in range(c.lo, c.hi):
        if not (c.diff(m + 1) @ c.diff(m)).is_zero():
            return f"d∘d != 0 in degree {m}"
    return None


def shift(c: CochainComplex, k: int) -> CochainComplex:
    """``c[k]``: degree m holds c^{m+k}, differential multiplied by (-1)^k."""
    if c.is_zero():
        return c
    sign = -1 if k % 2 else 1
    d = c.d if sign == 1 else tuple(-x for x in c.d)
    return CochainComplex(c.lo - k, c.hi - k, c.dims, d, c.twist_weight)


def twist(c: CochainComplex, k: int) -> CochainComplex:
    if k == 0:
        return c
    return CochainComplex(c.lo, c.hi, c.dims, c.d, c.twist_weight + k)


def direct_sum(a: CochainComplex, b: CochainComplex) -> CochainComplex:
    if a.twist_weight != b.twist_weight:
        raise WeightMismatch(f"weights {a.twist_weight} and {b.twist_weight} differ")
    lo = min(a.lo, b.lo) if not a.is_zero() and not b.is_zero() else (a.lo if not a.is_zero() else b.lo)
    hi = max(a.hi, b.hi)
    dims = {m: a.dim(m) + b.dim(m) for m in range(lo, hi + 1)}
    d = {m: block_diag(a.diff(m), b.diff(m)) for m in range(lo, hi + 1)}
    return CochainComplex.build(dims, d, a.twist_weight)


def cohomology_dims(c: CochainComplex) -> dict[int, int]:
    """dim ker d^m - rank d^{m-1} in each degree of the support."""
    if not validate_complex(c):
        raise ComplexError("not a complex: d∘d != 0")
    out = {}
    for m in c.degrees:
        out[m] = c.dim(m) - rank(c.diff(m)) - rank(c.diff(m - 1))
    return out


def nonzero_cohomology(c: CochainComplex) -> dict[int, int]:
    return {m: h for m, h in cohomology_dims(c).items() if h}


@dataclass(frozen=True)
class ChainMap:
    """A map of graded spaces ``source^m -> target^{m+degree}``.

    The chain-map law is ``target.d ∘ f = (-1)^degree · f ∘ source.d``.
    """

    source: CochainComplex
    target: CochainComplex
    mats: tuple[tuple[int, RatMatrix], ...] = field(repr=False)
    degree: int = 0

    @classmethod
    def build(cls, source: CochainComplex, target: CochainComplex,
              mats: Mapping[int, RatMatrix], degree: int = 0) -> "ChainMap":
        items = []
        for m, mat in sorted(mats.items()):
            want = (target.dim(m + degree), source.dim(m))
            if mat.shape != want:
                raise ComplexError(f"map in degree {m} has shape {mat.shape}, expected {want}")
            if want[0] and want[1]:
                items.append((m, mat))
        return cls(source, target, tuple(items), degree)

    @classmethod
    def zero(cls, source: CochainComplex, target: CochainComplex, degree: int = 0) -> "ChainMap":
        return cls(source, target, (), degree)

    @classmethod
    def identity(cls, c: CochainComplex) -> "ChainMap":
        return cls.build(c, c, {m: RatMatrix.identity(c.dim(m)) for m in c.degrees})

    def mat(self, m: int) -> RatMatrix:
        for k, mat in self.mats:
            if k == m:
                return mat
        return RatMatrix.zeros(self.target.dim(m + self.degree), self.source.dim(m))

    def mats_map(self) -> dict[int, RatMatrix]:
        return {m: self.mat(m) for m in self.source.degrees}

    @property
    def weight_shift(self) -> int:
        return self.target.twist_weight - self.source.twist_weight

    def relabel(self, source: CochainComplex | None = None,
                target: CochainComplex | None = None) -> "ChainMap":
        """Same matrices, different (shape-identical) endpoints; used for twists."""
        s = source if source is not None else self.source
        t = target if target is not None else self.target
        if s.dims != self.source.dims or s.lo != self.source.lo and not s.is_zero():
            raise ComplexError("relabel: source shape differs")
        if t.dims != self.target.dims or t.lo != self.target.lo and not t.is_zero():
            raise ComplexError("relabel: target shape differs")
        return ChainMap(s, t, self.mats, self.degree)

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        return compose(self, other)


def _map_degrees(f: ChainMap) -> range:
    lo = min(f.source.lo, f.target.lo - f.degree) - 1
    hi = max(f.source.hi, f.target.hi - f.degree) + 1
    return range(lo, hi + 1)


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    """``g ∘ f``; the target of ``f`` must be the source of ``g``, weights included."""
    if f.target != g.source:
        if f.target.twist_weight != g.source.twist_weight:
            raise WeightMismatch(
                f"cannot compose: weight {f.target.twist_weight} vs {g.source.twist_weight}"
            )
        raise ComplexError("cannot compose: intermediate complexes differ")
    mats = {m: g.mat(m + f.degree) @ f.mat(m) for m in f.source.degrees}
    return ChainMap.build(f.source, g.target, mats, f.degree + g.degree)


def add_maps(f: ChainMap, g: ChainMap) -> ChainMap:
    if f.source != g.source or f.target != g.target or f.degree != g.degree:
        raise ComplexError("cannot add maps with different endpoints")
    return ChainMap.build(f.source, f.target, {m: f.mat(m) + g.mat(m) for m in f.source.degrees},
                          f.degree)


def maps_equal(f: ChainMap, g: ChainMap) -> bool:
    if f.degree != g.degree:
        return False
    if f.source.dims_map() != g.source.dims_map() or f.target.dims_map() != g.target.dims_map():
        return False
    return all(f.mat(m) == g.mat(m) for m in f.source.degrees)


def is_chain_map(f: ChainMap) -> bool:
    k = f.degree
    sign = -1 if k % 2 else 1
    for m in _map_degrees(f):
        lhs = f.target.diff(m + k) @ f.mat(m)
        rhs = f.mat(m + 1) @ f.source.diff(m)
        if lhs.shape != rhs.shape:
            raise ComplexError(f"shape mismatch in degree {m}: {lhs.shape} vs {rhs.shape}")
        if lhs != (rhs if sign == 1 else -rhs):
            return False
    return True


def shift_map(f: ChainMap, k: int) -> ChainMap:
    """``f[k]`` between ``source[k]`` and ``target[k]``; matrices are unchanged."""
    mats = {m - k: mat for m, mat in f.mats}
    return ChainMap.build(shift(f.source, k), shift(f.target, k), mats, f.degree)


def twist_map(f: ChainMap, k: int) -> ChainMap:
    return ChainMap(twist(f.source, k), twist(f.target, k), f.mats, f.degree)


def induced_cohomology_rank(f: ChainMap) -> dict[int, int]:
    """Rank of ``H^m(f)`` for each degree of the source (degree-0 maps)."""
    if f.degree != 0:
        raise ComplexError("induced_cohomology_rank needs a degree-0 map")
    out = {}
    for m in f.source.degrees:
        Z = kernel_basis(f.source.diff(m))
        Bt = f.target.diff(m - 1)
        fz = f.mat(m) @ Z
        out[m] = rank(hstack([Bt, fz])) - rank(Bt)
    return out


def quasi_iso(f: ChainMap) -> bool:
    """True iff ``f`` induces isomorphisms on cohomology in every degree."""
    if f.degree != 0:
        raise ComplexError("quasi_iso needs a degree-0 map")
    if not is_chain_map(f):
        raise ComplexError("not a chain map")
    hs = cohomology_dims(f.source)
    ht = cohomology_dims(f.target)
    ranks = induced_cohomology_rank(f)
    for m in set(hs) | set(ht):
        h_s, h_t = hs.get(m, 0), ht.get(m, 0)
        if h_s != h_t or ranks.get(m, 0) != h_s:
            return False
    return True


def cone(f: ChainMap) -> tuple[CochainComplex, ChainMap, ChainMap]:
    """Mapping cone of a degree-0 map ``f: A -> B``.

    cone^m = A^{m+1} ⊕ B^m with differential [[-d_A, 0], [f, d_B]].  Returns the
    cone, the inclusion ``B -> cone`` and the projection ``cone -> A[1]``.
    """
    if f.degree != 0:
        raise ComplexError("cone needs a degree-0 map")
    A, B = f.source, f.target
    if A.twist_weight != B.twist_weight:
        raise WeightMismatch(f"cone: weights {A.twist_weight} and {B.twist_weight} differ")
    A1 = shift(A, 1)
    degs = [m for m in range(min(A1.lo, B.lo), max(A1.hi, B.hi) + 1)] if not (
        A.is_zero() and B.is_zero()) else []
    dims = {m: A.dim(m + 1) + B.dim(m) for m in degs}
    d = {}
    for m in degs:
        d[m] = block([
            [-A.diff(m + 1), RatMatrix.zeros(A.dim(m + 2), B.dim(m))],
            [f.mat(m + 1), B.diff(m)],
        ])
    C = CochainComplex.build(dims, d, B.twist_weight)
    inj = {m: vstack([RatMatrix.zeros(A.dim(m + 1), B.dim(m)), RatMatrix.identity(B.dim(m))])
           for m in degs}
    proj = {m: hstack([RatMatrix.identity(A.dim(m + 1)), RatMatrix.zeros(A.dim(m + 1), B.dim(m))])
            for m in degs}
    return C, ChainMap.build(B, C, inj), ChainMap.build(C, A1, proj)


__all__ = [
    "ChainMap",
    "CochainComplex",
    "ComplexError",
    "LinAlgError",
    "WeightMismatch",
    "add_maps",
    "cohomology_dims",
    "complex_violation",
    "compose",
    "cone",
    "direct_sum",
    "induced_cohomology_rank",
    "is_chain_map",
    "maps_equal",
    "nonzero_cohomology",
    "quasi_iso",
    "shift",
    "shift_map",
    "twist",
    "twist_map",
    "validate_complex",
]
