"""Concrete incarnations: truncated polynomial de Rham complexes and two test families.

* ``smooth_plane``: X = A^2 with coordinates (t, x) over C = A^1, f = t.
* ``nodal_union``: X = {xy = 0} over C = A^1, f = x + y, presented through
  the square X~ = L1 ⊔ L2 -> X, Z = node, Z~ = two preimages.

Coefficients are polynomials of total degree <= D.  The exterior derivative
lowers degree, so every truncation is an honest subcomplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Callable, Mapping, Sequence

from .complexes import (
    ChainMap,
    CochainComplex,
    cohomology_dims,
    cone,
    shift,
    twist,
)
from .dubois import CheckReport, DuBoisTower, WedgeOperator, graded_quotient_data
from .filtered import FilteredComplex, bete_filtration, quotient_complex
from .linalg import RatMatrix, hstack, kernel_basis

Monomial = tuple[int, ...]


class ModelError(ValueError):
    pass


def monomials(num_vars: int, D: int) -> list[Monomial]:
    """Exponent vectors of total degree <= D, by total degree then reverse-lex."""
    exps = (e for e in product(range(D + 1), repeat=num_vars) if sum(e) <= D)
    return sorted(exps, key=lambda e: (sum(e), tuple(-x for x in e)))


def de_rham_basis(num_vars: int, D: int) -> dict[int, list[tuple[Monomial, tuple[int, ...]]]]:
    """Degree k -> list of (exponent vector, sorted variable subset of size k)."""
    mons = monomials(num_vars, D)
    return {
        k: [(mono, S) for S in combinations(range(num_vars), k) for mono in mons]
        for k in range(num_vars + 1)
    }


def monomial_label(mono: Monomial, names: Sequence[str]) -> str:
    parts = []
    for name, e in zip(names, mono):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) or "1"


def form_label(mono: Monomial, S: tuple[int, ...], names: Sequence[str]) -> str:
    coeff = monomial_label(mono, names)
    if not S:
        return coeff
    return f"{coeff} " + "^".join(f"d{names[i]}" for i in S)


def _default_names(num_vars: int) -> list[str]:
    base = ["x", "y", "z", "w"]
    return base[:num_vars] if num_vars <= len(base) else [f"x{i}" for i in range(num_vars)]


def _exterior_derivative(num_vars: int, D: int) -> dict[int, RatMatrix]:
    basis = de_rham_basis(num_vars, D)
    index = {k: {b: i for i, b in enumerate(bs)} for k, bs in basis.items()}
    d = {}
    for k in range(num_vars):
        cols = []
        for mono, S in basis[k]:
            col = [Fraction(0)] * len(basis[k + 1])
            for i in range(num_vars):
                if i in S or mono[i] == 0:
                    continue
                lowered = mono[:i] + (mono[i] - 1,) + mono[i + 1:]
                T = tuple(sorted(S + (i,)))
                sign = -1 if sum(1 for j in S if j < i) % 2 else 1
                col[index[k + 1][(lowered, T)]] += sign * mono[i]
            cols.append(col)
        d[k] = RatMatrix.from_columns(cols, len(basis[k + 1]))
    return d


def truncated_de_rham(num_vars: int, D: int) -> CochainComplex:
    """Polynomial forms on A^num_vars with coefficients of degree <= D."""
    if num_vars < 1 or D < 1:
        raise ModelError("truncated_de_rham needs num_vars >= 1 and D >= 1")
    basis = de_rham_basis(num_vars, D)
    dims = {k: len(b) for k, b in basis.items()}
    return CochainComplex.build(dims, _exterior_derivative(num_vars, D))


def de_rham_labels(num_vars: int, D: int, names: Sequence[str] | None = None) -> dict[int, list[str]]:
    names = names or _default_names(num_vars)
    return {k: [form_label(mono, S, names) for mono, S in bs]
            for k, bs in de_rham_basis(num_vars, D).items()}


# ---------------------------------------------------------------------------


@dataclass
class ModelBundle:
    """A filtered complex with its wedge operator and reference data.

    ``comparison_factory`` produces comparison chain maps
    ``Gr_E^p[p] -> reference_relative[p]`` once a tower has been built on ``F``;
    it is ``None`` when the model has no explicit comparison.
    """

    name: str
    D: int
    F: FilteredComplex
    W: WedgeOperator
    reference_relative: dict[int, CochainComplex]
    labels: dict[int, list[str]]
    comparison_factory: Callable[[DuBoisTower], dict[int, ChainMap]] | None = None
    relative_de_rham: CochainComplex | None = None
    extras: dict = field(default_factory=dict)

    def comparison_maps(self, t: DuBoisTower) -> dict[int, ChainMap]:
        return self.comparison_factory(t) if self.comparison_factory else {}

    def reference(self, p_min: int) -> dict[int, CochainComplex]:
        """References for every p down to ``p_min``, extending downward if needed."""
        ref = dict(self.reference_relative)
        if not ref:
            return ref
        lowest = min(ref)
        for p in range(lowest - 1, p_min - 1, -1):
            ref[p] = shift(ref[p + 1], -1)
        return ref

    def label(self, m: int, i: int) -> str:
        return self.labels[m][i]

    def index(self, m: int, label: str) -> int:
        return self.labels[m].index(label)


# smooth plane ----------------------------------------------------------------

SMOOTH_NAMES = ("t", "x")


def relative_de_rham_plane(D: int) -> CochainComplex:
    """O -> O dx over A^2, d = ∂/∂x, coefficients in (t, x) of degree <= D."""
    mons = monomials(2, D)
    idx = {m: i for i, m in enumerate(mons)}
    cols = []
    for a, b in mons:
        col = [0] * len(mons)
        if b:
            col[idx[(a, b - 1)]] = b
        cols.append(col)
    return CochainComplex.build({0: len(mons), 1: len(mons)},
                                {0: RatMatrix.from_columns(cols, len(mons))})


def _wedge_dt_plane(D: int) -> dict[int, RatMatrix]:
    """α ↦ α ∧ dt on polynomial forms in (t, x); dt is variable 0."""
    basis = de_rham_basis(2, D)
    index = {k: {b: i for i, b in enumerate(bs)} for k, bs in basis.items()}
    mats = {}
    for k in range(2):
        cols = []
        for mono, S in basis[k]:
            col = [0] * len(basis[k + 1])
            if 0 not in S:
                # α ∧ dt = (-1)^{|S|} dt ∧ α
                col[index[k + 1][(mono, (0,) + S)]] = -1 if len(S) % 2 else 1
            cols.append(col)
        mats[k] = RatMatrix.from_columns(cols, len(basis[k + 1]))
    return mats


def _smooth_comparison(D: int, refs: Mapping[int, CochainComplex]):
    """Contraction with ∂/∂t on the leading slot of E^p in degree p."""
    basis = de_rham_basis(2, D)
    mons = monomials(2, D)

    def contraction(p: int) -> RatMatrix:
        # Ω^{p+1}_X -> Ω^p_{X/C}: g dt ↦ g (p = 0), g dt∧dx ↦ g dx (p = 1)
        src = basis[p + 1]
        rows = len(mons)
        cols = []
        for mono, S in src:
            col = [0] * rows
            if S and S[0] == 0:
                col[mons.index(mono)] = 1
            cols.append(col)
        return RatMatrix.from_columns(cols, rows)

    def factory(t: DuBoisTower) -> dict[int, ChainMap]:
        out = {}
        for p in range(t.p_min, t.n):
            qd = graded_quotient_data(t, p)
            gr = shift(qd.complex, p)
            ref = refs.get(p, CochainComplex.zero(-1))
            if ref.is_zero():
                out[p] = ChainMap.zero(gr, ref)
                continue
            Ep = t.E[p]
            lead = t.F_complex(p + 1).dim(p + 1)
            psi = hstack([contraction(p), RatMatrix.zeros(ref.dim(0), Ep.dim(p) - lead)])
            out[p] = ChainMap.build(gr, ref, {0: psi @ qd.section[p]} if gr.dim(0) else {})
        return out

    return factory


def build_smooth_plane_family(D: int) -> ModelBundle:
    if D < 2:
        raise ModelError("the smooth plane family needs D >= 2")
    X = truncated_de_rham(2, D)
    F = bete_filtration(X)
    W = WedgeOperator(F, _wedge_dt_plane(D))
    rel = relative_de_rham_plane(D)
    N = len(monomials(2, D))
    refs = {
        1: CochainComplex.build({0: N}, twist_weight=-1),   # Ω^1_{X/C} = O dx
        0: CochainComplex.build({0: N}, twist_weight=-1),   # Ω^0_{X/C} = O
        -1: CochainComplex.zero(-1),
    }
    return ModelBundle(
        name="smooth_plane",
        D=D,
        F=F,
        W=W,
        reference_relative=refs,
        labels=de_rham_labels(2, D, SMOOTH_NAMES),
        comparison_factory=_smooth_comparison(D, refs),
        relative_de_rham=rel,
    )


# nodal union -----------------------------------------------------------------


def _nodal_layout(D: int) -> dict:
    k = D + 1
    return {
        "k": k,
        "deg0": ["u^%d" % i for i in range(k)] + ["v^%d" % i for i in range(k)] + ["1@Z"],
        "deg1": (["u^%d du" % i for i in range(k)] + ["v^%d dv" % i for i in range(k)]
                 + ["1@Z~1", "1@Z~2"]),
    }


def _line_derivative(k: int) -> list[list[int]]:
    """∂ on polynomials of degree < k, coefficients in the basis 1, s, s^2, ..."""
    rows = [[0] * k for _ in range(k)]
    for i in range(1, k):
        rows[i - 1][i] = i
    return rows


def nodal_square_complex(D: int) -> CochainComplex:
    """Total complex of [Ω_{X~} ⊕ Ω_Z -> Ω_{Z~}] with the Z~ column shifted by one."""
    k = D + 1
    n0, n1 = 2 * k + 1, 2 * k + 2
    d = [[0] * n0 for _ in range(n1)]
    der = _line_derivative(k)
    for i in range(k):
        for j in range(k):
            d[i][j] = der[i][j]
            d[k + i][k + j] = der[i][j]
    # restriction differences: g1(0) - c and g2(0) - c
    d[2 * k][0], d[2 * k][2 * k] = 1, -1
    d[2 * k + 1][k], d[2 * k + 1][2 * k] = 1, -1
    return CochainComplex.build({0: n0, 1: n1}, {0: RatMatrix.from_rows(d, n0)})


def _nodal_wedge(D: int) -> dict[int, RatMatrix]:
    k = D + 1
    n0, n1 = 2 * k + 1, 2 * k + 2
    w = [[0] * n0 for _ in range(n1)]
    for i in range(2 * k):
        w[i][i] = 1  # g du on L1, g dv on L2; nothing on Z, Z~
    return {0: RatMatrix.from_rows(w, n0)}


def _nodal_references(D: int) -> dict[int, CochainComplex]:
    """Stand-ins for Ω^p_{X/C} ⊗ L^{-1} assembled stratum by stratum."""
    k = D + 1
    omega1_X = CochainComplex.build({0: 2 * k}, twist_weight=-1)
    # Ω^0_X: functions on X~ and Z mapping to functions on Z~ (degree 0 -> 1)
    full = nodal_square_complex(D)
    rows0 = list(range(2 * k, 2 * k + 2))
    omega0_X = CochainComplex.build({0: 2 * k + 1, 1: 2},
                                    {0: full.diff(0).submatrix(rows0, range(2 * k + 1))})
    target = CochainComplex.build({0: 2 * k})
    wedge0 = ChainMap.build(omega0_X, target, {
        0: hstack([RatMatrix.identity(2 * k), RatMatrix.zeros(2 * k, 1)])
    })
    C, _, _ = cone(wedge0)
    # the triangle Ω^{-1}_{X/C} ⊗ L -> Ω^0_X -> Ω^0_{X/C} -> +1
    return {0: omega1_X, -1: twist(shift(C, -1), -1)}


def build_nodal_union_family(D: int) -> ModelBundle:
    if D < 2:
        raise ModelError("the nodal union family needs D >= 2")
    lay = _nodal_layout(D)
    k = lay["k"]
    A = nodal_square_complex(D)
    n1 = A.dim(1)
    f1 = RatMatrix.from_columns([[1 if r == c else 0 for r in range(n1)] for c in range(2 * k)], n1)
    levels = {
        0: {0: RatMatrix.identity(A.dim(0)), 1: RatMatrix.identity(n1)},
        1: {0: RatMatrix.zeros(A.dim(0), 0), 1: f1},
        2: {},
    }
    F = FilteredComplex(A, levels, 1)
    W = WedgeOperator(F, _nodal_wedge(D))
    refs = _nodal_references(D)

    def factory(t: DuBoisTower) -> dict[int, ChainMap]:
        # Gr_E^0 = F^1[1] ⊗ L^{-1} sits on the X~ 1-forms; compare by identity
        if t.n != 1 or t.p_min > 0:
            return {}
        qd = graded_quotient_data(t, 0)
        gr = qd.complex
        return {0: ChainMap.build(gr, refs[0], {0: qd.section[0]} if gr.dim(0) else {})}

    return ModelBundle(
        name="nodal_union",
        D=D,
        F=F,
        W=W,
        reference_relative=refs,
        labels={0: lay["deg0"], 1: lay["deg1"]},
        comparison_factory=factory,
        extras={"normalization": lambda: normalization_morphism(D)},
    )


def normalization_bundle(D: int) -> ModelBundle:
    """Y = X~, the two disjoint lines with their bete filtration."""
    k = D + 1
    der = _line_derivative(k)
    d = [[0] * (2 * k) for _ in range(2 * k)]
    for i in range(k):
        for j in range(k):
            d[i][j] = der[i][j]
            d[k + i][k + j] = der[i][j]
    Y = CochainComplex.build({0: 2 * k, 1: 2 * k}, {0: RatMatrix.from_rows(d, 2 * k)})
    F = bete_filtration(Y)
    W = WedgeOperator(F, {0: RatMatrix.identity(2 * k)})
    lay = _nodal_layout(D)
    return ModelBundle(
        name="normalization",
        D=D,
        F=F,
        W=W,
        reference_relative={0: CochainComplex.build({0: 2 * k}, twist_weight=-1)},
        labels={0: lay["deg0"][:2 * k], 1: lay["deg1"][:2 * k]},
    )


def normalization_morphism(D: int) -> tuple[ModelBundle, ModelBundle, ChainMap]:
    """(X bundle, X~ bundle, γ: F_X^0 -> F_{X~}^0) where γ pulls forms back to X~."""
    X = build_nodal_union_family(D)
    Y = normalization_bundle(D)
    k = D + 1
    keep = RatMatrix.from_rows([[1 if c == r else 0 for c in range(2 * k + 1)] for r in range(2 * k)])
    keep1 = RatMatrix.from_rows([[1 if c == r else 0 for c in range(2 * k + 2)] for r in range(2 * k)])
    gamma = ChainMap.build(X.F.ambient, Y.F.ambient, {0: keep, 1: keep1})
    return X, Y, gamma


# fiber restriction ------------------------------------------------------------


def specialize_t(D: int, t0) -> ChainMap:
    """Substitute t = t0 in the relative complex, landing in the fiber's de Rham complex."""
    t0 = Fraction(t0)
    mons = monomials(2, D)
    fiber = truncated_de_rham(1, D)
    fmons = monomials(1, D)
    fidx = {m[0]: i for i, m in enumerate(fmons)}
    cols = []
    for a, b in mons:
        col = [Fraction(0)] * len(fmons)
        col[fidx[b]] = t0 ** a
        cols.append(col)
    S = RatMatrix.from_columns(cols, len(fmons))
    return ChainMap.build(relative_de_rham_plane(D), fiber, {0: S, 1: S})


def fiber_restriction_smooth_check(bundle: ModelBundle, t0) -> CheckReport:
    if bundle.name != "smooth_plane" or bundle.relative_de_rham is None:
        raise ModelError("fiber restriction is only defined for the smooth plane family")
    rep = CheckReport("fiber_restriction")
    D = bundle.D
    subst = specialize_t(D, t0)
    rel = bundle.relative_de_rham
    kernel = {m: kernel_basis(subst.mat(m)) for m in rel.degrees}
    fiber_cx = quotient_complex(rel, kernel).complex
    expected = truncated_de_rham(1, D)
    dims_ok = fiber_cx.dims_map() == expected.dims_map()
    h_ok = cohomology_dims(fiber_cx) == cohomology_dims(expected)
    detail = "" if dims_ok and h_ok else (
        f"dims {fiber_cx.dims_map()} vs {expected.dims_map()}, "
        f"H {cohomology_dims(fiber_cx)} vs {cohomology_dims(expected)}")
    rep.add(0, dims_ok and h_ok, "exact", detail or f"t0={Fraction(t0)}")
    return rep


def expected_dims_smooth(D: int) -> dict[int, int]:
    N = comb(D + 2, 2)
    return {0: N, 1: 2 * N, 2: N}
