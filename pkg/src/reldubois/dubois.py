"""The relative Du Bois tower.

Given a filtered complex ``F`` (an incarnation of the filtered de Rham-Du Bois
complex of X) and the operator ``W`` "wedge with f*(dt)", :func:`build_tower`
produces the descending family

    E^p = 0                               for p >= n,
    E^p = cone(w_{p+1}) ⊗ L^{-1}          for p < n,

with ``w_p = (∧_p, 0): F^p -> E^p`` and the inclusions ``δ_p: E^{p+1} -> E^p``
obtained from cone functoriality.  Here ``L`` is the pulled-back canonical
bundle of the base curve; it is trivial in every model and only tracked as a
twist weight.

The verifiers below check the statements about this tower as exact matrix
identities and return :class:`CheckReport` values instead of raising.

Layout: ``(E^p)^m = (F^{p+1})^{m+1} ⊕ (E^{p+1})^m``, with the F-block first.
Unrolled, ``E^p`` has one slot ``F^q[1]`` for each ``q = p+1 .. n``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

from .complexes import (
    ChainMap,
    CochainComplex,
    ComplexError,
    cohomology_dims,
    compose,
    cone,
    induced_cohomology_rank,
    is_chain_map,
    maps_equal,
    quasi_iso,
    shift,
    shift_map,
    twist,
)
from .filtered import (
    FilteredComplex,
    FiltrationError,
    Quotient,
    SubComplex,
    connecting_map,
    induced_on_quotients,
    quotient_complex,
    restrict_to_basis,
    ses_violation,
    sub_complex_data,
)
from .linalg import LinAlgError, RatMatrix, block_diag, rank, subspace_contains, vstack

log = logging.getLogger(__name__)

# Weight carried by every E^p: it is a cone twisted by L^{-1}.
E_WEIGHT = -1


class TowerError(ValueError):
    pass


def koszul_sign(m: int) -> int:
    """Sign turning the geometric wedge (which commutes with d) into a map C -> C[1]."""
    return -1 if m % 2 else 1


@dataclass(frozen=True)
class WedgeOperator:
    """``mats[m]: ambient^m -> ambient^{m+1}``, the geometric wedge with f*(dt)."""

    carrier: FilteredComplex
    mats: Mapping[int, RatMatrix] = field(repr=False)

    def mat(self, m: int) -> RatMatrix:
        A = self.carrier.ambient
        mat = self.mats.get(m)
        return mat if mat is not None else RatMatrix.zeros(A.dim(m + 1), A.dim(m))

    @property
    def sign_normalized(self) -> ChainMap:
        """``W̃ = (-1)^m W`` as a chain map ``ambient -> ambient[1] ⊗ L^{-1}``."""
        A = self.carrier.ambient
        target = twist(shift(A, 1), -1)
        return ChainMap.build(A, target, {m: self.mat(m).scale(koszul_sign(m)) for m in A.degrees})

    @classmethod
    def zero(cls, carrier: FilteredComplex) -> "WedgeOperator":
        return cls(carrier, {})


def wedge_violation(W: WedgeOperator) -> str | None:
    F = W.carrier
    A = F.ambient
    for m in A.degrees:
        if W.mat(m).shape != (A.dim(m + 1), A.dim(m)):
            return f"wedge in degree {m} has shape {W.mat(m).shape}"
    for m in A.degrees:
        if not (W.mat(m + 1) @ W.mat(m)).is_zero():
            return f"wedge does not square to zero in degree {m}"
    for m in A.degrees:
        if A.diff(m + 1) @ W.mat(m) != W.mat(m + 1) @ A.diff(m):
            return f"wedge does not commute with d in degree {m}"
    if not is_chain_map(W.sign_normalized):
        return "sign-normalised wedge is not a chain map into ambient[1]"
    for p in range(0, F.n + 1):
        for m in A.degrees:
            if not subspace_contains(F.span(p + 1, m + 1), W.mat(m) @ F.span(p, m)):
                return f"wedge does not map F^{p} into F^{p + 1} in degree {m}"
    return None


def validate_wedge(W: WedgeOperator) -> bool:
    return wedge_violation(W) is None


# ---------------------------------------------------------------------------


@dataclass
class DuBoisTower:
    F: FilteredComplex
    W: WedgeOperator
    p_min: int
    n: int
    Fsub: dict[int, SubComplex] = field(repr=False)
    incl: dict[int, ChainMap] = field(repr=False)      # F^{q+1} -> F^q
    wedge: dict[int, ChainMap] = field(repr=False)     # ∧_q: F^q -> F^{q+1}[1] ⊗ L^{-1}
    E: dict[int, CochainComplex] = field(repr=False)
    E_L: dict[int, CochainComplex] = field(repr=False)  # E^p ⊗ L, the cone itself
    w: dict[int, ChainMap] = field(repr=False)         # w_p: F^p -> E^p
    delta: dict[int, ChainMap] = field(repr=False)     # δ_p: E^{p+1} -> E^p
    ses_witnesses: dict[int, tuple[ChainMap, ChainMap]] = field(repr=False)

    @property
    def p_range(self) -> range:
        return range(self.p_min, self.n + 1)

    def F_complex(self, q: int) -> CochainComplex:
        return self.Fsub[self._fq(q)].complex

    def _fq(self, q: int) -> int:
        return min(max(q, self.p_min), self.n + 1)

    def w_d(self, p: int) -> ChainMap:
        """``w'_p: E^p ⊗ L -> F^{p+1}[1]``."""
        return self.ses_witnesses[p][1]

    def w_dd(self, p: int) -> ChainMap:
        """``w''_p: F^p ⊗ L -> E^p ⊗ L``: the same matrices as ``w_p``, twisted by L."""
        wp = self.w[p]
        return ChainMap(twist(wp.source, 1), self.E_L[p], wp.mats, 0)

    def wedge_twisted(self, p: int) -> ChainMap:
        """``∧_p`` viewed as ``F^p ⊗ L -> F^{p+1}[1]``."""
        wp = self.wedge[p]
        return ChainMap(twist(wp.source, 1), twist(wp.target, 1), wp.mats, 0)


def _restricted_wedge(W: WedgeOperator, src: SubComplex, dst: SubComplex) -> ChainMap:
    target = twist(shift(dst.complex, 1), -1)
    mats = {}
    for m in src.complex.degrees:
        dst_basis = dst.basis.get(m + 1, RatMatrix.zeros(W.mat(m).rows, 0))
        coords = restrict_to_basis(W.mat(m), src.basis[m], dst_basis)
        mats[m] = coords.scale(koszul_sign(m))
    return ChainMap.build(src.complex, target, mats)


def _sub(F: FilteredComplex, q: int) -> SubComplex:
    return sub_complex_data(F, min(max(q, 0), F.n + 1))


def build_tower(F: FilteredComplex, W: WedgeOperator, p_min: int = -1) -> DuBoisTower:
    """Construct ``E^p`` for ``p_min <= p`` by descending recursion."""
    v = wedge_violation(W)
    if v is not None:
        raise TowerError(f"invalid wedge: {v}")
    n = F.n
    if p_min > n:
        raise TowerError(f"p_min {p_min} exceeds n = {n}")
    A = F.ambient

    Fsub = {q: _sub(F, q) for q in range(p_min, n + 2)}
    incl, wedge = {}, {}
    for q in range(p_min, n + 1):
        lo, hi = Fsub[q + 1], Fsub[q]
        incl[q] = ChainMap.build(lo.complex, hi.complex, {
            m: restrict_to_basis(RatMatrix.identity(A.dim(m)), lo.basis[m], hi.basis[m])
            for m in A.degrees
        })
        wedge[q] = _restricted_wedge(W, Fsub[q], Fsub[q + 1])

    E: dict[int, CochainComplex] = {}
    E_L: dict[int, CochainComplex] = {}
    w: dict[int, ChainMap] = {}
    delta: dict[int, ChainMap] = {}
    ses: dict[int, tuple[ChainMap, ChainMap]] = {}

    zero_E = CochainComplex.zero(E_WEIGHT)
    E[n + 1] = E[n] = zero_E
    E_L[n] = twist(zero_E, 1)
    w[n] = ChainMap.zero(Fsub[n].complex, zero_E)
    delta[n] = ChainMap.zero(zero_E, zero_E)
    ses[n] = (ChainMap.zero(zero_E, E_L[n]),
              ChainMap.zero(E_L[n], shift(Fsub[n + 1].complex, 1)))

    for p in range(n - 1, p_min - 1, -1):
        Ep1 = E[p + 1]
        # The cone glues F^{p+1} to E^{p+1} ⊗ L; relabelling the target weight
        # is where the trivialisation of L by dt is used.
        w_next = w[p + 1].relabel(target=twist(Ep1, 1))
        C, inj, proj = cone(w_next)
        Ep = twist(C, -1)
        E[p], E_L[p] = Ep, C
        ses[p] = (inj.relabel(source=Ep1), proj)

        Fp = Fsub[p].complex
        w[p] = ChainMap.build(Fp, Ep, {
            m: vstack([wedge[p].mat(m), RatMatrix.zeros(Ep1.dim(m), Fp.dim(m))])
            for m in Fp.degrees if Ep.dim(m)
        })
        if p == n - 1:
            delta[p] = ChainMap.zero(Ep1, Ep)
        else:
            delta[p] = ChainMap.build(Ep1, Ep, {
                m: block_diag(incl[p + 1].mat(m + 1), delta[p + 1].mat(m))
                for m in Ep1.degrees
            })
        log.debug("E^%d: %s", p, Ep)

    return DuBoisTower(F, W, p_min, n, Fsub, incl, wedge, E, E_L, w, delta, ses)


# reports ---------------------------------------------------------------------


@dataclass
class Finding:
    p: int
    passed: bool
    evidence: str = "exact"
    detail: str = ""
    observed: bool = False  # recorded but not asserted

    @property
    def status(self) -> str:
        if self.observed:
            return "observed"
        return "pass" if self.passed else "fail"


@dataclass
class CheckReport:
    name: str
    findings: list[Finding] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.findings if not f.observed)

    def add(self, p: int, passed: bool, evidence: str = "exact", detail: str = "",
            observed: bool = False) -> None:
        self.findings.append(Finding(p, bool(passed), evidence, detail, observed))

    def __str__(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for f in self.findings:
            extra = f" ({f.detail})" if f.detail else ""
            lines.append(f"  p={f.p:>3} {f.status:<8} {f.evidence}{extra}")
        return "\n".join(lines)


def _guarded(report: CheckReport, p: int, fn) -> None:
    """Run one per-p check; exceptions become failed findings."""
    try:
        ok, detail = fn()
    except (ComplexError, FiltrationError, LinAlgError, TowerError) as exc:
        ok, detail = False, f"error: {exc}"
    report.add(p, ok, detail=detail or "")


def _first_failure(checks) -> tuple[bool, str]:
    for ok, msg in checks:
        if not ok:
            return False, msg
    return True, ""


def verify_ses_tower(t: DuBoisTower) -> CheckReport:
    """Each row 0 -> E^{p+1} -> E^p ⊗ L -> F^{p+1}[1] -> 0 is exact, and the
    factorisations w'_p ∘ w''_p = ∧_p, w''_p ∘ ∧'_{p-1} = 0 hold."""
    rep = CheckReport("ses")

    def row(p):
        inc, pro = t.ses_witnesses[p]
        v = ses_violation(inc, pro)
        if v:
            return False, v
        if p < t.n:
            fact = compose(t.w_d(p), t.w_dd(p))
            if not maps_equal(fact, t.wedge_twisted(p)):
                return False, "w'_p ∘ w''_p != ∧_p"
        if p - 1 in t.wedge:
            prev = t.wedge[p - 1]
            for m in prev.source.degrees:
                if not (t.w[p].mat(m + 1) @ prev.mat(m)).is_zero():
                    return False, f"w''_p ∘ ∧'_(p-1) != 0 in degree {m}"
        return True, ""

    for p in t.p_range:
        _guarded(rep, p, lambda p=p: row(p))
    return rep


def verify_subcomplex(t: DuBoisTower) -> CheckReport:
    """δ_p is an injective chain map and the squares between rows p+1 and p commute."""
    rep = CheckReport("subcomplex")

    def one(p):
        d = t.delta[p]
        if not is_chain_map(d):
            return False, "δ_p is not a chain map"
        for m in d.source.degrees:
            if rank(d.mat(m)) != d.source.dim(m):
                return False, f"δ_p not injective in degree {m}"
        if p >= t.n - 1:
            return True, ""
        inc_hi, pro_hi = t.ses_witnesses[p + 1]
        inc_lo, pro_lo = t.ses_witnesses[p]
        d_twisted = ChainMap(t.E_L[p + 1], t.E_L[p], d.mats, 0)
        left = maps_equal(compose(d_twisted, inc_hi), compose(inc_lo, t.delta[p + 1]))
        right = maps_equal(compose(pro_lo, d_twisted),
                           compose(shift_map(t.incl[p + 1], 1), pro_hi))
        return _first_failure([(left, "left square does not commute"),
                               (right, "right square does not commute")])

    for p in range(t.p_min, t.n):
        _guarded(rep, p, lambda p=p: one(p))
    return rep


def graded_quotient_data(t: DuBoisTower, p: int) -> Quotient:
    if not t.p_min <= p <= t.n:
        raise TowerError(f"p={p} outside [{t.p_min}, {t.n}]")
    Ep = t.E[p]
    d = t.delta[p]
    return quotient_complex(Ep, {m: d.mat(m) for m in Ep.degrees})


def graded_quotient(t: DuBoisTower, p: int) -> CochainComplex:
    """``Gr_E^p = E^p / δ_p(E^{p+1})``."""
    return graded_quotient_data(t, p).complex


def nine_lemma_row(t: DuBoisTower, p: int) -> tuple[ChainMap, ChainMap]:
    """0 -> Gr_E^{p+1}[p] -> Gr_E^p[p] ⊗ L -> Gr_F^{p+1}[p+1] -> 0 as induced maps."""
    qa = graded_quotient_data(t, p + 1)
    C = t.E_L[p]
    qb = quotient_complex(C, {m: t.delta[p].mat(m) for m in C.degrees})
    F1 = shift(t.F_complex(p + 1), 1)
    qc = quotient_complex(F1, {m: t.incl[p + 1].mat(m + 1) for m in F1.degrees})
    inc, pro = t.ses_witnesses[p]
    a = induced_on_quotients(inc, qa, qb)
    b = induced_on_quotients(pro, qb, qc)
    return shift_map(a, p), shift_map(b, p)


def check_assoc_graded(t: DuBoisTower, reference: Mapping[int, CochainComplex],
                       comparison_maps: Mapping[int, ChainMap] | None = None) -> CheckReport:
    """Compare ``Gr_E^p[p]`` with reference complexes and check the nine-lemma rows.

    With a comparison map for ``p`` the evidence is ``exact`` (quasi-isomorphism
    by an explicit chain map); otherwise only cohomology dimensions are
    compared and the evidence is ``dims-match``.
    """
    comparison_maps = comparison_maps or {}
    ps = range(t.p_min, t.n)
    missing = [p for p in ps if p not in reference]
    if missing:
        raise TowerError(f"no reference complex for p in {missing}")
    rep = CheckReport("assoc_graded")
    for p in ps:
        try:
            gr = shift(graded_quotient(t, p), p)
            phi = comparison_maps.get(p)
            if phi is not None:
                if phi.source.dims_map() != gr.dims_map():
                    ok, detail = False, "comparison map source is not Gr_E^p[p]"
                else:
                    ok = quasi_iso(phi)
                    detail = "" if ok else "comparison map is not a quasi-isomorphism"
                evidence = "exact"
            else:
                hg = {m: h for m, h in cohomology_dims(gr).items() if h}
                hr = {m: h for m, h in cohomology_dims(reference[p]).items() if h}
                ok = hg == hr
                detail = "" if ok else f"H(Gr)={hg} vs H(ref)={hr}"
                evidence = "dims-match"
            a, b = nine_lemma_row(t, p)
            v = ses_violation(a, b)
            if v:
                ok, detail = False, f"nine-lemma row: {v}"
        except (ComplexError, FiltrationError, LinAlgError) as exc:
            ok, detail, evidence = False, f"error: {exc}", "exact"
        rep.add(p, ok, evidence, detail)
    return rep


def _delta_chain(t: DuBoisTower, lo: int, hi: int) -> ChainMap:
    """Composite inclusion ``E^hi -> E^lo`` for ``lo <= hi``."""
    acc = ChainMap.identity(t.E[hi])
    for q in range(hi - 1, lo - 1, -1):
        acc = compose(t.delta[q], acc)
    return acc


def _incl_chain(t: DuBoisTower, lo: int, hi: int) -> ChainMap:
    """Composite inclusion ``F^hi -> F^lo`` in sub-bases."""
    acc = ChainMap.identity(t.F_complex(hi))
    for q in range(hi - 1, lo - 1, -1):
        acc = compose(t.incl[q], acc)
    return acc


def abs_to_rel_triangles(t: DuBoisTower) -> CheckReport:
    """Rotated rows E^{p-1}[-1] ⊗ L -> F^p -> E^p -> +1 and the single filtered map F -> E.

    Per p: the row at p-1 is exact, its connecting morphism agrees with w_p up
    to a coboundary, and w_p is the restriction of w_0 along the filtrations.
    """
    if t.p_min > -1:
        raise TowerError("abs_to_rel_triangles needs E^{-1}; build with p_min <= -1")
    rep = CheckReport("abs_to_rel")

    def one(p):
        inc, pro = t.ses_witnesses[p - 1]
        v = ses_violation(inc, pro)
        if v:
            return False, f"row {p - 1}: {v}"
        wp = t.w[p]
        if not is_chain_map(wp):
            return False, "w_p is not a chain map"
        conn = connecting_map(inc, pro)
        if any(mat != wp.mat(m + 1) for m, mat in conn.items()):
            diff = ChainMap.build(wp.source, wp.target,
                                  {m + 1: mat - wp.mat(m + 1) for m, mat in conn.items()})
            if not is_chain_map(diff) or any(induced_cohomology_rank(diff).values()):
                return False, "connecting morphism differs from w_p"
        if p >= 0:
            lhs = compose(_delta_chain(t, 0, p), wp)
            rhs = compose(t.w[0], _incl_chain(t, 0, p))
            into = all(subspace_contains(_delta_chain(t, 0, p).mat(m), rhs.mat(m))
                       for m in rhs.source.degrees)
        else:
            lhs = compose(_delta_chain(t, p, 0), t.w[0])
            rhs = compose(wp, _incl_chain(t, p, 0))
            into = True
        return _first_failure([(into, "F^p -> E^0 does not land in E^p"),
                               (maps_equal(lhs, rhs), "w_p is not the restriction of w_0")])

    for p in range(t.p_min + 1, t.n + 1):
        _guarded(rep, p, lambda p=p: one(p))
    return rep


def stationary_check(t: DuBoisTower) -> bool:
    """True iff δ_{-1} and δ_{-2} are injective quasi-isomorphisms."""
    if t.p_min > -2:
        raise TowerError("stationary_check needs p_min <= -2")
    for p in (-1, -2):
        d = t.delta[p]
        if any(rank(d.mat(m)) != d.source.dim(m) for m in d.source.degrees):
            return False
        if not quasi_iso(d):
            return False
    return True


# functoriality -----------------------------------------------------------


def filtered_map_levels(gamma: ChainMap, tX: DuBoisTower, tY: DuBoisTower) -> dict[int, ChainMap]:
    """Restrict an ambient chain map ``F_X^0 -> F_Y^0`` to every filtration level."""
    out = {}
    for q in range(tX.p_min, tX.n + 2):
        sx, sy = tX.Fsub[q], tY.Fsub[q]
        mats = {}
        for m in sx.complex.degrees:
            try:
                mats[m] = restrict_to_basis(gamma.mat(m), sx.basis[m],
                                            sy.basis.get(m, RatMatrix.zeros(gamma.mat(m).rows, 0)))
            except FiltrationError:
                raise TowerError(f"gamma does not map F^{q} into F^{q} in degree {m}") from None
        out[q] = ChainMap.build(sx.complex, sy.complex, mats)
    return out


def induce_tower_morphism(gamma: Mapping[int, ChainMap], tX: DuBoisTower,
                          tY: DuBoisTower) -> dict[int, ChainMap]:
    """α_p: E_X^p -> E_Y^p by descending recursion, α_p = (γ_{p+1}[1], α_{p+1})."""
    if tX.n != tY.n or tX.p_min != tY.p_min:
        raise TowerError("towers must share n and p_min")
    for q in range(tX.p_min, tX.n + 1):
        g = gamma[q]
        if not is_chain_map(g):
            raise TowerError(f"gamma_{q} is not a chain map")
        if not maps_equal(compose(g, tX.incl[q]), compose(tY.incl[q], gamma[q + 1])):
            raise TowerError(f"gamma is not filtered at level {q}")
    n = tX.n
    alpha = {n: ChainMap.zero(tX.E[n], tY.E[n])}
    for p in range(n - 1, tX.p_min - 1, -1):
        src, dst = tX.E[p], tY.E[p]
        alpha[p] = ChainMap.build(src, dst, {
            m: block_diag(gamma[p + 1].mat(m + 1), alpha[p + 1].mat(m)) for m in src.degrees
        })
    return alpha


def verify_functorial_diagram(alpha: Mapping[int, ChainMap], gamma: Mapping[int, ChainMap],
                              tX: DuBoisTower, tY: DuBoisTower) -> CheckReport:
    rep = CheckReport("functorial")

    def one(p):
        a = alpha[p]
        if not is_chain_map(a):
            return False, "α_p is not a chain map"
        beta = ChainMap(tX.E_L[p], tY.E_L[p], a.mats, 0)
        incX, proX = tX.ses_witnesses[p]
        incY, proY = tY.ses_witnesses[p]
        left = maps_equal(compose(beta, incX), compose(incY, alpha[p + 1]))
        right = maps_equal(compose(proY, beta), compose(shift_map(gamma[p + 1], 1), proX))
        square = maps_equal(compose(a, tX.w[p]), compose(tY.w[p], gamma[p]))
        return _first_failure([(left, "left square of the row morphism"),
                               (right, "right square of the row morphism"),
                               (square, "F -> E square with gamma")])

    for p in range(tX.p_min, tX.n):
        _guarded(rep, p, lambda p=p: one(p))
    return rep


def base_case_check(t: DuBoisTower) -> bool:
    """E^{n-1} is literally F^n[1] ⊗ L^{-1}: same dims and differential matrices."""
    if t.n - 1 < t.p_min:
        return True
    expected = twist(shift(t.F_complex(t.n), 1), -1)
    return t.E[t.n - 1] == expected


def zero_wedge_split(t: DuBoisTower) -> bool:
    """With W = 0 every E^p is the block sum F^{p+1}[1] ⊗ L^{-1} ⊕ E^{p+1}."""
    for p in range(t.p_min, t.n):
        Ep, Ep1 = t.E[p], t.E[p + 1]
        F1 = shift(t.F_complex(p + 1), 1)
        for m in Ep.degrees:
            if Ep.diff(m) != block_diag(F1.diff(m), Ep1.diff(m)):
                return False
    return True
