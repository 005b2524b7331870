"""Exact rational linear algebra.

Dense matrices of :class:`fractions.Fraction` with the handful of operations
the complex machinery needs: row reduction, rank, null spaces, span tests and
quotient maps.  Everything is exact; there is no floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


class LinAlgError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass ints, strings or Fractions")
    return Fraction(x)


class RatMatrix:
    """Immutable dense matrix over the rationals."""

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, rows: int, cols: int, data: Sequence[Sequence] | None = None):
        if rows < 0 or cols < 0:
            raise LinAlgError(f"negative shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        if data is None:
            z = Fraction(0)
            self._data = tuple(tuple(z for _ in range(cols)) for _ in range(rows))
        else:
            if len(data) != rows or any(len(r) != cols for r in data):
                raise LinAlgError(f"data does not match shape {rows}x{cols}")
            self._data = tuple(tuple(_frac(x) for x in r) for r in data)
        self._hash = None

    # construction ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RatMatrix":
        rows = list(rows)
        if cols is None:
            if not rows:
                raise LinAlgError("cannot infer column count from zero rows")
            cols = len(rows[0])
        return cls(len(rows), cols, rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "RatMatrix":
        columns = list(columns)
        data = [[columns[j][i] for j in range(len(columns))] for i in range(rows)]
        return cls(rows, len(columns), data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls._raw(n, n, tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def _raw(cls, rows: int, cols: int, data: tuple) -> "RatMatrix":
        m = cls.__new__(cls)
        m.rows, m.cols, m._data, m._hash = rows, cols, data, None
        return m

    # access --------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._data)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._data))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"RatMatrix({self.rows}x{self.cols}: [{body}])"

    # arithmetic ----------------------------------------------------------

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise LinAlgError(f"cannot multiply {self.shape} by {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return RatMatrix.zeros(self.rows, other.cols)
        ocols = list(zip(*other._data))
        zero = Fraction(0)
        out = []
        for r in self._data:
            nz = [(k, x) for k, x in enumerate(r) if x]
            if not nz:
                out.append(tuple(zero for _ in range(other.cols)))
                continue
            out.append(tuple(sum((x * c[k] for k, x in nz), zero) for c in ocols))
        return RatMatrix._raw(self.rows, other.cols, tuple(out))

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise LinAlgError(f"cannot add {self.shape} and {other.shape}")
        return RatMatrix._raw(
            self.rows, self.cols,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)),
        )

    def __neg__(self) -> "RatMatrix":
        return RatMatrix._raw(self.rows, self.cols, tuple(tuple(-a for a in r) for r in self._data))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def scale(self, c) -> "RatMatrix":
        c = _frac(c)
        return RatMatrix._raw(self.rows, self.cols, tuple(tuple(c * a for a in r) for r in self._data))

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix._raw(self.cols, self.rows, tuple(zip(*self._data)) if self.rows else
                              tuple(() for _ in range(self.cols)))

    def with_entry(self, i: int, j: int, value) -> "RatMatrix":
        data = [list(r) for r in self._data]
        data[i][j] = _frac(value)
        return RatMatrix(self.rows, self.cols, data)

    def submatrix(self, row_idx: Iterable[int], col_idx: Iterable[int]) -> "RatMatrix":
        row_idx, col_idx = list(row_idx), list(col_idx)
        return RatMatrix._raw(
            len(row_idx), len(col_idx),
            tuple(tuple(self._data[i][j] for j in col_idx) for i in row_idx),
        )

    def row_block(self, start: int, stop: int) -> "RatMatrix":
        return self.submatrix(range(start, stop), range(self.cols))

    def col_block(self, start: int, stop: int) -> "RatMatrix":
        return self.submatrix(range(self.rows), range(start, stop))


def hstack(mats: Sequence[RatMatrix], rows: int | None = None) -> RatMatrix:
    mats = list(mats)
    if not mats:
        return RatMatrix.zeros(rows or 0, 0)
    r = mats[0].rows
    if any(m.rows != r for m in mats):
        raise LinAlgError("hstack row mismatch: " + str([m.shape for m in mats]))
    data = tuple(sum((m._data[i] for m in mats), ()) for i in range(r))
    return RatMatrix._raw(r, sum(m.cols for m in mats), data)


def vstack(mats: Sequence[RatMatrix], cols: int | None = None) -> RatMatrix:
    mats = list(mats)
    if not mats:
        return RatMatrix.zeros(0, cols or 0)
    c = mats[0].cols
    if any(m.cols != c for m in mats):
        raise LinAlgError("vstack column mismatch: " + str([m.shape for m in mats]))
    return RatMatrix._raw(sum(m.rows for m in mats), c, sum((m._data for m in mats), ()))


def block(grid: Sequence[Sequence[RatMatrix]]) -> RatMatrix:
    return vstack([hstack(row) for row in grid])


def block_diag(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    return block([[a, RatMatrix.zeros(a.rows, b.cols)], [RatMatrix.zeros(b.rows, a.cols), b]])


# elimination -----------------------------------------------------------------


def _rref_rows(rows: list[list[Fraction]], ncols: int) -> list[int]:
    """In-place Gauss-Jordan on a list of row lists; returns pivot columns."""
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        if inv != 1:
            for k in range(c, ncols):
                if pr[k]:
                    pr[k] *= inv
        nzk = [k for k in range(c, ncols) if pr[k]]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f:
                    ri = rows[i]
                    for k in nzk:
                        ri[k] -= f * pr[k]
        pivots.append(c)
        r += 1
    return pivots


def rref(m: RatMatrix) -> tuple[RatMatrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    rows = m.to_lists()
    pivots = _rref_rows(rows, m.cols)
    return RatMatrix(m.rows, m.cols, rows), pivots


def _integer_rows(m: RatMatrix) -> list[list[int]]:
    out = []
    for r in m._data:
        den = 1
        for x in r:
            if x.denominator != 1:
                den = den * x.denominator // _gcd(den, x.denominator)
        out.append([int(x * den) for x in r])
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def rank(m: RatMatrix) -> int:
    # Integer elimination with row-gcd normalisation; exact and avoids Fraction overhead.
    if m.rows == 0 or m.cols == 0:
        return 0
    rows = [r for r in _integer_rows(m) if any(r)]
    ncols = m.cols
    rk = 0
    for c in range(ncols):
        if rk == len(rows):
            break
        piv = next((i for i in range(rk, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        p = rows[rk]
        pc = p[c]
        keep = rows[:rk + 1]
        for ri in rows[rk + 1:]:
            f = ri[c]
            if f:
                ri = [pc * a - f * b for a, b in zip(ri, p)]
                g = 0
                for a in ri:
                    if a:
                        g = _gcd(g, abs(a))
                        if g == 1:
                            break
                if g == 0:
                    continue
                if g > 1:
                    ri = [a // g for a in ri]
            keep.append(ri)
        rows = keep
        rk += 1
    return rk


def kernel_basis(m: RatMatrix) -> RatMatrix:
    """Columns spanning the null space of ``m`` (cols x nullity)."""
    rows = m.to_lists()
    pivots = _rref_rows(rows, m.cols)
    free = [c for c in range(m.cols) if c not in set(pivots)]
    vecs = []
    for f in free:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][f]
        vecs.append(v)
    return RatMatrix.from_columns(vecs, m.cols)


def column_space_basis(m: RatMatrix) -> RatMatrix:
    """The pivot columns of ``m``: a basis of its column span made of original columns."""
    _, pivots = rref(m)
    return m.col_block(0, 0) if not pivots else m.submatrix(range(m.rows), pivots)


def subspace_contains(span: RatMatrix, vectors: RatMatrix) -> bool:
    """True iff every column of ``vectors`` lies in the column span of ``span``."""
    if span.rows != vectors.rows:
        raise LinAlgError(f"row counts differ: {span.rows} vs {vectors.rows}")
    if vectors.cols == 0 or vectors.is_zero():
        return True
    return rank(span) == rank(hstack([span, vectors]))


def solve(basis: RatMatrix, vectors: RatMatrix) -> RatMatrix:
    """Coordinates ``X`` with ``basis @ X == vectors``; ``basis`` must have full column rank.

    Free variables (none, when the basis is independent) are set to zero.
    Raises LinAlgError if some column of ``vectors`` is outside the span.
    """
    if basis.rows != vectors.rows:
        raise LinAlgError(f"row counts differ: {basis.rows} vs {vectors.rows}")
    k = basis.cols
    aug = hstack([basis, vectors]).to_lists()
    pivots = _rref_rows(aug, k + vectors.cols)
    if any(p >= k for p in pivots):
        raise LinAlgError("vector not in span")
    out = [[Fraction(0)] * vectors.cols for _ in range(k)]
    for i, pc in enumerate(pivots):
        out[pc] = aug[i][k:]
    return RatMatrix(k, vectors.cols, out)


def complement_basis(ambient_dim: int, sub: RatMatrix) -> RatMatrix:
    """Standard basis vectors completing the columns of ``sub`` to a basis."""
    if sub.cols == 0:
        return RatMatrix.identity(ambient_dim)
    full = hstack([sub, RatMatrix.identity(ambient_dim)])
    _, pivots = rref(full)
    picked = [p - sub.cols for p in pivots if p >= sub.cols]
    return RatMatrix.identity(ambient_dim).submatrix(range(ambient_dim), picked)


def quotient_map(ambient_dim: int, sub: RatMatrix) -> tuple[RatMatrix, int]:
    """Surjection ``Q`` onto ``ambient / span(sub)`` and the quotient dimension.

    ``Q`` has kernel exactly the column span of ``sub``; its rows are the
    complement coordinates in the basis ``[sub | complement]``.
    """
    Q, _, k = quotient_with_section(ambient_dim, sub)
    return Q, k


def quotient_with_section(ambient_dim: int, sub: RatMatrix) -> tuple[RatMatrix, RatMatrix, int]:
    """Like :func:`quotient_map` but also returns a section ``S`` with ``Q @ S == I``."""
    if sub.rows != ambient_dim:
        raise LinAlgError(f"sub has {sub.rows} rows, ambient dimension is {ambient_dim}")
    r = rank(sub)
    if r != sub.cols:
        raise LinAlgError(f"sub is not of full column rank ({r} < {sub.cols})")
    comp = complement_basis(ambient_dim, sub)
    k = comp.cols
    if r == 0:
        return RatMatrix.identity(ambient_dim), RatMatrix.identity(ambient_dim), ambient_dim
    if k == 0:
        return RatMatrix.zeros(0, ambient_dim), RatMatrix.zeros(ambient_dim, 0), 0
    B = hstack([sub, comp])
    Binv = solve(B, RatMatrix.identity(ambient_dim))
    Q = Binv.row_block(r, ambient_dim)
    return Q, comp, k
