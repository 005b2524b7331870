"""Independent oracles (sympy) and random generators shared by the tests."""

from __future__ import annotations

import random

import sympy

from reldubois.complexes import CochainComplex
from reldubois.linalg import RatMatrix, kernel_basis


def to_sympy(m: RatMatrix) -> sympy.Matrix:
    if m.rows == 0 or m.cols == 0:
        return sympy.zeros(m.rows, m.cols)
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row]
                         for row in m.to_lists()])


def oracle_rank(m: RatMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return to_sympy(m).rank()


def oracle_cohomology(c: CochainComplex) -> dict[int, int]:
    return {m: c.dim(m) - oracle_rank(c.diff(m)) - oracle_rank(c.diff(m - 1))
            for m in c.degrees}


def random_matrix(rng: random.Random, rows: int, cols: int, lo: int = -2, hi: int = 2,
                  density: float = 0.6) -> RatMatrix:
    return RatMatrix.from_rows(
        [[rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(cols)]
         for _ in range(rows)], cols)


def random_complex(rng: random.Random, max_dim: int = 8, max_len: int = 4,
                   lo: int = 0) -> CochainComplex:
    """A random complex with d∘d = 0, built by composing with left annihilators."""
    length = rng.randint(1, max_len)
    dims = [rng.randint(0, max_dim) for _ in range(length)]
    d = {}
    prev = None
    for i in range(length - 1):
        rows, cols = dims[i + 1], dims[i]
        if prev is None:
            mat = random_matrix(rng, rows, cols)
        else:
            # rows of L annihilate the image of prev
            L = kernel_basis(prev.T).T
            mat = random_matrix(rng, rows, L.rows) @ L if L.rows else RatMatrix.zeros(rows, cols)
        d[lo + i] = mat
        prev = mat
    return CochainComplex.build({lo + i: k for i, k in enumerate(dims)}, d)
