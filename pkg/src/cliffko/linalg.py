"""Exact linear algebra over Fraction or Scalar entries.

Rows are sparse dicts ``{column: value}``; values only need ``+ - * /``
and truthiness, so Fractions and Scalars both work.
"""
from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Iterable, Sequence


def _normalize(row: dict, col) -> dict:
    piv = row[col]
    if piv == 1:
        return row
    inv = 1 / piv if isinstance(piv, Fraction) else piv.reciprocal()
    return {c: v * inv for c, v in row.items()}


class Echelon:
    """Incremental row echelon form; each stored row has its pivot at its minimum column."""

    def __init__(self):
        self.pivots: dict[int, dict] = {}

    def reduce(self, row: dict) -> dict:
        row = {c: v for c, v in row.items() if v}
        heap = [c for c in row if c in self.pivots]
        heapq.heapify(heap)
        seen = set()
        while heap:
            c = heapq.heappop(heap)
            if c in seen:
                continue
            seen.add(c)
            factor = row.get(c)
            if not factor:
                continue
            for cc, vv in self.pivots[c].items():
                t = row.get(cc)
                t = -factor * vv if t is None else t - factor * vv
                if t:
                    row[cc] = t
                    if cc in self.pivots and cc not in seen:
                        heapq.heappush(heap, cc)
                else:
                    row.pop(cc, None)
        return row

    def add(self, row: dict) -> bool:
        """Insert a row; returns True when it increased the rank."""
        row = self.reduce(row)
        if not row:
            return False
        col = min(row)
        self.pivots[col] = _normalize(row, col)
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def nullspace(self, ncols: int, zero=Fraction(0), one=Fraction(1)) -> list[dict]:
        free = [c for c in range(ncols) if c not in self.pivots]
        order = sorted(self.pivots, reverse=True)
        basis = []
        for f in free:
            x = {f: one}
            for p in order:
                acc = zero
                for c, v in self.pivots[p].items():
                    if c != p and c in x:
                        acc = acc - v * x[c]
                if acc:
                    x[p] = acc
            basis.append(x)
        return basis


def nullspace(rows: Iterable[dict], ncols: int, zero=Fraction(0), one=Fraction(1)) -> list[dict]:
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return ech.nullspace(ncols, zero, one)


def rank(rows: Iterable[dict]) -> int:
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return ech.rank


def _inv(x):
    return 1 / x if isinstance(x, Fraction) else x.reciprocal()


def det(matrix: Sequence[Sequence]):
    """Determinant by Gaussian elimination with exact pivots."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    a = [list(r) for r in matrix]
    sign = 1
    result = None
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return a[0][0] * 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        p = a[col][col]
        result = p if result is None else result * p
        ip = _inv(p)
        for r in range(col + 1, n):
            f = a[r][col]
            if f:
                f = f * ip
                rowc = a[col]
                rowr = a[r]
                for c in range(col + 1, n):
                    if rowc[c]:
                        rowr[c] = rowr[c] - f * rowc[c]
                rowr[col] = rowr[col] * 0
    return result if sign == 1 else -result


def inverse(matrix: Sequence[Sequence], zero=Fraction(0), one=Fraction(1)) -> list[list]:
    """Gauss-Jordan inverse; raises ZeroDivisionError when singular."""
    n = len(matrix)
    a = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        ip = _inv(a[col][col])
        a[col] = [v * ip for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def column_space_basis(matrix: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal set of linearly independent columns."""
    if not matrix:
        return []
    ncols = len(matrix[0])
    ech = Echelon()
    chosen = []
    for c in range(ncols):
        col = {r: matrix[r][c] for r in range(len(matrix)) if matrix[r][c]}
        if ech.add(col):
            chosen.append(c)
    return chosen


def det_integer(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant of an integer matrix."""
    n = len(matrix)
    if n == 0:
        return 1
    a = [list(r) for r in matrix]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]
