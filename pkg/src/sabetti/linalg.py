"""Exact matrix rank computation over the rationals and over GF(2)."""

from __future__ import annotations

from fractions import Fraction
from math import lcm


class RatMatrix:
    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = rows
        self.cols = cols
        if entries is None:
            self.entries = [Fraction(0)] * (rows * cols)
        else:
            self.entries = [Fraction(e) for e in entries]
            if len(self.entries) != rows * cols:
                raise ValueError("entry list does not match matrix shape")

    @staticmethod
    def from_rows(rows) -> "RatMatrix":
        rows = [list(r) for r in rows]
        n = len(rows)
        m = len(rows[0]) if rows else 0
        flat = [Fraction(e) for r in rows for e in r]
        return RatMatrix(n, m, flat)

    def at(self, i: int, j: int) -> Fraction:
        return self.entries[i * self.cols + j]

    def set(self, i: int, j: int, value) -> None:
        self.entries[i * self.cols + j] = Fraction(value)

    def row(self, i: int) -> list[Fraction]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def transpose(self) -> "RatMatrix":
        out = RatMatrix(self.cols, self.rows)
        for i in range(self.rows):
            for j in range(self.cols):
                out.set(j, i, self.at(i, j))
        return out

    def matmul(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = RatMatrix(self.rows, other.cols)
        for i in range(self.rows):
            for j in range(other.cols):
                s = Fraction(0)
                for t in range(self.cols):
                    s += self.at(i, t) * other.at(t, j)
                out.set(i, j, s)
        return out

    def product_is_zero(self, other: "RatMatrix") -> bool:
        """self @ other == 0, checked in integer arithmetic (sparse rows)."""
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        scale_a = lcm(*(e.denominator for e in self.entries)) if self.entries else 1
        scale_b = lcm(*(e.denominator for e in other.entries)) if other.entries else 1
        a_rows = [
            [(t, int(v * scale_a)) for t, v in enumerate(self.row(i)) if v != 0]
            for i in range(self.rows)
        ]
        b = [[int(v * scale_b) for v in other.row(t)] for t in range(other.rows)]
        cols = other.cols
        for sparse in a_rows:
            acc = [0] * cols
            for t, v in sparse:
                brow = b[t]
                for j in range(cols):
                    if brow[j]:
                        acc[j] += v * brow[j]
            if any(acc):
                return False
        return True

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, RatMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"RatMatrix({self.rows}x{self.cols})"


def rat_rank(m: RatMatrix) -> int:
    """Exact rank over Q by Bareiss fraction-free elimination, full pivoting.

    Rows are first scaled to integers (rank-preserving); the Bareiss update
    keeps every intermediate value an integer dividing a minor of the scaled
    matrix, which bounds coefficient growth.
    """
    a: list[list[int]] = []
    for i in range(m.rows):
        row = m.row(i)
        scale = lcm(*(f.denominator for f in row)) if row else 1
        a.append([int(f * scale) for f in row])
    n, c = m.rows, m.cols
    rank = 0
    prev = 1
    for step in range(min(n, c)):
        # full pivot search in the remaining submatrix
        pivot = None
        for i in range(step, n):
            for j in range(step, c):
                if a[i][j] != 0:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        pi, pj = pivot
        if pi != step:
            a[step], a[pi] = a[pi], a[step]
        if pj != step:
            for row in a:
                row[step], row[pj] = row[pj], row[step]
        rank += 1
        p = a[step][step]
        for i in range(step + 1, n):
            ai = a[i]
            astep = a[step]
            f = ai[step]
            for j in range(step + 1, c):
                ai[j] = (p * ai[j] - f * astep[j]) // prev
            ai[step] = 0
        prev = p
    return rank


def gf2_rank(rows) -> int:
    """Rank over GF(2); each row is an int bitmask of its nonzero columns."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            low = row & -row
            other = pivots.get(low)
            if other is None:
                pivots[low] = row
                rank += 1
                break
            row ^= other
    return rank
