"""
Exact rational matrices and the exact Moore-Penrose pseudoinverse.

The pseudoinverse uses a full-rank factorization M = B·C: C holds the nonzero
rows of the reduced row echelon form and B the pivot columns of M. Then
M⁺ = Cᵀ(CCᵀ)⁻¹(BᵀB)⁻¹Bᵀ.
"""

import math
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from exceptions import DomainError, InvalidInputError


def _to_fraction(value) -> Fraction:
    try:
        return value if isinstance(value, Fraction) else Fraction(value)
    except (ZeroDivisionError, ValueError, TypeError) as e:
        raise InvalidInputError(f"'{value}' is not a rational number.") from e


class RationalMatrix:
    """
    Immutable matrix of exact rationals.

    Entries are `fractions.Fraction`, which keeps them in reduced form with a
    positive denominator.

    Attributes:
        rows (int): Number of rows.
        cols (int): Number of columns.

    Methods:
        from_rows(rows, scale=1) -> RationalMatrix: Build from nested sequences, times a common scale.
        identity(n) -> RationalMatrix: The n × n identity.
        zeros(rows, cols) -> RationalMatrix: The zero matrix.
        rref() -> tuple: Reduced row echelon form and pivot columns.
        rank() -> int: Exact rank.
        inverse() -> RationalMatrix: Exact inverse of a nonsingular square matrix.
        pinv() -> RationalMatrix: Exact Moore-Penrose pseudoinverse.
        to_numpy() -> np.ndarray: Float64 copy.
        to_strings() -> list: Entries as "num/den" strings.
    """

    __slots__ = ("_entries", "rows", "cols")

    def __init__(self, entries: Iterable[Iterable]) -> None:
        rows = tuple(tuple(_to_fraction(v) for v in row) for row in entries)
        if not rows or not rows[0]:
            raise InvalidInputError("A rational matrix needs at least one row and one column.")
        if any(len(row) != len(rows[0]) for row in rows):
            raise InvalidInputError("Not all rows are of equal length.")
        self._entries: Tuple[Tuple[Fraction, ...], ...] = rows
        self.rows = len(rows)
        self.cols = len(rows[0])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], scale=1) -> "RationalMatrix":
        factor = _to_fraction(scale)
        return cls([[factor * _to_fraction(v) for v in row] for row in rows])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[Fraction(0)] * cols for _ in range(rows)])

    @classmethod
    def column(cls, values: Sequence) -> "RationalMatrix":
        return cls([[v] for v in values])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(zip(*self._entries))

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self._entries[i][j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self._entries[i]

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(v) for v in row) for row in self._entries)
        return f"RationalMatrix([{body}])"

    def _check_same_shape(self, other: "RationalMatrix") -> None:
        if self.shape != other.shape:
            raise InvalidInputError(f"Shapes {self.shape} and {other.shape} do not match.")

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_same_shape(other)
        return RationalMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self, other)])

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        self._check_same_shape(other)
        return RationalMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self, other)])

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix([[-a for a in row] for row in self])

    def __mul__(self, scalar) -> "RationalMatrix":
        factor = _to_fraction(scalar)
        return RationalMatrix([[factor * a for a in row] for row in self])

    __rmul__ = __mul__

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise InvalidInputError(f"Cannot multiply {self.shape} by {other.shape}.")
        other_cols = list(zip(*other._entries))
        return RationalMatrix(
            [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in other_cols] for row in self]
        )

    def trace(self) -> Fraction:
        return sum((self._entries[i][i] for i in range(min(self.shape))), Fraction(0))

    def max_abs(self) -> Fraction:
        return max(abs(v) for row in self for v in row)

    def select_columns(self, columns: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix([[row[c] for c in columns] for row in self])

    def rref(self) -> Tuple["RationalMatrix", List[int]]:
        """
        Reduced row echelon form by fraction-free Gauss-Jordan elimination.

        Rows are scaled to integers, eliminated by cross-multiplication with
        partial pivoting on magnitude, and kept primitive (content divided out).
        Only the final normalisation by each pivot introduces fractions.

        Returns:
            tuple: (nonzero rows of the RREF as a RationalMatrix or None when rank 0, pivot columns).
        """
        work = [_integer_row(row) for row in self]
        pivots: List[int] = []
        r = 0
        for c in range(self.cols):
            if r == self.rows:
                break
            best = max(range(r, self.rows), key=lambda i: abs(work[i][c]))
            if work[best][c] == 0:
                continue
            work[r], work[best] = work[best], work[r]
            pivot_row = work[r]
            p = pivot_row[c]
            for i in range(self.rows):
                f = work[i][c]
                if i == r or f == 0:
                    continue
                work[i] = _primitive([p * a - f * b for a, b in zip(work[i], pivot_row)])
            pivots.append(c)
            r += 1

        if not pivots:
            return None, pivots
        reduced = [[Fraction(a, work[i][c]) for a in work[i]] for i, c in enumerate(pivots)]
        return RationalMatrix(reduced), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def inverse(self) -> "RationalMatrix":
        """
        Exact inverse by Gauss-Jordan elimination on [M | I].

        Raises:
            DomainError: If the matrix is not square or is singular.
        """
        if self.rows != self.cols:
            raise DomainError(f"Only square matrices can be inverted, got {self.shape}.")
        n = self.rows
        augmented = RationalMatrix([list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(self)])
        reduced, pivots = augmented.rref()
        if pivots[:n] != list(range(n)):
            raise DomainError("matrix is not invertible.")
        return RationalMatrix([row[n:] for row in reduced])

    def pinv(self) -> "RationalMatrix":
        return pinv_exact(self)

    def penrose_residuals(self, P: "RationalMatrix") -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        """Exact max-norm residuals of the four Penrose conditions for the pair (self, P)."""
        if P.shape != (self.cols, self.rows):
            raise InvalidInputError(f"P must have shape {(self.cols, self.rows)}, got {P.shape}.")
        mp = self @ P
        pm = P @ self
        return (
            (mp @ self - self).max_abs(),
            (pm @ P - P).max_abs(),
            (mp.T - mp).max_abs(),
            (pm.T - pm).max_abs(),
        )

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self], dtype=np.float64)

    def to_strings(self) -> List[List[str]]:
        return [[f"{v.numerator}/{v.denominator}" for v in row] for row in self]


def _integer_row(row: Sequence[Fraction]) -> List[int]:
    scale = math.lcm(*(v.denominator for v in row))
    return _primitive([int(v * scale) for v in row])


def _primitive(row: List[int]) -> List[int]:
    g = math.gcd(*row)
    if g > 1:
        return [a // g for a in row]
    return row


def pinv_exact(M: RationalMatrix) -> RationalMatrix:
    """
    Exact Moore-Penrose pseudoinverse via full-rank factorization.

    Args:
        M (RationalMatrix): Any rational matrix.

    Returns:
        RationalMatrix: M⁺, of shape cols × rows. The zero matrix maps to the zero matrix.
    """
    reduced, pivots = M.rref()
    if not pivots:
        return RationalMatrix.zeros(M.cols, M.rows)
    b = M.select_columns(pivots)
    c = reduced
    return c.T @ (c @ c.T).inverse() @ (b.T @ b).inverse() @ b.T
