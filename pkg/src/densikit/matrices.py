"""Dense matrices with polynomial entries, plus exact linear algebra
over the rationals for evaluated matrices."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .poly import Polynomial, VarContext


class PolyMatrix:
    __slots__ = ("context", "rows")

    def __init__(self, context: VarContext, rows: Sequence[Sequence[Polynomial]]):
        grid = tuple(tuple(entry for entry in row) for row in rows)
        if not grid or not grid[0]:
            raise ValueError("matrix must be nonempty")
        width = len(grid[0])
        for row in grid:
            if len(row) != width:
                raise ValueError("ragged matrix rows")
            for entry in row:
                if entry.context != context:
                    raise ValueError("entry context mismatch")
        self.context = context
        self.rows = grid

    @classmethod
    def identity(cls, context: VarContext, size: int) -> "PolyMatrix":
        one = Polynomial.constant(context, 1)
        zero = Polynomial.zero(context)
        return cls(
            context,
            [[one if i == j else zero for j in range(size)] for i in range(size)],
        )

    @classmethod
    def from_scalars(
        cls, context: VarContext, rows: Sequence[Sequence[object]]
    ) -> "PolyMatrix":
        return cls(
            context,
            [
                [Polynomial.constant(context, Fraction(v)) for v in row]
                for row in rows
            ],
        )

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    def __getitem__(self, pos: tuple[int, int]) -> Polynomial:
        i, j = pos
        return self.rows[i][j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.context == other.context and self.rows == other.rows

    def __repr__(self) -> str:
        body = "; ".join(
            ", ".join(str(e) for e in row) for row in self.rows
        )
        return f"PolyMatrix[{body}]"

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(
            self.context,
            [
                [self.rows[i][j] for i in range(self.nrows)]
                for j in range(self.ncols)
            ],
        )

    def map(self, fn: Callable[[Polynomial], Polynomial]) -> "PolyMatrix":
        return PolyMatrix(
            self.context, [[fn(e) for e in row] for row in self.rows]
        )

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        return PolyMatrix(
            self.context,
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ],
        )

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self + other.map(lambda e: -e)

    def __mul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in product")
        zero = Polynomial.zero(self.context)
        cols = other.transpose().rows
        out = []
        for row in self.rows:
            out_row = []
            for col in cols:
                acc = zero
                for a, b in zip(row, col):
                    if not (a.is_zero() or b.is_zero()):
                        acc = acc + a * b
                out_row.append(acc)
            out.append(out_row)
        return PolyMatrix(self.context, out)

    def scale(self, factor: Polynomial) -> "PolyMatrix":
        return self.map(lambda e: e * factor)

    def row_vector_product(self, row: Sequence[Polynomial]) -> list[Polynomial]:
        """row (length nrows) times this matrix, as a plain list."""
        if len(row) != self.nrows:
            raise ValueError("row length mismatch")
        zero = Polynomial.zero(self.context)
        out = []
        for j in range(self.ncols):
            acc = zero
            for i in range(self.nrows):
                a = row[i]
                b = self.rows[i][j]
                if not (a.is_zero() or b.is_zero()):
                    acc = acc + a * b
            out.append(acc)
        return out

    def column_product(self, col: Sequence[Polynomial]) -> list[Polynomial]:
        """this matrix times column (length ncols)."""
        if len(col) != self.ncols:
            raise ValueError("column length mismatch")
        zero = Polynomial.zero(self.context)
        out = []
        for i in range(self.nrows):
            acc = zero
            for j in range(self.ncols):
                a = self.rows[i][j]
                b = col[j]
                if not (a.is_zero() or b.is_zero()):
                    acc = acc + a * b
            out.append(acc)
        return out

    def determinant(self) -> Polynomial:
        if self.nrows != self.ncols:
            raise ValueError("determinant of non-square matrix")
        return _det(self.context, self.rows)

    def minors(self, size: int) -> list[Polynomial]:
        """All size x size minors, row-subset major, deterministic order."""
        if size < 1 or size > min(self.nrows, self.ncols):
            raise ValueError("minor size out of range")
        out = []
        for rsub in combinations(range(self.nrows), size):
            picked = [self.rows[i] for i in rsub]
            for csub in combinations(range(self.ncols), size):
                sub = tuple(
                    tuple(row[j] for j in csub) for row in picked
                )
                out.append(_det(self.context, sub))
        return out

    def evaluate(self, point: Sequence[Fraction]) -> list[list[Fraction]]:
        return [[e.evaluate(point) for e in row] for row in self.rows]

    def is_unitriangular(self) -> str | None:
        """'lower', 'upper', or None. Diagonal must be exactly 1."""
        if self.nrows != self.ncols:
            return None
        one = Polynomial.constant(self.context, 1)
        for i in range(self.nrows):
            if self.rows[i][i] != one:
                return None
        strictly_lower = all(
            self.rows[i][j].is_zero()
            for i in range(self.nrows)
            for j in range(i + 1, self.ncols)
        )
        if strictly_lower:
            return "lower"
        strictly_upper = all(
            self.rows[i][j].is_zero()
            for i in range(self.nrows)
            for j in range(i)
        )
        if strictly_upper:
            return "upper"
        return None


def _det(context: VarContext, rows) -> Polynomial:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = Polynomial.zero(context)
    top = rows[0]
    for j in range(n):
        if top[j].is_zero():
            continue
        sub = tuple(
            tuple(row[c] for c in range(n) if c != j) for row in rows[1:]
        )
        cofactor = top[j] * _det(context, sub)
        acc = acc - cofactor if j % 2 else acc + cofactor
    return acc


def unitriangular_inverse(m: PolyMatrix) -> PolyMatrix:
    """Exact inverse of a unitriangular matrix via the finite Neumann sum.

    With N = M - I nilpotent, M^{-1} = I - N + N^2 - ... truncated at
    the matrix size.  The result is verified against M before returning.
    """
    shape = m.is_unitriangular()
    if shape is None:
        raise ValueError("matrix is not unitriangular")
    n = m.nrows
    ident = PolyMatrix.identity(m.context, n)
    nil = m - ident
    acc = ident
    power = ident
    sign = 1
    for _ in range(1, n):
        power = power * nil
        sign = -sign
        term = power if sign > 0 else power.map(lambda e: -e)
        acc = acc + term
    if m * acc != ident:
        raise ValueError("inverse verification failed")
    return acc


def jacobian(polys: Sequence[Polynomial], context: VarContext) -> PolyMatrix:
    """Rows are the polynomials, columns the context variables."""
    if not polys:
        raise ValueError("jacobian of empty system")
    rows = []
    for p in polys:
        if p.context != context:
            raise ValueError("polynomial context mismatch")
        rows.append([p.partial(name) for name in context.names])
    return PolyMatrix(context, rows)


def fraction_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank of a matrix of rationals by fraction-exact elimination."""
    grid = [list(map(Fraction, row)) for row in rows]
    if not grid:
        return 0
    ncols = len(grid[0])
    rank = 0
    row_idx = 0
    for col in range(ncols):
        pivot = None
        for r in range(row_idx, len(grid)):
            if grid[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        grid[row_idx], grid[pivot] = grid[pivot], grid[row_idx]
        pv = grid[row_idx][col]
        for r in range(row_idx + 1, len(grid)):
            if grid[r][col] != 0:
                factor = grid[r][col] / pv
                for c in range(col, ncols):
                    grid[r][c] -= factor * grid[row_idx][c]
        rank += 1
        row_idx += 1
        if row_idx == len(grid):
            break
    return rank


def solve_exact(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> list[Fraction] | None:
    """Solve A x = b exactly.

    Returns the unique solution, or None when the system is either
    inconsistent or underdetermined on its consistent part.
    """
    nrows = len(rows)
    if nrows == 0:
        return None
    ncols = len(rows[0])
    aug = [list(map(Fraction, row)) + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    pivots: list[int] = []
    row_idx = 0
    for col in range(ncols):
        pivot = None
        for r in range(row_idx, nrows):
            if aug[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        aug[row_idx], aug[pivot] = aug[pivot], aug[row_idx]
        pv = aug[row_idx][col]
        aug[row_idx] = [v / pv for v in aug[row_idx]]
        for r in range(nrows):
            if r != row_idx and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[row_idx])]
        pivots.append(col)
        row_idx += 1
        if row_idx == nrows:
            break
    for r in range(row_idx, nrows):
        if aug[r][ncols] != 0:
            return None  # inconsistent
    if len(pivots) < ncols:
        return None  # not unique
    solution = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        solution[col] = aug[r][ncols]
    return solution
