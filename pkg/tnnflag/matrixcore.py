"""
Exact Linear Algebra
====================
Dense matrices over QQ or a rational function field: minors, principal
minors, echelon forms, block Gauss factorizations, Chevalley generators and
Marsh-Rietsch products. Also hosts the sparse exact solver used by the
loop-group factorizations.

Indexing: FieldMatrix[i, j] is 0-based; minor(), flag_minor() and every
row set or column set argument are 1-based, matching the usual notation.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from tnnflag.errors import FactorizationError, FieldZeroDivisionError, InvalidInputError, OutsideDomainError
from tnnflag.exactalg import Scalar, VariableField, evaluate as evaluate_scalar, format_scalar, is_rational, scalar
from tnnflag.logger import get_logger
from tnnflag.models import MatrixModel
from tnnflag.weyl import Permutation, PositiveSubexpression, signed_matrix

logger = get_logger(__name__)

COFACTOR_LIMIT = 5


class FieldMatrix:
    """Immutable rows x cols matrix of exact scalars."""

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, entries: Sequence[Sequence]):
        grid = tuple(tuple(scalar(x) for x in row) for row in entries)
        widths = {len(row) for row in grid}
        if len(widths) > 1:
            raise InvalidInputError("ragged matrix")
        self.rows = len(grid)
        self.cols = widths.pop() if widths else 0
        self._entries = grid

    @classmethod
    def identity(cls, n: int) -> "FieldMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "FieldMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def from_function(cls, rows: int, cols: int, fn) -> "FieldMatrix":
        return cls([[fn(i, j) for j in range(cols)] for i in range(rows)])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key: Tuple[int, int]) -> Scalar:
        i, j = key
        return self._entries[i][j]

    def row(self, i: int) -> Tuple[Scalar, ...]:
        return self._entries[i]

    def column(self, j: int) -> Tuple[Scalar, ...]:
        return tuple(row[j] for row in self._entries)

    def tolist(self) -> List[List[Scalar]]:
        return [list(row) for row in self._entries]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"FieldMatrix({self.rows}x{self.cols})\n{self.pretty()}"

    # ---- arithmetic -------------------------------------------------

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_shape(other)
        return FieldMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)])

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_shape(other)
        return FieldMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)])

    def __neg__(self) -> "FieldMatrix":
        return FieldMatrix([[-a for a in r] for r in self._entries])

    def __mul__(self, other) -> "FieldMatrix":
        if not isinstance(other, FieldMatrix):
            c = scalar(other)
            return FieldMatrix([[a * c for a in r] for r in self._entries])
        if self.cols != other.rows:
            raise InvalidInputError(f"cannot multiply {self.shape} by {other.shape}")
        columns = [other.column(j) for j in range(other.cols)]
        product = []
        for r in self._entries:
            out_row = []
            for col in columns:
                total = scalar(0)
                for a, b in zip(r, col):
                    if a != 0 and b != 0:
                        total = total + a * b
                out_row.append(total)
            product.append(out_row)
        return FieldMatrix(product)

    def __rmul__(self, other) -> "FieldMatrix":
        return self * other

    def _check_shape(self, other: "FieldMatrix") -> None:
        if self.shape != other.shape:
            raise InvalidInputError(f"shape mismatch {self.shape} vs {other.shape}")

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix([list(self.column(j)) for j in range(self.cols)])

    def map(self, fn) -> "FieldMatrix":
        return FieldMatrix([[fn(a) for a in r] for r in self._entries])

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "FieldMatrix":
        """0-based row and column selection."""
        rows, cols = list(rows), list(cols)
        return FieldMatrix([[self._entries[i][j] for j in cols] for i in rows])

    def hstack(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.rows != other.rows:
            raise InvalidInputError("row count mismatch")
        return FieldMatrix([list(a) + list(b) for a, b in zip(self._entries, other._entries)])

    def vstack(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.cols != other.cols:
            raise InvalidInputError("column count mismatch")
        return FieldMatrix(self.tolist() + other.tolist())

    def is_zero(self) -> bool:
        return all(a == 0 for r in self._entries for a in r)

    # ---- determinants and elimination -------------------------------

    def det(self) -> Scalar:
        if not self.is_square:
            raise InvalidInputError(f"determinant of a {self.shape} matrix")
        if self.rows == 0:
            return scalar(1)
        if self.rows <= COFACTOR_LIMIT:
            return _det_cofactor(self._entries)
        return _det_bareiss(self.tolist())

    def minor(self, rowset: Iterable[int], colset: Iterable[int]) -> Scalar:
        """Determinant of the submatrix on 1-based rowset x colset."""
        rowset, colset = sorted(rowset), sorted(colset)
        if len(rowset) != len(colset):
            raise InvalidInputError(f"minor with {len(rowset)} rows and {len(colset)} columns")
        if any(not 1 <= i <= self.rows for i in rowset) or any(not 1 <= j <= self.cols for j in colset):
            raise InvalidInputError(f"index out of range in minor {rowset} x {colset}")
        return self.submatrix([i - 1 for i in rowset], [j - 1 for j in colset]).det()

    def flag_minor(self, rowset: Iterable[int]) -> Scalar:
        """Minor on rowset and the first |rowset| columns."""
        rowset = sorted(rowset)
        return self.minor(rowset, range(1, len(rowset) + 1))

    def rank(self) -> int:
        _, pivots = _row_reduce(self.tolist())
        return len(pivots)

    def inverse(self) -> "FieldMatrix":
        if not self.is_square:
            raise InvalidInputError(f"inverse of a {self.shape} matrix")
        n = self.rows
        augmented = [list(r) + [scalar(1 if i == j else 0) for j in range(n)] for i, r in enumerate(self._entries)]
        reduced, pivots = _row_reduce(augmented, pivot_columns=n)
        if len(pivots) < n:
            raise FieldZeroDivisionError("singular matrix")
        return FieldMatrix([row[n:] for row in reduced[:n]])

    # ---- output -----------------------------------------------------

    def to_model(self) -> MatrixModel:
        return MatrixModel(rows=self.rows, cols=self.cols,
                           entries=[[format_scalar(a) for a in r] for r in self._entries])

    def pretty(self, blank_zeros: bool = True) -> str:
        cells = [["" if blank_zeros and a == 0 else format_scalar(a) for a in r] for r in self._entries]
        width = max((len(c) for r in cells for c in r), default=1) or 1
        return "\n".join("[ " + "  ".join(c.rjust(width) for c in r) + " ]" for r in cells)


def _det_cofactor(entries: Sequence[Sequence[Scalar]]) -> Scalar:
    """Laplace expansion along rows, memoized on the set of remaining columns."""
    n = len(entries)
    memo: Dict[Tuple[int, int], Scalar] = {}

    def expand(row: int, columns: int) -> Scalar:
        if row == n:
            return scalar(1)
        key = (row, columns)
        if key in memo:
            return memo[key]
        total = scalar(0)
        sign = 1
        for j in range(n):
            if not columns >> j & 1:
                continue
            a = entries[row][j]
            if a != 0:
                sub = expand(row + 1, columns & ~(1 << j))
                if sub != 0:
                    total = total + a * sub if sign > 0 else total - a * sub
            sign = -sign
        memo[key] = total
        return total

    return expand(0, (1 << n) - 1)


def _det_bareiss(rows: List[List[Scalar]]) -> Scalar:
    """Fraction-free elimination with row swaps."""
    n = len(rows)
    M = [list(r) for r in rows]
    sign = 1
    previous = scalar(1)
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return scalar(0)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / previous
        previous = M[k][k]
    return M[n - 1][n - 1] if sign > 0 else -M[n - 1][n - 1]


def _pivot_cost(a: Scalar) -> int:
    if is_rational(a):
        return 0
    return len(format_scalar(a))


def _row_reduce(rows: List[List[Scalar]], pivot_columns: Optional[int] = None) -> Tuple[List[List[Scalar]], List[int]]:
    """Reduced row echelon form; pivots are searched in the first pivot_columns columns."""
    M = [list(r) for r in rows]
    if not M:
        return M, []
    width = len(M[0]) if pivot_columns is None else pivot_columns
    pivots: List[int] = []
    r = 0
    for c in range(width):
        candidates = [i for i in range(r, len(M)) if M[i][c] != 0]
        if not candidates:
            continue
        best = min(candidates, key=lambda i: _pivot_cost(M[i][c]))
        M[r], M[best] = M[best], M[r]
        pivot = M[r][c]
        M[r] = [a / pivot for a in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                factor = M[i][c]
                M[i] = [a - factor * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


# ===========================================
# SPARSE EXACT SOLVER
# ===========================================

@dataclass
class LinearSolution:
    consistent: bool
    values: Dict[int, Scalar]
    free: List[int]

    @property
    def unique(self) -> bool:
        return self.consistent and not self.free


def solve_exact(equations: Sequence[Mapping[int, Scalar]], rhs: Sequence[Scalar], nvars: int) -> LinearSolution:
    """
    Solve sum_j equations[e][j] * x_j = rhs[e] exactly.

    Free variables are set to zero in the returned particular solution.
    """
    if len(equations) != len(rhs):
        raise InvalidInputError("equation and right-hand side counts differ")
    rows: List[Tuple[Dict[int, Scalar], Scalar]] = []
    for eq, b in zip(equations, rhs):
        cleaned = {j: scalar(c) for j, c in eq.items() if c != 0}
        if any(not 0 <= j < nvars for j in cleaned):
            raise InvalidInputError("variable index out of range")
        rows.append((cleaned, scalar(b)))

    pivot_rows: Dict[int, Tuple[Dict[int, Scalar], Scalar]] = {}
    for eq, b in rows:
        for j, (prow, pb) in pivot_rows.items():
            c = eq.get(j)
            if c is not None:
                eq = _axpy(eq, prow, -c)
                b = b - c * pb
        if not eq:
            if b != 0:
                return LinearSolution(consistent=False, values={}, free=[])
            continue
        j = min(eq, key=lambda v: (_pivot_cost(eq[v]), v))
        c = eq[j]
        eq = {v: a / c for v, a in eq.items()}
        b = b / c
        for other, (prow, pb) in list(pivot_rows.items()):
            d = prow.get(j)
            if d is not None:
                pivot_rows[other] = (_axpy(prow, eq, -d), pb - d * b)
        pivot_rows[j] = (eq, b)

    free = sorted(set(range(nvars)) - set(pivot_rows))
    values = {j: b for j, (_, b) in pivot_rows.items()}
    for j in free:
        values[j] = scalar(0)
    return LinearSolution(consistent=True, values=values, free=free)


def _axpy(x: Dict[int, Scalar], y: Dict[int, Scalar], c: Scalar) -> Dict[int, Scalar]:
    out = dict(x)
    for j, a in y.items():
        value = out.get(j, scalar(0)) + c * a
        if value == 0:
            out.pop(j, None)
        else:
            out[j] = value
    return out


# ===========================================
# MINORS AND ECHELON FORMS
# ===========================================

def principal_minors(x: FieldMatrix) -> Tuple[List[Scalar], List[Scalar]]:
    """(top-left i x i minors, bottom-right i x i minors) for i = 1..n."""
    if not x.is_square:
        raise InvalidInputError("principal minors of a non-square matrix")
    n = x.rows
    top_left = [x.minor(range(1, i + 1), range(1, i + 1)) for i in range(1, n + 1)]
    bottom_right = [x.minor(range(n - i + 1, n + 1), range(n - i + 1, n + 1)) for i in range(1, n + 1)]
    return top_left, bottom_right


def plucker_vector(M: FieldMatrix) -> Dict[Tuple[int, ...], Scalar]:
    """All maximal minors of an n x k matrix, keyed by sorted row set."""
    n, k = M.shape
    return {S: M.minor(S, range(1, k + 1)) for S in itertools.combinations(range(1, n + 1), k)}


def evaluate(M: FieldMatrix, point: Mapping[str, object]) -> FieldMatrix:
    return M.map(lambda a: evaluate_scalar(a, point))


@dataclass(frozen=True)
class EchelonMatrix:
    """An n x k matrix whose rows u[k] form the k x k identity."""

    u: Permutation
    k: int
    body: FieldMatrix

    def __post_init__(self):
        if self.body.shape != (self.u.n, self.k):
            raise InvalidInputError(f"echelon body of shape {self.body.shape} for n={self.u.n}, k={self.k}")
        for position, i in enumerate(self.u.subset(self.k)):
            if any(self.body[i - 1, j] != (1 if j == position else 0) for j in range(self.k)):
                raise InvalidInputError(f"row {i} is not a pivot row of a u[k]-echelon matrix")

    @property
    def n(self) -> int:
        return self.u.n

    @property
    def pivots(self) -> Tuple[int, ...]:
        return self.u.subset(self.k)

    def entry(self, i: int, s: int) -> Scalar:
        """1-based entry M_{i,s}"""
        return self.body[i - 1, s - 1]

    def free_positions(self) -> List[Tuple[int, int]]:
        """1-based (row, column) positions not fixed by the echelon shape."""
        pivots = self.pivots
        return [(i, s) for i in range(1, self.n + 1) if i not in pivots for s in range(1, self.k + 1)]

    def map(self, fn) -> "EchelonMatrix":
        return EchelonMatrix(self.u, self.k, self.body.map(fn))


def u_echelon(x: FieldMatrix, u: Permutation, k: int) -> EchelonMatrix:
    """Column-reduce the first k columns of x so that rows u[k] become the identity."""
    if x.rows != u.n or x.cols < k:
        raise InvalidInputError(f"cannot take a {k}-column echelon form of a {x.shape} matrix")
    X = x.submatrix(range(x.rows), range(k))
    A = X.submatrix([i - 1 for i in u.subset(k)], range(k))
    if A.det() == 0:
        raise OutsideDomainError(f"pivot minor on rows {list(u.subset(k))} vanishes", {"u": str(u)})
    return EchelonMatrix(u, k, X * A.inverse())


def generic_echelon(u: Permutation, k: int, prefix: str = "x") -> Tuple[EchelonMatrix, VariableField]:
    """u[k]-echelon matrix with one fresh variable per free entry, numbered row by row."""
    pivots = u.subset(k)
    names = [f"{prefix}{m}" for m in range(1, (u.n - k) * k + 1)]
    space = VariableField(names)
    gens = iter(space.gens().values())
    rows = []
    for i in range(1, u.n + 1):
        if i in pivots:
            rows.append([1 if pivots.index(i) == s else 0 for s in range(k)])
        else:
            rows.append([next(gens) for _ in range(k)])
    return EchelonMatrix(u, k, FieldMatrix(rows)), space


def permutation_matrix(w: Permutation) -> FieldMatrix:
    return FieldMatrix(signed_matrix(w).tolist())


def sl_completion(M: EchelonMatrix) -> Tuple[FieldMatrix, bool]:
    """
    x = [M | columns k+1..n of u-dot], with the last column negated when
    needed to make det x = 1. Returns (x, flipped).
    """
    u_dot = permutation_matrix(M.u)
    tail = u_dot.submatrix(range(M.n), range(M.k, M.n))
    x = M.body.hstack(tail)
    d = x.det()
    if d == 1:
        return x, False
    if d == -1 and M.k < M.n:
        flip = FieldMatrix.from_function(M.n, M.n, lambda i, j: -1 if i == j == M.n - 1 else int(i == j))
        return x * flip, True
    raise FactorizationError(f"completion has determinant {format_scalar(d)}")


# ===========================================
# BLOCK GAUSS FACTORIZATION
# ===========================================

def schur_factorize(x: FieldMatrix, k: int) -> Tuple[FieldMatrix, FieldMatrix, FieldMatrix]:
    """x = [I 0; C A^-1 I] diag(A, D - C A^-1 B) [I A^-1 B; 0 I]"""
    if not x.is_square or not 0 < k < x.rows:
        raise InvalidInputError(f"block split at {k} of a {x.shape} matrix")
    n = x.rows
    A = x.submatrix(range(k), range(k))
    B = x.submatrix(range(k), range(k, n))
    C = x.submatrix(range(k, n), range(k))
    D = x.submatrix(range(k, n), range(k, n))
    try:
        A_inv = A.inverse()
    except FieldZeroDivisionError as exc:
        raise FactorizationError("top-left block is singular") from exc
    CA = C * A_inv
    AB = A_inv * B
    schur = D - CA * B

    def blocks(tl, tr, bl, br) -> FieldMatrix:
        return tl.hstack(tr).vstack(bl.hstack(br))

    I_k, I_m = FieldMatrix.identity(k), FieldMatrix.identity(n - k)
    lower = blocks(I_k, FieldMatrix.zeros(k, n - k), CA, I_m)
    levi = blocks(A, FieldMatrix.zeros(k, n - k), FieldMatrix.zeros(n - k, k), schur)
    upper = blocks(I_k, AB, FieldMatrix.zeros(n - k, k), I_m)
    return lower, levi, upper


# ===========================================
# GENERATORS AND MARSH-RIETSCH PRODUCTS
# ===========================================

def generator(kind: str, n: int, i: int, t=None) -> FieldMatrix:
    """
    x: identity plus t at (i, i+1); y: identity plus t at (i+1, i);
    s: the representative of s_i; coweight: diag(.., t, 1/t, ..) on i, i+1.
    """
    if not 1 <= i < n:
        raise InvalidInputError(f"index {i} out of range for n={n}")
    a, b = i - 1, i

    def entry(r: int, c: int):
        if kind == "x":
            return t if (r, c) == (a, b) else int(r == c)
        if kind == "y":
            return t if (r, c) == (b, a) else int(r == c)
        if kind == "s":
            if (r, c) == (a, b):
                return -1
            if (r, c) == (b, a):
                return 1
            return int(r == c and r not in (a, b))
        if kind == "coweight":
            if r == c == a:
                return t
            if r == c == b:
                return 1 / scalar(t)
            return int(r == c)
        raise InvalidInputError(f"unknown generator kind {kind!r}")

    return FieldMatrix.from_function(n, n, entry)


def mr_variables(pse: PositiveSubexpression, prefix: str = "t") -> VariableField:
    return VariableField([f"{prefix}{j}" for j in pse.circle])


def mr_product(pse: PositiveSubexpression, space: Optional[VariableField] = None) -> FieldMatrix:
    """
    g_1 ... g_N with g_j = y_{i_j}(t_j) on circle positions and s_{i_j}-dot on plus positions.

    The variables of space are matched to the circle positions in order, so
    any prefix passed to mr_variables works.
    """
    space = space or mr_variables(pse)
    circle = list(pse.circle)
    if len(space.names) != len(circle):
        raise InvalidInputError(f"{len(space.names)} variables for {len(circle)} circle positions")
    variable_at = {j: space.gen(name) for j, name in zip(circle, space.names)}
    n = pse.n
    product = FieldMatrix.identity(n)
    for j, i in enumerate(pse.word, start=1):
        if j in pse.plus:
            factor = generator("s", n, i)
        else:
            factor = generator("y", n, i, variable_at[j])
        product = product * factor
    return product
