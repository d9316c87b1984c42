"""
Positroid Stratification
========================
Bounded affine permutations of matrices, Grassmann necklaces, rank
conditions, u-truncations and their minors, Le-diagrams and total
nonnegativity tests for Gr(k, n).

Rows of an n x k matrix M are extended to all integers by
M_{i+n} = (-1)^(k-1) M_i.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from tnnflag.errors import InvalidInputError, InvariantViolation, OutsideDomainError
from tnnflag.exactalg import Scalar, format_scalar, is_rational, to_rational
from tnnflag.logger import get_logger
from tnnflag.matrixcore import EchelonMatrix, FieldMatrix, _row_reduce
from tnnflag.models import LeDiagramReport, NecklaceReport
from tnnflag.weyl import (
    AffinePermutation,
    Permutation,
    PositiveSubexpression,
    affine_rank,
    is_grassmannian,
    positive_subexpression,
)

logger = get_logger(__name__)

Row = Tuple[Scalar, ...]


def _matrix_of(M) -> FieldMatrix:
    return M.body if isinstance(M, EchelonMatrix) else M


# ===========================================
# PERIODIC ROWS AND RANKS
# ===========================================

def periodic_row(M, i: int) -> Row:
    """M_i for any integer i."""
    body = _matrix_of(M)
    n, k = body.shape
    shift, base = divmod(i - 1, n)
    row = body.row(base)
    if k % 2 == 0 and shift % 2:
        return tuple(-a for a in row)
    return row


def _rank(rows: Sequence[Row]) -> int:
    rows = [list(r) for r in rows if any(a != 0 for a in r)]
    if not rows:
        return 0
    return len(_row_reduce(rows)[1])


def rank_of_rows(M, a: int, b: int) -> int:
    """rank(M; a, b): rank of the periodic rows in [a, b)."""
    if b <= a:
        return 0
    k = _matrix_of(M).cols
    n = _matrix_of(M).rows
    if b - a >= n:
        b = a + n
    return min(k, _rank([periodic_row(M, i) for i in range(a, b)]))


def _check_full_rank(M) -> None:
    body = _matrix_of(M)
    if body.rank() < body.cols:
        raise InvalidInputError(f"matrix of shape {body.shape} does not have full column rank")


def f_of_matrix(M) -> AffinePermutation:
    """f_M(i): the least j >= i with M_i in the span of M_{i+1}, ..., M_j."""
    _check_full_rank(M)
    n = _matrix_of(M).rows
    window = []
    for i in range(1, n + 1):
        target = periodic_row(M, i)
        if all(a == 0 for a in target):
            window.append(i)
            continue
        span: List[Row] = []
        for j in range(i + 1, i + n + 1):
            span.append(periodic_row(M, j))
            if _rank(span + [target]) == _rank(span):
                window.append(j)
                break
        else:
            raise InvariantViolation(f"row {i} is not in the span of the next {n} rows")
    return AffinePermutation(tuple(window))


# ===========================================
# GRASSMANN NECKLACES
# ===========================================

@dataclass(frozen=True)
class GrassmannNecklace:
    """Window notation [I_1, ..., I_n]; I_a is a k-subset of [a, a+n)."""

    n: int
    k: int
    windows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.windows) != self.n:
            raise InvalidInputError(f"necklace needs {self.n} windows")
        for a, I in enumerate(self.windows, start=1):
            if len(I) != self.k or any(not a <= i < a + self.n for i in I):
                raise InvalidInputError(f"window I_{a} = {list(I)} is not a {self.k}-subset of [{a}, {a + self.n})")

    def __getitem__(self, a: int) -> Tuple[int, ...]:
        """I_a for any integer a."""
        shift, base = divmod(a - 1, self.n)
        return tuple(i + shift * self.n for i in self.windows[base])

    def to_json(self) -> List[List[int]]:
        return [list(I) for I in self.windows]

    def __str__(self) -> str:
        return "[" + ",".join("{" + ",".join(map(str, I)) + "}" for I in self.windows) + "]"


def necklace(h: AffinePermutation) -> GrassmannNecklace:
    """I_a = {h(i) : i < a, h(i) >= a}"""
    if not h.is_bounded():
        raise InvalidInputError(f"{h} is not a bounded affine permutation")
    n = h.n
    windows = tuple(tuple(sorted(h(i) for i in range(a - n, a) if h(i) >= a)) for a in range(1, n + 1))
    return GrassmannNecklace(n=n, k=h.av, windows=windows)


def matrix_necklace(M) -> GrassmannNecklace:
    """Lexicographically minimal independent row sets of M in each cyclic order."""
    _check_full_rank(M)
    n, k = _matrix_of(M).shape
    windows = []
    for a in range(1, n + 1):
        chosen: List[int] = []
        rows: List[Row] = []
        for i in range(a, a + n):
            candidate = rows + [periodic_row(M, i)]
            if _rank(candidate) > len(rows):
                chosen.append(i)
                rows = candidate
            if len(chosen) == k:
                break
        windows.append(tuple(chosen))
    return GrassmannNecklace(n=n, k=k, windows=tuple(windows))


@dataclass
class MembershipCheck:
    """Both cell membership routes for one matrix and one candidate cell."""

    necklace_route: bool
    rank_route: bool
    f_matrix: AffinePermutation

    @property
    def member(self) -> bool:
        return self.necklace_route


def cell_membership(M, h: AffinePermutation) -> MembershipCheck:
    """
    Route 1 compares Grassmann necklaces, route 2 checks
    k - rank(M; a, b) = r_{a,b}(h) on one period. The routes must agree.
    """
    n, k = _matrix_of(M).shape
    if h.n != n or h.av != k:
        raise InvalidInputError(f"{h} is not in Bound({k},{n})")
    by_necklace = matrix_necklace(M) == necklace(h)
    by_rank = all(
        k - rank_of_rows(M, a, b) == affine_rank(h, a, b)
        for a in range(1, n + 1)
        for b in range(a, a + n + 1)
    )
    f_M = f_of_matrix(M)
    logger.debug("cell membership", extra={"h": str(h), "f_M": str(f_M), "member": by_necklace})
    if by_necklace != by_rank or by_necklace != (f_M == h):
        raise InvariantViolation(
            "cell membership routes disagree",
            {"necklace": by_necklace, "rank": by_rank, "f_M": str(f_M), "h": str(h)},
        )
    return MembershipCheck(necklace_route=by_necklace, rank_route=by_rank, f_matrix=f_M)


# ===========================================
# U-TRUNCATIONS
# ===========================================

@dataclass(frozen=True)
class TruncatedWindow:
    """tr^a_u(M); rows are labeled a, ..., a + n - 1."""

    a: int
    matrix: FieldMatrix

    @property
    def rows(self) -> range:
        return range(self.a, self.a + self.matrix.rows)

    def minor(self, S: Sequence[int]) -> Scalar:
        S = sorted(S)
        if len(S) != self.matrix.cols or any(i not in self.rows for i in S):
            raise InvalidInputError(f"{list(S)} is not a {self.matrix.cols}-subset of [{self.a}, {self.a + self.matrix.rows})")
        return self.matrix.minor([i - self.a + 1 for i in S], range(1, self.matrix.cols + 1))

    def rank_of_rows(self, b: int) -> int:
        """Rank of rows [a, b)"""
        rows = [self.matrix.row(i - self.a) for i in range(self.a, min(b, self.a + self.matrix.rows))]
        return _rank(rows)


def pivot_position(pivot: int, a: int, n: int) -> int:
    """theta_{a,j}: the integer in [a, a+n) congruent to the pivot row u(j) mod n"""
    return a + (pivot - a) % n


def u_truncation(M: EchelonMatrix, a: int) -> TruncatedWindow:
    n, k = M.n, M.k
    thetas = [pivot_position(pivot, a, n) for pivot in M.pivots]
    rows = []
    for i in range(a, a + n):
        row = periodic_row(M, i)
        rows.append([row[j] if i <= thetas[j] else 0 for j in range(k)])
    return TruncatedWindow(a=a, matrix=FieldMatrix(rows))


def trunc_minor(M: EchelonMatrix, a: int, S: Sequence[int]) -> Scalar:
    """Delta^{tr,a}_S(M)"""
    return u_truncation(M, a).minor(S)


def necklace_minors(M: EchelonMatrix, g: AffinePermutation) -> List[Scalar]:
    """Delta^{tr,a}_{I_a}(M) for a = 1..n, I the necklace of g."""
    I = necklace(g)
    return [trunc_minor(M, a, I[a]) for a in range(1, M.n + 1)]


# ===========================================
# LE-DIAGRAMS
# ===========================================

@dataclass(frozen=True)
class LeDiagram:
    """
    Boxes are (row, column), 1-based, row 1 on top. reading lists the boxes
    in reduced-word order: right to left, bottom to top.
    """

    n: int
    k: int
    shape: Tuple[int, ...]
    dots: Tuple[Tuple[int, int], ...]
    plus: Tuple[Tuple[int, int], ...]
    reading: Tuple[Tuple[int, int], ...]

    def label(self, box: Tuple[int, int]) -> int:
        """Box (i, j) carries s_{k+j-i}."""
        i, j = box
        return self.k + j - i

    @property
    def word(self) -> Tuple[int, ...]:
        return tuple(self.label(box) for box in self.reading)


def diagram_shape(w: Permutation, k: int) -> Tuple[int, ...]:
    """Row lengths of the Young diagram of w[k], longest first."""
    if not is_grassmannian(w, k):
        raise InvalidInputError(f"{w} is not a minimal coset representative for k={k}")
    values = w.subset(k)
    return tuple(values[k - i] - (k + 1 - i) for i in range(1, k + 1))


def le_diagram(v: Permutation, w: Permutation, k: int) -> LeDiagram:
    shape = diagram_shape(w, k)
    reading = tuple((i, j) for i in range(k, 0, -1) for j in range(shape[i - 1], 0, -1))
    diagram = LeDiagram(n=w.n, k=k, shape=shape, dots=(), plus=(), reading=reading)
    pse: PositiveSubexpression = positive_subexpression(v, diagram.word)
    dots = tuple(sorted(reading[j - 1] for j in pse.circle))
    plus = tuple(sorted(reading[j - 1] for j in pse.plus))
    return LeDiagram(n=w.n, k=k, shape=shape, dots=dots, plus=plus, reading=reading)


def render_le_diagram(diagram: LeDiagram) -> str:
    dots = set(diagram.dots)
    lines = []
    for i, length in enumerate(diagram.shape, start=1):
        if length == 0:
            lines.append("")
            continue
        cells = ["·" if (i, j) in dots else "+" for j in range(1, length + 1)]
        lines.append(" ".join(cells))
    return "\n".join(lines)


def le_report(v: Permutation, w: Permutation, k: int) -> LeDiagramReport:
    diagram = le_diagram(v, w, k)
    return LeDiagramReport(
        n=diagram.n, k=k, v=v.one_line(), w=w.one_line(), shape=list(diagram.shape),
        dots=[list(b) for b in diagram.dots], plus=[list(b) for b in diagram.plus],
        ascii=render_le_diagram(diagram),
    )


def necklace_report(h: AffinePermutation) -> NecklaceReport:
    return NecklaceReport(h=h.one_line(), n=h.n, k=h.av, necklace=necklace(h).to_json())


# ===========================================
# TOTAL NONNEGATIVITY
# ===========================================

def _rational_matrix(M: FieldMatrix) -> FieldMatrix:
    if not all(is_rational(M[i, j]) for i in range(M.rows) for j in range(M.cols)):
        raise OutsideDomainError("total nonnegativity needs rational entries")
    return M.map(to_rational)


def tnn_check(M) -> bool:
    """All maximal minors >= 0 after making the first nonzero one positive."""
    body = _rational_matrix(_matrix_of(M) if not isinstance(M, TruncatedWindow) else M.matrix)
    n, k = body.shape
    minors = [body.minor(S, range(1, k + 1)) for S in itertools.combinations(range(1, n + 1), k)]
    first = next((m for m in minors if m != 0), None)
    if first is None:
        return False
    sign = 1 if first > 0 else -1
    return all(sign * m >= 0 for m in minors)


@dataclass
class PositivityCheck:
    tnn: List[bool] = field(default_factory=list)
    minors: List[Scalar] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.tnn) and all(m > 0 for m in self.minors)

    def describe(self) -> Dict[str, List[str]]:
        return {"tnn": [str(t).lower() for t in self.tnn], "minors": [format_scalar(m) for m in self.minors]}


def cell_positivity_check(M: EchelonMatrix, g: AffinePermutation) -> PositivityCheck:
    """Every tr^a_u(M) is TNN and Delta^{tr,a}_{I_a(g)}(M) > 0, for a = 1..n."""
    M = EchelonMatrix(M.u, M.k, _rational_matrix(M.body))
    check = PositivityCheck()
    I = necklace(g)
    for a in range(1, M.n + 1):
        window = u_truncation(M, a)
        check.tnn.append(tnn_check(window))
        check.minors.append(to_rational(window.minor(I[a])))
    return check
