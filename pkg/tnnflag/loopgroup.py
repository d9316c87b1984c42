"""
Loop Group
==========
GL_n over Laurent polynomials in z at desk scale: Laurent matrices, their
periodic Z x Z realization, lattice rank invariants, affine Schubert and
Richardson cell location, the Snider chart, Birkhoff-type factorizations,
the Fomin-Shapiro maps and the loop-rotation torus action.

Z x Z convention: x~_{i, j + dn} is the z^d coefficient of x_{i,j}, and
x~_{i+n, j+n} = x~_{i,j}. Columns j < a of x~ span the lattice L_a(x);
E_b is spanned by coordinates >= b and F_b by coordinates < b.

    r_{a,b}(x) = dim(L_a ∩ E_b)          (opposite Schubert label h)
    q_{a,b}(x) = dim((F_b + L_a) / L_a)  (Schubert label f)
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from tnnflag.config import settings
from tnnflag.errors import (
    FactorizationError,
    InvalidInputError,
    InvariantViolation,
    LocateError,
    OutsideDomainError,
    WindowOverflowError,
)
from tnnflag.exactalg import LaurentPoly, Scalar, evaluate as evaluate_scalar, format_scalar, scalar
from tnnflag.logger import get_logger
from tnnflag.matrixcore import EchelonMatrix, FieldMatrix, solve_exact
from tnnflag.models import LaurentMatrixModel
from tnnflag.positroid import necklace_minors, rank_of_rows, u_truncation
from tnnflag.weyl import AffinePermutation, Permutation, affine_rank, bruhat_leq_affine, tau_u

logger = get_logger(__name__)

Position = Tuple[int, int]


# ===========================================
# LAURENT MATRICES
# ===========================================

class LaurentMatrix:
    """Immutable n x n matrix of Laurent polynomials in z."""

    __slots__ = ("n", "_entries", "_inverse")

    def __init__(self, entries: Sequence[Sequence]):
        grid = tuple(tuple(LaurentPoly.lift(a) for a in row) for row in entries)
        if any(len(row) != len(grid) for row in grid):
            raise InvalidInputError("Laurent matrices must be square")
        self.n = len(grid)
        self._entries = grid
        self._inverse: Optional["LaurentMatrix"] = None

    @classmethod
    def identity(cls, n: int) -> "LaurentMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def constant(cls, M: FieldMatrix) -> "LaurentMatrix":
        return cls(M.tolist())

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Tuple[int, int, int, Scalar]]) -> "LaurentMatrix":
        """Sum of c z^d E_{i,j} over 1-based (i, j, d, c)."""
        coeffs: List[List[Dict[int, Scalar]]] = [[{} for _ in range(n)] for _ in range(n)]
        for i, j, d, c in terms:
            cell = coeffs[i - 1][j - 1]
            cell[d] = cell[d] + c if d in cell else scalar(c)
        return cls([[LaurentPoly(cell) for cell in row] for row in coeffs])

    def __getitem__(self, key: Tuple[int, int]) -> LaurentPoly:
        """1-based entry."""
        i, j = key
        return self._entries[i - 1][j - 1]

    def terms(self) -> Iterable[Tuple[int, int, int, Scalar]]:
        """Nonzero (i, j, d, c), 1-based."""
        for i, row in enumerate(self._entries, start=1):
            for j, poly in enumerate(row, start=1):
                for d, c in poly.items():
                    yield i, j, d, c

    def tilde(self, p: int, q: int) -> Scalar:
        """The Z x Z entry x~_{p,q}."""
        shift, p0 = divmod(p - 1, self.n)
        d, q0 = divmod(q - 1 - shift * self.n, self.n)
        return self._entries[p0][q0].coeff(d)

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentMatrix) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"LaurentMatrix(n={self.n})\n{self.pretty()}"

    def __mul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        if not isinstance(other, LaurentMatrix):
            return self.map(lambda c: c * scalar(other))
        if other.n != self.n:
            raise InvalidInputError(f"cannot multiply {self.n} x {self.n} by {other.n} x {other.n}")
        n = self.n
        product = []
        for i in range(n):
            out = []
            for j in range(n):
                total = LaurentPoly.zero()
                for r in range(n):
                    a, b = self._entries[i][r], other._entries[r][j]
                    if a and b:
                        total = total + a * b
                out.append(total)
            product.append(out)
        return LaurentMatrix(product)

    def __add__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)])

    def __sub__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)])

    def map(self, fn) -> "LaurentMatrix":
        """Apply fn to every coefficient."""
        return LaurentMatrix([[poly.map_coefficients(fn) for poly in row] for row in self._entries])

    def evaluate(self, point) -> "LaurentMatrix":
        return self.map(lambda c: evaluate_scalar(c, point))

    def degree_range(self) -> Tuple[int, int]:
        degrees = [d for _, _, d, _ in self.terms()]
        return (min(degrees), max(degrees)) if degrees else (0, 0)

    def max_abs_degree(self) -> int:
        lo, hi = self.degree_range()
        return max(abs(lo), abs(hi))

    def at_degree(self, d: int) -> FieldMatrix:
        return FieldMatrix([[poly.coeff(d) for poly in row] for row in self._entries])

    # ---- determinant and inverse ------------------------------------

    def det(self) -> LaurentPoly:
        return _laurent_det(self._entries, tuple(range(self.n)))

    def valuation(self) -> int:
        """j with det = c z^{-j}"""
        d = self.det()
        if not d.is_monomial():
            raise OutsideDomainError(f"determinant {d.pretty()} is not a Laurent monomial")
        return -d.min_degree

    def inverse(self) -> "LaurentMatrix":
        if self._inverse is None:
            d = self.det()
            if not d.is_monomial():
                raise OutsideDomainError(f"determinant {d.pretty()} is not a Laurent monomial")
            (degree, leading), = d.items()
            factor = LaurentPoly.monomial(1 / leading, -degree)
            n = self.n
            adjugate = [[None] * n for _ in range(n)]
            for i in range(n):
                for j in range(n):
                    rows = [r for r in range(n) if r != j]
                    cols = tuple(c for c in range(n) if c != i)
                    cofactor = _laurent_det([self._entries[r] for r in rows], cols)
                    adjugate[i][j] = cofactor * factor if (i + j) % 2 == 0 else -(cofactor * factor)
            self._inverse = LaurentMatrix(adjugate)
        return self._inverse

    # ---- triangularity in Z x Z -------------------------------------

    def is_lower_unipotent(self) -> bool:
        """In U_-: no entries strictly above the Z x Z diagonal and ones on it."""
        for i, j, d, c in self.terms():
            if i < j + d * self.n:
                return False
        return all(self[i, i].coeff(0) == 1 for i in range(1, self.n + 1))

    def is_upper_invertible(self) -> bool:
        """In B(A_+): nothing strictly below the Z x Z diagonal, invertible diagonal."""
        for i, j, d, c in self.terms():
            if i > j + d * self.n:
                return False
        return all(self[i, i].coeff(0) != 0 for i in range(1, self.n + 1))

    # ---- output -----------------------------------------------------

    def to_model(self) -> LaurentMatrixModel:
        return LaurentMatrixModel(n=self.n, entries=[[poly.to_json() for poly in row] for row in self._entries])

    def pretty(self) -> str:
        cells = [["" if not poly else poly.pretty() for poly in row] for row in self._entries]
        width = max((len(c) for r in cells for c in r), default=1) or 1
        return "\n".join("[ " + "  ".join(c.rjust(width) for c in r) + " ]" for r in cells)


def _laurent_det(rows: Sequence[Sequence[LaurentPoly]], columns: Tuple[int, ...]) -> LaurentPoly:
    """Laplace expansion along the rows with memoized column subsets."""
    memo: Dict[Tuple[int, Tuple[int, ...]], LaurentPoly] = {}

    def expand(r: int, cols: Tuple[int, ...]) -> LaurentPoly:
        if not cols:
            return LaurentPoly.one()
        key = (r, cols)
        if key in memo:
            return memo[key]
        total = LaurentPoly.zero()
        for position, c in enumerate(cols):
            entry = rows[r][c]
            if not entry:
                continue
            term = entry * expand(r + 1, cols[:position] + cols[position + 1:])
            total = total + term if position % 2 == 0 else total - term
        memo[key] = total
        return total

    return expand(0, columns)


def affine_matrix(f: AffinePermutation) -> LaurentMatrix:
    """f-dot: entry (i, j) is z^{-d} when f(j) = i + dn."""
    n = f.n
    terms = []
    for j in range(1, n + 1):
        d, i0 = divmod(f(j) - 1, n)
        terms.append((i0 + 1, j, -d, 1))
    return LaurentMatrix.from_terms(n, terms)


def torus_scale(t, x: LaurentMatrix) -> LaurentMatrix:
    """Loop rotation: the Z x Z entry (p, q) is multiplied by t^(q - p)."""
    t = scalar(t)
    n = x.n
    return LaurentMatrix.from_terms(n, ((i, j, d, c * t ** (j + d * n - i)) for i, j, d, c in x.terms()))


# ===========================================
# PERIODIC REALIZATION
# ===========================================

@dataclass(frozen=True)
class PeriodicMatrix:
    """The block of x~ on rows and columns [1 - below*n, n + above*n]."""

    n: int
    below: int
    above: int
    block: FieldMatrix

    @property
    def first(self) -> int:
        return 1 - self.below * self.n

    @property
    def last(self) -> int:
        return self.n + self.above * self.n

    def __getitem__(self, key: Tuple[int, int]) -> Scalar:
        p, q = key
        if not (self.first <= p <= self.last and self.first <= q <= self.last):
            raise WindowOverflowError(f"({p}, {q}) is outside the window [{self.first}, {self.last}]")
        return self.block[p - self.first, q - self.first]

    def __mul__(self, other: "PeriodicMatrix") -> "PeriodicMatrix":
        if (self.n, self.below, self.above) != (other.n, other.below, other.above):
            raise InvalidInputError("periodic windows differ")
        return PeriodicMatrix(self.n, self.below, self.above, self.block * other.block)


def to_periodic(x: LaurentMatrix, below: int, above: int) -> PeriodicMatrix:
    """Window of x~ spanning `below` periods before [1, n] and `above` after."""
    if x.max_abs_degree() > min(below, above):
        raise WindowOverflowError(
            f"window of {below}+{above} periods is too small for z-degrees {x.degree_range()}"
        )
    first = 1 - below * x.n
    size = (below + above + 1) * x.n
    block = FieldMatrix.from_function(size, size, lambda r, c: x.tilde(first + r, first + c))
    return PeriodicMatrix(x.n, below, above, block)


# ===========================================
# LATTICE RANK INVARIANTS
# ===========================================

def _incremental_ranks(rows: Sequence[Sequence[Scalar]]) -> List[int]:
    """ranks[m] = rank of rows[:m]"""
    basis: Dict[int, List[Scalar]] = {}
    ranks = [0]
    for row in rows:
        v = list(row)
        for c in sorted(basis):
            if v[c] != 0:
                factor = v[c]
                v = [a - factor * b for a, b in zip(v, basis[c])]
        lead = next((c for c, a in enumerate(v) if a != 0), None)
        if lead is not None:
            pivot = v[lead]
            basis[lead] = [a / pivot for a in v]
        ranks.append(len(basis))
    return ranks


def _band(degree: int, n: int) -> int:
    return (degree + 1) * n - 1


class LatticeWindow:
    """
    Finite window computing r_{a,b} and q_{a,b} for b in [b_lo, b_hi].

    Rows [lo, hi) and columns [lo - band, a) of x~; lo is low enough that
    F_lo lies inside L_a, which is checked on every window.
    """

    def __init__(self, x: LaurentMatrix, a: int, b_lo: int, b_hi: int, padding: Optional[int] = None):
        n = x.n
        padding = settings.window_padding if padding is None else padding
        band = _band(x.max_abs_degree(), n)
        band_inverse = _band(x.inverse().max_abs_degree(), n)
        self.a = a
        self.lo = min(a - band_inverse, b_lo) - padding * n
        self.hi = max(a + band, b_hi) + 1
        columns = range(self.lo - band, a)
        rows = [[x.tilde(p, q) for q in columns] for p in range(self.lo, self.hi)]
        self._prefix = _incremental_ranks(rows)
        self._suffix = _incremental_ranks(rows[::-1])
        self.total = self._prefix[-1]
        if self.total - self._suffix[self.hi - self.lo - n] != n:
            raise WindowOverflowError(
                f"lattice window for a={a} does not contain F_{self.lo + n}",
                {"a": a, "lo": self.lo, "hi": self.hi},
            )

    def _check(self, b: int) -> None:
        if not self.lo <= b <= self.hi:
            raise WindowOverflowError(f"b={b} outside the lattice window [{self.lo}, {self.hi}]")

    def r(self, b: int) -> int:
        self._check(b)
        return self.total - self._prefix[b - self.lo]

    def q(self, b: int) -> int:
        self._check(b)
        return (b - self.lo) - self.total + self._suffix[self.hi - b]


def rank_invariant(x: LaurentMatrix, a: int, b: int) -> int:
    """r_{a,b}(x) = dim(L_a(x) ∩ E_b)"""
    return LatticeWindow(x, a, b, b).r(b)


def corank_invariant(x: LaurentMatrix, a: int, b: int) -> int:
    """q_{a,b}(x) = dim((F_b + L_a(x)) / L_a(x))"""
    return LatticeWindow(x, a, b, b).q(b)


def affine_corank(f: AffinePermutation, a: int, b: int) -> int:
    """q_{a,b}(f) = #{j >= a : f(j) < b}"""
    return sum(1 for j in range(a, b + f.max_displacement()) if f(j) < b)


@dataclass(frozen=True)
class AffineCellLabel:
    """y·B lies in the opposite Schubert cell of h and the Schubert cell of f."""

    h: AffinePermutation
    f: AffinePermutation
    g: Optional[AffinePermutation] = None


def _locate_windows(y: LaurentMatrix) -> Tuple[List[LatticeWindow], range]:
    n = y.n
    spread = _band(y.max_abs_degree(), n) + n
    windows = [LatticeWindow(y, a, 1 - spread, n + 1 + spread) for a in range(1, n + 2)]
    return windows, range(1 - spread, n + 1 + spread)


def richardson_locate(y: LaurentMatrix, f_upper: Optional[AffinePermutation] = None) -> AffineCellLabel:
    """
    Cell labels from the rank jumps

        r_{a+1,b} - r_{a,b} = [h(a) >= b],   q_{a,b} - q_{a+1,b} = [f(a) < b],

    re-checked against every r_{a,b}(h) and q_{a,b}(f) in the window.
    """
    n = y.n
    windows, span = _locate_windows(y)
    h_window, f_window = [], []
    for a in range(1, n + 1):
        here, there = windows[a - 1], windows[a]
        h_jumps = [b for b in span if there.r(b) - here.r(b) == 1]
        f_jumps = [b for b in span if here.q(b) - there.q(b) == 1]
        if not h_jumps or not f_jumps:
            raise LocateError(f"no rank jump for a={a}", {"a": a})
        h_window.append(max(h_jumps))
        f_window.append(min(f_jumps) - 1)
    try:
        h = AffinePermutation(tuple(h_window))
        f = AffinePermutation(tuple(f_window))
    except InvalidInputError as exc:
        raise LocateError(f"rank jumps {h_window} / {f_window} do not form affine permutations") from exc

    for a in range(1, n + 1):
        window = windows[a - 1]
        for b in span:
            if window.r(b) != affine_rank(h, a, b) or window.q(b) != affine_corank(f, a, b):
                raise LocateError(f"rank invariants at ({a}, {b}) do not match {h} / {f}", {"a": a, "b": b})
    if not bruhat_leq_affine(h, f):
        raise LocateError(f"empty Richardson cell: {h} is not below {f}")
    if f_upper is not None and not bruhat_leq_affine(h, f_upper):
        raise LocateError(f"{h} is not below {f_upper}", {"h": str(h), "upper": str(f_upper)})
    logger.debug("located cell", extra={"h": str(h), "f": str(f)})
    return AffineCellLabel(h=h, f=f)


def schubert_locate(y: LaurentMatrix) -> AffinePermutation:
    return richardson_locate(y).f


# ===========================================
# SNIDER CHART
# ===========================================

def snider_phi(u: Permutation, M: EchelonMatrix) -> LaurentMatrix:
    """
    y_{i,j} = delta_{i,j} if j is not in u[k]; otherwise, with j = u(s),
    y_{i,j} = -M_{i,s} for i > j and M_{i,s}/z for i <= j.
    """
    if M.u != u:
        raise InvalidInputError(f"matrix is in {M.u}-echelon form, not {u}")
    n, k = M.n, M.k
    column_of = {pivot: s for s, pivot in enumerate(M.pivots, start=1)}
    terms = []
    for j in range(1, n + 1):
        if j not in column_of:
            terms.append((j, j, 0, 1))
            continue
        s = column_of[j]
        for i in range(1, n + 1):
            entry = M.entry(i, s)
            if entry == 0:
                continue
            terms.append((i, j, 0, -entry) if i > j else (i, j, -1, entry))
    return LaurentMatrix.from_terms(n, terms)


def snider_rank_invariant(M: EchelonMatrix, a: int, b: int) -> int:
    """r_{a,b}(phi_u(M)) from the basis {t^i : i < a} and the truncated window tr^a."""
    if b <= a:
        return (a - b) + M.k
    return M.k - u_truncation(M, a).rank_of_rows(b)


def snider_rank_identity(M: EchelonMatrix) -> Optional[Tuple[int, int]]:
    """
    First (a, b) with a <= b <= a + n where r_{a,b}(phi_u(M)) + rank(M; a, b) != k,
    or None when the identity holds over one period.
    """
    n, k = M.n, M.k
    y = snider_phi(M.u, M)
    for a in range(1, n + 1):
        window = LatticeWindow(y, a, a, a + n)
        for b in range(a, a + n + 1):
            if window.r(b) + rank_of_rows(M, a, b) != k:
                return a, b
    return None


def locate_snider(M: EchelonMatrix) -> AffinePermutation:
    """h with phi_u(M)·B in the opposite Schubert cell of h."""
    n = M.n
    window = []
    for a in range(1, n + 1):
        jumps = [b for b in range(a, a + n + 1)
                 if snider_rank_invariant(M, a + 1, b) - snider_rank_invariant(M, a, b) == 1]
        window.append(max(jumps))
    return AffinePermutation(tuple(window))


def snider_inverse(u: Permutation, p: LaurentMatrix, k: int) -> EchelonMatrix:
    """
    The echelon matrix M with phi_u(M)·B = p·B.

    Solves p·B = phi_u(M) column by column, linear in the entries of B and
    the free entries of M.
    """
    n = p.n
    if p.valuation() != k:
        raise FactorizationError(f"valuation {p.valuation()} differs from k={k}")
    pivots = u.subset(k)
    free_rows = [i for i in range(1, n + 1) if i not in pivots]
    depth = max(0, p.inverse().degree_range()[1])
    p_lo, p_hi = p.degree_range()
    body = [[scalar(1 if (i in pivots and pivots.index(i) == s) else 0) for s in range(k)] for i in range(1, n + 1)]

    for j in range(1, n + 1):
        b_unknowns = [(r, d) for d in range(0, depth + 1) for r in range(1, n + 1) if d > 0 or r <= j]
        s = pivots.index(j) + 1 if j in pivots else None
        m_unknowns = free_rows if s is not None else []
        index = {("B",) + key: m for m, key in enumerate(b_unknowns)}
        index.update({("M", i): len(b_unknowns) + m for m, i in enumerate(m_unknowns)})
        equations, rhs = [], []
        for i in range(1, n + 1):
            for e in range(min(p_lo, -1), max(p_hi + depth, 0) + 1):
                eq = {}
                for (r, d) in b_unknowns:
                    c = p[i, r].coeff(e - d)
                    if c != 0:
                        eq[index[("B", r, d)]] = c
                target = scalar(0)
                if s is None:
                    target = scalar(1 if (i == j and e == 0) else 0)
                elif i <= j and e == -1:
                    if i in free_rows:
                        eq[index[("M", i)]] = scalar(-1)
                    else:
                        target = body[i - 1][s - 1]
                elif i > j and e == 0:
                    if i in free_rows:
                        eq[index[("M", i)]] = scalar(1)
                    else:
                        target = -body[i - 1][s - 1]
                if eq or target != 0:
                    equations.append(eq)
                    rhs.append(target)
        solution = solve_exact(equations, rhs, len(index))
        if not solution.unique:
            raise FactorizationError(f"p·B is not in the Snider chart of {u} (column {j})")
        for i in m_unknowns:
            body[i - 1][s - 1] = solution.values[index[("M", i)]]
    return EchelonMatrix(u, k, FieldMatrix(body))


# ===========================================
# BIRKHOFF FACTORIZATION
# ===========================================

@dataclass(frozen=True)
class BirkhoffFactors:
    """z0 = minus · plus with minus in U_- and plus in B(A_+); minus_inverse = minus^{-1}."""

    minus: LaurentMatrix
    plus: LaurentMatrix
    minus_inverse: LaurentMatrix


def birkhoff_factorize(z0: LaurentMatrix) -> BirkhoffFactors:
    """
    Solve L·z0 = plus row by row for L in U_- of z-depth at most
    -mindeg(z0^{-1}); infeasibility means z0 is outside B_-·B.
    """
    n = z0.n
    if z0.valuation() != 0:
        raise FactorizationError(f"valuation {z0.valuation()} is not zero")
    depth = max(0, -z0.inverse().degree_range()[0])
    z_lo, _ = z0.degree_range()
    terms = []
    for i in range(1, n + 1):
        unknowns = [(j, d) for d in range(-depth, 1) for j in range(1, n + 1) if d < 0 or j < i]
        equations, rhs = [], []
        for c in range(1, n + 1):
            for e in range(z_lo - depth, 1):
                if e == 0 and c >= i:
                    continue
                eq = {}
                for m, (j, d) in enumerate(unknowns):
                    coefficient = z0[j, c].coeff(e - d)
                    if coefficient != 0:
                        eq[m] = coefficient
                constant = z0[i, c].coeff(e)
                if eq or constant != 0:
                    equations.append(eq)
                    rhs.append(-constant)
        solution = solve_exact(equations, rhs, len(unknowns))
        if not solution.consistent:
            raise FactorizationError(f"no Birkhoff factorization (row {i})", {"row": i})
        terms.append((i, i, 0, 1))
        terms.extend((i, j, d, solution.values[m]) for m, (j, d) in enumerate(unknowns) if solution.values[m] != 0)
    L = LaurentMatrix.from_terms(n, terms)
    plus = L * z0
    if not plus.is_upper_invertible() or plus.degree_range()[0] < 0:
        raise InvariantViolation("Birkhoff plus factor is not in B(A_+)", {"plus": plus.pretty()})
    return BirkhoffFactors(minus=L.inverse(), plus=plus, minus_inverse=L)


def loop_involution(x: LaurentMatrix) -> LaurentMatrix:
    """A(z) -> w0 A(1/z) w0; swaps the Z x Z upper and lower triangles."""
    n = x.n
    return LaurentMatrix.from_terms(n, ((n + 1 - i, n + 1 - j, -d, c) for i, j, d, c in x.terms()))


def _is_unipotent_upper(x: LaurentMatrix) -> bool:
    return x.is_upper_invertible() and all(x[i, i].coeff(0) == 1 for i in range(1, x.n + 1))


def lu_unipotent(q: LaurentMatrix) -> Tuple[LaurentMatrix, LaurentMatrix]:
    """q = L·U with L lower unipotent and U upper unipotent in Z x Z."""
    factors = birkhoff_factorize(q)
    if not _is_unipotent_upper(factors.plus):
        raise FactorizationError("upper factor is not unipotent")
    return factors.minus, factors.plus


def ul_unipotent(q: LaurentMatrix) -> Tuple[LaurentMatrix, LaurentMatrix]:
    """q = U·L, through the involution that exchanges the two triangles."""
    lower, upper = lu_unipotent(loop_involution(q))
    return loop_involution(lower), loop_involution(upper)


def cg_membership(u: Permutation, M: EchelonMatrix, g: AffinePermutation) -> bool:
    """
    Whether phi_u(M) lies in C_g: all truncated necklace minors of g are
    nonzero (route 1), and g-dot^{-1}·phi_u(M) factors as U_-·B(A_+) (route 2).
    """
    if not bruhat_leq_affine(g, tau_u(u, M.k)):
        raise OutsideDomainError(f"{g} is not below tau_u for u={u}", {"g": str(g), "u": str(u)})
    by_minors = all(m != 0 for m in necklace_minors(M, g))
    z0 = affine_matrix(g).inverse() * snider_phi(u, M)
    try:
        birkhoff_factorize(z0)
        by_factorization = True
    except FactorizationError:
        by_factorization = False
    if by_minors != by_factorization:
        raise InvariantViolation(
            "C_g membership routes disagree",
            {"minors": by_minors, "factorization": by_factorization, "g": str(g), "u": str(u)},
        )
    return by_minors


# ===========================================
# FOMIN-SHAPIRO MAPS
# ===========================================

def inversion_positions(g: AffinePermutation) -> List[Position]:
    """Z x Z positions (g(i), g(j)) with i in [1, n], j < i and g(j) > g(i)."""
    positions = []
    reach = g.max_displacement()
    for i in range(1, g.n + 1):
        for j in range(g(i) - reach, i):
            if g(j) > g(i):
                positions.append((g(i), g(j)))
    return sorted(positions)


def _position_term(n: int, position: Position) -> Tuple[int, int, int]:
    p, q = position
    shift, p0 = divmod(p - 1, n)
    d, q0 = divmod(q - 1 - shift * n, n)
    return p0 + 1, q0 + 1, d


def unipotent(n: int, positions: Sequence[Position], values: Sequence[Scalar]) -> LaurentMatrix:
    """I plus values at the given Z x Z positions (and their translates)."""
    terms = [(i, i, 0, 1) for i in range(1, n + 1)]
    for position, c in zip(positions, values):
        i, j, d = _position_term(n, position)
        terms.append((i, j, d, c))
    return LaurentMatrix.from_terms(n, terms)


def _unit(n: int, position: Position) -> LaurentMatrix:
    i, j, d = _position_term(n, position)
    return LaurentMatrix.from_terms(n, [(i, j, d, 1)])


def _solve_lower(base: LaurentMatrix, pieces: Sequence[LaurentMatrix]) -> List[Scalar]:
    """Coefficients c with base + sum c_m pieces[m] having nothing strictly above the Z x Z diagonal."""
    n = base.n
    columns: Dict[Tuple[int, int, int], Dict[int, Scalar]] = {}
    constants: Dict[Tuple[int, int, int], Scalar] = {}
    for i, j, d, c in base.terms():
        if i < j + d * n:
            constants[(i, j, d)] = c
    for m, piece in enumerate(pieces):
        for i, j, d, c in piece.terms():
            if i < j + d * n:
                columns.setdefault((i, j, d), {})[m] = c
    keys = sorted(set(columns) | set(constants))
    solution = solve_exact([columns.get(key, {}) for key in keys],
                           [-constants.get(key, scalar(0)) for key in keys], len(pieces))
    if not solution.unique:
        raise FactorizationError("U_1(g)·U_2(g) split is infeasible")
    return [solution.values[m] for m in range(len(pieces))]


@dataclass
class FSDecomposition:
    """
    y = q1·q2·g-dot·plus = q2'·q1'·g-dot·plus with q1, q1' in U_1(g) and
    q2, q2' in U_2(g); y1 = q1^{-1} and y2 = q2'^{-1}.
    """

    g: AffinePermutation
    positions: List[Position]
    birkhoff: BirkhoffFactors
    q2: LaurentMatrix
    y1: LaurentMatrix
    y2: LaurentMatrix
    image1: LaurentMatrix
    image2: LaurentMatrix
    coordinates: Dict[Position, Scalar] = field(default_factory=dict)
    support_ok: bool = True


def fs_nu(y: LaurentMatrix, g: AffinePermutation) -> FSDecomposition:
    n = y.n
    g_dot = affine_matrix(g)
    g_inv = g_dot.inverse()
    birkhoff = birkhoff_factorize(g_inv * y)
    q = g_dot * birkhoff.minus * g_inv
    q_inv = g_dot * birkhoff.minus_inverse * g_inv
    positions = inversion_positions(g)
    units = [_unit(n, position) for position in positions]

    c = _solve_lower(q_inv, [q_inv * e for e in units])
    q1 = unipotent(n, positions, c)
    y1 = q1.inverse()
    q2 = y1 * q

    c_prime = _solve_lower(q_inv, [e * q_inv for e in units])
    q1_prime = unipotent(n, positions, c_prime)
    y2 = q1_prime * q_inv

    support_ok = all(
        (g_inv * m * g_dot).is_lower_unipotent() and m.is_lower_unipotent() for m in (q2, y2)
    )
    if not support_ok:
        raise InvariantViolation(f"U_2(g) support check failed for {g}", {"g": str(g)})
    decomposition = FSDecomposition(
        g=g, positions=positions, birkhoff=birkhoff, q2=q2, y1=y1, y2=y2,
        image1=y1 * y, image2=y2 * y,
        coordinates=dict(zip(positions, c_prime)), support_ok=support_ok,
    )
    _check_fs_split(y, decomposition)
    return decomposition


def _check_fs_split(y: LaurentMatrix, decomposition: FSDecomposition) -> None:
    """image1 lies in the cell (g, f) and image2 in (h, g), where y lies in (h, f)."""
    g = decomposition.g
    label = richardson_locate(y)
    if not (bruhat_leq_affine(label.h, g) and bruhat_leq_affine(g, label.f)):
        raise InvariantViolation(
            f"{g} is not between the labels {label.h} / {label.f} of a chart point",
            {"g": str(g), "h": str(label.h), "f": str(label.f)},
        )
    first = richardson_locate(decomposition.image1)
    second = richardson_locate(decomposition.image2)
    if (first.h, first.f) != (g, label.f) or (second.h, second.f) != (label.h, g):
        raise InvariantViolation(
            f"split of ({label.h}, {label.f}) through {g} landed in "
            f"({first.h}, {first.f}) and ({second.h}, {second.f})",
            {"g": str(g), "h": str(label.h), "f": str(label.f)},
        )
    logger.debug("FS split verified", extra={"g": str(g), "h": str(label.h), "f": str(label.f)})


@dataclass(frozen=True)
class FSChart:
    """M1 in the cell of g and the inversion-position coordinates of M."""

    cell_point: EchelonMatrix
    coordinates: Dict[Position, Scalar]
    decomposition: FSDecomposition


def fs_chart(u: Permutation, M: EchelonMatrix, g: AffinePermutation) -> FSChart:
    decomposition = fs_nu(snider_phi(u, M), g)
    M1 = snider_inverse(u, decomposition.image1, M.k)
    return FSChart(cell_point=M1, coordinates=decomposition.coordinates, decomposition=decomposition)


def cone_norm(coordinates: Dict[Position, Scalar]) -> Scalar:
    """Exact squared Euclidean norm of the coordinates."""
    total = scalar(0)
    for c in coordinates.values():
        total = total + c * c
    return total


def dilate_coordinates(coordinates: Dict[Position, Scalar], t) -> Dict[Position, Scalar]:
    t = scalar(t)
    return {(p, q): c * t ** (q - p) for (p, q), c in coordinates.items()}


def fs_dilate(u: Permutation, M: EchelonMatrix, g: AffinePermutation, t) -> EchelonMatrix:
    """The point with the same cell component as M and coordinates scaled by the torus."""
    n = M.n
    decomposition = fs_nu(snider_phi(u, M), g)
    scaled = dilate_coordinates(decomposition.coordinates, t)
    positions = decomposition.positions
    q1_prime = unipotent(n, positions, [scaled[p] for p in positions])
    base = decomposition.q2 * q1_prime.inverse()
    c = _solve_lower(base, [_unit(n, p) * base for p in positions])
    q1 = unipotent(n, positions, c)
    return snider_inverse(u, q1 * decomposition.q2 * affine_matrix(g), M.k)


def format_position(position: Position) -> str:
    return f"({position[0]},{position[1]})"


def format_coordinates(coordinates: Dict[Position, Scalar]) -> Dict[str, str]:
    return {format_position(p): format_scalar(c) for p, c in sorted(coordinates.items())}
