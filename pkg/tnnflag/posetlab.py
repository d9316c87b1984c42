"""
Cell Posets
===========
The face poset Q_J of the positroid cell decomposition of Gr(k, n), the
poset Bound(k, n) of bounded affine permutations under the opposite Bruhat
order, the isomorphism (v, w) -> v tau_lambda w^{-1} between them, the
interval image of psi, and generic analytics for finite posets (grading,
thinness, Moebius function, Eulerian check).

Posets are stored densely as numpy boolean relation matrices.
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from tnnflag.errors import InvalidInputError, OutsideDomainError
from tnnflag.logger import get_logger
from tnnflag.weyl import (
    AffinePermutation,
    Permutation,
    affine_rank,
    all_permutations,
    bound_permutations,
    bruhat_leq,
    bruhat_leq_affine,
    bruhat_lower_interval_affine,
    f_vw,
    grassmannian_index_set,
    is_grassmannian,
    lower_interval,
    parabolic_subgroup,
    tau_k,
    tau_u,
)

logger = get_logger(__name__)


# ===========================================
# FINITE POSETS
# ===========================================

class FinitePoset:
    """
    A finite poset on indexed elements.

    relation[i, j] is True iff elements[i] <= elements[j].
    """

    def __init__(self, elements: Sequence, relation: np.ndarray, rank: Optional[Sequence[int]] = None):
        self.elements = list(elements)
        self.relation = np.asarray(relation, dtype=bool)
        size = len(self.elements)
        if self.relation.shape != (size, size):
            raise InvalidInputError(f"relation of shape {self.relation.shape} for {size} elements")
        self.rank = None if rank is None else list(rank)
        self._index = {e: i for i, e in enumerate(self.elements)}

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, element) -> int:
        try:
            return self._index[element]
        except KeyError as exc:
            raise InvalidInputError(f"{element} is not an element of the poset") from exc

    def leq(self, x, y) -> bool:
        return bool(self.relation[self.index(x), self.index(y)])

    def is_partial_order(self) -> bool:
        R = self.relation
        reflexive = bool(np.all(np.diag(R)))
        antisymmetric = not np.any(R & R.T & ~np.eye(len(self), dtype=bool))
        composed = (R.astype(np.int64) @ R.astype(np.int64)) > 0
        transitive = not np.any(composed & ~R)
        return reflexive and antisymmetric and transitive

    @property
    def strict(self) -> np.ndarray:
        return self.relation & ~np.eye(len(self), dtype=bool)

    def covers(self) -> List[Tuple[int, int]]:
        """Pairs (i, j) with elements[i] covered by elements[j]."""
        S = self.strict
        S_int = S.astype(np.int64)
        cover = S & ~((S_int @ S_int) > 0)
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(cover))]

    def maximal(self) -> List[int]:
        return [i for i in range(len(self)) if not self.strict[i].any()]

    def minimal(self) -> List[int]:
        return [i for i in range(len(self)) if not self.strict[:, i].any()]

    def interval(self, i: int, j: int) -> List[int]:
        return [int(x) for x in np.nonzero(self.relation[i] & self.relation[:, j])[0]]

    def linear_extension(self) -> List[int]:
        below = self.relation.sum(axis=0)
        return sorted(range(len(self)), key=lambda i: (int(below[i]), i))

    def with_bottom(self, bottom="0") -> "FinitePoset":
        """Adjoin a new minimum; ranks shift up by one."""
        size = len(self)
        R = np.ones((size + 1, size + 1), dtype=bool)
        R[1:, 0] = False
        R[1:, 1:] = self.relation
        rank = None if self.rank is None else [0] + [r + 1 for r in self.rank]
        return FinitePoset([bottom] + self.elements, R, rank)

    def dual(self) -> "FinitePoset":
        rank = None if self.rank is None else [max(self.rank) - r for r in self.rank]
        return FinitePoset(self.elements, self.relation.T.copy(), rank)


@dataclass
class PosetAnalytics:
    graded: bool
    thin: bool
    eulerian: bool
    mobius: np.ndarray = field(repr=False)
    chain_length: np.ndarray = field(repr=False)


def mobius_matrix(P: FinitePoset) -> np.ndarray:
    """mu(x, x) = 1 and mu(x, y) = -sum of mu(x, z) over x <= z < y."""
    size = len(P)
    order = P.linear_extension()
    S = P.strict
    mu = np.zeros((size, size), dtype=np.int64)
    for x in range(size):
        mu[x, x] = 1
        for y in order:
            if y != x and P.relation[x, y]:
                mu[x, y] = -int(mu[x, S[:, y] & P.relation[x]].sum())
    return mu


def _chain_lengths(P: FinitePoset) -> Tuple[np.ndarray, np.ndarray]:
    """Longest and shortest maximal chain length of every interval; -1 when x is not below y."""
    size = len(P)
    order = P.linear_extension()
    lower_covers: Dict[int, List[int]] = {j: [] for j in range(size)}
    for i, j in P.covers():
        lower_covers[j].append(i)
    longest = np.full((size, size), -1, dtype=np.int64)
    shortest = np.full((size, size), -1, dtype=np.int64)
    for x in range(size):
        longest[x, x] = shortest[x, x] = 0
        for y in order:
            if y == x or not P.relation[x, y]:
                continue
            below = [z for z in lower_covers[y] if P.relation[x, z]]
            longest[x, y] = max(longest[x, z] for z in below) + 1
            shortest[x, y] = min(shortest[x, z] for z in below) + 1
    return longest, shortest


def poset_analytics(P: FinitePoset) -> PosetAnalytics:
    """
    graded: every interval has all maximal chains of one length (matching the
    rank function when one is given); thin: every length-2 interval has four
    elements; eulerian: mu(x, y) = (-1)^(length of [x, y]).
    """
    longest, shortest = _chain_lengths(P)
    comparable = P.relation
    graded = bool(np.all(longest[comparable] == shortest[comparable]))
    if graded and P.rank is not None:
        rank = np.asarray(P.rank)
        graded = bool(np.all((rank[None, :] - rank[:, None])[comparable] == longest[comparable]))

    thin = True
    for x, y in zip(*np.nonzero(longest == 2)):
        if len(P.interval(int(x), int(y))) != 4:
            thin = False
            break

    mu = mobius_matrix(P)
    expected = np.where(longest % 2 == 0, 1, -1)
    eulerian = graded and bool(np.all(mu[comparable] == expected[comparable]))
    return PosetAnalytics(graded=graded, thin=thin, eulerian=eulerian, mobius=mu, chain_length=longest)


def boolean_lattice(atoms: int) -> FinitePoset:
    subsets = [frozenset(c) for r in range(atoms + 1) for c in itertools.combinations(range(atoms), r)]
    R = np.array([[a <= b for b in subsets] for a in subsets], dtype=bool)
    return FinitePoset(subsets, R, [len(s) for s in subsets])


def chain(length: int) -> FinitePoset:
    R = np.triu(np.ones((length, length), dtype=bool))
    return FinitePoset(list(range(length)), R, list(range(length)))


# ===========================================
# Q_J
# ===========================================

@dataclass(frozen=True, order=True)
class QJElement:
    """(v, w) with w a minimal coset representative and v <= w."""

    v: Permutation
    w: Permutation

    @property
    def rank(self) -> int:
        return self.w.length() - self.v.length()

    def key(self) -> str:
        return f"v{self.v.key()}.w{self.w.key()}"

    def __str__(self) -> str:
        return f"({self.v}, {self.w})"


class BruhatTable:
    """Dense Bruhat order and multiplication on S_n, indexed by sorted one-line order."""

    def __init__(self, n: int):
        self.n = n
        self.perms = all_permutations(n)
        self.index = {p: i for i, p in enumerate(self.perms)}
        size = len(self.perms)
        leq = np.zeros((size, size), dtype=bool)
        for i, p in enumerate(self.perms):
            for q in lower_interval(p):
                leq[self.index[q], i] = True
        self.leq = leq

    def idx(self, p: Permutation) -> int:
        return self.index[p]


@lru_cache(maxsize=16)
def bruhat_table(n: int) -> BruhatTable:
    return BruhatTable(n)


def _parabolic(n: int, k: int) -> List[Permutation]:
    return parabolic_subgroup(n, grassmannian_index_set(n, k))


def qj_leq(a: QJElement, b: QJElement, k: int) -> bool:
    """(v, w) <= (v', w') iff v' <= v r <= w r <= w' for some r in W_J."""
    n = a.v.n
    if b.v.n != n:
        raise InvalidInputError("elements of different Q_J")
    table = bruhat_table(n)
    leq = table.leq
    vp, wp = table.idx(b.v), table.idx(b.w)
    for r in _parabolic(n, k):
        vr, wr = table.idx(a.v * r), table.idx(a.w * r)
        if leq[vp, vr] and leq[vr, wr] and leq[wr, wp]:
            return True
    return False


def qj_elements(n: int, k: int) -> List[QJElement]:
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"k={k} is not in [1, {n - 1}]")
    found = []
    for w in all_permutations(n):
        if is_grassmannian(w, k):
            found.extend(QJElement(v, w) for v in lower_interval(w))
    return sorted(found)


@lru_cache(maxsize=32)
def build_QJ(n: int, k: int) -> FinitePoset:
    """Q_J for J = [n-1] minus {k}, ranked by l(w) - l(v)."""
    elements = qj_elements(n, k)
    table = bruhat_table(n)
    leq = table.leq
    WJ = _parabolic(n, k)
    size = len(elements)

    # translated[r][e] = (index of v r, index of w r)
    vr = np.array([[table.idx(e.v * r) for e in elements] for r in WJ], dtype=np.int64)
    wr = np.array([[table.idx(e.w * r) for e in elements] for r in WJ], dtype=np.int64)
    v_idx = np.array([table.idx(e.v) for e in elements], dtype=np.int64)
    w_idx = np.array([table.idx(e.w) for e in elements], dtype=np.int64)

    R = np.zeros((size, size), dtype=bool)
    for ri in range(len(WJ)):
        middle = leq[vr[ri], wr[ri]]
        # rows: a, columns: b
        lower = leq[v_idx[None, :], vr[ri][:, None]]
        upper = leq[wr[ri][:, None], w_idx[None, :]]
        R |= lower & upper & middle[:, None]
    logger.debug(f"built Q_J for n={n}, k={k}: {size} elements")
    return FinitePoset(elements, R, [e.rank for e in elements])


def _affine_rank_vectors(cells: Sequence[AffinePermutation]) -> np.ndarray:
    n = cells[0].n
    reach = max(c.max_displacement() for c in cells) + n
    return np.array([
        [affine_rank(c, a, b) for a in range(1, n + 1) for b in range(a - reach, a + reach + 1)]
        for c in cells
    ], dtype=np.int64)


@lru_cache(maxsize=32)
def build_Bound(k: int, n: int) -> FinitePoset:
    """Bound(k, n) under the opposite Bruhat order, ranked by k(n-k) - l(f)."""
    cells = list(bound_permutations(k, n))
    ranks = _affine_rank_vectors(cells)
    # bruhat[i, j]: f_i <= f_j in Bruhat order
    bruhat = np.all(ranks[:, None, :] <= ranks[None, :, :], axis=2)
    return FinitePoset(cells, bruhat.T.copy(), [k * (n - k) - c.length() for c in cells])


def hat_QJ(n: int, k: int) -> FinitePoset:
    """Q_J with a minimum adjoined."""
    return build_QJ(n, k).with_bottom("0")


# ===========================================
# ISOMORPHISM AND PSI
# ===========================================

@dataclass
class IsoCheck:
    n: int
    k: int
    bijective: bool
    mismatches: List[Tuple[str, str]]

    @property
    def ok(self) -> bool:
        return self.bijective and not self.mismatches


def check_iso_QJ_Bound(n: int, k: int, limit: int = 20) -> IsoCheck:
    """Compare (v,w) <= (v',w') with f_{v,w} <=op f_{v',w'} over all pairs."""
    Q = build_QJ(n, k)
    B = build_Bound(k, n)
    images = [f_vw(e.v, e.w, k) for e in Q.elements]
    bijective = len(set(images)) == len(images) and set(images) == set(B.elements)
    mismatches: List[Tuple[str, str]] = []
    if bijective:
        perm = np.array([B.index(f) for f in images], dtype=np.int64)
        pulled = B.relation[np.ix_(perm, perm)]
        for i, j in zip(*np.nonzero(pulled != Q.relation)):
            mismatches.append((str(Q.elements[i]), str(Q.elements[j])))
            if len(mismatches) >= limit:
                break
    return IsoCheck(n=n, k=k, bijective=bijective, mismatches=mismatches)


def psi(v: Permutation, w: Permutation, k: int) -> AffinePermutation:
    """psi(v, w) = v tau_lambda w^{-1}"""
    if not bruhat_leq(v, w):
        raise OutsideDomainError(f"({v}, {w}) is not in Q_J")
    return f_vw(v, w, k)


def upper_set(u: Permutation, k: int) -> List[QJElement]:
    """Q_J above (u, u)."""
    Q = build_QJ(u.n, k)
    base = Q.index(QJElement(u, u))
    return [Q.elements[j] for j in np.nonzero(Q.relation[base])[0]]


def psi_interval_image(u: Permutation, k: int) -> FrozenSet[AffinePermutation]:
    return frozenset(psi(e.v, e.w, k) for e in upper_set(u, k))


def affine_interval(low: AffinePermutation, high: AffinePermutation) -> FrozenSet[AffinePermutation]:
    """{g : low <= g <= high} in Bruhat order."""
    return frozenset(g for g in bruhat_lower_interval_affine(high) if bruhat_leq_affine(low, g))


@dataclass
class PsiCheck:
    u: Permutation
    k: int
    image_matches: bool
    injective: bool
    order_reversing: bool

    @property
    def ok(self) -> bool:
        return self.image_matches and self.injective and self.order_reversing


def check_psi_interval(u: Permutation, k: int) -> PsiCheck:
    """psi maps the upper set of (u, u) bijectively and order-reversingly onto [tau_k, tau_{u lambda}]."""
    n = u.n
    Q = build_QJ(n, k)
    elements = upper_set(u, k)
    images = [psi(e.v, e.w, k) for e in elements]
    target = affine_interval(tau_k(n, k), tau_u(u, k))
    injective = len(set(images)) == len(images)

    positions = [Q.index(e) for e in elements]
    qj = Q.relation[np.ix_(positions, positions)]
    ranks = _affine_rank_vectors(images)
    bruhat = np.all(ranks[:, None, :] <= ranks[None, :, :], axis=2)
    order_reversing = bool(np.all(~qj | bruhat.T))
    return PsiCheck(u=u, k=k, image_matches=set(images) == target, injective=injective,
                    order_reversing=order_reversing)


def closure_ideal(v: Permutation, w: Permutation, k: int) -> List[QJElement]:
    """All cells in the closure of the cell (v, w)."""
    Q = build_QJ(v.n, k)
    top = Q.index(QJElement(v, w))
    return [Q.elements[i] for i in np.nonzero(Q.relation[:, top])[0]]


def minimal_elements(n: int, k: int) -> List[QJElement]:
    Q = build_QJ(n, k)
    return [Q.elements[i] for i in Q.minimal()]
