"""
Symmetric and Affine Symmetric Groups
=====================================
Permutations of [n] in one-line notation and affine permutations of Z in
window notation, with the order-theoretic machinery used by the cell
posets: lengths, Bruhat orders (fast criteria plus brute-force oracles),
Demazure products, parabolic factorizations and positive subexpressions.

All values are immutable and hashable; composition is right-to-left,
(x * y)(i) = x(y(i)).
"""

import itertools
import re
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from tnnflag.errors import InvalidInputError, InvariantViolation, OutsideDomainError

ReducedWord = Tuple[int, ...]


# ===========================================
# FINITE PERMUTATIONS
# ===========================================

@dataclass(frozen=True)
class Permutation:
    """An element of S_n, stored as the images (w(1), ..., w(n))."""

    images: Tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise InvalidInputError(f"not a permutation: {list(images)}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def simple(cls, n: int, i: int) -> "Permutation":
        if not 1 <= i < n:
            raise InvalidInputError(f"s{i} is not a simple reflection of S_{n}")
        images = list(range(1, n + 1))
        images[i - 1], images[i] = images[i], images[i - 1]
        return cls(tuple(images))

    @classmethod
    def from_word(cls, n: int, word: Iterable[int]) -> "Permutation":
        """The product s_{i1} s_{i2} ... of the letters of word."""
        images = list(range(1, n + 1))
        for i in word:
            if not 1 <= i < n:
                raise InvalidInputError(f"s{i} is not a simple reflection of S_{n}")
            images[i - 1], images[i] = images[i], images[i - 1]
        return cls(tuple(images))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        _same_n(self, other)
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for position, value in enumerate(self.images, start=1):
            inv[value - 1] = position
        return Permutation(tuple(inv))

    def length(self) -> int:
        return _inversions(self.images)

    def is_identity(self) -> bool:
        return self.images == tuple(range(1, self.n + 1))

    def right_descents(self) -> List[int]:
        return [i for i in range(1, self.n) if self.images[i - 1] > self.images[i]]

    def left_descents(self) -> List[int]:
        return self.inverse().right_descents()

    def subset(self, k: int) -> Tuple[int, ...]:
        """w[k] = {w(1), ..., w(k)}, sorted."""
        return tuple(sorted(self.images[:k]))

    def one_line(self) -> str:
        return "[" + ",".join(str(x) for x in self.images) + "]"

    def key(self) -> str:
        return "".join(str(x) for x in self.images) if self.n < 10 else "-".join(str(x) for x in self.images)

    def __str__(self) -> str:
        return self.one_line()

    def __lt__(self, other: "Permutation") -> bool:
        return self.images < other.images


def _same_n(x, y) -> None:
    if x.n != y.n:
        raise InvalidInputError(f"mismatched sizes: n={x.n} and n={y.n}")


def _inversions(values: Sequence[int]) -> int:
    return sum(1 for i, j in itertools.combinations(range(len(values)), 2) if values[i] > values[j])


def all_permutations(n: int) -> List[Permutation]:
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


_WORD_LETTER = re.compile(r"s(\d+)")


def parse_permutation(text: str, n: Optional[int] = None) -> Permutation:
    """
    Accepts one-line "[3,4,1,2]" or a word "s3s2", "s3*s2", "3,2".
    Words and the identity ("id", "e") need n.
    """
    raw = text.strip()
    if raw.startswith("["):
        try:
            images = tuple(int(x) for x in raw.strip("[]").split(",") if x.strip())
        except ValueError as exc:
            raise InvalidInputError(f"malformed permutation {text!r}") from exc
        w = Permutation(images)
        if n is not None and w.n != n:
            raise InvalidInputError(f"{text} is not in S_{n}")
        return w
    if n is None:
        raise InvalidInputError(f"word form {text!r} needs n")
    compact = raw.replace("*", "").replace(" ", "")
    if compact in ("", "id", "e", "1"):
        return Permutation.identity(n)
    if compact.startswith("s"):
        if _WORD_LETTER.sub("", compact):
            raise InvalidInputError(f"malformed word {text!r}")
        letters = [int(x) for x in _WORD_LETTER.findall(compact)]
    else:
        try:
            letters = [int(x) for x in compact.split(",") if x]
        except ValueError as exc:
            raise InvalidInputError(f"malformed word {text!r}") from exc
    return Permutation.from_word(n, letters)


def reduced_word(w: Permutation) -> ReducedWord:
    """Lexicographically first reduced word: peel the smallest left descent."""
    letters = []
    current = w
    while not current.is_identity():
        i = current.left_descents()[0]
        letters.append(i)
        current = Permutation.simple(w.n, i) * current
    return tuple(letters)


def is_reduced(n: int, word: Sequence[int]) -> bool:
    return Permutation.from_word(n, word).length() == len(word)


# ===========================================
# BRUHAT ORDER
# ===========================================

@lru_cache(maxsize=8192)
def _rank_matrix(w: Permutation) -> np.ndarray:
    """Entry (i-1, j-1) counts a <= i with w(a) >= j."""
    n = w.n
    P = np.zeros((n, n), dtype=np.int64)
    P[np.arange(n), np.array(w.images) - 1] = 1
    return np.cumsum(np.cumsum(P[:, ::-1], axis=1)[:, ::-1], axis=0)


def bruhat_leq(u: Permutation, v: Permutation) -> bool:
    _same_n(u, v)
    return bool(np.all(_rank_matrix(u) <= _rank_matrix(v)))


def lower_interval(w: Permutation) -> FrozenSet[Permutation]:
    """{u : u <= w}, as the products of subwords of a reduced word of w."""
    return _lower_interval(w)


@lru_cache(maxsize=4096)
def _lower_interval(w: Permutation) -> FrozenSet[Permutation]:
    reached = {Permutation.identity(w.n)}
    for i in reduced_word(w):
        s = Permutation.simple(w.n, i)
        reached |= {x * s for x in reached}
    return frozenset(reached)


def bruhat_leq_subword(u: Permutation, v: Permutation) -> bool:
    """Subword-property oracle for bruhat_leq."""
    _same_n(u, v)
    return u in _lower_interval(v)


# ===========================================
# PARABOLIC COMBINATORICS
# ===========================================

def grassmannian_index_set(n: int, k: int) -> FrozenSet[int]:
    """J = [n-1] minus {k}"""
    return frozenset(i for i in range(1, n) if i != k)


def _blocks(n: int, J: Iterable[int]) -> List[Tuple[int, ...]]:
    J = set(J)
    if any(not 1 <= j < n for j in J):
        raise InvalidInputError(f"index set {sorted(J)} is not inside [1, {n - 1}]")
    blocks, current = [], [1]
    for i in range(1, n):
        if i in J:
            current.append(i + 1)
        else:
            blocks.append(tuple(current))
            current = [i + 1]
    blocks.append(tuple(current))
    return blocks


def parabolic_subgroup(n: int, J: Iterable[int]) -> List[Permutation]:
    """All elements of W_J, i.e. permutations preserving each block of J."""
    blocks = _blocks(n, J)
    elements = []
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        images = [0] * n
        for block, image in zip(blocks, choice):
            for position, value in zip(block, image):
                images[position - 1] = value
        elements.append(Permutation(tuple(images)))
    return sorted(elements)


def parabolic_factorize(w: Permutation, J: Iterable[int]) -> Tuple[Permutation, Permutation]:
    """w = w1 * w2 with w1 in W^J minimal in w W_J and w2 in W_J."""
    images = list(w.images)
    for block in _blocks(w.n, J):
        values = sorted(images[p - 1] for p in block)
        for position, value in zip(block, values):
            images[position - 1] = value
    w1 = Permutation(tuple(images))
    return w1, w1.inverse() * w


def is_grassmannian(w: Permutation, k: int) -> bool:
    """w in W^J for J = [n-1] minus {k}"""
    head, tail = w.images[:k], w.images[k:]
    return list(head) == sorted(head) and list(tail) == sorted(tail)


def longest_parabolic(n: int, k: int) -> Permutation:
    """w_J = [k, ..., 1, n, ..., k+1]"""
    return Permutation(tuple(range(k, 0, -1)) + tuple(range(n, k, -1)))


def max_grassmannian(n: int, k: int) -> Permutation:
    """w^J = [n-k+1, ..., n, 1, ..., n-k]"""
    return Permutation(tuple(range(n - k + 1, n + 1)) + tuple(range(1, n - k + 1)))


def grassmannian_from_subset(n: int, subset: Iterable[int]) -> Permutation:
    head = sorted(subset)
    tail = [i for i in range(1, n + 1) if i not in head]
    return Permutation(tuple(head + tail))


def grassmannian_reps(n: int, k: int) -> List[Tuple[Permutation, Tuple[int, ...]]]:
    """Pairs (u, u[k]) for all u in W^J, ordered by u[k]."""
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"k={k} is not in [1, {n - 1}]")
    return [(grassmannian_from_subset(n, s), s) for s in itertools.combinations(range(1, n + 1), k)]


# ===========================================
# DEMAZURE PRODUCTS
# ===========================================

def demazure_star(x: Permutation, y: Permutation) -> Permutation:
    """x * y: fold the letters of y, multiplying only when the length grows."""
    _same_n(x, y)
    result = x
    for i in reduced_word(y):
        candidate = result * Permutation.simple(x.n, i)
        if candidate.length() > result.length():
            result = candidate
    return result


def demazure_tri(x: Permutation, y: Permutation) -> Permutation:
    """x <| y = min{x v : v <= y}"""
    _same_n(x, y)
    result = x
    for i in reduced_word(y):
        candidate = result * Permutation.simple(x.n, i)
        if candidate.length() < result.length():
            result = candidate
    return result


def _bruhat_extreme(candidates: Set[Permutation], maximum: bool) -> Permutation:
    ordered = sorted(candidates, key=lambda p: p.length(), reverse=maximum)
    best = ordered[0]
    for other in ordered:
        if not (bruhat_leq(other, best) if maximum else bruhat_leq(best, other)):
            raise InvariantViolation("no unique extreme element", {"best": str(best), "other": str(other)})
    return best


def demazure_star_oracle(x: Permutation, y: Permutation) -> Permutation:
    """max{u v : u <= x, v <= y} by enumeration."""
    return _bruhat_extreme({a * b for a in lower_interval(x) for b in lower_interval(y)}, maximum=True)


def demazure_tri_oracle(x: Permutation, y: Permutation) -> Permutation:
    return _bruhat_extreme({x * b for b in lower_interval(y)}, maximum=False)


# ===========================================
# POSITIVE SUBEXPRESSIONS
# ===========================================

@dataclass(frozen=True)
class PositiveSubexpression:
    """
    The positive subexpression for v inside a reduced word of w.
    Positions are 1-based; prefixes[j] is v(j), so prefixes[0] is the identity.
    """

    word: ReducedWord
    prefixes: Tuple[Permutation, ...]
    plus: Tuple[int, ...]
    circle: Tuple[int, ...]

    @property
    def n(self) -> int:
        return self.prefixes[0].n

    @property
    def v(self) -> Permutation:
        return self.prefixes[-1]

    @property
    def w(self) -> Permutation:
        return Permutation.from_word(self.n, self.word)


def positive_subexpression(v: Permutation, word: Sequence[int]) -> PositiveSubexpression:
    """
    Built from the right: v(j-1) = v(j) s_{i_j} when that shortens v(j),
    otherwise v(j-1) = v(j).
    """
    word = tuple(word)
    if not is_reduced(v.n, word):
        raise InvalidInputError(f"word {list(word)} is not reduced")
    w = Permutation.from_word(v.n, word)
    if not bruhat_leq(v, w):
        raise OutsideDomainError(f"{v} is not below {w} in Bruhat order", {"v": str(v), "w": str(w)})

    prefixes = [v]
    for i in reversed(word):
        current = prefixes[-1]
        candidate = current * Permutation.simple(v.n, i)
        prefixes.append(candidate if candidate.length() < current.length() else current)
    prefixes.reverse()
    if not prefixes[0].is_identity():
        raise InvariantViolation("positive subexpression does not start at the identity", {"v": str(v)})

    plus = tuple(j for j in range(1, len(word) + 1) if prefixes[j] != prefixes[j - 1])
    circle = tuple(j for j in range(1, len(word) + 1) if j not in plus)
    return PositiveSubexpression(word=word, prefixes=tuple(prefixes), plus=plus, circle=circle)


def positive_subexpressions_oracle(v: Permutation, word: Sequence[int]) -> List[PositiveSubexpression]:
    """Every subexpression for v in word satisfying the positivity rule; exactly one is expected."""
    word = tuple(word)
    found = []
    n = v.n
    for mask in itertools.product((False, True), repeat=len(word)):
        prefixes = [Permutation.identity(n)]
        valid = True
        for use, i in zip(mask, word):
            current = prefixes[-1]
            step = current * Permutation.simple(n, i)
            if step.length() < current.length():
                valid = False
                break
            prefixes.append(step if use else current)
        if valid and prefixes[-1] == v:
            plus = tuple(j + 1 for j, use in enumerate(mask) if use)
            circle = tuple(j + 1 for j, use in enumerate(mask) if not use)
            found.append(PositiveSubexpression(word=word, prefixes=tuple(prefixes), plus=plus, circle=circle))
    return found


def signed_matrix(w: Permutation) -> np.ndarray:
    """The representative w-dot: entry (w(j), j) is (-1)^{#{i<j : w(i) > w(j)}}."""
    n = w.n
    M = np.zeros((n, n), dtype=np.int64)
    for j in range(1, n + 1):
        inversions = sum(1 for i in range(1, j) if w(i) > w(j))
        M[w(j) - 1, j - 1] = -1 if inversions % 2 else 1
    return M


# ===========================================
# AFFINE PERMUTATIONS
# ===========================================

@dataclass(frozen=True)
class AffinePermutation:
    """A bijection f of Z with f(i + n) = f(i) + n, stored as its window [f(1), ..., f(n)]."""

    window: Tuple[int, ...]

    def __post_init__(self):
        window = tuple(int(x) for x in self.window)
        n = len(window)
        if n == 0 or len({x % n for x in window}) != n:
            raise InvalidInputError(f"not an affine permutation: {list(window)}")
        if (sum(window) - n * (n + 1) // 2) % n:
            raise InvalidInputError(f"window {list(window)} has non-integer average displacement")
        object.__setattr__(self, "window", window)

    @classmethod
    def from_permutation(cls, w: Permutation) -> "AffinePermutation":
        return cls(w.images)

    @classmethod
    def identity(cls, n: int) -> "AffinePermutation":
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.window)

    def __call__(self, i: int) -> int:
        q, r = divmod(i - 1, self.n)
        return self.window[r] + q * self.n

    def __mul__(self, other: "AffinePermutation") -> "AffinePermutation":
        _same_n(self, other)
        return AffinePermutation(tuple(self(other(i)) for i in range(1, self.n + 1)))

    def inverse(self) -> "AffinePermutation":
        n = self.n
        inv = [0] * n
        for i, value in enumerate(self.window, start=1):
            q, r = divmod(value - 1, n)
            inv[r] = i - q * n
        return AffinePermutation(tuple(inv))

    @property
    def av(self) -> int:
        return (sum(self.window) - self.n * (self.n + 1) // 2) // self.n

    def length(self) -> int:
        f, n = self.window, self.n
        return sum(abs((f[j] - f[i]) // n) for i, j in itertools.combinations(range(n), 2))

    def max_displacement(self) -> int:
        return max(abs(x - i) for i, x in enumerate(self.window, start=1))

    def is_bounded(self) -> bool:
        return all(i <= x <= i + self.n for i, x in enumerate(self.window, start=1))

    def one_line(self) -> str:
        return "[" + ",".join(str(x) for x in self.window) + "]"

    def __str__(self) -> str:
        return self.one_line()

    def __lt__(self, other: "AffinePermutation") -> bool:
        return self.window < other.window


def parse_affine(text: str) -> AffinePermutation:
    raw = text.strip()
    if not (raw.startswith("[") and raw.endswith("]")):
        raise InvalidInputError(f"window notation expected, got {text!r}")
    try:
        return AffinePermutation(tuple(int(x) for x in raw[1:-1].split(",") if x.strip()))
    except ValueError as exc:
        raise InvalidInputError(f"malformed window {text!r}") from exc


def affine_rank(h: AffinePermutation, a: int, b: int) -> int:
    """r_{a,b}(h) = #{i < a : h(i) >= b}"""
    start = b - h.max_displacement()
    return sum(1 for i in range(start, a) if h(i) >= b)


def bruhat_leq_affine(f: AffinePermutation, g: AffinePermutation) -> bool:
    """Rank-matrix dominance r_{a,b}(f) <= r_{a,b}(g), a in [1, n]."""
    _same_n(f, g)
    if f.av != g.av:
        raise InvalidInputError(f"{f} and {g} have different average displacement")
    reach = max(f.max_displacement(), g.max_displacement()) + f.n
    return all(
        affine_rank(f, a, b) <= affine_rank(g, a, b)
        for a in range(1, f.n + 1)
        for b in range(a - reach, a + reach + 1)
    )


def _swap_positions(x: AffinePermutation, i: int, j: int) -> AffinePermutation:
    """x * t_{ij}: exchange the values at positions i + qn and j + qn."""
    n = x.n
    window = []
    for p in range(1, n + 1):
        if (p - i) % n == 0:
            window.append(x(j + p - i))
        elif (p - j) % n == 0:
            window.append(x(i + p - j))
        else:
            window.append(x(p))
    return AffinePermutation(tuple(window))


def affine_lower_covers(x: AffinePermutation) -> Set[AffinePermutation]:
    n = x.n
    target = x.length() - 1
    covers = set()
    for i in range(1, n + 1):
        for j in range(i + 1, i + n * (x.length() + 1) + 1):
            if (j - i) % n == 0 or x(i) < x(j):
                continue
            y = _swap_positions(x, i, j)
            if y.length() == target:
                covers.add(y)
    return covers


@lru_cache(maxsize=4096)
def bruhat_lower_interval_affine(g: AffinePermutation) -> FrozenSet[AffinePermutation]:
    """All f <= g, by breadth-first search down the covers."""
    seen = {g}
    queue = deque([g])
    while queue:
        for y in affine_lower_covers(queue.popleft()):
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


def bruhat_leq_affine_bfs(f: AffinePermutation, g: AffinePermutation) -> bool:
    """Cover-BFS oracle for bruhat_leq_affine."""
    _same_n(f, g)
    if f.av != g.av:
        raise InvalidInputError(f"{f} and {g} have different average displacement")
    return f in bruhat_lower_interval_affine(g)


def tau(n: int, k: int) -> AffinePermutation:
    """tau_lambda for lambda = 1^k 0^(n-k): [n+1, ..., n+k, k+1, ..., n]"""
    return AffinePermutation(tuple(range(n + 1, n + k + 1)) + tuple(range(k + 1, n + 1)))


def tau_k(n: int, k: int) -> AffinePermutation:
    """[1+k, ..., n+k], the top of Bound(k, n)"""
    return AffinePermutation(tuple(range(1 + k, n + k + 1)))


def f_vw(v: Permutation, w: Permutation, k: int) -> AffinePermutation:
    """f_{v,w} = v tau_lambda w^{-1}"""
    _same_n(v, w)
    if not is_grassmannian(w, k):
        raise InvalidInputError(f"{w} is not a minimal coset representative for k={k}")
    return AffinePermutation.from_permutation(v) * tau(v.n, k) * AffinePermutation.from_permutation(w).inverse()


def tau_u(u: Permutation, k: int) -> AffinePermutation:
    """tau_{u lambda} = u tau_lambda u^{-1}"""
    return f_vw(u, u, k)


@lru_cache(maxsize=64)
def bound_permutations(k: int, n: int) -> Tuple[AffinePermutation, ...]:
    """Bound(k, n): windows with i <= f(i) <= i + n and av = k, sorted by window."""
    found: List[Tuple[int, ...]] = []

    def extend(prefix: List[int], residues: Set[int]) -> None:
        i = len(prefix) + 1
        if i > n:
            if sum(prefix) - n * (n + 1) // 2 == k * n:
                found.append(tuple(prefix))
            return
        for value in range(i, i + n + 1):
            if value % n not in residues:
                prefix.append(value)
                residues.add(value % n)
                extend(prefix, residues)
                residues.discard(value % n)
                prefix.pop()

    extend([], set())
    return tuple(AffinePermutation(window) for window in sorted(found))
