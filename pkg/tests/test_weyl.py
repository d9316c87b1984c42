"""
Tests for the symmetric and affine symmetric groups.
"""

import itertools
import random

import numpy as np
import pytest

from tnnflag.errors import InvalidInputError, OutsideDomainError
from tnnflag.weyl import (
    AffinePermutation,
    Permutation,
    affine_rank,
    all_permutations,
    bound_permutations,
    bruhat_leq,
    bruhat_leq_affine,
    bruhat_leq_affine_bfs,
    bruhat_leq_subword,
    demazure_star,
    demazure_star_oracle,
    demazure_tri,
    demazure_tri_oracle,
    f_vw,
    grassmannian_index_set,
    grassmannian_reps,
    is_grassmannian,
    longest_parabolic,
    lower_interval,
    max_grassmannian,
    parabolic_factorize,
    parabolic_subgroup,
    parse_affine,
    parse_permutation,
    positive_subexpression,
    positive_subexpressions_oracle,
    reduced_word,
    signed_matrix,
    tau,
    tau_k,
    tau_u,
)


def s(n, *letters):
    return Permutation.from_word(n, letters)


W_EX = s(5, 2, 1, 4, 3, 2)


class TestPermutation:
    """Basic group operations."""

    def test_from_word_one_line(self):
        """s2 s1 s4 s3 s2 in S_5 is [3,5,1,2,4]."""
        assert W_EX.images == (3, 5, 1, 2, 4)

    def test_length_and_inverse(self):
        """Length counts inversions; w w^-1 is the identity."""
        assert W_EX.length() == 5
        assert (W_EX * W_EX.inverse()).is_identity()

    def test_invalid_images(self):
        """Non-bijective images are rejected."""
        with pytest.raises(InvalidInputError):
            Permutation((1, 1, 2))

    def test_mismatched_sizes(self):
        """Composition across different n raises."""
        with pytest.raises(InvalidInputError):
            s(3, 1) * s(4, 1)

    def test_parse_forms(self):
        """One-line and word forms agree."""
        assert parse_permutation("[1,4,2,3]") == s(4, 3, 2)
        assert parse_permutation("s3s2", 4) == s(4, 3, 2)
        assert parse_permutation("s3*s2", 4) == s(4, 3, 2)
        assert parse_permutation("3,2", 4) == s(4, 3, 2)
        assert parse_permutation("id", 4).is_identity()

    def test_parse_rejects_garbage(self):
        """Malformed text is an input error."""
        with pytest.raises(InvalidInputError):
            parse_permutation("s3x2", 4)
        with pytest.raises(InvalidInputError):
            parse_permutation("s2", None)

    def test_reduced_word(self):
        """The reduced word multiplies back and has length l(w)."""
        for w in all_permutations(4):
            word = reduced_word(w)
            assert len(word) == w.length()
            assert Permutation.from_word(4, word) == w


class TestBruhat:
    """Finite Bruhat order."""

    def test_subword_pair(self):
        """s1 <= s2 s1 in S_3."""
        assert bruhat_leq(s(3, 1), s(3, 2, 1))

    def test_incomparable(self):
        """s1 and s2 are incomparable."""
        assert not bruhat_leq(s(3, 1), s(3, 2))
        assert not bruhat_leq(s(3, 2), s(3, 1))

    def test_whole_group_below_w0(self):
        """Every element of S_4 lies below w0."""
        w0 = Permutation((4, 3, 2, 1))
        assert sum(bruhat_leq(u, w0) for u in all_permutations(4)) == 24

    def test_agrees_with_subword_oracle(self):
        """Rank dominance matches the subword property on all of S_4."""
        perms = all_permutations(4)
        for u, v in itertools.product(perms, repeat=2):
            assert bruhat_leq(u, v) == bruhat_leq_subword(u, v)

    def test_refines_length(self):
        """u < v implies l(u) < l(v)."""
        for u, v in itertools.product(all_permutations(4), repeat=2):
            if u != v and bruhat_leq(u, v):
                assert u.length() < v.length()


class TestParabolic:
    """Parabolic factorization and Grassmannian permutations."""

    def test_max_grassmannian(self):
        """w^J for n=4, k=2 is [3,4,1,2] and factors trivially."""
        wJ = max_grassmannian(4, 2)
        assert wJ.images == (3, 4, 1, 2)
        assert parabolic_factorize(wJ, grassmannian_index_set(4, 2)) == (wJ, Permutation.identity(4))

    def test_longest_parabolic(self):
        """w_J for n=4, k=2 is [2,1,4,3]."""
        assert longest_parabolic(4, 2).images == (2, 1, 4, 3)

    def test_identity(self):
        """id factors as (id, id)."""
        e = Permutation.identity(4)
        assert parabolic_factorize(e, {1, 3}) == (e, e)

    def test_factorization_properties(self):
        """w = w1 w2, lengths add, w2 in W_J, w1 minimal."""
        J = {1, 3}
        WJ = set(parabolic_subgroup(4, J))
        assert len(WJ) == 4
        for w in all_permutations(4):
            w1, w2 = parabolic_factorize(w, J)
            assert w1 * w2 == w
            assert w1.length() + w2.length() == w.length()
            assert w2 in WJ
            assert all(w1.length() <= (w * r).length() for r in WJ)

    def test_grassmannian_reps(self):
        """C(n,k) representatives with sorted blocks."""
        reps = grassmannian_reps(5, 2)
        assert len(reps) == 10
        assert all(is_grassmannian(u, 2) and u.subset(2) == S for u, S in reps)

    def test_pivot_subsets(self):
        """u = s3s2 gives {1,4}; u = s2 in S_5 gives {1,3}; id gives [k]."""
        assert s(4, 3, 2).subset(2) == (1, 4)
        assert s(5, 2).subset(2) == (1, 3)
        assert Permutation.identity(5).subset(3) == (1, 2, 3)


class TestDemazure:
    """Demazure products."""

    def test_examples(self):
        """s1*s1 = s1, s1*s2 = s1s2, (s1s2) <| s2 = s1."""
        assert demazure_star(s(3, 1), s(3, 1)) == s(3, 1)
        assert demazure_star(s(3, 1), s(3, 2)) == s(3, 1, 2)
        assert demazure_tri(s(3, 1, 2), s(3, 2)) == s(3, 1)

    @pytest.mark.slow
    def test_oracles_on_s4(self):
        """Both products match brute force on all pairs in S_4."""
        perms = all_permutations(4)
        for x, y in itertools.product(perms, repeat=2):
            assert demazure_star(x, y) == demazure_star_oracle(x, y)
            assert demazure_tri(x, y) == demazure_tri_oracle(x, y)

    def test_length_additive(self):
        """For length-additive xy: x*y = xy and (xy) <| y^-1 = x."""
        x, y = s(4, 1, 2), s(4, 3)
        assert (x * y).length() == x.length() + y.length()
        assert demazure_star(x, y) == x * y
        assert demazure_tri(x * y, y.inverse()) == x


class TestPositiveSubexpression:
    """Positive subexpressions."""

    def test_marsh_rietsch_example(self):
        """v = s1 in word (2,1,4,3,2): J+ = {2}, J circle = {1,3,4,5}."""
        pse = positive_subexpression(s(5, 1), (2, 1, 4, 3, 2))
        assert pse.plus == (2,)
        assert pse.circle == (1, 3, 4, 5)
        assert pse.prefixes[0].is_identity() and pse.v == s(5, 1)

    def test_extremes(self):
        """v = id uses no letters; v = w uses all."""
        word = (2, 1, 4, 3, 2)
        assert positive_subexpression(Permutation.identity(5), word).plus == ()
        assert positive_subexpression(W_EX, word).circle == ()

    def test_not_below(self):
        """v not below w raises."""
        with pytest.raises(OutsideDomainError):
            positive_subexpression(s(3, 2), (1,))

    @pytest.mark.slow
    def test_unique_on_s4(self):
        """Exhaustive search finds exactly the computed subexpression."""
        for w in all_permutations(4):
            word = reduced_word(w)
            for v in lower_interval(w):
                found = positive_subexpressions_oracle(v, word)
                assert found == [positive_subexpression(v, word)]


class TestSignedMatrix:
    """Signed permutation matrices."""

    def test_s1(self):
        """s1-dot in SL_3."""
        assert signed_matrix(s(3, 1)).tolist() == [[0, -1, 0], [1, 0, 0], [0, 0, 1]]

    def test_s2s1(self):
        """(s2 s1)-dot in SL_3."""
        assert signed_matrix(s(3, 2, 1)).tolist() == [[0, -1, 0], [0, 0, -1], [1, 0, 0]]

    def test_identity(self):
        """id-dot is the identity."""
        assert (signed_matrix(Permutation.identity(4)) == np.eye(4, dtype=int)).all()

    def test_braid_compatible(self):
        """v-dot w-dot = (vw)-dot whenever lengths add."""
        for v, w in itertools.product(all_permutations(4), repeat=2):
            if (v * w).length() == v.length() + w.length():
                assert (signed_matrix(v) @ signed_matrix(w) == signed_matrix(v * w)).all()
        assert all(round(np.linalg.det(signed_matrix(w))) == 1 for w in all_permutations(4))


class TestAffine:
    """Affine permutations."""

    def test_tau_lambda(self):
        """tau_lambda for n=4, k=2 is [5,6,3,4]."""
        assert tau(4, 2).window == (5, 6, 3, 4)

    def test_tau_k(self):
        """tau_k for n=4, k=2 is [3,4,5,6]."""
        assert tau_k(4, 2).window == (3, 4, 5, 6)

    def test_av(self):
        """av([2,4,5,7]) = 2."""
        assert parse_affine("[2,4,5,7]").av == 2

    def test_invalid_window(self):
        """Repeated residues are rejected."""
        with pytest.raises(InvalidInputError):
            AffinePermutation((1, 5, 3, 4))

    def test_length(self):
        """tau_k has length 0 and tau_lambda length k(n-k)."""
        assert tau_k(4, 2).length() == 0
        assert tau(4, 2).length() == 4
        assert parse_affine("[2,4,5,7]").length() == 1

    def test_evaluation_periodic(self):
        """f(i + n) = f(i) + n, and f^-1 inverts f."""
        f = parse_affine("[2,4,8,5,6]")
        assert f(6) == 7 and f(-2) == 3
        assert all(f.inverse()(f(i)) == i for i in range(-10, 10))

    def test_f_vw_examples(self):
        """f_{v,w} for the two worked cells and for (id, w^J)."""
        assert f_vw(s(5, 1), W_EX, 2).window == (3, 4, 7, 5, 6)
        assert f_vw(s(5, 2, 1), W_EX, 2).window == (2, 4, 8, 5, 6)
        assert f_vw(Permutation.identity(5), max_grassmannian(5, 2), 2) == tau_k(5, 2)

    def test_f_vw_rejects_non_grassmannian(self):
        """w must be a minimal coset representative."""
        with pytest.raises(InvalidInputError):
            f_vw(Permutation.identity(4), s(4, 1), 2)

    def test_tau_u(self):
        """tau_{u lambda} for u = s3s2 in S_4 is [5,2,3,8]."""
        assert tau_u(s(4, 3, 2), 2).window == (5, 2, 3, 8)

    def test_length_additivity(self):
        """l(f_vw) = l(v) + l(w^J) - l(w) over Q_J for n = 4."""
        for k in range(1, 4):
            wJ = max_grassmannian(4, k)
            for w in all_permutations(4):
                if not is_grassmannian(w, k):
                    continue
                for v in lower_interval(w):
                    assert f_vw(v, w, k).length() == v.length() + wJ.length() - w.length()

    def test_bound_counts(self):
        """|Bound(1,2)| = 3 and |Bound(2,4)| = 33."""
        assert [f.window for f in bound_permutations(1, 2)] == [(1, 4), (2, 3), (3, 2)]
        assert len(bound_permutations(2, 4)) == 33
        assert all(f.is_bounded() and f.av == 2 for f in bound_permutations(2, 4))

    def test_affine_rank(self):
        """r_{a,b}(tau_k) counts i < a with tau_k(i) >= b."""
        t = tau_k(4, 2)
        assert affine_rank(t, 1, 1) == 2
        assert affine_rank(t, 1, 3) == 0

    def test_av_mismatch(self):
        """Only equal-av elements are compared."""
        with pytest.raises(InvalidInputError):
            bruhat_leq_affine(tau_k(4, 1), tau_k(4, 2))

    def test_bruhat_on_bound(self):
        """tau_k is the Bruhat minimum of Bound(k,n); the order matches BFS on Bound(2,4)."""
        cells = bound_permutations(2, 4)
        top = tau_k(4, 2)
        for f in cells:
            assert bruhat_leq_affine(top, f)
        for f, g in itertools.product(cells, repeat=2):
            assert bruhat_leq_affine(f, g) == bruhat_leq_affine_bfs(f, g)

    @pytest.mark.slow
    def test_bruhat_random_pairs(self):
        """Rank criterion matches BFS on random pairs in Bound(2,5) and Bound(3,6)."""
        rng = random.Random(0)
        for k, n in ((2, 5), (3, 6)):
            cells = bound_permutations(k, n)
            for _ in range(500):
                f, g = rng.choice(cells), rng.choice(cells)
                assert bruhat_leq_affine(f, g) == bruhat_leq_affine_bfs(f, g)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
