"""
Tests for the cell posets and poset analytics.
"""

import itertools

import pytest

from tnnflag.posetlab import (
    QJElement,
    boolean_lattice,
    build_Bound,
    build_QJ,
    chain,
    check_iso_QJ_Bound,
    check_psi_interval,
    closure_ideal,
    hat_QJ,
    minimal_elements,
    poset_analytics,
    psi,
    psi_interval_image,
    qj_leq,
)
from tnnflag.weyl import (
    Permutation,
    bruhat_leq_affine,
    f_vw,
    grassmannian_reps,
    max_grassmannian,
    parse_affine,
    tau_k,
)


def s(n, *letters):
    return Permutation.from_word(n, letters)


class TestQJOrder:
    """The order on Q_J."""

    def test_reflexive(self):
        """Every element is below itself."""
        wJ = max_grassmannian(4, 2)
        a = QJElement(s(4, 2), wJ)
        assert qj_leq(a, a, 2)

    def test_codimension_one_below_top(self):
        """(s2, w^J) lies below the top cell (id, w^J)."""
        wJ = max_grassmannian(4, 2)
        assert qj_leq(QJElement(s(4, 2), wJ), QJElement(Permutation.identity(4), wJ), 2)
        assert not qj_leq(QJElement(Permutation.identity(4), wJ), QJElement(s(4, 2), wJ), 2)

    def test_matches_relation_matrix(self):
        """The dense build agrees with the pairwise criterion."""
        Q = build_QJ(3, 1)
        for i, j in itertools.product(range(len(Q)), repeat=2):
            assert Q.relation[i, j] == qj_leq(Q.elements[i], Q.elements[j], 1)


class TestBuild:
    """Materialized posets."""

    def test_gr24_size(self):
        """|Q_J| for n=4, k=2 is 33, and Q_J is a partial order."""
        Q = build_QJ(4, 2)
        assert len(Q) == 33
        assert Q.is_partial_order()

    def test_tops(self):
        """(id, w^J) tops Q_J; tau_k tops Bound."""
        Q = build_QJ(4, 2)
        B = build_Bound(2, 4)
        assert [Q.elements[i] for i in Q.maximal()] == [QJElement(Permutation.identity(4), max_grassmannian(4, 2))]
        assert [B.elements[i] for i in B.maximal()] == [tau_k(4, 2)]

    def test_corank_one_count(self):
        """Bound(k, n) has n elements of corank one."""
        for k, n in ((1, 3), (2, 4), (2, 5)):
            B = build_Bound(k, n)
            top = k * (n - k)
            assert sum(1 for r in B.rank if r == top - 1) == n

    def test_bound_1_2(self):
        """Bound(1,2) has three elements with top [2,3]."""
        B = build_Bound(1, 2)
        assert len(B) == 3
        assert [B.elements[i] for i in B.maximal()] == [parse_affine("[2,3]")]
        assert len(B.covers()) == 2

    def test_minimal_elements(self):
        """The minimal elements of Q_J are the pairs (u, u)."""
        found = set(minimal_elements(4, 2))
        assert found == {QJElement(u, u) for u, _ in grassmannian_reps(4, 2)}


class TestIsomorphism:
    """(v, w) -> f_{v,w} is an order isomorphism onto Bound(k, n)."""

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_small(self, n):
        """Bijective and order-preserving for every k."""
        for k in range(1, n):
            check = check_iso_QJ_Bound(n, k)
            assert check.ok, check.mismatches

    @pytest.mark.slow
    def test_n5(self):
        """The full check at n = 5."""
        for k in range(1, 5):
            assert check_iso_QJ_Bound(5, k).ok

    def test_worked_image(self):
        """(s1, s2s1s4s3s2) maps to [3,4,7,5,6]."""
        assert f_vw(s(5, 1), s(5, 2, 1, 4, 3, 2), 2) == parse_affine("[3,4,7,5,6]")


class TestPsi:
    """The map psi and its interval image."""

    def test_top(self):
        """psi(id, w^J) = tau_k."""
        assert psi(Permutation.identity(4), max_grassmannian(4, 2), 2) == tau_k(4, 2)

    def test_minimal(self):
        """psi(u, u) = tau_{u lambda}; for u = s3s2 this is [5,2,3,8]."""
        u = s(4, 3, 2)
        assert psi(u, u, 2) == parse_affine("[5,2,3,8]")

    def test_order_reversal_on_worked_chain(self):
        """(s2s1, w) below (s1, w) gives g = [2,4,8,5,6] above h = [3,4,7,5,6] in Bruhat order."""
        w = s(5, 2, 1, 4, 3, 2)
        g, h = psi(s(5, 2, 1), w, 2), psi(s(5, 1), w, 2)
        assert qj_leq(QJElement(s(5, 2, 1), w), QJElement(s(5, 1), w), 2)
        assert bruhat_leq_affine(h, g)
        assert bruhat_leq_affine(g, psi(s(5, 2), s(5, 2), 2))

    def test_interval_images(self):
        """For every u at n = 4 the image is exactly [tau_k, tau_{u lambda}]."""
        for k in range(1, 4):
            for u, _ in grassmannian_reps(4, k):
                assert check_psi_interval(u, k).ok

    def test_image_contains_ends(self):
        """The image holds tau_k and tau_{u lambda}."""
        u = s(4, 3, 2)
        image = psi_interval_image(u, 2)
        assert tau_k(4, 2) in image
        assert parse_affine("[5,2,3,8]") in image


class TestClosure:
    """Closure ideals."""

    def test_rank_zero(self):
        """A rank-0 cell is its own closure."""
        u = s(4, 3, 2)
        assert closure_ideal(u, u, 2) == [QJElement(u, u)]

    def test_top(self):
        """The top cell of Gr(2,4) closes to all 33 cells."""
        assert len(closure_ideal(Permutation.identity(4), max_grassmannian(4, 2), 2)) == 33

    def test_monotone(self):
        """a <= b implies closure(a) is inside closure(b)."""
        Q = build_QJ(3, 1)
        for a, b in itertools.product(Q.elements, repeat=2):
            if Q.leq(a, b):
                assert set(closure_ideal(a.v, a.w, 1)) <= set(closure_ideal(b.v, b.w, 1))


class TestAnalytics:
    """Graded, thin and Eulerian checks."""

    def test_boolean_lattice(self):
        """B_3 is Eulerian."""
        result = poset_analytics(boolean_lattice(3))
        assert result.graded and result.thin and result.eulerian

    def test_chain_not_thin(self):
        """The 3-chain has a rank-2 interval with 3 elements."""
        result = poset_analytics(chain(3))
        assert result.graded
        assert not result.thin
        assert not result.eulerian

    def test_mobius_of_chain(self):
        """mu on a chain is 1, -1, 0."""
        mu = poset_analytics(chain(3)).mobius
        assert mu[0].tolist() == [1, -1, 0]

    def test_hat_qj_gr24(self):
        """Q_J with a bottom, n=4 k=2, is graded, thin and Eulerian."""
        result = poset_analytics(hat_QJ(4, 2))
        assert result.graded and result.thin and result.eulerian

    @pytest.mark.slow
    def test_hat_qj_up_to_5(self):
        """The same holds for every (n, k) with n <= 5."""
        for n in range(2, 6):
            for k in range(1, n):
                result = poset_analytics(hat_QJ(n, k))
                assert result.graded and result.thin and result.eulerian


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
