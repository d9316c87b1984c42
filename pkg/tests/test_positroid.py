"""
Tests for positroid cells: necklaces, rank conditions, truncations, Le-diagrams.
"""

import random

import pytest
from sympy import QQ

from tnnflag.errors import InvalidInputError, OutsideDomainError
from tnnflag.exactalg import VariableField, evaluate as evaluate_scalar
from tnnflag.matrixcore import (
    EchelonMatrix,
    FieldMatrix,
    evaluate,
    mr_product,
    mr_variables,
    u_echelon,
)
from tnnflag.positroid import (
    cell_membership,
    cell_positivity_check,
    diagram_shape,
    f_of_matrix,
    le_diagram,
    le_report,
    matrix_necklace,
    necklace,
    necklace_minors,
    periodic_row,
    rank_of_rows,
    render_le_diagram,
    tnn_check,
    trunc_minor,
    u_truncation,
)
from tnnflag.posetlab import qj_elements
from tnnflag.weyl import (
    AffinePermutation,
    Permutation,
    affine_rank,
    bound_permutations,
    bruhat_leq_affine,
    f_vw,
    positive_subexpression,
    reduced_word,
    tau_k,
    tau_u,
)


def s(n, *letters):
    return Permutation.from_word(n, letters)


def aff(*window):
    return AffinePermutation(window)


W_EX = s(5, 2, 1, 4, 3, 2)


@pytest.fixture
def running_echelon():
    """Rows (1,0), (x1,x2), (x3,x4), (0,1) for u = s3s2."""
    space = VariableField(["x1", "x2", "x3", "x4"])
    x = space.gens()
    body = FieldMatrix([[1, 0], [x["x1"], x["x2"]], [x["x3"], x["x4"]], [0, 1]])
    return EchelonMatrix(s(4, 3, 2), 2, body), x


@pytest.fixture
def gr25_echelon():
    """The s2[2]-echelon form of the point g_{s1, s2s1s4s3s2}(t) of Gr(2,5)."""
    space = VariableField(["t1", "t3", "t4", "t5"])
    t = space.gens()
    body = FieldMatrix([
        [1, 0],
        [t["t5"] / t["t1"], 1 / t["t1"]],
        [0, 1],
        [-t["t4"] * t["t5"], 0],
        [-t["t3"] * t["t4"] * t["t5"], 0],
    ])
    return EchelonMatrix(s(5, 2), 2, body), t


def mr_point(v, w, k, rng):
    """First k columns of a Marsh-Rietsch matrix at a random positive rational point."""
    pse = positive_subexpression(v, reduced_word(w))
    space = mr_variables(pse)
    x = mr_product(pse, space)
    point = {name: QQ(rng.randint(1, 5), rng.randint(1, 3)) for name in space.names}
    return evaluate(x, point).submatrix(range(v.n), range(k))


class TestPeriodicRows:
    """Sign-twisted periodic extension."""

    def test_even_k_flips(self, running_echelon):
        """For k = 2 the rows change sign every period."""
        M, x = running_echelon
        assert periodic_row(M, 6) == (-x["x1"], -x["x2"])
        assert periodic_row(M, 10) == (x["x1"], x["x2"])
        assert periodic_row(M, -2) == (-x["x1"], -x["x2"])

    def test_odd_k_periodic(self):
        """For k = 1 and k = 3 the rows repeat."""
        M = FieldMatrix([[1], [2], [3]])
        assert periodic_row(M, 4) == periodic_row(M, 1)
        N = FieldMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])
        assert periodic_row(N, 5) == (1, 0, 0)

    def test_rank_of_rows(self, running_echelon):
        """Windows longer than a period have full rank."""
        M, _ = running_echelon
        assert rank_of_rows(M, 1, 1) == 0
        assert rank_of_rows(M, 1, 2) == 1
        assert rank_of_rows(M, 1, 12) == 2


class TestBoundedAffinePermutationOfMatrix:
    """f_M from spans of consecutive rows."""

    def test_repeated_basis(self):
        """Rows e1, e2, e1, e2 give tau_2."""
        M = FieldMatrix([[1, 0], [0, 1], [1, 0], [0, 1]])
        assert f_of_matrix(M) == aff(3, 4, 5, 6)

    def test_degenerate_running_example(self):
        """Setting x2 = 0 in the running example lands in [2,4,5,7]."""
        M = FieldMatrix([[1, 0], [1, 0], [2, 3], [0, 1]])
        assert f_of_matrix(M) == aff(2, 4, 5, 7)

    def test_zero_row_fixed(self):
        """A zero row i gives f(i) = i."""
        M = FieldMatrix([[1, 0], [0, 0], [0, 1], [1, 1]])
        assert f_of_matrix(M)(2) == 2

    def test_rank_deficient(self):
        """Matrices without full column rank are rejected."""
        with pytest.raises(InvalidInputError):
            f_of_matrix(FieldMatrix([[1, 1], [2, 2], [3, 3]]))

    def test_column_operations(self):
        """f_M only depends on the column span."""
        rng = random.Random(7)
        M = FieldMatrix([[1, 0], [2, 1], [0, 3], [1, 1], [5, 0]])
        expected = f_of_matrix(M)
        for _ in range(10):
            g = FieldMatrix([[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)])
            if g.det() == 0:
                continue
            assert f_of_matrix(M * g) == expected

    def test_marsh_rietsch_points(self):
        """Points g_{v,w}(t) lie in the cell of f_{v,w}."""
        rng = random.Random(0)
        for element in qj_elements(4, 2):
            M = mr_point(element.v, element.w, 2, rng)
            assert f_of_matrix(M) == f_vw(element.v, element.w, 2)


class TestNecklace:
    """Grassmann necklaces of bounded affine permutations."""

    @pytest.mark.parametrize("h, expected", [
        ((2, 4, 5, 7), [[1, 3], [2, 3], [3, 4], [4, 5]]),
        ((3, 4, 7, 5, 6), [[1, 2], [2, 3], [3, 4], [4, 7], [5, 7]]),
        ((2, 4, 8, 5, 6), [[1, 3], [2, 3], [3, 4], [4, 8], [5, 8]]),
    ])
    def test_known_necklaces(self, h, expected):
        """Worked necklaces in window notation."""
        assert necklace(aff(*h)).to_json() == expected

    def test_periodic_access(self):
        """I_{a+n} = I_a + n."""
        I = necklace(aff(2, 4, 5, 7))
        assert I[5] == (5, 7)
        assert str(I) == "[{1,3},{2,3},{3,4},{4,5}]"

    def test_unbounded_rejected(self):
        """Only bounded affine permutations have necklaces."""
        with pytest.raises(InvalidInputError):
            necklace(aff(0, 2, 7))

    def test_first_window_is_v(self):
        """I_1 of f_{v,w} is v[k], and w[k] lists the positions with f(i) > n."""
        for n in (3, 4, 5):
            for k in range(1, n):
                for element in qj_elements(n, k):
                    f = f_vw(element.v, element.w, k)
                    assert necklace(f)[1] == element.v.subset(k)
                    assert tuple(sorted(i for i in range(1, n + 1) if f(i) > n)) == element.w.subset(k)

    def test_matrix_necklace_matches(self):
        """Lexicographically minimal bases recover the necklace of f_M."""
        M = FieldMatrix([[1, 0], [1, 0], [2, 3], [0, 1]])
        assert matrix_necklace(M) == necklace(f_of_matrix(M))


class TestCellMembership:
    """The necklace route and the rank route."""

    def test_top_cell(self):
        """A generic point of Gr(2,4) lies in the top cell."""
        M = mr_point(Permutation.identity(4), s(4, 2, 1, 3, 2), 2, random.Random(1))
        check = cell_membership(M, tau_k(4, 2))
        assert check.member and check.rank_route

    def test_gr25_point(self, gr25_echelon):
        """The Gr(2,5) point at t = 1 lies in [3,4,7,5,6] and not in the top cell."""
        M, _ = gr25_echelon
        point = evaluate(M.body, {"t1": 1, "t3": 1, "t4": 1, "t5": 1})
        assert cell_membership(point, aff(3, 4, 7, 5, 6)).member
        assert not cell_membership(point, tau_k(5, 2)).member

    def test_rank_conditions_match_affine_ranks(self):
        """k - rank(M; a, b) = r_{a,b}(f_M) on a period."""
        M = FieldMatrix([[1, 0], [1, 0], [2, 3], [0, 1]])
        h = f_of_matrix(M)
        for a in range(1, 5):
            for b in range(a, a + 5):
                assert 2 - rank_of_rows(M, a, b) == affine_rank(h, a, b)

    def test_wrong_grassmannian(self):
        """h must live in Bound(k, n) for the shape of M."""
        with pytest.raises(InvalidInputError):
            cell_membership(FieldMatrix([[1, 0], [0, 1], [1, 1]]), tau_k(3, 1))


class TestTruncation:
    """u-truncations and truncated minors."""

    def test_first_truncation(self, running_echelon):
        """tr^1 zeroes the first column below row 1."""
        M, x = running_echelon
        window = u_truncation(M, 1)
        assert window.matrix == FieldMatrix([[1, 0], [0, x["x2"]], [0, x["x4"]], [0, 1]])

    def test_later_truncations(self, running_echelon):
        """tr^2 and tr^4 of the running example."""
        M, x = running_echelon
        assert u_truncation(M, 2).matrix == FieldMatrix([[x["x1"], x["x2"]], [x["x3"], x["x4"]], [0, 1], [-1, 0]])
        assert u_truncation(M, 4).matrix == FieldMatrix([[0, 1], [-1, 0], [0, 0], [0, 0]])

    def test_running_minors(self, running_echelon):
        """Truncated necklace minors are x4, x1x4 - x2x3, x3, 1."""
        M, x = running_echelon
        minors = necklace_minors(M, aff(2, 4, 5, 7))
        assert minors == [x["x4"], x["x1"] * x["x4"] - x["x2"] * x["x3"], x["x3"], 1]

    def test_gr25_minors(self, gr25_echelon):
        """Truncated minors on the necklace of [2,4,8,5,6]."""
        M, t = gr25_echelon
        minors = necklace_minors(M, aff(2, 4, 8, 5, 6))
        assert minors == [
            1,
            t["t5"] / t["t1"],
            t["t4"] * t["t5"],
            t["t4"] * t["t5"],
            t["t3"] * t["t4"] * t["t5"],
        ]

    def test_bad_subset(self, running_echelon):
        """Row sets outside [a, a+n) are rejected."""
        M, _ = running_echelon
        with pytest.raises(InvalidInputError):
            trunc_minor(M, 2, (1, 3))
        with pytest.raises(InvalidInputError):
            trunc_minor(M, 1, (1, 2, 3))


class TestLeDiagram:
    """Le-diagrams from positive subexpressions."""

    def test_shape(self):
        """s2s1s4s3s2 has shape (3, 2)."""
        assert diagram_shape(W_EX, 2) == (3, 2)

    def test_reading_word(self):
        """The reading order reproduces the reduced word."""
        assert le_diagram(Permutation.identity(5), W_EX, 2).word == (2, 1, 4, 3, 2)

    def test_single_plus_box(self):
        """For v = s1 every box except the one of s1 carries a dot."""
        diagram = le_diagram(s(5, 1), W_EX, 2)
        assert diagram.plus == ((2, 1),)
        assert len(diagram.dots) == 4
        assert render_le_diagram(diagram) == "· · ·\n+ ·"

    def test_extremes(self):
        """(id, w) is fully dotted and (w, w) has no dots."""
        assert len(le_diagram(Permutation.identity(5), W_EX, 2).dots) == 5
        assert le_diagram(W_EX, W_EX, 2).dots == ()

    def test_not_grassmannian(self):
        """w must be a minimal coset representative."""
        with pytest.raises(InvalidInputError):
            le_diagram(Permutation.identity(4), s(4, 1), 2)

    def test_report(self):
        """The report carries 1-based boxes."""
        report = le_report(s(5, 1), W_EX, 2)
        assert report.shape == [3, 2]
        assert report.plus == [[2, 1]]


class TestTotalNonnegativity:
    """Maximal-minor sign tests."""

    def test_identity_columns(self):
        """Rows e1, e2, 0, 0 are totally nonnegative."""
        assert tnn_check(FieldMatrix([[1, 0], [0, 1], [0, 0], [0, 0]]))

    def test_global_sign(self):
        """A global sign flip does not matter."""
        assert tnn_check(FieldMatrix([[0, 1], [1, 0], [0, 0], [0, 0]]))

    def test_mixed_signs(self):
        """Delta_12 = 1 and Delta_34 = -1 is not TNN."""
        assert not tnn_check(FieldMatrix([[1, 0], [0, 1], [0, 1], [1, 0]]))

    def test_symbolic_rejected(self, running_echelon):
        """Sign tests need rational entries."""
        M, _ = running_echelon
        with pytest.raises(OutsideDomainError):
            tnn_check(M)

    def test_gr25_positivity(self, gr25_echelon):
        """At t = 1 every truncation is TNN and the necklace minors are positive."""
        M, _ = gr25_echelon
        point = M.map(lambda a: evaluate_scalar(a, {"t1": 1, "t3": 1, "t4": 1, "t5": 1}))
        check = cell_positivity_check(point, aff(2, 4, 8, 5, 6))
        assert check.ok
        assert check.minors == [1, 1, 1, 1, 1]

    @pytest.mark.slow
    def test_truncation_positivity_gr24(self):
        """For tau_u >= g >= h in Bound(2,4), truncations of points of the positive part of h are positive."""
        rng = random.Random(5)
        n, k = 4, 2
        pairs = {f_vw(e.v, e.w, k): e for e in qj_elements(n, k)}
        cells = bound_permutations(k, n)
        for u in sorted({e.w for e in pairs.values()}):
            top = tau_u(u, k)
            for g in cells:
                if not bruhat_leq_affine(g, top):
                    continue
                for h in cells:
                    if not bruhat_leq_affine(h, g):
                        continue
                    e = pairs[h]
                    for _ in range(3):
                        M = u_echelon(mr_point(e.v, e.w, k, rng), u, k)
                        assert cell_positivity_check(M, g).ok, (str(u), str(g), str(h))


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
