"""
Report builders shared by the command line and the HTTP surface.

Each builder validates its arguments, delegates to the algebra modules and
returns a pydantic report model ready for JSON export.
"""

from typing import Optional

from tnnflag.errors import InvalidInputError, LocateError
from tnnflag.exactalg import format_scalar
from tnnflag.logger import get_logger
from tnnflag.loopgroup import cone_norm, format_coordinates, fs_chart, richardson_locate, snider_phi
from tnnflag.matrixcore import EchelonMatrix, evaluate, generic_echelon, mr_product, mr_variables, u_echelon
from tnnflag.models import CellListReport, FSReport, MRReport, PosetElementModel, PosetReport, SniderReport
from tnnflag.posetlab import build_QJ, hat_QJ, poset_analytics, psi
from tnnflag.positroid import necklace, necklace_minors
from tnnflag.weyl import (
    AffinePermutation,
    Permutation,
    bound_permutations,
    bruhat_leq,
    bruhat_leq_affine,
    f_vw,
    is_grassmannian,
    positive_subexpression,
    reduced_word,
    tau_u,
)

logger = get_logger(__name__)


def _check_grassmannian(n: int, k: int) -> None:
    if n < 2:
        raise InvalidInputError(f"n={n} must be at least 2")
    if not 1 <= k <= n - 1:
        raise InvalidInputError(f"k={k} is not in [1, {n - 1}]")


def _check_cell(v: Permutation, w: Permutation, k: int) -> None:
    if v.n != w.n:
        raise InvalidInputError(f"v={v} and w={w} have different sizes")
    if not is_grassmannian(w, k):
        raise InvalidInputError(f"w={w} is not a minimal coset representative for k={k}")
    if not bruhat_leq(v, w):
        raise InvalidInputError(f"v={v} is not below w={w}")


def cells_report(k: int, n: int) -> CellListReport:
    _check_grassmannian(n, k)
    cells = bound_permutations(k, n)
    return CellListReport(n=n, k=k, count=len(cells), cells=[f.one_line() for f in cells])


def poset_report(n: int, k: int) -> PosetReport:
    """Q_J with its cover relations; the analytics are those of Q_J with a minimum adjoined."""
    _check_grassmannian(n, k)
    Q = build_QJ(n, k)
    analytics = poset_analytics(hat_QJ(n, k))
    elements = [
        PosetElementModel(v=e.v.one_line(), w=e.w.one_line(), f=psi(e.v, e.w, k).one_line(), rank=e.rank)
        for e in Q.elements
    ]
    return PosetReport(
        n=n, k=k, elements=elements, covers=[[i, j] for i, j in Q.covers()],
        graded=analytics.graded, thin=analytics.thin, eulerian=analytics.eulerian,
    )


def mr_report(v: Permutation, w: Permutation) -> MRReport:
    if v.n != w.n:
        raise InvalidInputError(f"v={v} and w={w} have different sizes")
    if not bruhat_leq(v, w):
        raise InvalidInputError(f"v={v} is not below w={w}")
    pse = positive_subexpression(v, reduced_word(w))
    space = mr_variables(pse)
    return MRReport(
        n=v.n, v=v.one_line(), w=w.one_line(), word=list(pse.word),
        plus_positions=list(pse.plus), circle_positions=list(pse.circle),
        variables=list(space.names), matrix=mr_product(pse, space).to_model(),
    )


def cell_echelon(u: Permutation, v: Permutation, w: Permutation, k: int) -> EchelonMatrix:
    """u[k]-echelon form of the symbolic Marsh-Rietsch point of the cell (v, w)."""
    _check_cell(v, w, k)
    if u.n != v.n:
        raise InvalidInputError(f"u={u} is not in S_{v.n}")
    if not is_grassmannian(u, k):
        raise InvalidInputError(f"u={u} is not a minimal coset representative for k={k}")
    pse = positive_subexpression(v, reduced_word(w))
    x = mr_product(pse, mr_variables(pse))
    return u_echelon(x.submatrix(range(v.n), range(k)), u, k)


def snider_report(u: Permutation, k: int, v: Permutation, w: Permutation) -> SniderReport:
    """
    The Snider image of the cell (v, w) seen from the chart of u. Needs
    tau_u <= f_{v,w} in the opposite order, i.e. the cell meets the chart.
    """
    _check_cell(v, w, k)
    g = f_vw(v, w, k)
    top = tau_u(u, k)
    if not bruhat_leq_affine(g, top):
        raise InvalidInputError(f"the cell {g} does not meet the chart of u={u}")
    M = cell_echelon(u, v, w, k)
    y = snider_phi(u, M)
    located: Optional[str]
    try:
        located = richardson_locate(y, f_upper=top).h.one_line()
    except LocateError as exc:
        logger.warning(f"could not locate the Snider image: {exc.message}", extra={"g": str(g)})
        located = None
    return SniderReport(
        n=u.n, k=k, u=u.one_line(), g=g.one_line(), echelon=M.body.to_model(), snider=y.to_model(),
        necklace=necklace(g).to_json(), truncated_minors=[format_scalar(m) for m in necklace_minors(M, g)],
        located=located,
    )


def fs_report(u: Permutation, k: int, g: AffinePermutation, point: Optional[dict] = None) -> FSReport:
    """Fomin-Shapiro chart of the generic u[k]-echelon point, or of its value at `point`."""
    if g.n != u.n:
        raise InvalidInputError(f"g={g} and u={u} have different sizes")
    if not bruhat_leq_affine(g, tau_u(u, k)):
        raise InvalidInputError(f"{g} is not below tau_u for u={u}")
    M, _ = generic_echelon(u, k)
    if point:
        M = EchelonMatrix(u, k, evaluate(M.body, point))
    chart = fs_chart(u, M, g)
    return FSReport(
        n=u.n, k=k, u=u.one_line(), g=g.one_line(), cell_point=chart.cell_point.body.to_model(),
        coordinates=format_coordinates(chart.coordinates), cone_norm=format_scalar(cone_norm(chart.coordinates)),
        support_ok=chart.decomposition.support_ok,
    )
