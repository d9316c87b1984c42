"""
Atlas
=====
The type-A maps kappa, eta and zeta on SL_n, and the verification sweeps
that exercise the whole library: the zeta/truncation identity, positivity
of zeta minors, the Q_J / Bound(k, n) isomorphism, psi intervals, poset
topology, the Snider cell correspondence, truncation positivity, C_g
membership and the brute-force oracles.

Sweeps are case-parallel. Each case is a pure function of its key and the
run seed, so reports are reproducible whatever the worker count.
"""

import math
import random
import time
from concurrent.futures import FIRST_COMPLETED, Future, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from tnnflag.config import settings
from tnnflag.errors import (
    FactorizationError,
    InvalidInputError,
    InvariantViolation,
    OutsideDomainError,
    TnnFlagError,
)
from tnnflag.exactalg import (
    SignCertificate,
    certify_subtraction_free,
    eval_positive,
    format_scalar,
    is_zero,
    rational,
    sample_points,
    variables_of,
)
from tnnflag.logger import get_logger
from tnnflag.loopgroup import (
    cg_membership,
    rank_invariant,
    richardson_locate,
    snider_phi,
    snider_rank_identity,
    snider_rank_invariant,
)
from tnnflag.matrixcore import (
    EchelonMatrix,
    FieldMatrix,
    evaluate,
    generic_echelon,
    mr_product,
    mr_variables,
    permutation_matrix,
    principal_minors,
    schur_factorize,
    sl_completion,
    u_echelon,
)
from tnnflag.models import CaseResult, CaseStatus, RunReport
from tnnflag.posetlab import (
    QJElement,
    build_QJ,
    check_iso_QJ_Bound,
    check_psi_interval,
    hat_QJ,
    poset_analytics,
    psi_interval_image,
    qj_leq,
    upper_set,
)
from tnnflag.positroid import GrassmannNecklace, cell_positivity_check, necklace, necklace_minors
from tnnflag.weyl import (
    AffinePermutation,
    Permutation,
    all_permutations,
    bruhat_leq,
    bruhat_leq_subword,
    demazure_star,
    demazure_star_oracle,
    demazure_tri,
    demazure_tri_oracle,
    f_vw,
    grassmannian_reps,
    is_grassmannian,
    lower_interval,
    positive_subexpression,
    positive_subexpressions_oracle,
    reduced_word,
    tau_u,
)

logger = get_logger(__name__)


# ===========================================
# CONTEXT
# ===========================================

@dataclass(frozen=True)
class AtlasContext:
    """Gr(k, n) with u in W^J and (u, u) <= (v, w) in Q_J."""

    n: int
    k: int
    u: Permutation
    v: Permutation
    w: Permutation

    def __post_init__(self):
        if not 1 <= self.k <= self.n - 1:
            raise InvalidInputError(f"k={self.k} is not in [1, {self.n - 1}]")
        if any(p.n != self.n for p in (self.u, self.v, self.w)):
            raise InvalidInputError("u, v and w must lie in the same S_n")
        for name, p in (("u", self.u), ("w", self.w)):
            if not is_grassmannian(p, self.k):
                raise InvalidInputError(f"{name}={p} is not a minimal coset representative for k={self.k}")
        if not bruhat_leq(self.v, self.w):
            raise InvalidInputError(f"({self.v}, {self.w}) is not in Q_J")
        if not qj_leq(QJElement(self.u, self.u), QJElement(self.v, self.w), self.k):
            raise InvalidInputError(f"({self.u}, {self.u}) is not below ({self.v}, {self.w}) in Q_J")

    @cached_property
    def g(self) -> AffinePermutation:
        return f_vw(self.v, self.w, self.k)

    @cached_property
    def necklace(self) -> GrassmannNecklace:
        return necklace(self.g)

    def describe(self) -> Dict[str, str]:
        return {"u": str(self.u), "v": str(self.v), "w": str(self.w), "g": str(self.g)}


# ===========================================
# KAPPA, ETA, ZETA
# ===========================================

def _echelon(ctx: AtlasContext, x: FieldMatrix) -> EchelonMatrix:
    """u[k]-echelon form of the first k columns of x."""
    return u_echelon(x, ctx.u, ctx.k)


def kappa(ctx: AtlasContext, x: FieldMatrix) -> FieldMatrix:
    """
    kappa_x in U_2^(J): minus the part of g^(J) strictly below the diagonal,
    where g^(J) u-dot is the echelon representative of xP.
    """
    M = _echelon(ctx, x)
    pivots = M.pivots

    def entry(r: int, c: int):
        i, j = r + 1, c + 1
        if i == j:
            return 1
        if i > j and j in pivots and i not in pivots:
            return -M.entry(i, pivots.index(j) + 1)
        return 0

    return FieldMatrix.from_function(ctx.n, ctx.n, entry)


def kappa_truncate(ctx: AtlasContext, x: FieldMatrix) -> FieldMatrix:
    """kappa_x x; for x the completion of M its first k columns are tr^1_u(M)."""
    return kappa(ctx, x) * x


def pi_u_parabolic(ctx: AtlasContext, x: FieldMatrix) -> FieldMatrix:
    """x ([u-dot^{-1} x]_+)^{-1}, the representative of xU^(J) inside u-dot P_-."""
    u_dot = permutation_matrix(ctx.u)
    try:
        _, _, upper = schur_factorize(u_dot.inverse() * x, ctx.k)
    except FactorizationError as exc:
        raise OutsideDomainError(f"x is outside u-dot G_0 for u={ctx.u}", ctx.describe()) from exc
    return x * upper.inverse()


def eta(ctx: AtlasContext, x: FieldMatrix) -> FieldMatrix:
    """[v-dot^{-1} kappa_x x]_J, the Levi factor."""
    v_dot = permutation_matrix(ctx.v)
    try:
        _, levi, _ = schur_factorize(v_dot.inverse() * kappa_truncate(ctx, x), ctx.k)
    except FactorizationError as exc:
        raise FactorizationError(f"x is outside G_(u,v) for u={ctx.u}, v={ctx.v}", ctx.describe()) from exc
    return levi


def zeta(ctx: AtlasContext, x: FieldMatrix) -> FieldMatrix:
    return pi_u_parabolic(ctx, x) * eta(ctx, x).inverse()


def zeta_minors(ctx: AtlasContext, x: FieldMatrix) -> List:
    """Bottom-right i x i principal minors of zeta(x) w-dot^{-1}, i = 1..n."""
    z = zeta(ctx, x) * permutation_matrix(ctx.w).inverse()
    _, bottom_right = principal_minors(z)
    return bottom_right


def kappa_support_ok(ctx: AtlasContext, k_x: FieldMatrix) -> bool:
    """kappa_x is unitriangular lower with support in u-dot U_-^(J) u-dot^{-1}."""
    pivots = ctx.u.subset(ctx.k)
    for r in range(ctx.n):
        for c in range(ctx.n):
            a = k_x[r, c]
            i, j = r + 1, c + 1
            if i == j:
                if a != 1:
                    return False
            elif not is_zero(a) and not (i > j and j in pivots and i not in pivots):
                return False
    return True


def random_parabolic(n: int, k: int, rng: random.Random) -> FieldMatrix:
    """A random element of P = [[A, B], [0, D]] with det A = det D = 1."""

    def unimodular(size: int) -> FieldMatrix:
        lower = FieldMatrix.from_function(size, size, lambda r, c: 1 if r == c else (rng.randint(-2, 2) if r > c else 0))
        upper = FieldMatrix.from_function(size, size, lambda r, c: 1 if r == c else (rng.randint(-2, 2) if r < c else 0))
        return lower * upper

    A, D = unimodular(k), unimodular(n - k)

    def entry(r: int, c: int):
        if r < k and c < k:
            return A[r, c]
        if r >= k and c >= k:
            return D[r - k, c - k]
        if r < k:
            return rng.randint(-2, 2)
        return 0

    return FieldMatrix.from_function(n, n, entry)


def zeta_invariance(ctx: AtlasContext, x: FieldMatrix, samples: int, rng: random.Random) -> bool:
    """zeta(x p) = zeta(x) for random p in P."""
    base = zeta(ctx, x)
    return all(zeta(ctx, x * random_parabolic(ctx.n, ctx.k, rng)) == base for _ in range(samples))


# ===========================================
# SWEEP MACHINERY
# ===========================================

@dataclass(frozen=True)
class SweepCase:
    """One independent verification case; `extra` carries check-specific data."""

    key: str
    n: int
    k: int = 0
    u: Optional[Permutation] = None
    v: Optional[Permutation] = None
    w: Optional[Permutation] = None
    extra: Tuple = ()
    seed: int = 0

    def rng(self) -> random.Random:
        return random.Random(f"{self.seed}:{self.key}")


@dataclass
class CheckOutcome:
    passed: bool
    detail: Optional[str] = None
    values: Dict[str, Any] = field(default_factory=dict)


Check = Callable[[SweepCase], CheckOutcome]


def _case_key(n: int, k: int, *parts: Tuple[str, Permutation]) -> str:
    return ".".join([f"n{n}", f"k{k}"] + [f"{name}{p.key()}" for name, p in parts])


def _result(case: SweepCase, status: CaseStatus, millis: float = 0.0,
            detail: Optional[str] = None, values: Optional[Dict[str, Any]] = None) -> CaseResult:
    return CaseResult(
        key=case.key, n=case.n, k=case.k,
        u=case.u.one_line() if case.u else None,
        v=case.v.one_line() if case.v else None,
        w=case.w.one_line() if case.w else None,
        status=status, millis=millis, detail=detail, values=values or {},
    )


def execute_case(check: Check, case: SweepCase) -> CaseResult:
    """Run one check, mapping library errors to ERROR and violated invariants to FAIL."""
    start = time.perf_counter()
    try:
        outcome = check(case)
        status = CaseStatus.PASS if outcome.passed else CaseStatus.FAIL
        detail, values = outcome.detail, outcome.values
    except InvariantViolation as exc:
        status, detail, values = CaseStatus.FAIL, exc.message, {"invariant": {k: str(v) for k, v in exc.details.items()}}
    except TnnFlagError as exc:
        status, detail, values = CaseStatus.ERROR, f"{exc.code}: {exc.message}", {}
    millis = (time.perf_counter() - start) * 1000
    logger.debug(f"case {status.value}", extra={"case_key": case.key, "duration_ms": millis})
    return _result(case, status, millis, detail, values)


def run_sweep(cases: Sequence[SweepCase], check: Check, command: str,
              parameters: Optional[Dict[str, Any]] = None, jobs: Optional[int] = None,
              budget_seconds: Optional[float] = None, seed: Optional[int] = None) -> RunReport:
    """
    Run every case, fanning out over a process pool when jobs > 1.

    Once the budget is exhausted no further cases are scheduled; they are
    reported as skipped. Results are sorted by case key.
    """
    jobs = settings.jobs if jobs is None else jobs
    budget = settings.budget_seconds if budget_seconds is None else budget_seconds
    seed = settings.seed if seed is None else seed
    log = logger.with_context(command=command, seed=seed)
    start = time.perf_counter()

    def exhausted() -> bool:
        return budget > 0 and time.perf_counter() - start > budget

    results: List[CaseResult] = []
    queue = list(cases)
    if jobs <= 1:
        while queue and not exhausted():
            results.append(execute_case(check, queue.pop(0)))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            pending: Dict[Future, SweepCase] = {}
            while queue or pending:
                while queue and len(pending) < 2 * jobs and not exhausted():
                    case = queue.pop(0)
                    pending[pool.submit(execute_case, check, case)] = case
                if not pending:
                    break
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    pending.pop(future)
                    results.append(future.result())
    budget_exhausted = bool(queue)
    results.extend(_result(case, CaseStatus.SKIPPED, detail="time budget exhausted") for case in queue)

    wall = (time.perf_counter() - start) * 1000
    report = RunReport.from_cases(command, parameters or {}, seed, results, wall, budget_exhausted)
    log.info(
        f"{command}: {report.summary.passed}/{report.summary.total} passed, "
        f"{report.summary.failed} failed, {report.summary.errored} errors, {report.summary.skipped} skipped",
        extra={"duration_ms": wall},
    )
    return report


def _check_nmax(n_max: int) -> None:
    if n_max > settings.nmax_limit:
        raise InvalidInputError(f"--nmax {n_max} exceeds the limit {settings.nmax_limit}")
    if n_max < 1:
        raise InvalidInputError(f"--nmax must be positive, got {n_max}")


def _grassmannians(n_max: int):
    """(n, k) for 2 <= n <= n_max and k in [1, n-1]."""
    for n in range(2, n_max + 1):
        for k in range(1, n):
            yield n, k


def _fmt(values: Sequence) -> List[str]:
    return [format_scalar(a) for a in values]


def _positive_point(names: Sequence[str], rng: random.Random) -> Dict[str, Any]:
    return {name: rational(rng.randint(1, 9)) / rng.randint(1, 4) for name in names}


def _random_cell_point(v: Permutation, w: Permutation, k: int, rng: random.Random) -> FieldMatrix:
    """First k columns of g_{v,w}(t) at a random positive rational t."""
    pse = positive_subexpression(v, reduced_word(w))
    space = mr_variables(pse)
    x = mr_product(pse, space)
    return evaluate(x, _positive_point(space.names, rng)).submatrix(range(v.n), range(k))


def _chains(n: int, k: int):
    """(u, (v, w), (v', w')) with (u, u) <= (v, w) <= (v', w') in Q_J."""
    Q = build_QJ(n, k)
    for u, _ in grassmannian_reps(n, k):
        for low in upper_set(u, k):
            i = Q.index(low)
            for high in upper_set(u, k):
                if Q.relation[i, Q.index(high)]:
                    yield u, low, high


# ===========================================
# ZETA / TRUNCATION IDENTITY
# ===========================================

def check_conjecture(case: SweepCase) -> CheckOutcome:
    """Delta+-_{n+1-i}(zeta(x) w-dot^{-1}) = Delta^{tr,i}_{I_i}(M) / Delta^{tr,1}_{I_1}(M) for i in [n]."""
    ctx = AtlasContext(case.n, case.k, case.u, case.v, case.w)
    M, _ = generic_echelon(ctx.u, ctx.k)
    x, flipped = sl_completion(M)
    truncated = necklace_minors(M, ctx.g)
    values: Dict[str, Any] = {"g": str(ctx.g), "sign_flipped": flipped, "truncated": _fmt(truncated)}
    if is_zero(truncated[0]):
        return CheckOutcome(False, "Delta^{tr,1}_{I_1} vanishes identically", values)
    if not kappa_support_ok(ctx, kappa(ctx, x)):
        return CheckOutcome(False, "kappa_x has support outside U_2^(J)", values)

    minors = zeta_minors(ctx, x)
    ratios = [m / truncated[0] for m in truncated]
    values["zeta"] = _fmt(minors)
    values["ratios"] = _fmt(ratios)
    n = ctx.n
    bad = [i for i in range(1, n + 1) if minors[n - i] != ratios[i - 1]]
    if bad:
        return CheckOutcome(False, f"identity fails for i in {bad}", values)
    return CheckOutcome(True, values=values)


def conjecture_cases(n_max: int, seed: int = 0) -> List[SweepCase]:
    cases = []
    for n, k in _grassmannians(n_max):
        for u, _ in grassmannian_reps(n, k):
            for e in upper_set(u, k):
                key = _case_key(n, k, ("u", u), ("v", e.v), ("w", e.w))
                cases.append(SweepCase(key=key, n=n, k=k, u=u, v=e.v, w=e.w, seed=seed))
    return cases


def verify_conjecture(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
                      seed: Optional[int] = None) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    return run_sweep(conjecture_cases(n_max, seed), check_conjecture, "verify conjecture",
                     {"nmax": n_max}, jobs, budget_seconds, seed)


# ===========================================
# ZETA POSITIVITY
# ===========================================

def check_zeta_positivity(case: SweepCase) -> CheckOutcome:
    """
    On the MR parametrization of (v', w') every Delta+-_i(zeta(x) w-dot^{-1})
    is nonzero, never refuted as subtraction-free, and positive at sampled
    points; zeta is unchanged under x -> xp.
    """
    ctx = AtlasContext(case.n, case.k, case.u, case.v, case.w)
    v_top, w_top = case.extra
    pse = positive_subexpression(v_top, reduced_word(w_top))
    space = mr_variables(pse)
    x = mr_product(pse, space)
    minors = zeta_minors(ctx, x)
    values: Dict[str, Any] = {"v_top": v_top.one_line(), "w_top": w_top.one_line(), "zeta": _fmt(minors)}

    rng = case.rng()
    for i, m in enumerate(minors, start=1):
        if is_zero(m):
            return CheckOutcome(False, f"Delta+-_{i} vanishes", values)
        certificate = certify_subtraction_free(m, seed=case.seed)
        if certificate == SignCertificate.REFUTED:
            return CheckOutcome(False, f"Delta+-_{i} is refuted as subtraction-free", values)
        names = variables_of(m)
        for point in sample_points(names, settings.random_points, rng.randrange(2 ** 31)):
            if eval_positive(m, point) <= 0:
                return CheckOutcome(False, f"Delta+-_{i} is not positive at {point}", values)
    if not zeta_invariance(ctx, x, 1, rng):
        return CheckOutcome(False, "zeta changes under right multiplication by P", values)
    return CheckOutcome(True, values=values)


def zeta_positivity_cases(n_max: int, seed: int = 0) -> List[SweepCase]:
    cases = []
    for n, k in _grassmannians(n_max):
        for u, low, high in _chains(n, k):
            key = _case_key(n, k, ("u", u), ("v", low.v), ("w", low.w), ("V", high.v), ("W", high.w))
            cases.append(SweepCase(key=key, n=n, k=k, u=u, v=low.v, w=low.w, extra=(high.v, high.w), seed=seed))
    return cases


def verify_zeta_positivity(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
                           seed: Optional[int] = None) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    return run_sweep(zeta_positivity_cases(n_max, seed), check_zeta_positivity, "verify positivity",
                     {"nmax": n_max}, jobs, budget_seconds, seed)


# ===========================================
# POSET SWEEPS
# ===========================================

def check_iso(case: SweepCase) -> CheckOutcome:
    result = check_iso_QJ_Bound(case.n, case.k)
    values = {"bijective": result.bijective, "mismatches": [list(m) for m in result.mismatches]}
    return CheckOutcome(result.ok, None if result.ok else "Q_J and Bound(k, n) differ", values)


def check_psi(case: SweepCase) -> CheckOutcome:
    result = check_psi_interval(case.u, case.k)
    values = {"image_matches": result.image_matches, "injective": result.injective,
              "order_reversing": result.order_reversing}
    return CheckOutcome(result.ok, None if result.ok else "psi image differs from [tau_k, tau_u]", values)


def check_topology(case: SweepCase) -> CheckOutcome:
    analytics = poset_analytics(hat_QJ(case.n, case.k))
    values = {"graded": analytics.graded, "thin": analytics.thin, "eulerian": analytics.eulerian}
    ok = analytics.graded and analytics.thin and analytics.eulerian
    return CheckOutcome(ok, None if ok else "Q_J with a minimum adjoined is not graded, thin and Eulerian", values)


def _nk_cases(n_max: int, seed: int) -> List[SweepCase]:
    return [SweepCase(key=f"n{n}.k{k}", n=n, k=k, seed=seed) for n, k in _grassmannians(n_max)]


def _u_cases(n_max: int, seed: int) -> List[SweepCase]:
    return [
        SweepCase(key=_case_key(n, k, ("u", u)), n=n, k=k, u=u, seed=seed)
        for n, k in _grassmannians(n_max)
        for u, _ in grassmannian_reps(n, k)
    ]


def verify_iso(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
               seed: Optional[int] = None) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    return run_sweep(_nk_cases(n_max, seed), check_iso, "verify iso", {"nmax": n_max}, jobs, budget_seconds, seed)


def verify_psi(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
               seed: Optional[int] = None) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    return run_sweep(_u_cases(n_max, seed), check_psi, "verify psi", {"nmax": n_max}, jobs, budget_seconds, seed)


def verify_topology(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
                    seed: Optional[int] = None) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    return run_sweep(_nk_cases(n_max, seed), check_topology, "verify topology", {"nmax": n_max},
                     jobs, budget_seconds, seed)


# ===========================================
# SNIDER CELL CORRESPONDENCE
# ===========================================

@lru_cache(maxsize=None)
def _generic_rank_identity(u: Permutation, k: int) -> Optional[Tuple[int, int]]:
    M, _ = generic_echelon(u, k)
    return snider_rank_identity(M)


def check_snider(case: SweepCase) -> CheckOutcome:
    """
    For positive points M of the cell h: phi_u(M) sits in the opposite Schubert
    cell of h, below tau_u, and r_{a,b}(phi_u(M)) + rank(M; a, b) = k over one
    period, both at the samples and on the generic u-echelon matrix.
    """
    u, k, n = case.u, case.k, case.n
    v_top, w_top = case.extra
    h = f_vw(v_top, w_top, k)
    top = tau_u(u, k)
    failure = _generic_rank_identity(u, k)
    if failure is not None:
        a, b = failure
        return CheckOutcome(False, f"r_({a},{b}) + rank(M; {a}, {b}) != {k} on the generic matrix", {"a": a, "b": b})
    rng = case.rng()
    for sample in range(settings.random_points):
        M = u_echelon(_random_cell_point(v_top, w_top, k, rng), u, k)
        y = snider_phi(u, M)
        label = richardson_locate(y, f_upper=top)
        if label.h != h:
            return CheckOutcome(False, f"located {label.h}, expected {h}", {"sample": sample})
        failure = snider_rank_identity(M)
        if failure is not None:
            a, b = failure
            return CheckOutcome(False, f"r_({a},{b}) + rank(M; {a}, {b}) != {k}", {"sample": sample})
        for a in range(1, n + 1):
            for b in range(a, a + n + 1):
                if rank_invariant(y, a, b) != snider_rank_invariant(M, a, b):
                    return CheckOutcome(False, f"r_({a},{b}) differs from the truncation rank", {"sample": sample})
    return CheckOutcome(True, values={"h": str(h)})


def verify_snider(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
                  seed: Optional[int] = None) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    cases = []
    for n, k in _grassmannians(n_max):
        for u, _ in grassmannian_reps(n, k):
            for e in upper_set(u, k):
                key = _case_key(n, k, ("u", u), ("V", e.v), ("W", e.w))
                cases.append(SweepCase(key=key, n=n, k=k, u=u, extra=(e.v, e.w), seed=seed))
    return run_sweep(cases, check_snider, "verify snider", {"nmax": n_max}, jobs, budget_seconds, seed)


# ===========================================
# TRUNCATION POSITIVITY
# ===========================================

def check_positivity(case: SweepCase) -> CheckOutcome:
    """Truncations of positive points of h are TNN with positive necklace minors of g."""
    u, k = case.u, case.k
    v_top, w_top = case.extra
    g = f_vw(case.v, case.w, k)
    rng = case.rng()
    for sample in range(settings.random_points):
        M = u_echelon(_random_cell_point(v_top, w_top, k, rng), u, k)
        check = cell_positivity_check(M, g)
        if not check.ok:
            return CheckOutcome(False, f"sample {sample} fails truncation positivity", check.describe())
    return CheckOutcome(True, values={"g": str(g), "h": str(f_vw(v_top, w_top, k))})


def verify_positivity(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
                      seed: Optional[int] = None) -> RunReport:
    """Truncation positivity on random points and the zeta minor sweep, merged into one report."""
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    truncation = []
    for n, k in _grassmannians(n_max):
        for u, low, high in _chains(n, k):
            key = "trunc." + _case_key(n, k, ("u", u), ("v", low.v), ("w", low.w), ("V", high.v), ("W", high.w))
            truncation.append(SweepCase(key=key, n=n, k=k, u=u, v=low.v, w=low.w, extra=(high.v, high.w), seed=seed))
    first = run_sweep(truncation, check_positivity, "verify positivity", {"nmax": n_max}, jobs, budget_seconds, seed)
    remaining = None
    if budget_seconds:
        remaining = max(budget_seconds - first.wall_time_ms / 1000, 1e-9)
    second = verify_zeta_positivity(n_max, jobs, remaining, seed)
    return RunReport.from_cases(
        "verify positivity", {"nmax": n_max}, seed, first.cases + second.cases,
        first.wall_time_ms + second.wall_time_ms, first.budget_exhausted or second.budget_exhausted,
    )


# ===========================================
# C_g MEMBERSHIP
# ===========================================

def _random_echelon(u: Permutation, k: int, rng: random.Random) -> EchelonMatrix:
    """u[k]-echelon matrix with small integer entries, zeros included."""
    pivots = u.subset(k)
    rows = []
    for i in range(1, u.n + 1):
        if i in pivots:
            rows.append([1 if pivots.index(i) == s else 0 for s in range(k)])
        else:
            rows.append([rng.choice((-2, -1, 0, 0, 1, 2, 3)) for _ in range(k)])
    return EchelonMatrix(u, k, FieldMatrix(rows))


def check_membership(case: SweepCase) -> CheckOutcome:
    """Truncated minors and the Birkhoff factorization agree on C_g membership."""
    n, k = case.n, case.k
    (instances,) = case.extra
    rng = case.rng()
    reps = [u for u, _ in grassmannian_reps(n, k)]
    intervals = {u: sorted(psi_interval_image(u, k)) for u in reps}
    members = 0
    for _ in range(instances):
        u = rng.choice(reps)
        g = rng.choice(intervals[u])
        if cg_membership(u, _random_echelon(u, k, rng), g):
            members += 1
    return CheckOutcome(True, values={"instances": instances, "members": members})


def verify_membership(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
                      seed: Optional[int] = None, instances: int = 200) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    batch = 25
    cases = []
    for n, k in _grassmannians(n_max):
        for part in range(math.ceil(instances / batch)):
            count = min(batch, instances - part * batch)
            cases.append(SweepCase(key=f"n{n}.k{k}.batch{part:03d}", n=n, k=k, extra=(count,), seed=seed))
    return run_sweep(cases, check_membership, "verify membership", {"nmax": n_max, "instances": instances},
                     jobs, budget_seconds, seed)


# ===========================================
# ORACLES
# ===========================================

def check_oracles(case: SweepCase) -> CheckOutcome:
    """Demazure products, Bruhat order and positive subexpressions against enumeration on all of S_n."""
    perms = all_permutations(case.n)
    for x in perms:
        for y in perms:
            if demazure_star(x, y) != demazure_star_oracle(x, y):
                return CheckOutcome(False, f"x * y differs for x={x}, y={y}")
            if demazure_tri(x, y) != demazure_tri_oracle(x, y):
                return CheckOutcome(False, f"x <| y differs for x={x}, y={y}")
            if bruhat_leq(x, y) != bruhat_leq_subword(x, y):
                return CheckOutcome(False, f"Bruhat order differs for {x}, {y}")
    subexpressions = 0
    for w in perms:
        word = reduced_word(w)
        for v in lower_interval(w):
            found = positive_subexpressions_oracle(v, word)
            if found != [positive_subexpression(v, word)]:
                return CheckOutcome(False, f"positive subexpression differs for v={v}, w={w}")
            subexpressions += 1
    return CheckOutcome(True, values={"permutations": len(perms), "subexpressions": subexpressions})


def verify_oracles(n_max: int, jobs: Optional[int] = None, budget_seconds: Optional[float] = None,
                   seed: Optional[int] = None) -> RunReport:
    _check_nmax(n_max)
    seed = settings.seed if seed is None else seed
    cases = [SweepCase(key=f"n{n}", n=n, seed=seed) for n in range(2, min(n_max, 4) + 1)]
    return run_sweep(cases, check_oracles, "verify oracles", {"nmax": n_max}, jobs, budget_seconds, seed)


VERIFIERS: Dict[str, Callable[..., RunReport]] = {
    "conjecture": verify_conjecture,
    "positivity": verify_positivity,
    "iso": verify_iso,
    "psi": verify_psi,
    "topology": verify_topology,
    "snider": verify_snider,
    "membership": verify_membership,
    "oracles": verify_oracles,
}
