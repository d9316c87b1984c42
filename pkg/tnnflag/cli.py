"""
tnnflag command line
====================
Enumeration, rendering and verification sweeps.

    python -m tnnflag cells 2 4
    python -m tnnflag necklace "[2,4,5,7]" --ascii
    python -m tnnflag verify conjecture --nmax 4 --jobs 4 --json report.json

Exit codes: 0 on success, 1 when a verification fails or a computation
leaves its domain, 2 on malformed input.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel

from tnnflag import __version__
from tnnflag.atlas import VERIFIERS
from tnnflag.config import settings
from tnnflag.errors import InvalidInputError, TnnFlagError
from tnnflag.exactalg import rational
from tnnflag.logger import get_logger, setup_logging
from tnnflag.models import CaseStatus, MatrixModel, RunReport
from tnnflag.positroid import le_report, necklace_report
from tnnflag.reports import cells_report, fs_report, mr_report, poset_report, snider_report
from tnnflag.weyl import parse_affine, parse_permutation

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


# ===========================================
# OUTPUT
# ===========================================

def _dump(payload) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)


def _emit(args: argparse.Namespace, text: str) -> None:
    """Write to --json PATH when given, stdout otherwise."""
    target = getattr(args, "json", None)
    if target and target != "-":
        Path(target).write_text(text + "\n", encoding="utf-8")
        logger.info(f"wrote {target}", extra={"command": args.command})
    else:
        sys.stdout.write(text + "\n")


def _grid(model: MatrixModel) -> str:
    cells = [["" if a == "0" else a for a in row] for row in model.entries]
    width = max((len(c) for row in cells for c in row), default=1) or 1
    return "\n".join("[ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in cells)


def _output(args: argparse.Namespace, report: BaseModel, ascii_text: Optional[str] = None) -> int:
    if args.ascii and ascii_text is not None and not args.json:
        sys.stdout.write(ascii_text + "\n")
    else:
        _emit(args, _dump(report))
    return EXIT_OK


def _parse_point(text: Optional[str]) -> Optional[Dict[str, object]]:
    """'x1=1,x2=3/2' -> {'x1': 1, 'x2': 3/2}"""
    if not text:
        return None
    point = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InvalidInputError(f"malformed assignment {item!r}; expected name=value")
        point[name.strip()] = rational(value)
    return point


# ===========================================
# COMMANDS
# ===========================================

def _cells_command(args: argparse.Namespace) -> int:
    report = cells_report(args.k, args.n)
    return _output(args, report, "\n".join(report.cells + [f"# {report.count} cells"]))


def _poset_command(args: argparse.Namespace) -> int:
    report = poset_report(args.n, args.k)
    lines = [f"{i:4d}  rank {e.rank}  v={e.v}  w={e.w}  f={e.f}" for i, e in enumerate(report.elements)]
    lines.append(f"# graded={report.graded} thin={report.thin} eulerian={report.eulerian}")
    return _output(args, report, "\n".join(lines))


def _necklace_command(args: argparse.Namespace) -> int:
    h = parse_affine(args.h)
    if args.n is not None and args.n != h.n:
        raise InvalidInputError(f"window {args.h} has n={h.n}, not {args.n}")
    report = necklace_report(h)
    text = ", ".join("{" + ",".join(str(i) for i in I) + "}" for I in report.necklace)
    return _output(args, report, text)


def _lediagram_command(args: argparse.Namespace) -> int:
    v = parse_permutation(args.v, args.n)
    w = parse_permutation(args.w, args.n or v.n)
    report = le_report(v, w, args.k)
    return _output(args, report, report.ascii)


def _mr_command(args: argparse.Namespace) -> int:
    v = parse_permutation(args.v, args.n)
    w = parse_permutation(args.w, args.n or v.n)
    report = mr_report(v, w)
    header = f"word {report.word}  plus {report.plus_positions}  circle {report.circle_positions}"
    return _output(args, report, header + "\n" + _grid(report.matrix))


def _snider_command(args: argparse.Namespace) -> int:
    u = parse_permutation(args.u, args.n)
    v = parse_permutation(args.v, u.n)
    w = parse_permutation(args.w, u.n)
    report = snider_report(u, args.k, v, w)
    lines = [f"g = {report.g}", _grid(report.echelon), "truncated minors: " + ", ".join(report.truncated_minors)]
    if report.located:
        lines.append(f"located in the opposite Schubert cell of {report.located}")
    return _output(args, report, "\n".join(lines))


def _fs_command(args: argparse.Namespace) -> int:
    u = parse_permutation(args.u, args.n)
    g = parse_affine(args.g)
    report = fs_report(u, args.k, g, _parse_point(args.at))
    lines = [_grid(report.cell_point)]
    lines += [f"{p}: {c}" for p, c in report.coordinates.items()]
    lines.append(f"norm^2 = {report.cone_norm}")
    return _output(args, report, "\n".join(lines))


def _verify_command(args: argparse.Namespace) -> int:
    verifier = VERIFIERS[args.kind]
    options = {}
    if args.kind == "membership":
        options["instances"] = args.instances
    nmax = settings.nmax if args.nmax is None else args.nmax
    report: RunReport = verifier(nmax, jobs=args.jobs, budget_seconds=args.budget_seconds, seed=args.seed, **options)
    _emit(args, report.to_json(include_timings=not args.no_timings))
    if not report.ok:
        failing = [c.key for c in report.cases if c.status in (CaseStatus.FAIL, CaseStatus.ERROR)]
        logger.error(f"{len(failing)} case(s) failed: {', '.join(failing[:10])}", extra={"command": args.command})
        return EXIT_FAILED
    return EXIT_OK


# ===========================================
# PARSER
# ===========================================

def _common_args() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                        help="Write JSON to PATH (stdout when PATH is omitted).")
    common.add_argument("--ascii", action="store_true", help="Render as text instead of JSON.")
    common.add_argument("--seed", type=int, default=None, help="PRNG seed (default: TNNFLAG_SEED).")
    common.add_argument("--jobs", type=int, default=None, help="Worker processes for sweeps.")
    common.add_argument("--budget-seconds", type=float, default=None, help="Sweep time budget, 0 = unlimited.")
    common.add_argument("--nmax", type=int, default=None, help="Largest n swept by verify.")
    common.add_argument("--no-timings", action="store_true", help="Zero every timing field in run reports, for byte-identical reruns.")
    common.add_argument("--log-level", default=None, help="Override LOG_LEVEL for this run.")
    return common


def _add_cells_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("k", type=int)
    parser.add_argument("n", type=int)
    parser.set_defaults(func=_cells_command)


def _add_poset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("n", type=int)
    parser.add_argument("k", type=int)
    parser.set_defaults(func=_poset_command)


def _add_necklace_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("h", help='Bounded affine permutation in window form, e.g. "[2,4,5,7]".')
    parser.add_argument("--n", type=int, default=None)
    parser.set_defaults(func=_necklace_command)


def _add_lediagram_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("v")
    parser.add_argument("w")
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--n", type=int, default=None, help="Needed for word forms such as s3s2.")
    parser.set_defaults(func=_lediagram_command)


def _add_mr_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("v")
    parser.add_argument("w")
    parser.add_argument("--n", type=int, default=None, help="Needed for word forms such as s3s2.")
    parser.set_defaults(func=_mr_command)


def _add_snider_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("u")
    parser.add_argument("v", help="The cell is the Richardson cell (v, w).")
    parser.add_argument("w")
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--n", type=int, default=None, help="Needed for word forms such as s3s2.")
    parser.set_defaults(func=_snider_command)


def _add_fs_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("u")
    parser.add_argument("g", help="Bounded affine permutation of the stratum, in window form.")
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--n", type=int, default=None, help="Needed for word forms such as s3s2.")
    parser.add_argument("--at", default=None, help="Evaluate the generic point, e.g. x1=1,x2=3/2.")
    parser.set_defaults(func=_fs_command)


def _add_verify_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("kind", choices=sorted(VERIFIERS))
    parser.add_argument("--instances", type=int, default=200, help="Random instances per (n, k) for membership.")
    parser.set_defaults(func=_verify_command)


def build_parser() -> argparse.ArgumentParser:
    common = _common_args()
    parser = argparse.ArgumentParser(
        prog="tnnflag",
        description="Exact computations on totally nonnegative Grassmannians and their loop-group models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    _add_cells_args(subparsers.add_parser("cells", parents=[common], help="List Bound(k, n)."))
    _add_poset_args(subparsers.add_parser("poset", parents=[common], help="The cell poset Q_J with analytics."))
    _add_necklace_args(subparsers.add_parser("necklace", parents=[common], help="Grassmann necklace of a cell."))
    _add_lediagram_args(subparsers.add_parser("lediagram", parents=[common], help="Le-diagram of (v, w)."))
    _add_mr_args(subparsers.add_parser("mr", parents=[common], help="Marsh-Rietsch matrix of (v, w)."))
    _add_snider_args(subparsers.add_parser("snider", parents=[common], help="Snider image of a cell in the chart of u."))
    _add_fs_args(subparsers.add_parser("fs", parents=[common], help="Fomin-Shapiro chart near a stratum."))
    _add_verify_args(subparsers.add_parser(
        "verify", parents=[common], help="Run a verification sweep.",
        description="Run a verification sweep. Reports carry per-case and total timings, so two runs "
                    "with the same seed are byte-identical only with --no-timings.",
    ))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return int(args.func(args))
    except InvalidInputError as exc:
        logger.error(f"{exc.code}: {exc.message}", extra={"command": args.command})
        return EXIT_USAGE
    except TnnFlagError as exc:
        logger.error(f"{exc.code}: {exc.message}", extra={"command": args.command})
        return EXIT_FAILED
