"""
Tests for the command line: output formats, exit codes and reproducibility.
"""

import json
from unittest.mock import patch

import pytest

from tnnflag import cli
from tnnflag.config import settings
from tnnflag.models import CaseResult, CaseStatus, RunReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def failing_report(n_max, **kwargs):
    case = CaseResult(key="n2.k1", n=2, k=1, status=CaseStatus.FAIL, detail="mismatch")
    return RunReport.from_cases("verify iso", {"nmax": n_max}, 0, [case])


class TestEnumeration:
    """cells, poset, necklace, lediagram and mr."""

    def test_cells_json(self, capsys):
        """cells 2 4 lists the 33 cells of Gr(2, 4)."""
        code, out = run(capsys, "cells", "2", "4")
        assert code == 0
        data = json.loads(out)
        assert data["count"] == 33
        assert data["k"] == 2 and data["n"] == 4

    def test_cells_ascii(self, capsys):
        """One window per line plus a count."""
        code, out = run(capsys, "cells", "1", "2", "--ascii")
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[-1] == "# 3 cells"
        assert len(lines) == 4

    def test_necklace(self, capsys):
        """The running necklace."""
        code, out = run(capsys, "necklace", "[2,4,5,7]", "--n", "4")
        assert code == 0
        assert json.loads(out)["necklace"] == [[1, 3], [2, 3], [3, 4], [4, 5]]

    def test_necklace_ascii(self, capsys):
        """Text rendering of the necklace."""
        code, out = run(capsys, "necklace", "[2,4,5,7]", "--ascii")
        assert out.strip() == "{1,3}, {2,3}, {3,4}, {4,5}"

    def test_poset(self, capsys):
        """poset reports the analytics of Q_J."""
        code, out = run(capsys, "poset", "3", "1")
        data = json.loads(out)
        assert code == 0
        assert data["graded"] and data["thin"] and data["eulerian"]

    def test_lediagram_ascii(self, capsys):
        """--ascii prints the diagram."""
        code, out = run(capsys, "lediagram", "e", "s2s1s3s2", "--k", "2", "--n", "4", "--ascii")
        assert code == 0
        assert out.strip()

    def test_mr(self, capsys):
        """The Marsh-Rietsch report carries the word and the matrix."""
        code, out = run(capsys, "mr", "s1", "s2s1s4s3s2", "--n", "5")
        data = json.loads(out)
        assert code == 0
        assert data["plus_positions"] == [2]
        assert data["circle_positions"] == [1, 3, 4, 5]
        assert data["matrix"]["entries"][0] == ["0", "-1", "0", "0", "0"]

    def test_json_to_file(self, capsys, tmp_path):
        """--json PATH writes the report instead of printing it."""
        target = tmp_path / "cells.json"
        code, out = run(capsys, "cells", "2", "4", "--json", str(target))
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["count"] == 33


class TestCharts:
    """snider and fs on the running example."""

    def test_snider(self, capsys):
        """The running cell from the chart of s3s2."""
        code, out = run(capsys, "snider", "s3s2", "s2", "s2s1s3s2", "--k", "2", "--n", "4")
        data = json.loads(out)
        assert code == 0
        assert data["g"] == "[2,4,5,7]"
        assert data["snider"]["n"] == 4

    def test_fs_generic(self, capsys):
        """One inversion position for [2,4,5,7]."""
        code, out = run(capsys, "fs", "s3s2", "[2,4,5,7]", "--k", "2", "--n", "4")
        data = json.loads(out)
        assert code == 0
        assert list(data["coordinates"]) == ["(2,3)"]
        assert data["support_ok"]

    def test_fs_at_point(self, capsys):
        """x2/x4 at x2 = 3, x4 = 2."""
        code, out = run(capsys, "fs", "s3s2", "[2,4,5,7]", "--k", "2", "--n", "4", "--at", "x1=1,x2=3,x3=1,x4=2")
        data = json.loads(out)
        assert code == 0
        assert data["coordinates"] == {"(2,3)": "3/2"}
        assert data["cone_norm"] == "9/4"

    def test_fs_bad_point(self, capsys):
        """Assignments need name=value."""
        code, _ = run(capsys, "fs", "s3s2", "[2,4,5,7]", "--k", "2", "--n", "4", "--at", "x1")
        assert code == 2


class TestVerify:
    """verify subcommands and exit codes."""

    def test_oracles(self, capsys):
        """verify oracles at n <= 3 passes."""
        code, out = run(capsys, "verify", "oracles", "--nmax", "3", "--no-timings")
        data = json.loads(out)
        assert code == 0
        assert data["summary"]["failed"] == 0
        assert data["wall_time_ms"] == 0.0
        assert all(c["millis"] == 0.0 for c in data["cases"])

    def test_reproducible(self, capsys):
        """Same seed, byte-identical output."""
        _, first = run(capsys, "verify", "psi", "--nmax", "3", "--seed", "9", "--no-timings")
        _, second = run(capsys, "verify", "psi", "--nmax", "3", "--seed", "9", "--no-timings")
        assert first == second
        assert json.loads(first)["seed"] == 9

    def test_help_documents_timings(self, capsys, monkeypatch):
        """verify --help says reruns match byte for byte only with --no-timings."""
        monkeypatch.setenv("COLUMNS", "400")
        with pytest.raises(SystemExit) as exc:
            cli.main(["verify", "--help"])
        assert exc.value.code == 0
        assert "byte-identical only with --no-timings" in capsys.readouterr().out

    def test_failure_exit_code(self, capsys):
        """A failing case gives exit code 1."""
        with patch.dict(cli.VERIFIERS, {"iso": failing_report}):
            code, out = run(capsys, "verify", "iso", "--nmax", "2")
        assert code == 1
        assert json.loads(out)["summary"]["failed"] == 1

    def test_nmax_over_limit(self, capsys):
        """--nmax above the limit is a usage error."""
        code, _ = run(capsys, "verify", "iso", "--nmax", str(settings.nmax_limit + 1))
        assert code == 2


class TestUsageErrors:
    """Malformed input exits with 2."""

    def test_malformed_window(self, capsys):
        """Windows need brackets."""
        code, _ = run(capsys, "necklace", "2,4,5,7")
        assert code == 2

    def test_n_mismatch(self, capsys):
        """--n must agree with the window."""
        code, _ = run(capsys, "necklace", "[2,4,5,7]", "--n", "5")
        assert code == 2

    def test_word_without_n(self, capsys):
        """Word forms need --n."""
        code, _ = run(capsys, "mr", "s1", "s2s1")
        assert code == 2

    def test_argparse_error(self):
        """Missing positionals exit through argparse with status 2."""
        with pytest.raises(SystemExit) as exc:
            cli.main(["cells", "2"])
        assert exc.value.code == 2

    def test_unknown_verify_kind(self):
        """Only registered sweeps are accepted."""
        with pytest.raises(SystemExit) as exc:
            cli.main(["verify", "everything"])
        assert exc.value.code == 2


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
