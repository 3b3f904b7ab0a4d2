import re
import subprocess
import sys

import numpy as np
import pytest

from parpart.cli import main
from parpart.graph import read_partition, write_metis
from parpart.partition import cut_size

from conftest import grid_graph


P4_TEXT = "4 3\n2\n1 3\n2 4\n3\n"


@pytest.fixture
def p4_file(tmp_path):
    p = tmp_path / "p4.metis"
    p.write_text(P4_TEXT)
    return str(p)


@pytest.fixture
def grid_file(tmp_path):
    p = tmp_path / "grid.metis"
    write_metis(grid_graph(12, 12), str(p))
    return str(p)


class TestExitCodes:
    def test_success(self, p4_file, capsys):
        assert main([p4_file, "--k", "2"]) == 0
        out = capsys.readouterr().out
        assert re.fullmatch(r"cut=1 balance=1\.0000 time=\d+\.\d{3}\n", out)

    def test_missing_k_is_usage_error(self, p4_file, capsys):
        with pytest.raises(SystemExit) as ei:
            main([p4_file])
        assert ei.value.code == 1
        assert "error" in capsys.readouterr().err

    def test_bad_k_value(self, p4_file, capsys):
        assert main([p4_file, "--k", "0"]) == 1
        assert "--k must be >= 1" in capsys.readouterr().err

    def test_k_exceeding_n(self, p4_file, capsys):
        assert main([p4_file, "--k", "9"]) == 1
        assert "exceeds vertex count" in capsys.readouterr().err

    def test_negative_epsilon(self, p4_file, capsys):
        assert main([p4_file, "--k", "2", "--epsilon", "-1"]) == 1
        assert "--epsilon" in capsys.readouterr().err

    def test_bad_threads(self, p4_file, capsys):
        assert main([p4_file, "--k", "2", "--threads", "0"]) == 1
        assert "--threads" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main([str(tmp_path / "nope.metis"), "--k", "2"]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_malformed_graph(self, tmp_path, capsys):
        bad = tmp_path / "bad.metis"
        bad.write_text("4 3\nBAD\n")
        assert main([str(bad), "--k", "2"]) == 3
        err = capsys.readouterr().err
        assert f"{bad}:2:1:" in err

    def test_unknown_preset(self, p4_file):
        with pytest.raises(SystemExit) as ei:
            main([p4_file, "--k", "2", "--preset", "turbo"])
        assert ei.value.code == 1


class TestOutputs:
    def test_partition_file(self, p4_file, tmp_path):
        out = tmp_path / "p4.part"
        assert main([p4_file, "--k", "2", "-o", str(out)]) == 0
        labels = read_partition(str(out))
        assert len(labels) == 4
        assert sorted(np.bincount(labels).tolist()) == [2, 2]
        assert cut_size(grid_graph(1, 4), labels) == 1

    def test_metrics_csv(self, grid_file, tmp_path):
        csv = tmp_path / "metrics.csv"
        assert main([grid_file, "--k", "4", "--metrics-csv", str(csv)]) == 0
        lines = csv.read_text().strip().split("\n")
        assert lines[0] == "phase,level,cut,time"
        assert len(lines) > 3
        for line in lines[1:]:
            phase, level, cut, t = line.split(",")
            assert phase in ("coarsen", "initial", "lp_refine", "mls", "project")
            int(level), int(cut), float(t)

    def test_unwritable_output(self, p4_file, tmp_path, capsys):
        assert main([p4_file, "--k", "2", "-o", str(tmp_path / "no" / "x")]) == 2
        assert "cannot write" in capsys.readouterr().err

    def test_seed_changes_output(self, grid_file, tmp_path):
        a, b = tmp_path / "a.part", tmp_path / "b.part"
        assert main([grid_file, "--k", "4", "--seed", "1", "-o", str(a)]) == 0
        assert main([grid_file, "--k", "4", "--seed", "2", "-o", str(b)]) == 0
        assert a.read_text() != b.read_text()

    def test_deterministic_with_one_thread(self, grid_file, tmp_path):
        a, b = tmp_path / "a.part", tmp_path / "b.part"
        for out in (a, b):
            assert main([grid_file, "--k", "4", "--seed", "5",
                         "--threads", "1", "-o", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("preset", ["fast", "quality"])
    def test_presets_run(self, grid_file, preset, capsys):
        assert main([grid_file, "--k", "2", "--preset", preset]) == 0
        assert capsys.readouterr().out.startswith("cut=")


def test_console_script_runs(p4_file):
    proc = subprocess.run([sys.executable, "-m", "parpart.cli", p4_file,
                           "--k", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("cut=1 ")
