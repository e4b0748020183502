import csv
import os

import pytest

from mppilp.cli import main
from mppilp.graph import make_grid
from mppilp.instances import Instance, serialize_instance


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "inst.txt"
    assert run("generate", "--rows", 3, "--cols", 4, "--robots", 4, "--seed", 7, "-o", path) == 0
    return path


def write_instance(path, inst):
    path.write_bytes(serialize_instance(inst))
    return path


def test_generate_is_seeded(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for p, seed in ((a, 1), (b, 1), (c, 2)):
        assert run("generate", "--rows", 5, "--cols", 5, "--obstacles", 20, "--robots", 6,
                   "--seed", seed, "-o", p) == 0
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


@pytest.mark.parametrize("objective", ["makespan", "maxdist", "totaltime", "totaldist"])
def test_solve_is_byte_identical(tmp_path, inst_file, objective):
    outs = []
    for k in range(2):
        sol, rep = tmp_path / f"sol{k}", tmp_path / f"rep{k}"
        assert run("solve", "-i", inst_file, "-o", sol, "--report", rep,
                   "--objective", objective) == 0
        outs.append((sol.read_bytes(), rep.read_bytes()))
    assert outs[0] == outs[1]
    assert b"status optimal" in outs[0][1]
    assert run("validate", "-i", inst_file, "-s", tmp_path / "sol0") == 0


def test_solve_report_on_stdout(tmp_path, inst_file, capsys):
    assert run("solve", "-i", inst_file, "-o", tmp_path / "s", "--split", 2, "--timings") == 0
    out = capsys.readouterr().out
    assert "split 2" in out and "wall_time" in out
    ratio = float(next(l for l in out.splitlines() if l.startswith("ratio")).split()[1])
    assert ratio >= 1


def test_validate_reports_head_on(tmp_path, capsys):
    inst = write_instance(tmp_path / "i", Instance(make_grid(2, 2), (0, 1), (1, 0)))
    sol = tmp_path / "bad"
    sol.write_text("plan 2 1\n0 1\n1 0\n")
    assert run("validate", "-i", inst, "-s", sol) == 1
    assert "head-on at t=0" in capsys.readouterr().out


def test_swap_is_infeasible(tmp_path):
    inst = write_instance(tmp_path / "i", Instance(make_grid(1, 2), (0, 1), (1, 0)))
    assert run("solve", "-i", inst, "-o", tmp_path / "s") == 2
    assert not (tmp_path / "s").exists()


def test_time_limit_exit_code(tmp_path):
    inst = tmp_path / "p"
    run("generate", "--rows", 3, "--cols", 3, "--robots", 9, "--seed", 1, "-o", inst)
    assert run("solve", "-i", inst, "-o", tmp_path / "s", "--time-limit", 0) == 3


def test_input_errors(tmp_path, inst_file):
    bad = tmp_path / "bad"
    bad.write_text("not an instance\n")
    assert run("solve", "-i", bad, "-o", tmp_path / "s") == 1
    assert run("solve", "-i", tmp_path / "missing", "-o", tmp_path / "s") == 1
    assert run("solve", "-i", inst_file, "-o", tmp_path / "s", "--split", 2,
               "--objective", "totaltime") == 1
    assert run("generate", "--rows", 2, "--cols", 2, "--robots", 9, "--seed", 0,
               "-o", tmp_path / "x") == 1
    assert run("frobnicate") == 1


def test_external_backend_unconfigured(tmp_path, inst_file, monkeypatch):
    monkeypatch.delenv("MPP_ILP_SOLVER", raising=False)
    assert run("solve", "-i", inst_file, "-o", tmp_path / "s", "--backend", "external") == 4


@pytest.mark.parametrize("method", ["bfs", "exhaustive", "puzzle"])
def test_oracle(tmp_path, method, capsys):
    inst = tmp_path / "p"
    run("generate", "--rows", 3, "--cols", 3, "--robots", 9 if method == "puzzle" else 3,
        "--seed", 2, "-o", inst)
    assert run("oracle", "-i", inst, "--method", method, "-o", tmp_path / "sol") == 0
    assert run("validate", "-i", inst, "-s", tmp_path / "sol") == 0


def test_render_frames(tmp_path, inst_file):
    sol = tmp_path / "sol"
    run("solve", "-i", inst_file, "-o", sol)
    out = tmp_path / "frames"
    assert run("render", "-i", inst_file, "-s", sol, "-o", out) == 0
    frames = sorted(os.listdir(out))
    assert frames[0] == "frame_0000.txt"
    assert run("render", "-i", inst_file, "-s", sol, "--format", "svg", "-o", tmp_path / "svg") == 0
    assert len(os.listdir(tmp_path / "svg")) == len(frames)


def test_bench_writes_csv_and_figures(tmp_path):
    out = tmp_path / "bench"
    assert run("bench", "--grid", "3x4", "--obstacles", "0,10", "--robots", "2..3",
               "--per-point", 2, "--out", out) == 0
    with open(out / "bench.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert all(r["status"] == "optimal" for r in rows)
    assert (out / "time.png").stat().st_size > 0
    assert (out / "ratio.png").stat().st_size > 0
    assert (out / "summary.txt").read_text().startswith(" obst%")
