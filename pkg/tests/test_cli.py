import json
import subprocess
import sys

import pytest

from bulgarian.cli import main
from bulgarian.dynamics import CycleInfo, Trajectory
from bulgarian.marked import read_trace_csv
from bulgarian.partitions import Partition
from bulgarian.shapes import LimitShape, ShapeDistance

from conftest import CYCLE_310


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cycle_command(capsys):
    code, out, _ = run(capsys, "cycle", "--rule", "q:3/10", "--start", "6,2,2,1")
    assert code == 0
    d = json.loads(out)
    assert d["period"] == 4 and d["tail"] == 0
    assert [tuple(c) for c in d["cycle"]] == list(CYCLE_310)
    info = CycleInfo.from_json(json.dumps({k: d[k] for k in ("tail", "period", "cycle")}))
    assert info.cycle_length == 4


def test_stable_command(capsys):
    code, out, _ = run(capsys, "stable", "--rule", "q:3/10", "--n", "11")
    assert code == 0 and json.loads(out)["parts"] == [5, 3, 2, 1]
    code, out, _ = run(capsys, "stable", "--rule", "ordinary", "--ns", "7,12")
    assert [r["n_star"] for r in json.loads(out)["results"]] == [6, 10]


def test_shape_command(capsys):
    code, out, _ = run(capsys, "shape", "--C", "1")
    s = LimitShape.from_json(out)
    assert code == 0 and s.z == pytest.approx(1.7320508, abs=1e-7)
    code, out, _ = run(capsys, "shape", "--q", "1/1000", "--n", "1000000")
    assert json.loads(out)["kind"] == "interpolating" and LimitShape.from_json(out).C == pytest.approx(1)
    code, out, _ = run(capsys, "shape", "--kind", "triangle", "--partition", "5,3,2,1")
    d = ShapeDistance.from_csv(out)
    assert d.sup_error == max(d.errors)
    code, out, _ = run(capsys, "shape", "--kind", "triangle", "--construct", "0", "--n", "1000")
    assert sum(json.loads(out)["parts"]) == 1000


def test_play_command(capsys, tmp_path):
    f = tmp_path / "t.jsonl"
    code, _, _ = run(capsys, "play", "--rule", "ordinary", "--start", "7,3,2", "--moves", "2", "--out", str(f))
    rows = Trajectory.read_jsonl(f.read_text())
    assert code == 0 and rows == [(0, Partition((7, 3, 2))), (1, Partition((6, 3, 2, 1))), (2, Partition((5, 4, 2, 1)))]
    assert b"\r\n" not in f.read_bytes()
    code, out, _ = run(capsys, "play", "--rule", "q:1/100", "--n", "10000", "--moves", "20000", "--final")
    d = json.loads(out)
    assert d["header"]["prng"] == "numpy PCG64" and d["header"]["seed"] == 0
    assert sum(d["parts"]) == 10000 and d["max_sigma"] >= 1


def test_random_start_is_seeded(capsys):
    outs = [run(capsys, "cycle", "--rule", "q:1/3", "--n", "40", "--seed", s)[1] for s in ("5", "5", "6")]
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["start"] != json.loads(outs[2])["start"]


def test_recurrent_command(capsys):
    code, out, _ = run(capsys, "recurrent", "--rule", "ordinary", "--n", "2")
    assert json.loads(out)["configs"] == [[2], [1, 1]]
    one = run(capsys, "recurrent", "--rule", "q:3/10", "--n", "16", "--workers", "1")[1]
    two = run(capsys, "recurrent", "--rule", "q:3/10", "--n", "16", "--workers", "2")[1]
    assert one == two


def test_deviation_command(capsys):
    code, out, _ = run(capsys, "deviation", "--rule", "q:3/10", "--start", "6,2,2,1", "--ref", "5,3,2,1", "--moves", "8")
    assert code == 0 and read_trace_csv(out) == [(1, 1)] * 9


def test_verify_command(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "stability", "--stable-n", "10", "--convex-n", "10")
    rep = json.loads(out)
    assert code == 0 and rep[0]["passed"]


def test_sweep_command(capsys, tmp_path):
    args = ["sweep", "--regimes", "triangle,interp:1", "--ns", "1e3,1e4", "--out-dir"]
    run(capsys, *args, str(tmp_path / "a"))
    run(capsys, *args, str(tmp_path / "b"), "--workers", "2")
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["files"] == ["interp_1_distance.csv", "interp_1_profile.csv",
                                 "triangle_distance.csv", "triangle_profile.csv"]
    for name in manifest["files"] + ["manifest.json"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    lines = (tmp_path / "a" / "triangle_distance.csv").read_text().splitlines()
    assert lines[0] == "n,q,C_n,n_star,lambda1,ell,sup_error" and len(lines) == 3


def test_error_exit_codes(capsys):
    code, _, err = run(capsys, "stable", "--rule", "q:0", "--n", "3")
    assert code == 1 and err.startswith("QOutOfRange")
    code, _, err = run(capsys, "cycle", "--rule", "q:1/2", "--start", "1,2")
    assert code == 1 and err.startswith("NotSorted")
    code, _, err = run(capsys, "verify", "--suite", "nope")
    assert code == 1 and err.startswith("UnknownSuite")
    code, _, err = run(capsys, "cycle", "--rule", "q:1/2")
    assert code == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_entry_point_subprocess():
    proc = subprocess.run([sys.executable, "-m", "bulgarian.cli", "stable", "--rule", "q:3/10", "--n", "11"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["parts"] == [5, 3, 2, 1]
