import json

import numpy as np
import pytest

from edgetrace import cli, scenes
from edgetrace.ir import read_csv


def fmt(point):
    return ",".join(f"{v:.17g}" for v in point)


def test_run_empty_scene_direct_path(tmp_path):
    out = tmp_path / "ir.csv"
    wav = tmp_path / "ir.wav"
    code = cli.main(["run", "--scene", "builtin:empty", "--samples", "100", "--out", str(out),
                     "--wav", str(wav)])
    assert code == 0
    t, p, v = read_csv(out)
    k = int(np.argmax(np.abs(p)))
    assert t[k] == pytest.approx(100.0)
    assert p[k] == pytest.approx(1 / 34.4)
    assert wav.stat().st_size > 44


def test_run_wedge_with_flags(tmp_path):
    out = tmp_path / "ir.csv"
    cfg = tmp_path / "c.ini"
    cfg.write_text("[simulation]\nir_length = 0.05\nmax_order = 1\n")
    code = cli.main(["run", "--scene", "builtin:wedge", "--config", str(cfg), "--samples",
                     "1200", "--seed", "3", "--workers", "1", "--out", str(out)])
    assert code == 0
    t, p, v = read_csv(out)
    assert len(t) == 2400
    assert np.all(v >= 0)


def test_run_obj_scene(tmp_path):
    b = scenes.single_wedge()
    obj = tmp_path / "wedge.obj"
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in b.mesh.vertices]
    lines += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in b.mesh.triangles]
    obj.write_text("\n".join(lines) + "\n")
    out = tmp_path / "ir.csv"
    code = cli.main(["run", "--scene", str(obj), f"--source={fmt(b.source)}",
                     f"--listener={fmt(b.listener)}", "--samples", "1200",
                     "--out", str(out)])
    assert code == 0
    t, p, v = read_csv(out)
    assert np.count_nonzero(p) > 1


@pytest.mark.parametrize("argv", [
    ["run", "--scene", "builtin:nope", "--out", "x.csv"],
    ["run", "--scene", "missing.obj", "--source", "0,0,0", "--listener", "1,0,0",
     "--out", "x.csv"],
    ["run", "--scene", "builtin:empty", "--source", "1,2", "--out", "x.csv"],
    ["run", "--scene", "builtin:empty", "--listener", "a,b,c", "--out", "x.csv"],
    ["run", "--scene", "builtin:empty", "--samples", "0", "--out", "x.csv"],
    ["run", "--scene", "builtin:empty"],
    ["frobnicate"],
    ["validate", "nope"],
])
def test_bad_input_exits_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 2


def test_scene_file_needs_positions(tmp_path):
    obj = tmp_path / "t.obj"
    obj.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    assert cli.main(["run", "--scene", str(obj), "--out", str(tmp_path / "x.csv")]) == 2


def test_bad_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[simulation]\nsamples = many\n")
    assert cli.main(["run", "--scene", "builtin:empty", "--config", str(cfg),
                     "--out", str(tmp_path / "x.csv")]) == 2


def test_unreachable_listener_exits_3(tmp_path):
    # listener sealed inside the closed cube: no path reaches it
    code = cli.main(["run", "--scene", "builtin:cube", "--listener", "0,0,0", "--samples",
                     "600", "--out", str(tmp_path / "x.csv")])
    assert code == 3


def test_non_finite_exits_4(tmp_path, monkeypatch):
    from edgetrace import transport

    real = transport.simulate

    def broken(*a, **kw):
        ir = real(*a, **kw)
        ir.offset[0] = np.nan
        return ir

    monkeypatch.setattr(transport, "simulate", broken)
    code = cli.main(["run", "--scene", "builtin:empty", "--samples", "10",
                     "--out", str(tmp_path / "x.csv")])
    assert code == 4


def test_validate_writes_report(tmp_path, monkeypatch, capsys):
    from edgetrace import validation
    monkeypatch.setitem(validation.SUITES, "bedrf",
                        lambda: [validation.check_reciprocity(n=2000),
                                 validation.check_derivative(n=200)])
    out = tmp_path / "r.json"
    assert cli.main(["validate", "bedrf", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and len(rep["checks"]) == 2
    assert "PASS reciprocity" in capsys.readouterr().out


def test_validate_failure_exits_3(monkeypatch):
    from edgetrace import validation
    monkeypatch.setitem(validation.SUITES, "bedrf",
                        lambda: [validation.CheckResult("x", False, 1.0, "<= 0")])
    assert cli.main(["validate", "bedrf"]) == 3


def test_bench(tmp_path):
    out = tmp_path / "b.json"
    code = cli.main(["bench", "--scene", "builtin:wedge", "--samples", "1000", "--repeats", "1",
                     "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["ms_per_ir"] > 0
    assert "pure" in rep["backends"]
