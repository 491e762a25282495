import json
import shutil
import subprocess
import sys

import pytest

from helpers import FIXTURES, make_chair
from proto3d.cli import main, read_config, UsageError
from proto3d.render import part_centroids
from proto3d.scene_lang import parse_program, serialize_program

CHAIR_FIX = str(FIXTURES / "chair.json")
SMALL = ["--resolution", "32"]


@pytest.fixture
def chair_psc(tmp_path):
    path = tmp_path / "chair.psc"
    shutil.copy(FIXTURES / "chair.psc", path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_mock(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "Chair", "--fixtures", CHAIR_FIX, "--out", tmp_path / "run", *SMALL)
    assert code == 0
    doc = json.loads(out)
    assert doc["stop_reason"] == "identified" and doc["parts"] == 6
    assert (tmp_path / "run" / "final.psc").is_file()
    assert (tmp_path / "run" / "transcript.jsonl").is_file()


def test_generate_bit_stable(tmp_path, capsys):
    for name in ("a", "b"):
        assert run(capsys, "generate", "Chair", "--fixtures", CHAIR_FIX, "--out", tmp_path / name, *SMALL)[0] == 0
    for rel in ("final.psc", "iter_0/view_0.png", "iter_0/view_2.png"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_generate_naive(tmp_path, capsys):
    fix = tmp_path / "naive.json"
    fix.write_text(json.dumps([{"module": "Naive", "query": "Chair", "iteration": 0,
                                "response": "```protoscene\n" + serialize_program(make_chair()) + "```"}]))
    code, out, _ = run(capsys, "generate", "Chair", "--pipeline", "naive", "--fixtures", fix, "--out", tmp_path / "n", *SMALL)
    assert code == 0
    assert json.loads(out)["stop_reason"] == "no_inspector"


def test_generate_errors(tmp_path, capsys):
    assert run(capsys, "generate", "", "--fixtures", CHAIR_FIX)[0] == 64
    code, _, err = run(capsys, "generate", "Lamp", "--fixtures", CHAIR_FIX, "--out", tmp_path / "lamp", *SMALL)
    assert code == 2 and "error" in err
    assert run(capsys, "generate", "Chair")[0] == 64  # mock needs fixtures
    assert run(capsys, "generate", "Chair", "--fixtures", tmp_path / "none.json")[0] == 66
    assert run(capsys, "generate", "Chair", "--fixtures", CHAIR_FIX, "--budget", "-1")[0] == 64
    assert run(capsys)[0] == 64
    assert run(capsys, "frobnicate")[0] == 64


def test_render_counts(tmp_path, chair_psc, capsys):
    code, out, _ = run(capsys, "render", chair_psc, "--rig", "icosphere:1", "--modes", "shaded,depth,mask",
                       "--out", tmp_path / "r", "--resolution", "16")
    assert code == 0
    assert json.loads(out)["images"] == 126
    assert len(list((tmp_path / "r").glob("view_*.png"))) == 126
    assert len(list((tmp_path / "r").glob("view_*_mask.json"))) == 42
    assert (tmp_path / "r" / "cameras.json").is_file()


def test_render_albedo(tmp_path, chair_psc, capsys):
    code, _, _ = run(capsys, "render", chair_psc, "--modes", "albedo", "--out", tmp_path / "r", *SMALL)
    assert code == 0
    assert len(list((tmp_path / "r").glob("view_*_albedo.png"))) == 12


def test_render_errors(tmp_path, capsys):
    bad = tmp_path / "bad.psc"
    bad.write_text('part "a" {\n  cuboid dims [1, 1 1]\n  pos [0,0,0]\n  rot [0,0,0]\n}\npart')
    code, _, err = run(capsys, "render", bad)
    assert code == 65
    assert f"{bad}:2:21:" in err
    assert run(capsys, "render", tmp_path / "missing.psc")[0] == 66
    good = tmp_path / "good.psc"
    shutil.copy(FIXTURES / "chair.psc", good)
    assert run(capsys, "render", good, "--modes", "xray")[0] == 64
    assert run(capsys, "render", good, "--rig", "icosphere:9")[0] == 64


def test_eval_sparse(tmp_path, chair_psc, capsys):
    targets = tmp_path / "targets"
    targets.mkdir()
    for i in range(6):
        shutil.copy(FIXTURES / "chair.psc", targets / f"t{i}.psc")
    code, out, _ = run(capsys, "eval", "--sparse", "--proto", chair_psc, "--targets", targets, "--no-backend")
    assert code == 0
    report = json.loads(out)
    assert report["metric5nn"] == pytest.approx(0.0, abs=1e-9)
    assert run(capsys, "eval", "--sparse", "--proto", chair_psc, "--targets", tmp_path / "nope", "--no-backend")[0] == 66


def test_eval_dense(tmp_path, chair_psc, capsys):
    cloud = tmp_path / "cloud.xyz"
    pts = [c for _, c in part_centroids(parse_program(chair_psc.read_text())).entries]
    cloud.write_text("\n".join(" ".join(str(v) for v in p) for p in pts) + "\n")
    out_file = tmp_path / "report.json"
    code, _, _ = run(capsys, "eval", "--dense", "--proto", chair_psc, "--target", cloud, "--samples", 2000, "--output", out_file)
    assert code == 0
    assert json.loads(out_file.read_text())["chamfer"] > 0
    cloud.write_text("1 2\n")
    assert run(capsys, "eval", "--dense", "--proto", chair_psc, "--target", cloud)[0] == 65


def test_edit_applies_fixture(tmp_path, chair_psc, capsys):
    code, _, _ = run(capsys, "edit", chair_psc, "make the backrest taller", "--query", "Chair",
                     "--fixtures", FIXTURES / "chair_edit.json")
    assert code == 0
    before = parse_program(chair_psc.read_text())
    after = parse_program((tmp_path / "chair.edited.psc").read_text())
    changed = [a.label for a, b in zip(before.parts, after.parts) if a != b]
    assert changed == ["Backrest"]
    assert after.parts[-1].kind != before.parts[-1].kind
    assert after.parts[-1].pose == before.parts[-1].pose


def test_edit_failsafe(tmp_path, chair_psc, capsys):
    fix = tmp_path / "junk.json"
    fix.write_text(json.dumps([{"module": "CodeRefiner", "query": "Chair", "iteration": 0, "response": "sorry, no code"}]))
    code, _, err = run(capsys, "edit", chair_psc, "make it red", "--query", "Chair", "--fixtures", fix)
    assert code == 3 and "unchanged" in err
    assert (tmp_path / "chair.edited.psc").read_text() == serialize_program(parse_program(chair_psc.read_text()))
    assert run(capsys, "edit", tmp_path / "missing.psc", "x", "--fixtures", fix)[0] == 66


def test_dataset_commands(tmp_path, chair_psc, capsys):
    corpus = tmp_path / "corpus"
    code, out, _ = run(capsys, "dataset", "corpus", chair_psc, "--out", corpus, "--modes", "shaded", *SMALL)
    assert code == 0 and json.loads(out)["entries"] == 1
    code, _, _ = run(capsys, "dataset", "mixup", "--source", corpus, "--n-out", 5, "--out", tmp_path / "mix", *SMALL)
    assert code == 0
    assert len(list((tmp_path / "mix").glob("mix_*.png"))) == 5
    assert run(capsys, "dataset", "tokens", tmp_path / "empty")[0] == 66
    assert run(capsys, "dataset")[0] == 64


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# defaults\nfixtures = {CHAIR_FIX}\nresolution = 32\nbudget = 1\n")
    code, out, _ = run(capsys, "generate", "Chair", "--config", cfg, "--out", tmp_path / "r")
    assert code == 0
    doc = json.loads((tmp_path / "r" / "run.json").read_text())
    assert doc["config"]["budget"] == 1
    code, _, _ = run(capsys, "generate", "Chair", "--config", cfg, "--budget", "2", "--out", tmp_path / "r2")
    assert json.loads((tmp_path / "r2" / "run.json").read_text())["config"]["budget"] == 2
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "generate", "Chair", "--config", cfg)
    assert code == 64 and "colour" in err
    assert run(capsys, "generate", "Chair", "--config", tmp_path / "none.cfg")[0] == 66


def test_read_config_rejects_bare_key(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("budget\n")
    with pytest.raises(UsageError):
        read_config(path)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "proto3d.cli", "render", str(tmp_path / "x.psc")], capture_output=True, text=True)
    assert proc.returncode == 66
