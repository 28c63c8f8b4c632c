import json
import hashlib
from pathlib import Path

import pytest

from subdioph.cli import main

LINE_CFG = """
[construction]
kind = line
n = 3
gamma = 3
theta = 5
seed = 7
mode = strict

[scan]
e = 1
height_sq_max = 2000
score_floor = 3/2
level = 5

[estimate]
e = 1
n_values = 2,3,4,5
tolerance = 1/10
"""

BLOCKS_CFG = """
[construction]
kind = blocks
d = 2
m = 2
beta1 = 5, 4
beta2 = 26, 25
theta = 5
seed = 2
mode = relaxed
"""

RECURSIVE_CFG = """
[construction]
kind = recursive
n = 4
d = 2
gamma = 4
proxies = 3
theta = 5
seed = 3
mode = relaxed
level = 3
"""


@pytest.fixture
def line_cfg(tmp_path):
    p = tmp_path / "line.cfg"
    p.write_text(LINE_CFG)
    return p


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_height_member_angles(capsys):
    code, payload = run(capsys, "height", "--basis", "1,0,1;0,1,1")
    assert code == 0 and payload["heightSq"] == "3"

    code, payload = run(capsys, "member", "--y", "1,1,2", "--basis", "1,0,1;0,1,1")
    assert code == 0 and payload["verdict"] == "InB"

    code, payload = run(capsys, "angles", "--a", "1,0", "--b", "1,1")
    assert code == 0 and payload["sin_sq"] == "1/2"

    code, payload = run(capsys, "angles", "--a-basis", "1,0,0;0,1,0", "--b-basis", "1,0,0;0,1,1")
    assert code == 0 and len(payload["omegas"]) == 2


def test_parse_error_exit_code(capsys):
    code, _ = run(capsys, "height", "--basis", "1,x;0,1")
    assert code == 2


def test_construct_line_and_predictions(capsys, tmp_path, line_cfg):
    out = tmp_path / "out"
    code, payload = run(capsys, "--out", str(out), "construct-line", "--config", str(line_cfg))
    assert code == 0
    assert payload["predicted_mu"] == {"1": "3", "2": "9"}
    assert (out / "construction.json").exists()
    assert (out / "manifest.json").exists()


def test_construct_blocks_prediction(capsys, tmp_path):
    cfg = tmp_path / "blocks.cfg"
    cfg.write_text(BLOCKS_CFG)
    code, payload = run(capsys, "construct-blocks", "--config", str(cfg))
    assert code == 0
    entries = {(x["e"], x["j"]): x["mu"] for x in payload["predicted"]["entries"]}
    assert entries[(3, 2)] == "260/23"


def test_construct_strict_violation_exit_code(capsys, tmp_path):
    cfg = tmp_path / "blocks.cfg"
    cfg.write_text(BLOCKS_CFG.replace("mode = relaxed", "mode = strict"))
    code, _ = run(capsys, "construct-blocks", "--config", str(cfg))
    assert code == 2


def test_construct_recursive(capsys, tmp_path):
    cfg = tmp_path / "rec.cfg"
    cfg.write_text(RECURSIVE_CFG)
    code, payload = run(capsys, "construct-recursive", "--config", str(cfg))
    assert code == 0
    assert payload["predicted_mu"] == {"1": "4", "2": "16"}


def test_scan_outputs_and_determinism(capsys, tmp_path, line_cfg):
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    code, _ = run(capsys, "--out", str(out1), "scan", "--config", str(line_cfg))
    assert code == 0
    code, _ = run(capsys, "--out", str(out2), "scan", "--config", str(line_cfg))
    assert code == 0
    d1 = hashlib.sha256((out1 / "scan.csv").read_bytes()).hexdigest()
    d2 = hashlib.sha256((out2 / "scan.csv").read_bytes()).hexdigest()
    assert d1 == d2
    assert (out1 / "scan.png").exists()
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert str(out1 / "scan.csv") in manifest["outputs"]
    assert manifest["outputs"][str(out1 / "scan.csv")] == d1


def test_estimate_pass_and_fail(capsys, tmp_path, line_cfg):
    out = tmp_path / "est"
    code, payload = run(capsys, "--out", str(out), "estimate", "--config", str(line_cfg), "--no-plot")
    assert code == 0 and payload["passed"]
    assert (out / "estimate.csv").exists()
    assert not (out / "estimate.png").exists()

    # deliberately wrong prediction: compare against a tight-tolerance clone
    bad = tmp_path / "bad.cfg"
    bad.write_text(LINE_CFG.replace("gamma = 3", "gamma = 3").replace("tolerance = 1/10", "tolerance = 1/100000000"))
    code, payload = run(capsys, "--out", str(tmp_path / "est2"), "estimate", "--config", str(bad), "--no-plot")
    assert code == 4 and not payload["passed"]


def test_precision_exhaustion_exit_code(capsys, monkeypatch):
    from subdioph import cli as cli_mod
    from subdioph.numeric import PrecisionExhausted

    def boom(*a, **k):
        raise PrecisionExhausted("forced")

    monkeypatch.setattr(cli_mod.angles_mod, "principal_sines", boom)
    code, _ = run(capsys, "angles", "--a-basis", "1,0;0,1", "--b-basis", "1,1;1,0")
    assert code == 3


def test_file_input_syntax(capsys, tmp_path):
    p = tmp_path / "basis.txt"
    p.write_text("1,0,1;0,1,1\n")
    code, payload = run(capsys, "height", "--basis", f"@{p}")
    assert code == 0 and payload["heightSq"] == "3"


def test_spectrum_certify(capsys):
    code, payload = run(capsys, "spectrum-certify", "--family", "min-angle", "--n", "6", "--d", "2")
    assert code == 0 and payload["certificateLevel"] == "triangular"

    code, payload = run(capsys, "spectrum-certify", "--family", "last-angle-d", "--n", "4", "--d", "2")
    assert code == 0 and payload["certificateLevel"] in ("triangular", "genericRank")

    code, _ = run(capsys, "spectrum-certify", "--family", "min-angle", "--n", "5", "--d", "2")
    assert code == 2
