import json
import subprocess
import sys

import pytest

from conftest import fixture_path
from tanglefloer.cli import main, run
from tanglefloer.tangle import parse_tangle

FIG8 = str(fixture_path("figure8"))


def lines(argv):
    res = run(argv)
    return res.exit_code, res.text().splitlines()


def test_figure8_homology():
    code, out = lines(["homology", FIG8])
    assert code == 0
    assert {"H_-1 = Z", "H_-2 = Z^2", "H_-3 = Z"} <= set(out)
    assert "H_1 = 0" in out


def test_n_signs_give_the_same_groups():
    assert lines(["homology", FIG8, "--signs", "n"])[1] == lines(["homology", FIG8])[1]


def test_duplicate_parameter_fails_validation():
    code, out = lines(["validate", str(fixture_path("duplicate_tu.tgl"))])
    assert code == 1
    assert "duplicate unstable parameter" in out[0]


def test_differing_homology_is_a_violation():
    code, _ = lines(["invariance", FIG8, str(fixture_path("tilted"))])
    assert code == 2


def test_secondary_move_invariance_passes():
    code, out = lines(["invariance", str(fixture_path("badflip_pre")), str(fixture_path("badflip_post"))])
    assert code == 0
    assert any("boundary matrices identical" in line for line in out)


@pytest.mark.parametrize("argv", [
    ["homology", "/nonexistent/tangle.tgl"],
    ["homology", FIG8, "--signs", "q"],
    ["frobnicate"],
])
def test_io_and_usage_errors(argv):
    assert run(argv).exit_code == 3


def test_malformed_file(tmp_path):
    bad = tmp_path / "bad.tgl"
    bad.write_text("surface plane\norientation preserving\nwindow x\n")
    code, out = lines(["validate", str(bad)])
    assert code == 3
    assert "line 3" in out[0]


def test_machine_block():
    res = run(["--machine", "homology", FIG8])
    text = res.text(True)
    head, _, block = text.partition("--- machine\n")
    data = json.loads(block)
    assert data["homology"]["-2"] == {"rank": 2, "torsion": []}
    assert data["ring"] == "Z" and data["signs"] == "m"
    assert "H_-2 = Z^2" in head


def test_output_is_deterministic():
    assert run(["--machine", "homology", FIG8]).text(True) == run(["--machine", "homology", FIG8]).text(True)


def test_semi_power():
    code, out = lines(["semi", str(fixture_path("badflip_post")), "--power", "3"])
    assert code == 0
    assert "H~_-1 = Z^3" in out


def test_chaotic_and_zeta():
    chaos = str(fixture_path("chaos"))
    assert "Hc_-1 = 0" in lines(["chaotic", chaos, "--n", "2"])[1]
    code, out = lines(["zeta", chaos, "--N", "3"])
    assert code == 0
    assert out == ["chi = 0 0 0", "zeta = 1 0 0 0"]


def test_cohomology():
    code, out = lines(["cohomology", FIG8])
    assert code == 0
    assert "H^-2 = Z^2" in out


def test_iterate_writes_a_tangle(capsys):
    assert main(["iterate", str(fixture_path("chaos")), "--n", "3"]) == 0
    t = parse_tangle(capsys.readouterr().out)
    assert len(t.orbits) == 6


def test_move_writes_post_tangle(tmp_path):
    out = tmp_path / "post.tgl"
    code = main(["move", str(fixture_path("badflip_pre")), str(fixture_path("badflip.mv")), "-o", str(out)])
    assert code == 0
    assert out.read_text() == fixture_path("badflip_post").read_text()


def test_sketch_svg(tmp_path):
    out = tmp_path / "f.svg"
    assert main(["sketch", FIG8, "-o", str(out)]) == 0
    svg = out.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_trace_without_crossings(tmp_path):
    out = tmp_path / "t.tgl"
    assert main(["trace", "--budget", "0.5", "-o", str(out)]) == 0
    assert parse_tangle(out.read_text()).points == ()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tanglefloer", "homology", FIG8], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "H_-2 = Z^2" in proc.stdout
