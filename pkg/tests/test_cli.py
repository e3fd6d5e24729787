import json

import pytest

from adiaspin.cli import main


@pytest.fixture
def field_file(tmp_path):
    def make(cfg):
        p = tmp_path / "field.json"
        p.write_text(json.dumps(cfg))
        return str(p)
    return make


RZ = {"type": "rosen_zener", "beta0": 3.0, "zeta": 1.0, "T": 1.0}
LONG = {"type": "constant", "b": [0.0, 0.0, 1.0]}


def _run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr()


def test_simulate_csv(capsys, field_file):
    code, out = _run(capsys, ["simulate", "--field", field_file(RZ), "--t0", "-2", "--t1", "2",
                              "--n", "5", "--spinor", "1,0"])
    assert code == 0
    lines = out.out.strip().splitlines()
    assert len(lines) == 6
    assert lines[0].startswith("t,q_w,q_x,q_y,q_z,bloch_x")
    assert lines[1].split(",")[1] == "1"


def test_simulate_longitudinal_has_nan_frame(capsys, field_file):
    code, out = _run(capsys, ["simulate", "--field", field_file(LONG), "--t0", "0", "--t1", "1", "--n", "3"])
    assert code == 0 and "nan" in out.out


def test_compare_json(capsys, field_file, tmp_path):
    dest = tmp_path / "cmp.json"
    code, _ = _run(capsys, ["compare", "--field", field_file(RZ), "--t0", "-3", "--t1", "3", "--n", "4",
                            "--format", "json", "--out", str(dest)])
    assert code == 0
    doc = json.loads(dest.read_text())
    assert doc["columns"][0] == "t" and len(doc["rows"]) == 4


def test_angles(capsys, field_file):
    code, out = _run(capsys, ["angles", "--field", field_file(RZ), "--t0", "-2", "--t1", "2", "--n", "5"])
    assert code == 0
    assert out.out.splitlines()[0].startswith("t,alpha_rad,gamma_rad")


def test_angles_longitudinal_is_numeric_failure(capsys, field_file):
    code, out = _run(capsys, ["angles", "--field", field_file(LONG), "--t0", "0", "--t1", "1"])
    assert code == 3 and "numerical failure" in out.err


def test_oscillator(capsys, field_file):
    code, out = _run(capsys, ["oscillator", "--field", field_file(RZ), "--t0", "-3", "--t1", "3", "--n", "64"])
    assert code == 0 and len(out.out.strip().splitlines()) == 65


def test_sweep_and_claims(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"beta0_values": [5.0], "zeta_values": [1.0], "conventions": ["lab-x"]}))
    code, out = _run(capsys, ["rz-sweep", "--spec", str(spec)])
    assert code == 0 and len(out.out.strip().splitlines()) == 2
    code, out = _run(capsys, ["claims", "--spec", str(spec)])
    assert code == 0
    assert "rosen_zener" in json.loads(out.out)


@pytest.mark.parametrize("argv", [
    ["simulate", "--field", "/nonexistent.json", "--t0", "0", "--t1", "1"],
    ["bogus"],
    ["simulate", "--t0", "0", "--t1", "1"],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_bad_tolerance(capsys, field_file):
    code, _ = _run(capsys, ["simulate", "--field", field_file(RZ), "--t0", "0", "--t1", "1", "--rel-tol", "-1"])
    assert code == 2


def test_bad_grid(capsys, field_file):
    code, _ = _run(capsys, ["simulate", "--field", field_file(RZ), "--t0", "1", "--t1", "0"])
    assert code == 2


def test_bad_spec(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text("[1, 2]")
    assert main(["rz-sweep", "--spec", str(spec)]) == 2
