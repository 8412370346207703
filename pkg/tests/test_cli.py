import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from qftverify import suites
from qftverify.cli import load_config, main
from qftverify.errors import ConfigError
from qftverify.scattering import compton_momenta


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_all_passes(capsys, tmp_path):
    out = tmp_path / "verify.csv"
    code, _, err = run(["verify", "--suite", "all", "--trials", 100, "--seed", 7, "--out", out], capsys)
    assert code == 0, err
    rows = read_csv(out.read_text())
    assert len(rows) >= 30
    assert {r["status"] for r in rows} == {"PASS"}
    assert (tmp_path / "verify.png").stat().st_size > 0


def test_verify_dirac_rows(capsys):
    code, out, _ = run(["verify", "--suite", "dirac", "--trials", 10], capsys)
    names = {r["identity"] for r in read_csv(out)}
    assert code == 0
    assert {"clifford", "R_eigenvalues"} <= names
    assert any(n.startswith("sp_") for n in names)


def test_verify_corrupted_model_fails_matlocal(capsys):
    code, out, err = run(["verify", "--suite", "fields", "--trials", 5, "--corrupt-matlocal"], capsys)
    assert code == 1
    assert "FAIL fields.matlocal" in err
    failed = [r["identity"] for r in read_csv(out) if r["status"] == "FAIL"]
    assert "matlocal" in failed


def test_verify_bad_suite_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nonsense"])
    assert exc.value.code == 2


def test_verify_tol_override(capsys):
    code, out, _ = run(["verify", "--suite", "kinematics", "--trials", 5, "--tol", 1e-300], capsys)
    rows = read_csv(out)
    assert code == 1
    assert all(float(r["tol"]) == 1e-300 for r in rows)


def test_verify_json_format(capsys):
    code, out, _ = run(["verify", "--suite", "wick", "--trials", 5, "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["passed"] is True
    assert all(r["status"] == "PASS" for r in data["rows"])


def test_compton_low_energy_table(capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, _, _ = run(["compton", "--rho-hat", 1e-3, "--out", out], capsys)
    rows = read_csv(out.read_text())
    assert code == 0 and len(rows) == 19
    assert max(abs(float(r["ratio"]) - 1) for r in rows) < 0.01
    for r in rows:
        th = float(r["theta"])
        assert float(r["fractional_error_bound"]) == pytest.approx(1e-3 * (1 - np.cos(th)) / (1 + 2e-3), abs=1e-18)
    assert (tmp_path / "c.png").exists()
    # LF line endings and 17 significant digits
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    assert rows[1]["theta"] == f"{np.pi / 18:.17g}"


def test_compton_forward_grid(capsys):
    code, out, _ = run(["compton", "--theta-min", 0, "--theta-max", 0, "--n-theta", 1], capsys)
    rows = read_csv(out)
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["fractional_error_bound"]) == 0


@pytest.mark.parametrize(
    "extra",
    [["--n-theta", 0], ["--theta-max", 4.0], ["--rho-hat", -1.0], ["--variant", "both", "--mass", 0]],
)
def test_compton_bad_grid(capsys, extra):
    code, _, err = run(["compton", *extra], capsys)
    assert code == 2
    assert "InvalidGrid" in err


def test_potential_fit(capsys, tmp_path):
    out = tmp_path / "v.json"
    code, _, _ = run(["potential", "--format", "json", "--out", out], capsys)
    data = json.loads(out.read_text())
    assert code == 0
    assert data["fit"]["relative_error"] < 0.02
    assert {r["regime"] for r in data["rows"]} == {"short", "coulomb", "yukawa"}
    for r in data["rows"]:
        assert r["magnitude"] == pytest.approx(r["magnitude_closed_form"], rel=1e-6)
    assert (tmp_path / "v.png").exists()


def test_potential_bad_spec(capsys):
    code, _, err = run(["potential", "--alpha", 2.0], capsys)
    assert code == 2 and "ConfigError" in err


def kinematics_file(tmp_path, **extra):
    p1, p2, p3, p4 = compton_momenta(0.2, 1.0, 1.0)
    data = {"process": "compton", "momenta": [list(p) for p in (p1, p2, p3, p4)], **extra}
    path = tmp_path / "kin.json"
    path.write_text(json.dumps(data))
    return path, (p1, p2, p3, p4)


def test_amplitude_compton(capsys, tmp_path):
    path, _ = kinematics_file(tmp_path, pol1=1)
    code, out, _ = run(["amplitude", path, "--format", "json"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert set(rec["results"]) == {"feynman", "constructed"}
    assert set(rec["results"]["feynman"]["channel_terms"]) == {"s", "u"}
    assert rec["results"]["feynman"]["abs2"] > 0


def test_amplitude_conservation_violated(capsys, tmp_path):
    p1, p2, p3, p4 = compton_momenta(0.2, 1.0, 1.0)
    p4 = p4 + np.array([0.1, 0, 0, 0])
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"process": "compton", "momenta": [list(p) for p in (p1, p2, p3, p4)]}))
    code, _, err = run(["amplitude", path], capsys)
    assert code == 2 and "ConservationViolated" in err


@pytest.mark.parametrize(
    "content,name",
    [("not json", "MalformedInput"), ('{"momenta": [[1, 2]]}', "MalformedInput"), ('{"x": 1}', "MalformedInput")],
)
def test_amplitude_malformed_input(capsys, tmp_path, content, name):
    path = tmp_path / "k.json"
    path.write_text(content)
    code, _, err = run(["amplitude", path], capsys)
    assert code == 2 and name in err


def test_amplitude_missing_file(capsys, tmp_path):
    code, _, err = run(["amplitude", tmp_path / "missing.json"], capsys)
    assert code == 2 and "MalformedInput" in err


def test_amplitude_general_with_config(capsys, tmp_path):
    from qftverify.fields import electron_polarization, transverse_polarization

    p1, p2, p3, p4 = compton_momenta(0.3, 1.2, 1.0)
    pols = [
        transverse_polarization(p1, 1.0, 0.0).w,
        electron_polarization(p2, 1.0, 1).w,
        transverse_polarization(p3, 0.0, 1.0).w,
        electron_polarization(p4, 1.0, 2).w,
    ]
    # mix photon and electron components so the block-diagonal M contributes
    mixed = [pols[0] + pols[1], pols[1] + pols[0], pols[2] + pols[3], pols[3] + pols[2]]
    kin = tmp_path / "gen.json"
    kin.write_text(
        json.dumps(
            {
                "process": "general",
                "momenta": [list(p) for p in (p1, p2, p3, p4)],
                "polarizations": [[[z.real, z.imag] for z in w] for w in mixed],
            }
        )
    )
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"multipliers": {"c4": 0.5, "varsigma2": [0, 1]}}))
    code, out, err = run(["amplitude", kin, "--config", cfg, "--format", "json"], capsys)
    assert code == 0, err
    val = json.loads(out)["results"]["constructed"]["value"]
    assert np.hypot(*val) > 0


def test_config_validation(tmp_path):
    assert set(load_config(None)) == {"model", "measures", "multipliers", "sweep"}
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": {}}))
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_config_supplies_sweep(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sweep": {"rho_hat": 0.5, "theta": [0.5, 1.5], "variant": "feynman"}}))
    code, out, _ = run(["compton", "--config", cfg], capsys)
    rows = read_csv(out)
    assert code == 0 and [float(r["theta"]) for r in rows] == [0.5, 1.5]
    assert "ratio" not in rows[0]


def test_determinism(capsys, tmp_path):
    outs = []
    for i in range(2):
        d = tmp_path / str(i)
        for fmt in ("csv", "json"):
            run(["verify", "--suite", "kinematics", "--trials", 20, "--seed", 3, "--format", fmt, "--out", d / f"v.{fmt}"], capsys)
        outs.append([(d / n).read_bytes() for n in ("v.csv", "v.json", "v.png")])
    assert outs[0] == outs[1]


def test_no_plot_flag(capsys, tmp_path):
    run(["compton", "--n-theta", 3, "--no-plot", "--out", tmp_path / "c.csv"], capsys)
    assert not (tmp_path / "c.png").exists()


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "qftverify", "verify", "--suite", "wick", "--trials", "3"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout.startswith("suite,identity,max_residual,tol,status")


def test_suite_registry():
    assert set(suites.SUITES) == {"kinematics", "dirac", "fields", "wick", "scattering"}
    rows = suites.run_suite("wick", suites.Context(rng=np.random.default_rng(0), trials=3))
    assert all(r.passed for r in rows)
