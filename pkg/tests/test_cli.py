import json
import math

import pytest

from nctorus import io as nio
from nctorus.bundle import BundleModel, ConnectionSpec
from nctorus.cli import EXIT_CONSISTENCY, EXIT_OK, EXIT_VALIDATION, main
from nctorus.core import DeformationMatrix, TorusElement
from nctorus.dirac import Spinor
from nctorus.forms import TorusForm


@pytest.fixture
def mu_file(tmp_path, xi2):
    u1 = TorusElement.generator(xi2, 1)
    mu = TorusForm.basis(xi2, [2], u1 + u1.star())
    path = tmp_path / "mu.json"
    path.write_text(nio.dumps(nio.form_to_json(mu)))
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_form_round_trip(xi3, rng):
    f = TorusForm.random(xi3, rng, 1) + TorusForm.random(xi3, rng, 2)
    back = nio.form_from_json(json.loads(nio.dumps(nio.form_to_json(f))))
    assert back.close_to(f, 0)
    assert back.xi == xi3


def test_element_and_connection_round_trip(xi2, rng):
    x = TorusElement.random(xi2, rng)
    assert nio.element_from_json(nio.element_to_json(x)).close_to(x, 0)
    model = BundleModel.create("A", xi2, fiber_row=[0.1, 0.0])
    u1 = TorusElement.generator(xi2, 1)
    omega = ConnectionSpec(model, TorusForm.basis(xi2, [2], u1 + u1.star()))
    back = nio.connection_from_json(nio.connection_to_json(omega))
    assert back.model == model and back.mu.close_to(omega.mu, 0)


def test_spinor_round_trip(xi2, rng):
    psi = Spinor.random(xi2, 2, rng)
    assert nio.spinor_from_json(nio.spinor_to_json(psi), xi2).close_to(psi, 0)


def test_curvature_canonical(capsys):
    code, out, _ = run(capsys, "curvature")
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["is_flat"] and report["curvature"]["components"] == []


def test_curvature_with_mu(capsys, mu_file):
    code, out, _ = run(capsys, "curvature", "--mu", str(mu_file))
    report = json.loads(out)
    comps = report["curvature"]["components"]
    assert code == EXIT_OK and not report["is_flat"]
    assert comps[0]["axes"] == [1, 2]
    coeffs = {tuple(t["m"]): t["re"] for t in comps[0]["element"]}
    assert coeffs == pytest.approx({(-1, 0): 2 * math.pi, (1, 0): -2 * math.pi})


def test_invalid_pairing(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "A", "calculus": "NonStandard"}))
    code, _, err = run(capsys, "curvature", "--config", str(cfg))
    assert code == EXIT_VALIDATION and "Classical" in err


def test_bad_xi(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 2, "xi": [[0, 0.3], [0.2, 0]]}))
    code, out, err = run(capsys, "verify", "--config", str(cfg))
    assert code == EXIT_VALIDATION and out == "" and "antisymmetric" in err


def test_malformed_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert run(capsys, "curvature", "--config", str(cfg))[0] == EXIT_VALIDATION
    assert run(capsys, "curvature", "--config", str(tmp_path / "missing.json"))[0] == EXIT_VALIDATION


def test_ym_reports(capsys, mu_file):
    code, out, _ = run(capsys, "ym", "geometric", "--mu", str(mu_file))
    rep = json.loads(out)
    assert code == EXIT_OK
    assert set(rep) >= {"kind", "norm", "is_solution", "residual", "consistency_gap"}
    assert not rep["is_solution"] and rep["consistency_gap"] <= 1e-9
    assert rep["ym_functional"] == pytest.approx(8 * math.pi**2)
    code, out, _ = run(capsys, "ym", "analytic", "--model", "B")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["is_solution"] and rep["kind"] == "Analytic"


def test_ym_flat_model_b(capsys, tmp_path, xi2):
    mu = TorusForm.one_form({1: TorusElement.scalar(xi2, 2 * math.pi), 2: TorusElement.scalar(xi2, -4 * math.pi)})
    conn = nio.connection_to_json(ConnectionSpec(BundleModel.create("B", xi2), mu))
    path = tmp_path / "conn.json"
    path.write_text(nio.dumps(conn))
    code, out, _ = run(capsys, "ym", "geometric", "--mu", str(path))
    rep = json.loads(out)
    assert code == EXIT_OK and rep["is_solution"] and rep["model"] == "B"


def test_dirac_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "dirac", "spectrum", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == EXIT_OK and lines[0] == "re,im,multiplicity" and lines[1] == "0.0,0.0,2"
    code, out, _ = run(capsys, "dirac", "residual")
    assert code == EXIT_OK and json.loads(out)["is_solution"]
    assert run(capsys, "dirac", "spectrum", "--model", "B")[0] == EXIT_VALIDATION
    assert run(capsys, "curvature", "--format", "csv")[0] == EXIT_VALIDATION
    code, out, _ = run(capsys, "dirac", "spectrum", "--n", "5")
    assert code == EXIT_OK and json.loads(out)["signature"] == -1


def test_out_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "curvature", "--out", str(target))
    assert code == EXIT_OK and out == ""
    assert json.loads(target.read_text())["command"] == "curvature"


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ym"])
    assert exc.value.code == 2


def test_verify_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code_a = main(["verify", "--seed", "11", "--out", str(a)])
    code_b = main(["verify", "--seed", "11", "--out", str(b)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert code_a == code_b
    report = json.loads(a.read_text())
    failing = [s["name"] for s in report["suites"] if not s["passed"]]
    # the kernel-dimension expectation is known not to hold (see README)
    assert failing == ["ym_solution_spaces"]
    assert code_a == EXIT_CONSISTENCY
    assert report["first_failure"]["suite"] == "ym_solution_spaces"
