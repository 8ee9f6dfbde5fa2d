import json
import math
from pathlib import Path

import pytest

from cmcslab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_tube_stable_example(capsys):
    code, out = run(capsys, "tube", "--kappa", "0", "--n", "2", "--rho", "1", "--l", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["closed_form"]["status"] == "Stable"
    assert doc["numerical"]["status"] == "Stable"


def test_bounds_values(capsys):
    code, out = run(capsys, "bounds", "--kappa", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["nonexistence_width"] == pytest.approx(7.2551974569368714)
    assert doc["distance_bound"] == pytest.approx(3.6275987284684357)
    assert doc["diameter_bound"] == pytest.approx(7.2551974569368714)


def test_q_orthogonal_contact(capsys):
    code, out = run(capsys, "q", "--theta", "1.5707963267948966", "--II", "-1", "--sigma", "0.7")
    assert code == 0
    assert out.strip() == "-1"


def test_cylinder_criterion(capsys):
    code, out = run(capsys, "cylinder", "--lambda1", "-1", "--l", "4")
    assert code == 0
    assert json.loads(out)["status"] == "Unstable"
    code, out = run(capsys, "cylinder", "--lambda1", "-1", "--l", str(math.pi))
    assert json.loads(out)["status"] == "Stable"


def test_profile_spectrum_decide_pipeline(tmp_path, capsys):
    surf_file = tmp_path / "bridge.json"
    code, _ = run(
        capsys, "profile", "--kappa", "0", "--n", "2", "--H", "0.5",
        "--l", str(0.9 * math.pi), "--bracket", "0.3", "0.97",
        "--out", str(surf_file),
    )
    assert code == 0 and surf_file.exists()

    spec_file = tmp_path / "spec.csv"
    code, _ = run(
        capsys, "spectrum", "--surface", str(surf_file), "--bc", "neumann",
        "--grid", "300", "--count", "8", "--out", str(spec_file),
    )
    assert code == 0
    lines = spec_file.read_text().splitlines()
    assert lines[0] == "lambda,multiplicity,mode_j,index_k"
    assert len(lines) > 3

    code, out = run(capsys, "decide", "--surface", str(surf_file), "--grid", "300")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] in {"Stable", "Unstable", "Marginal", "StronglyStable"}
    assert "dirichlet_kernel" in doc["provenance"]


def test_cli_matches_library_bitwise(tmp_path, capsys):
    from cmcslab import cylinder_surface, decide_surface
    from cmcslab.operators import BoundaryCondition

    surf = cylinder_surface(0, 2, 1.0, 2.5)
    surf_file = tmp_path / "cyl.json"
    surf_file.write_text(surf.to_json())
    code, out = run(capsys, "decide", "--surface", str(surf_file), "--grid", "200")
    assert code == 0
    bc = BoundaryCondition.neumann()
    expect = decide_surface(surf, bc=(bc, bc), m=200)
    assert out == expect.to_json() + "\n"


def test_scan_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _ = run(
            capsys, "scan", "--kappa", "-1", "--n", "3",
            "--rho-range", "0.5", "1.5", "--samples", "7", "--out", str(path),
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "rho,l_star_numeric,l_star_closed,abs_rel_err"


def test_scan_threshold_agreement(tmp_path, capsys):
    out_file = tmp_path / "scan.csv"
    run(capsys, "scan", "--kappa", "1", "--n", "2",
        "--rho-range", "0.3", "1.2", "--samples", "5", "--out", str(out_file))
    for line in out_file.read_text().splitlines()[1:]:
        assert float(line.split(",")[3]) <= 1e-6


def test_missing_parameter_exit_code(capsys):
    code = main(["tube", "--kappa", "0", "--n", "2"])
    assert code == 1


def test_usage_error_exit_code(capsys):
    assert main(["tube", "--kappa", "7", "--n", "2", "--rho", "1", "--l", "1"]) == 1


def test_no_solution_exit_code(capsys):
    code = main([
        "profile", "--kappa", "0", "--n", "2", "--H", "0", "--l", "1",
        "--bracket", "0.2", "3.0", "--out", "/tmp/nope.json",
    ])
    assert code == 3


def test_config_file_fills_missing(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kappa": 1.0}))
    code, out = run(capsys, "bounds", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["nonexistence_width"] == pytest.approx(7.2551974569368714)


def test_verify_fast_exits_zero(capsys):
    code = main(["verify", "--fast"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("PASS") == 8
