import json

import numpy as np
import pytest

from decofree.born import ControlTrajectory
from decofree.channels import dephasing_channel
from decofree.cli import main
from decofree.jsonio import (
    channel_to_json,
    dump_json,
    generator_to_json,
    matrix_to_json,
    trajectory_to_json,
    vector_to_json,
)
from decofree.lindblad import GKLSGenerator
from decofree.operators import eye, sm, sx, sz


@pytest.fixture
def workdir(tmp_path):
    files = {}
    files["dephasing"] = tmp_path / "dephasing.json"
    dump_json(channel_to_json(dephasing_channel(0.25)), str(files["dephasing"]))

    files["bad_channel"] = tmp_path / "bad.json"
    dump_json({"dim": 2, "kraus": [matrix_to_json(np.diag([1.0, 0.5]))]},
              str(files["bad_channel"]))

    files["damping"] = tmp_path / "damping.json"
    dump_json(generator_to_json(GKLSGenerator(np.zeros((2, 2)), [sm])), str(files["damping"]))

    files["traj"] = tmp_path / "traj.json"
    dump_json(trajectory_to_json(ControlTrajectory(1.0, [(2.0, np.zeros((2, 2)))])),
              str(files["traj"]))

    files["coupling"] = tmp_path / "coupling.json"
    dump_json({"S": [matrix_to_json(sz)],
               "bath": {"type": "gaussian", "coupling": 0.01, "width": 2.0}},
              str(files["coupling"]))

    files["plus"] = tmp_path / "plus.json"
    dump_json(vector_to_json(np.array([1.0, 1.0]) / np.sqrt(2.0)), str(files["plus"]))

    files["mixed"] = tmp_path / "mixed.json"
    dump_json(matrix_to_json(eye(2) / 2), str(files["mixed"]))

    files["out"] = tmp_path / "report.json"
    return files


def run_cli(args, out_path):
    code = main([*args, "--out", str(out_path)] if "--out" not in args else list(args))
    report = json.loads(out_path.read_text()) if out_path.exists() else None
    return code, report


def test_df_dephasing(workdir, capsys):
    code = main(["df", "--channel", str(workdir["dephasing"])])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["dimension"] == 2
    assert report["blocks"] == [[1, 1], [1, 1]]
    assert len(report["basis"]) == 2


def test_analyze_channel_validation_failure(workdir, capsys):
    code = main(["analyze-channel", "--channel", str(workdir["bad_channel"])])
    assert code == 2
    report = json.loads(capsys.readouterr().out)
    assert report["error"] == "validation"
    assert report["unitality_defect"] == pytest.approx(0.75)


def test_analyze_channel_report(workdir, capsys):
    code = main(["analyze-channel", "--channel", str(workdir["dephasing"])])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["completely_positive"]
    assert report["kraus_rank"] == 2
    assert report["multiplicative_domain"]["dimension"] == 2


def test_analyze_semigroup(workdir, capsys):
    code = main(["analyze-semigroup", "--generator", str(workdir["damping"])])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["generator_unitality_defect"] < 1e-10
    assert report["decoherence_free"]["dimension"] == 1


def test_born_error_matches_library(workdir, capsys):
    code = main([
        "born-error", "--traj", str(workdir["traj"]), "--coupling", str(workdir["coupling"]),
        "--psi", str(workdir["plus"]),
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)

    from decofree.born import (
        Coupling, FrequencyGrid, error_frequency_domain, error_time_domain, gaussian_bath,
        constant_trajectory,
    )

    traj = constant_trajectory(np.zeros((2, 2)), 1.0)
    coupling = Coupling(system_ops=(sz,), bath=gaussian_bath(0.01, 2.0))
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert report["epsilon_time"] == error_time_domain(traj, coupling, plus)
    expected = error_frequency_domain(traj, coupling, plus, FrequencyGrid.for_trajectory(traj))
    assert report["epsilon_frequency"] == expected.epsilon


def test_scan_monotone_flags(workdir, capsys):
    code = main([
        "scan", "--traj", str(workdir["traj"]), "--coupling", str(workdir["coupling"]),
        "--psi", str(workdir["plus"]), "--lambdas", "1,2",
        "--grid-points", "2001",
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert len(report["points"]) == 2
    assert report["points"][0]["lambda"] == 1.0


def test_evolve_generator(workdir, capsys):
    code = main([
        "evolve", "--generator", str(workdir["damping"]), "--state", str(workdir["mixed"]),
        "--times", "0,0.5,1",
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert [s["t"] for s in report["states"]] == [0.0, 0.5, 1.0]
    for entry in report["states"]:
        assert entry["trace"] == pytest.approx(1.0, abs=1e-10)
        assert entry["min_eigenvalue"] > -1e-10


def test_evolve_channel(workdir, capsys):
    code = main([
        "evolve", "--channel", str(workdir["dephasing"]), "--state", str(workdir["mixed"]),
        "--steps", "3",
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert len(report["states"]) == 4


def test_blocks_command(workdir, tmp_path, capsys):
    ops_path = tmp_path / "ops.json"
    dump_json({"ops": [matrix_to_json(sx)]}, str(ops_path))
    code = main(["blocks", "--ops", str(ops_path)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["dimension"] == 2
    assert report["blocks"] == [[1, 1], [1, 1]]


def test_invariance_command(tmp_path, capsys):
    gen_path = tmp_path / "sr.json"
    dump_json({"model": "superradiance", "N": 2, "omega": 1.0, "gamma": 1.0}, str(gen_path))
    code = main(["invariance", "--generator", str(gen_path), "--sites", "2"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["global_residual"] < 1e-10
    assert report["locally_invariant"]
    assert report["group_algebra_inside_commutant"]


def test_missing_file_is_validation_error(tmp_path, capsys):
    code = main(["df", "--channel", str(tmp_path / "missing.json")])
    assert code == 2
    report = json.loads(capsys.readouterr().out)
    assert report["error"] == "validation"


def test_reports_are_byte_identical(workdir):
    out1, out2 = workdir["out"], workdir["out"].with_suffix(".2.json")
    code1 = main(["df", "--channel", str(workdir["dephasing"]), "--out", str(out1)])
    code2 = main(["df", "--channel", str(workdir["dephasing"]), "--out", str(out2)])
    assert code1 == code2 == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_seed_changes_are_visible_but_stable(workdir, capsys):
    code = main(["df", "--channel", str(workdir["dephasing"]), "--seed", "99"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["seed"] == 99
    assert report["blocks"] == [[1, 1], [1, 1]]


def test_tolerance_env_override(workdir, monkeypatch):
    monkeypatch.setenv("DECOFREE_TOL", "1e-3")
    import importlib

    import decofree.cli as cli_module

    importlib.reload(cli_module)
    assert cli_module.DEFAULT_TOL == 1e-3
    monkeypatch.delenv("DECOFREE_TOL")
    importlib.reload(cli_module)
