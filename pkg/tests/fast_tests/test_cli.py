import json

import numpy as np
import pytest

import bose_bounds
from bose_code.common_utils import PointwiseViolation
from bose_code.config import REFERENCE_PAIR_PATH
from bose_code.perturbation import run_trial


def run_cli(argv):
    with pytest.raises(SystemExit) as exit_info:
        bose_bounds.main(argv)
    return exit_info.value.code


def read_report(path):
    with open(path) as report_file:
        return json.load(report_file)


def test_perturb_smoke_run(tmp_path):
    out = tmp_path.joinpath("perturb.json")
    code = run_cli(["verify", "perturb", "--trials", "10", "--dim", "20", "--seed", "1", "--out", str(out)])
    assert code == 0
    payload = read_report(out)
    assert payload["report"]["violations"] == 0
    assert payload["header"]["config"]["trials"] == 10
    assert payload["header"]["version"] == bose_bounds.__version__


def test_reports_are_byte_identical(tmp_path):
    paths = [tmp_path.joinpath(f"run{i}.json") for i in range(2)]
    for path in paths:
        run_cli(["verify", "perturb", "--trials", "6", "--dim", "12", "--seed", "3", "--out", str(path)])
    # the output path is part of the header, so compare the reports only
    assert read_report(paths[0])["report"] == read_report(paths[1])["report"]
    assert paths[0].read_text().replace("run0", "run1") == paths[1].read_text()


def test_oversized_fraction_exits_with_input_error(tmp_path):
    code = run_cli(
        ["verify", "perturb", "--trials", "5", "--dim", "10", "--x-fraction", "0.3",
         "--out", str(tmp_path.joinpath("r.json"))]
    )
    assert code == 1


def test_replay_witness(tmp_path):
    witness = run_trial(2, 5, 15, "boundary").witness
    witness_path = tmp_path.joinpath("witness.json")
    witness_path.write_text(json.dumps(witness))
    out = tmp_path.joinpath("replay.json")
    assert run_cli(["verify", "perturb", "--replay", str(witness_path), "--out", str(out)]) == 0
    replayed = read_report(out)["report"]["replayed"]
    assert replayed[0]["witness"] == witness


def test_missing_pair_file(tmp_path):
    code = run_cli(["scattering", "--pair", str(tmp_path.joinpath("nothing.json"))])
    assert code == 1


def test_usage_error_prints_schema(capsys):
    code = run_cli(["teleport"])
    assert code == 1
    assert '"r0"' in capsys.readouterr().err


def test_eig_needs_an_extent(capsys):
    assert run_cli(["eig", "--kind", "ball", "--pair", str(REFERENCE_PAIR_PATH)]) == 1


def test_scattering_report(capsys):
    code = run_cli(["scattering", "--pair", str(REFERENCE_PAIR_PATH), "--half"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["a"] == pytest.approx(1 - np.tanh(2.0) / 2, rel=1e-8)
    assert len(payload["header"]["pair_sha256"]) == 64


def test_scattering_csv(tmp_path):
    out = tmp_path.joinpath("f.csv")
    code = run_cli(["scattering", "--pair", str(REFERENCE_PAIR_PATH), "--half",
                    "--format", "csv", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,f"
    assert lines[1].split(",") == ["0", "0"]


def test_csv_for_json_only_command(tmp_path):
    code = run_cli(["certify", "--pair", str(REFERENCE_PAIR_PATH), "--format", "csv",
                    "--out", str(tmp_path.joinpath("c.csv"))])
    assert code == 1


def test_certify_then_bounds(tmp_path):
    cert_path = tmp_path.joinpath("cert.json")
    assert run_cli(["certify", "--pair", str(REFERENCE_PAIR_PATH), "--out", str(cert_path)]) == 0
    assert read_report(cert_path)["report"]["delta"] == 0.5

    bounds_path = tmp_path.joinpath("bounds.json")
    code = run_cli(["bounds", "--cert", str(cert_path), "--rho", "1e-4", "--epsilon", "0.03",
                    "--N", "1e6", "--out", str(bounds_path)])
    assert code == 0
    assert 0 < read_report(bounds_path)["report"]["ratio"] < 1


def test_bounds_sweep_csv(tmp_path, mocker):
    cert_path = tmp_path.joinpath("cert.json")
    run_cli(["certify", "--pair", str(REFERENCE_PAIR_PATH), "--out", str(cert_path)])
    out = tmp_path.joinpath("sweep.csv")
    code = run_cli(["bounds", "--cert", str(cert_path), "--sweep-rho", "1e-3,1e-4,1e-5",
                    "--format", "csv", "--out", str(out)])
    assert code == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert rows.shape == (3, 3)
    assert np.all(np.diff(rows[:, 2]) > 0)


def test_bad_epsilon_is_an_input_error(tmp_path):
    cert_path = tmp_path.joinpath("cert.json")
    run_cli(["certify", "--pair", str(REFERENCE_PAIR_PATH), "--out", str(cert_path)])
    assert run_cli(["bounds", "--cert", str(cert_path), "--epsilon", "0.1"]) == 1


def test_lambda_sweep_csv(tmp_path):
    out = tmp_path.joinpath("lambda.csv")
    code = run_cli(["sweep", "--pair", str(REFERENCE_PAIR_PATH), "--lambdas", "0,0.1,0.2",
                    "--half", "--format", "csv", "--out", str(out)])
    assert code == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.all(np.diff(rows[:, 1]) < 0)
    assert np.all(rows[:, 2] == 1)


def test_ie_count(capsys):
    assert run_cli(["ie-count", "--k", "3", "--ell1", "0.1", "--ell2", "1"]) == 0
    report = json.loads(capsys.readouterr().out)["report"]
    assert report["triple_term"] == pytest.approx(1e-6)


def test_verify_all_dispatch(mocker, capsys):
    suite = mocker.patch(
        "bose_bounds.run_suite",
        return_value={"criteria": {}, "passed": {"bounds": True}, "all_passed": True},
    )
    assert run_cli(["verify", "all", "--budget", "full", "--seed", "9"]) == 0
    suite.assert_called_once_with(9, "full", mocker.ANY)
    assert json.loads(capsys.readouterr().out)["report"]["passed_all"]


def test_failed_suite_exits_with_verification_failure(mocker):
    mocker.patch(
        "bose_bounds.run_suite",
        return_value={"criteria": {}, "passed": {"bounds": False}, "all_passed": False},
    )
    assert run_cli(["verify", "all"]) == 2


def test_pointwise_violation_exits_with_verification_failure(mocker):
    mocker.patch(
        "bose_bounds.check_partition", side_effect=PointwiseViolation("V1 >= h_l V1 fails", 0.5)
    )
    assert run_cli(["verify", "partition"]) == 2


def test_partition_dispatch_passes_options(mocker):
    check = mocker.patch("bose_bounds.check_partition", return_value={"passed": True})
    assert run_cli(["verify", "partition", "--cell", "6.0", "--samples", "50", "--seed", "7"]) == 0
    kwargs = check.call_args.kwargs
    assert kwargs["cell"] == 6.0
    assert kwargs["samples"] == 50
    assert kwargs["seed"] == 7
    assert kwargs["pair"] is None


@pytest.mark.parametrize("sweep", ["5,6", "extent=5,6", " extent = 5, 6"])
def test_torus_sweep_accepts_named_values(mocker, sweep):
    torus = mocker.patch("bose_bounds.torus_sweep", return_value=np.array([[5.0, 1.0, 1.0], [6.0, 1.0, 1.0]]))
    assert run_cli(["eig", "--kind", "torus", "--pair", str(REFERENCE_PAIR_PATH), "--sweep", sweep]) == 0
    assert torus.call_args.args[1] == [5.0, 6.0]


def test_torus_sweep_rejects_a_wrong_name(mocker):
    torus = mocker.patch("bose_bounds.torus_sweep")
    assert run_cli(["eig", "--kind", "torus", "--pair", str(REFERENCE_PAIR_PATH), "--sweep", "width=5,6"]) == 1
    torus.assert_not_called()


def test_named_lambda_sweep(tmp_path):
    out = tmp_path.joinpath("lambda.csv")
    code = run_cli(["sweep", "--pair", str(REFERENCE_PAIR_PATH), "--lambdas", "lambda=0,0.1",
                    "--half", "--format", "csv", "--out", str(out)])
    assert code == 0
    assert np.loadtxt(out, delimiter=",", skiprows=1).shape == (2, 3)


def test_pair_warnings_are_readable(caplog):
    with caplog.at_level("WARNING"):
        assert run_cli(["scattering", "--pair", str(REFERENCE_PAIR_PATH), "--half"]) == 0
    messages = [record.getMessage() for record in caplog.records if record.levelname == "WARNING"]
    assert messages
    assert any("is discontinuous at r = 1" in message for message in messages)
    assert not any(message.startswith("(") for message in messages)


def test_bounds_sweep_reports_deficit_exponent(tmp_path):
    cert_path = tmp_path.joinpath("cert.json")
    run_cli(["certify", "--pair", str(REFERENCE_PAIR_PATH), "--out", str(cert_path)])
    out = tmp_path.joinpath("sweep.json")
    code = run_cli(["bounds", "--cert", str(cert_path), "--sweep-rho", "rho=1e-40,1e-50,1e-60",
                    "--epsilon", "0.03", "--out", str(out)])
    assert code == 0
    report = read_report(out)["report"]
    assert len(report["rows"]) == 3
    assert report["deficit_exponent"] == pytest.approx(0.03, abs=0.01)
