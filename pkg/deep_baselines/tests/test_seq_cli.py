"""Command-line round trip: train, save, reload, evaluate."""

import pytest

from deep_baselines.cli import main


def test_train_then_evaluate_round_trip(toy_workspace, tmp_path, capsys, summary_fields):
    model_path = tmp_path / "toy.keras"
    report_path = tmp_path / "report.txt"
    rc = main([
        "train",
        "--export", str(toy_workspace / "export"),
        "--arch", "bilstm-encdec",
        "--model", str(model_path),
        "--report", str(report_path),
        "--epochs", "2",
        "--batch-size", "32",
        "--learning-rate", "0.005",
        "--seed", "3",
    ])
    assert rc == 0
    trained = summary_fields(capsys.readouterr().out)
    assert trained["arch"] == "bilstm-encdec"
    assert int(trained["epochs"]) == 2
    assert model_path.is_file()

    from stmtkit.evaluation import parse_report

    report = parse_report(report_path.read_text(encoding="utf-8"))
    assert report.micro_f1 == pytest.approx(float(trained["test_micro_f1"]), abs=1e-6)

    rc = main([
        "evaluate",
        "--export", str(toy_workspace / "export"),
        "--model", str(model_path),
        "--split", "test",
    ])
    assert rc == 0
    scored = summary_fields(capsys.readouterr().out)
    assert float(scored["micro_f1"]) == pytest.approx(
        float(trained["test_micro_f1"]), abs=1e-6
    )
    assert int(scored["samples"]) == report.samples


def test_unknown_architecture_rejected(tmp_path):
    with pytest.raises(SystemExit) as caught:
        main([
            "train",
            "--export", str(tmp_path),
            "--arch", "transformer",
            "--model", str(tmp_path / "m.keras"),
        ])
    assert caught.value.code == 2


def test_command_is_required():
    with pytest.raises(SystemExit) as caught:
        main([])
    assert caught.value.code == 2
