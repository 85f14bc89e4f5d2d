"""Command-line behavior: argument merging, output, exit codes."""

import json
import shutil

import pytest

from texlens.cli import (
    EXIT_DEGENERATE,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VALIDATION,
    main,
)


def run_args(root, out, *extra):
    return [
        "--manifest", str(root / "manifest.json"),
        "--activations", str(root / "activations"),
        "--output", str(out),
        *extra,
    ]


@pytest.fixture(scope="module")
def cli_run(small_dataset, tmp_path_factory):
    """Dataset plus a completed `features` pass, shared by command tests."""
    out = tmp_path_factory.mktemp("cli-run")
    assert main(["features", *run_args(small_dataset, out)]) == EXIT_OK
    return small_dataset, out


def test_version_and_missing_command():
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_synth_command_writes_dataset(tmp_path, capsys):
    out = tmp_path / "ds"
    code = main(
        [
            "synth", "--out", str(out), "--classes", "2", "--samples", "1",
            "--texture-samples", "1", "--seed", "3", "--no-images",
        ]
    )
    assert code == EXIT_OK
    assert "2 material classes" in capsys.readouterr().out
    assert (out / "manifest.json").is_file()
    assert not (out / "images").exists()
    assert main(["synth", "--out", str(tmp_path / "x"), "--classes", "1"]) == EXIT_USAGE


def test_features_reports_cache_size(cli_run, capsys):
    root, out = cli_run
    assert main(["features", *run_args(root, out)]) == EXIT_OK
    assert "cached 34 feature vectors" in capsys.readouterr().out


def test_missing_required_setting_is_usage_error(tmp_path, capsys):
    code = main(["features", "--activations", str(tmp_path), "--output", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "missing required setting --manifest" in capsys.readouterr().err


def test_missing_manifest_path_is_validation_error(small_dataset, tmp_path, capsys):
    code = main(
        [
            "features",
            "--manifest", str(tmp_path / "absent.json"),
            "--activations", str(small_dataset / "activations"),
            "--output", str(tmp_path / "out"),
        ]
    )
    assert code == EXIT_VALIDATION
    assert "manifest not found" in capsys.readouterr().err


def test_missing_activation_file_is_io_error(small_dataset, tmp_path, capsys):
    root = tmp_path / "data"
    shutil.copytree(small_dataset, root)
    victim = sorted((root / "activations").glob("*.z4.txa"))[0]
    victim.unlink()
    code = main(["features", *run_args(root, tmp_path / "out")])
    assert code == EXIT_IO
    assert "missing activation file" in capsys.readouterr().err


def test_bad_weights_flag_exit_codes(cli_run, tmp_path):
    root, _ = cli_run
    out = tmp_path / "out"
    # malformed numbers: usage; wrong count: configuration
    assert (
        main(["features", *run_args(root, out), "--weights", "a,b"]) == EXIT_USAGE
    )
    assert (
        main(["features", *run_args(root, out), "--weights", "0.5,0.5"])
        == EXIT_VALIDATION
    )


def test_config_file_merging_and_overrides(cli_run, tmp_path, capsys):
    root, _ = cli_run
    # relative paths in the file resolve against the file's directory
    config_doc = {
        "manifest": "manifest.json",
        "activations": "activations",
        "output": str(tmp_path / "run"),
        "k": 2,
    }
    config_path = root / "run.json"
    config_path.write_text(json.dumps(config_doc))
    try:
        assert main(["features", "--config", str(config_path)]) == EXIT_OK
        capsys.readouterr()
        assert (
            main(["retrieve", "--config", str(config_path), "m00"]) == EXIT_OK
        )
        assert "top 2 texture neighbors" in capsys.readouterr().out
        # a flag overrides the file's value
        assert (
            main(["retrieve", "--config", str(config_path), "--k", "1", "m00"])
            == EXIT_OK
        )
        assert "top 1 texture neighbors" in capsys.readouterr().out
    finally:
        config_path.unlink()


def test_config_file_rejects_unknown_keys_and_bad_json(tmp_path, capsys):
    bad_keys = tmp_path / "c1.json"
    bad_keys.write_text('{"knn": 3}')
    assert main(["features", "--config", str(bad_keys)]) == EXIT_VALIDATION
    assert "unknown config keys" in capsys.readouterr().err
    not_json = tmp_path / "c2.json"
    not_json.write_text("{nope")
    assert main(["features", "--config", str(not_json)]) == EXIT_VALIDATION
    assert "not valid JSON" in capsys.readouterr().err


def test_retrieve_outputs_ranked_neighbors(cli_run, capsys):
    root, out = cli_run
    doc = json.loads((root / "manifest.json").read_text())
    query = doc["sem_classes"][0]["samples"][0]  # one sample id, sample mode
    assert main(["retrieve", *run_args(root, out), query]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert "texture neighbors" in lines[0]
    assert lines[1].lstrip().startswith("1.")
    assert main(["retrieve", *run_args(root, out), "nobody"]) == EXIT_USAGE


def test_correlate_prints_ranking(cli_run, capsys):
    root, out = cli_run
    assert main(["correlate", *run_args(root, out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "striped" in text and "full report under" in text
    assert (out / "correlation.csv").is_file()


def test_batchsim_prints_matrix_size(cli_run, capsys):
    root, out = cli_run
    assert main(["batchsim", *run_args(root, out)]) == EXIT_OK
    assert "4x4 class similarity matrix" in capsys.readouterr().out


def test_constant_cps_is_degenerate_input(small_dataset, tmp_path, capsys):
    root = tmp_path / "data"
    shutil.copytree(small_dataset, root)
    doc = json.loads((root / "manifest.json").read_text())
    for entry in doc["sem_classes"]:
        entry["cps"] = 42.0
    (root / "manifest.json").write_text(json.dumps(doc))
    out = tmp_path / "out"
    assert main(["features", *run_args(root, out)]) == EXIT_OK
    capsys.readouterr()
    assert main(["correlate", *run_args(root, out)]) == EXIT_DEGENERATE
    assert "degenerate input" in capsys.readouterr().err
