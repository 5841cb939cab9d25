import json
import os
import pathlib
import subprocess

import pytest

CLI = os.environ.get("TWINWORLD_CLI", "twinworld")
FIXTURE = pathlib.Path(os.environ.get("TWINWORLD_FIXTURE_DIR", "tests/fixtures/kg1k"))
CONFIG = str(FIXTURE / "config.json")
BUILD = ["sample-universe", "perturb", "build-corpus", "build-qa", "build-nav"]


def tw(*args, check=None):
    p = subprocess.run([CLI, *args], capture_output=True, text=True)
    if check is not None:
        assert p.returncode == check, p.stderr
    return p


def run(stage, out, *extra, check=0):
    return tw(stage, "--config", CONFIG, "--out", str(out), "--mock", *extra, check=check)


def outputs(root, dirs):
    files = {}
    for d in dirs:
        for f in sorted((root / d).rglob("*")):
            if f.is_file() and f.name != "run_manifest.json":
                files[str(f.relative_to(root))] = f.read_bytes()
    return files


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("full")
    for stage in BUILD:
        run(stage, root)
    for variant in ("rm", "sm"):
        run("run-nav", root, "--variant", variant, "--mode", "links_only")
    run("evaluate", root)
    return root


def test_full_mock_pipeline(full_run):
    summary = json.loads((full_run / "eval" / "ka_summary.json").read_text())
    assert summary["external_mention_rate"]["sm-links_only"] == 0.0
    for d in ("universe", "perturb", "corpus", "qa", "nav", "eval"):
        assert (full_run / d / "run_manifest.json").exists()


def test_rerun_is_byte_identical(full_run, tmp_path):
    for stage in BUILD[:3]:
        run(stage, tmp_path)
    a = outputs(full_run, ["universe", "perturb", "corpus"])
    b = outputs(tmp_path, ["universe", "perturb", "corpus"])
    assert a.keys() == b.keys()
    assert [k for k in a if a[k] != b[k]] == []


def test_exit_codes(tmp_path):
    assert tw("--help").returncode == 0
    bad = tmp_path / "bad.json"
    bad.write_text('{"sampler": {"uniformity": 2.0}}')
    assert tw("sample-universe", "--config", str(bad), "--out", str(tmp_path / "r"), "--mock").returncode == 2
    assert tw("perturb", "--config", CONFIG, "--out", str(tmp_path / "empty"), "--mock").returncode == 3
    assert tw("no-such-stage").returncode != 0


def test_stale_upstream_is_detected(tmp_path):
    run("sample-universe", tmp_path)
    run("perturb", tmp_path)
    run("sample-universe", tmp_path, "--seed", "8")
    p = run("build-corpus", tmp_path, check=3)
    assert "perturb" in p.stderr
