import json
import subprocess
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
CORPUS_DIR = FIXTURES / "corpus"
PROFILE_PATH = FIXTURES / "profile.json"
DETECTION_GOLD = FIXTURES / "gold" / "detection.jsonl"
MATCHING_GOLD = FIXTURES / "gold" / "matching.jsonl"
LLM_CACHE = FIXTURES / "llm_cache.jsonl"


def run_cli(workspace, *args, check=True):
    result = subprocess.run(
        [sys.executable, "-m", "frontpage.cli", "-w", str(workspace), *args],
        capture_output=True,
        text=True,
    )
    if check and result.returncode != 0:
        raise AssertionError(
            f"cli {' '.join(args)} failed ({result.returncode}):\n"
            f"{result.stdout}\n{result.stderr}"
        )
    return result


@pytest.fixture(scope="module")
def pipeline_ws(tmp_path_factory):
    ws = tmp_path_factory.mktemp("ws")
    run_cli(ws, "ingest", str(CORPUS_DIR))
    run_cli(ws, "detect", "--profile", str(PROFILE_PATH), "--gold", str(DETECTION_GOLD))
    run_cli(ws, "calibrate", "--gold", str(MATCHING_GOLD))
    run_cli(ws, "match", "--gold", str(MATCHING_GOLD))
    run_cli(ws, "assemble")
    run_cli(ws, "stats")
    return ws


def test_ingest_report(pipeline_ws):
    report = json.loads((pipeline_ws / "reports" / "ingest.json").read_text())
    assert report["issues"] == 20
    assert report["warnings"] == []
    assert len(list((pipeline_ws / "issues").glob("*.json"))) == 20


def test_detect_writes_teasers_and_reports(pipeline_ws):
    teasers = (pipeline_ws / "teasers" / "teasers.jsonl").read_text().splitlines()
    assert len(teasers) == 58
    report = json.loads((pipeline_ws / "reports" / "detection.json").read_text())
    assert report["precision"] == 1.0
    assert (pipeline_ws / "reports" / "detection.txt").exists()
    assert (pipeline_ws / "reports" / "detection_errors.png").stat().st_size > 0


def test_calibrate_writes_report_and_figure(pipeline_ws):
    report = json.loads((pipeline_ws / "reports" / "calibration.json").read_text())
    assert 0.0 < report["threshold"] < 1.0
    assert report["f1"] == 1.0
    assert (pipeline_ws / "reports" / "calibration_curve.png").stat().st_size > 0


def test_match_uses_calibrated_threshold(pipeline_ws):
    rows = [
        json.loads(line)
        for line in (pipeline_ws / "pairs" / "decisions.jsonl").read_text().splitlines()
    ]
    assert len(rows) == 174
    assert all(row["backend"] == "tfidf" for row in rows)
    report = json.loads((pipeline_ws / "reports" / "matching_eval.json").read_text())
    assert report["f1"] == 1.0


def test_assemble_and_stats_outputs(pipeline_ws):
    samples = (pipeline_ws / "dataset" / "samples.jsonl").read_text().splitlines()
    assert len(samples) == 58
    dropped = json.loads((pipeline_ws / "dataset" / "dropped.json").read_text())
    assert dropped["count"] == 0
    card = json.loads((pipeline_ws / "reports" / "datacard.json").read_text())
    assert card["size"] == 58
    table = (pipeline_ws / "reports" / "corpus_stats.txt").read_text()
    assert table.splitlines()[0].startswith("Language")
    for figure in ("novelty.png", "length_bands.png"):
        assert (pipeline_ws / "reports" / figure).stat().st_size > 0


def test_zero_shot_backend_with_cache(pipeline_ws, tmp_path):
    result = run_cli(
        pipeline_ws,
        "match",
        "--backend",
        "zero-shot",
        "--cache",
        str(LLM_CACHE),
        "--gold",
        str(MATCHING_GOLD),
    )
    assert "1 undecided" in result.stdout
    report = json.loads((pipeline_ws / "reports" / "matching_eval.json").read_text())
    assert report["accuracy"] == 1.0
    # restore tfidf decisions for any later test using this workspace
    run_cli(pipeline_ws, "match", "--gold", str(MATCHING_GOLD))


def test_eval_command_rouge_only(pipeline_ws, tmp_path):
    samples = [
        json.loads(line)
        for line in (pipeline_ws / "dataset" / "samples.jsonl").read_text().splitlines()
    ]
    generated = tmp_path / "generated.jsonl"
    with generated.open("w") as handle:
        for sample in samples[:5]:
            handle.write(json.dumps({"id": sample["id"], "summary": sample["summary"]}) + "\n")
    run_cli(pipeline_ws, "eval", "--generated", str(generated))
    report = json.loads((pipeline_ws / "reports" / "eval.json").read_text())
    assert report["mean"]["rouge1"] == pytest.approx(1.0)
    assert report["mean"]["rougeL"] == pytest.approx(1.0)
    assert len(report["per_sample"]) == 5
    assert (pipeline_ws / "reports" / "eval_rouge.png").stat().st_size > 0


def test_agree_command(pipeline_ws, tmp_path):
    records = tmp_path / "records.jsonl"
    rows = []
    for i, (x, y) in enumerate([(1, 1), (0, 0), (1, 0), (1, 1)]):
        rows.append({"annotator_id": "a", "item_id": f"i{i}", "task": "match_binary", "value": x})
        rows.append({"annotator_id": "b", "item_id": f"i{i}", "task": "match_binary", "value": y})
    records.write_text("".join(json.dumps(r) + "\n" for r in rows))
    run_cli(pipeline_ws, "agree", "--records", str(records))
    report = json.loads((pipeline_ws / "reports" / "agreement.json").read_text())
    assert report["kappa"] is not None


def test_export_command(pipeline_ws):
    run_cli(pipeline_ws, "export")
    export_dir = pipeline_ws / "dataset" / "export"
    assert (export_dir / "manifest.jsonl").exists()
    assert (export_dir / "samples.jsonl").exists()
    first = json.loads((export_dir / "manifest.jsonl").read_text().splitlines()[0])
    assert "summary" not in first


def test_detect_on_empty_corpus_succeeds(tmp_path):
    empty = tmp_path / "empty-corpus"
    empty.mkdir()
    ws = tmp_path / "ws"
    run_cli(ws, "ingest", str(empty))
    result = run_cli(ws, "detect", "--profile", str(PROFILE_PATH))
    assert "detected 0 teasers" in result.stdout


def test_zero_shot_without_endpoint_or_cache_fails(tmp_path, monkeypatch):
    ws = tmp_path / "ws"
    run_cli(ws, "ingest", str(CORPUS_DIR))
    run_cli(ws, "detect", "--profile", str(PROFILE_PATH))
    result = subprocess.run(
        [sys.executable, "-m", "frontpage.cli", "-w", str(ws), "match", "--backend", "zero-shot"],
        capture_output=True,
        text=True,
        env={k: v for k, v in __import__("os").environ.items() if not k.startswith("FRONTPAGE_")},
    )
    assert result.returncode == 1
    error = json.loads(result.stderr.strip().splitlines()[-1])
    assert error["error"] == "endpoint-unavailable"


def test_unknown_subcommand_exits_2(tmp_path):
    result = run_cli(tmp_path / "ws", "frobnicate", check=False)
    assert result.returncode == 2


def test_domain_error_is_machine_readable(tmp_path):
    result = run_cli(tmp_path / "ws", "assemble", check=False)
    assert result.returncode == 1
    error = json.loads(result.stderr.strip().splitlines()[-1])
    assert error["error"] == "missing-input"


def test_missing_threshold_without_calibration(tmp_path):
    ws = tmp_path / "ws"
    run_cli(ws, "ingest", str(CORPUS_DIR))
    run_cli(ws, "detect", "--profile", str(PROFILE_PATH))
    result = run_cli(ws, "match", check=False)
    assert result.returncode == 1
    assert "calibrate" in result.stderr


def test_workspace_lock_rejects_concurrent_run(tmp_path):
    from filelock import FileLock

    ws = tmp_path / "ws"
    ws.mkdir()
    lock = FileLock(ws / ".lock")
    lock.acquire()
    try:
        result = run_cli(ws, "ingest", str(CORPUS_DIR), check=False)
    finally:
        lock.release()
    assert result.returncode == 1
    error = json.loads(result.stderr.strip().splitlines()[-1])
    assert error["error"] == "workspace-locked"
