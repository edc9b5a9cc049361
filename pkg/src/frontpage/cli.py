"""Command line entry point wiring the pipeline end to end.

Pipeline state lives in a workspace directory with fixed subpaths
(issues/, teasers/, pairs/, dataset/, reports/); subcommands compose
through these files only, so every stage is resumable and inspectable.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
from filelock import FileLock, Timeout

from . import reports as rpt
from .agreement import (
    cohens_kappa,
    krippendorff_alpha,
    krippendorff_alpha_per_dimension,
    read_records,
)
from .dataset import assemble, build_datacard, export as export_samples, read_samples
from .detect import GoldBlock, Teaser, detect_teasers, evaluate_detection, load_profile
from .errors import (
    EndpointUnavailableError,
    FrontpageError,
    InsufficientOverlapError,
    MissingInputError,
    NoVariationError,
    WorkspaceLockedError,
)
from .llm import ChatClient, ReplayCache
from .matching import (
    Backend,
    CandidatePair,
    Decision,
    FileEmbeddingProvider,
    build_candidates,
    calibrate_threshold,
    decide_embedding,
    decide_tfidf,
    decide_zero_shot,
    evaluate_matching,
    fit_tfidf,
    sweep_thresholds,
)
from .model import group_articles, ingest_issue, write_issue
from .textmetrics import (
    LengthBand,
    Tokenizer,
    rouge_l,
    rouge_n,
    tokenize,
)

SUBDIRS = ("issues", "teasers", "pairs", "dataset", "reports")


def _ws(workspace: str) -> Path:
    root = Path(workspace)
    for sub in SUBDIRS:
        (root / sub).mkdir(parents=True, exist_ok=True)
    return root


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )


def _write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        raise MissingInputError(f"missing input file: {path}")
    return [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


def _load_issues(ws: Path) -> list:
    paths = sorted((ws / "issues").glob("*.json"))
    return [ingest_issue(p, strict=True) for p in paths]


def _load_teasers(ws: Path) -> list[Teaser]:
    rows = _read_jsonl(ws / "teasers" / "teasers.jsonl")
    return [
        Teaser(
            id=row["id"],
            title_id=row["title_id"],
            date=row["date"],
            text=row["text"],
            word_count=row["word_count"],
            page_refs=tuple(row["page_refs"]),
            source_block_ids=tuple(row["source_block_ids"]),
        )
        for row in rows
    ]


def _load_decisions(ws: Path) -> list[CandidatePair]:
    rows = _read_jsonl(ws / "pairs" / "decisions.jsonl")
    return [
        CandidatePair(
            teaser_id=row["teaser_id"],
            article_id=row["article_id"],
            score=row.get("score"),
            decision=Decision(row["decision"]),
            backend=Backend(row["backend"]) if row.get("backend") else None,
        )
        for row in rows
    ]


def _load_match_gold(path: Path) -> dict[tuple[str, str], bool]:
    return {
        (row["teaser_id"], row["article_id"]): bool(row["label"])
        for row in _read_jsonl(path)
    }


def _corpus_documents(ws: Path):
    """Teasers, articles and per-document token sequences for matching."""
    issues = _load_issues(ws)
    teasers = _load_teasers(ws)
    articles = [a for issue in issues for a in group_articles(issue)]
    tok = Tokenizer()
    tokens = {t.id: tuple(tokenize(t.text, tok)) for t in teasers}
    tokens.update({a.id: tuple(tokenize(a.text, tok)) for a in articles})
    texts = {t.id: t.text for t in teasers}
    texts.update({a.id: a.text for a in articles})
    languages = {issue.issue_ref: issue.language for issue in issues}
    return issues, teasers, articles, tokens, texts, languages


def _pair_rows(pairs) -> list[dict]:
    return [
        {
            "teaser_id": p.teaser_id,
            "article_id": p.article_id,
            "backend": p.backend.value if p.backend else None,
            "score": p.score,
            "decision": p.decision.value,
        }
        for p in pairs
    ]


@click.group()
@click.option(
    "--workspace",
    "-w",
    default="workspace",
    show_default=True,
    help="Pipeline state directory.",
)
@click.pass_context
def cli(ctx, workspace):
    """Build summarization datasets from newspaper front-page teasers."""
    ctx.ensure_object(dict)
    ctx.obj["workspace"] = workspace
    # one CLI instance per workspace
    root = Path(workspace)
    root.mkdir(parents=True, exist_ok=True)
    lock = FileLock(root / ".lock", timeout=1)
    try:
        lock.acquire()
    except Timeout:
        raise WorkspaceLockedError(f"another run holds the workspace lock at {root}")
    ctx.call_on_close(lock.release)


@cli.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--strict/--no-strict", default=False, show_default=True)
@click.pass_context
def ingest(ctx, corpus_dir, strict):
    """Validate a corpus directory and copy canonical issues into the workspace."""
    ws = _ws(ctx.obj["workspace"])
    warnings: list[str] = []
    count = blocks = 0
    for path in sorted(Path(corpus_dir).glob("*.json")):
        issue = ingest_issue(path, strict=strict, on_warning=warnings.append)
        write_issue(issue, ws / "issues" / path.name)
        count += 1
        blocks += sum(len(p.blocks) for p in issue.pages)
    report = {"issues": count, "blocks": blocks, "warnings": warnings}
    _write_json(ws / "reports" / "ingest.json", report)
    click.echo(f"ingested {count} issues ({blocks} blocks, {len(warnings)} warnings)")


@cli.command()
@click.option("--profile", "profile_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", type=click.Path(exists=True))
@click.pass_context
def detect(ctx, profile_path, gold_path):
    """Detect front-page teasers; with gold labels, emit a detection report."""
    ws = _ws(ctx.obj["workspace"])
    profile = load_profile(profile_path)
    issues = _load_issues(ws)
    teasers: list[Teaser] = []
    skipped = 0
    for issue in issues:
        if issue.language != profile.language or issue.front_page() is None:
            skipped += 1
            continue
        teasers.extend(detect_teasers(issue, profile))
    _write_jsonl(
        ws / "teasers" / "teasers.jsonl",
        [
            {
                "id": t.id,
                "title_id": t.title_id,
                "date": t.date,
                "text": t.text,
                "word_count": t.word_count,
                "page_refs": list(t.page_refs),
                "source_block_ids": list(t.source_block_ids),
            }
            for t in teasers
        ],
    )
    click.echo(f"detected {len(teasers)} teasers ({skipped} issues skipped)")
    if gold_path:
        gold = [
            GoldBlock(
                title_id=row["title_id"],
                date=row["date"],
                block_id=row["block_id"],
                label=bool(row["label"]),
                cause=row.get("cause"),
            )
            for row in _read_jsonl(Path(gold_path))
        ]
        report = evaluate_detection(teasers, gold)
        _write_json(ws / "reports" / "detection.json", report.as_dict())
        table = rpt.render_table(
            ["precision", "recall", "f1", "tp", "fp", "fn"],
            [[f"{report.precision:.3f}", f"{report.recall:.3f}", f"{report.f1:.3f}",
              report.tp, report.fp, report.fn]],
        )
        (ws / "reports" / "detection.txt").write_text(table, encoding="utf-8")
        rpt.error_breakdown_figure(
            report.false_negative_causes,
            report.false_positive_causes,
            ws / "reports" / "detection_errors.png",
        )
        click.echo(table, nl=False)


@cli.command()
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.pass_context
def calibrate(ctx, gold_path):
    """Pick the max-F1 TF-IDF similarity threshold from gold pair labels."""
    ws = _ws(ctx.obj["workspace"])
    _, teasers, articles, tokens, _, _ = _corpus_documents(ws)
    gold = _load_match_gold(Path(gold_path))
    model = fit_tfidf(list(tokens.values()))
    pairs = build_candidates(teasers, articles)
    scored_pairs = decide_tfidf(pairs, model, threshold=0.0, documents=tokens)
    scored = [
        (p.score, gold[(p.teaser_id, p.article_id)])
        for p in scored_pairs
        if (p.teaser_id, p.article_id) in gold
    ]
    if not scored:
        raise MissingInputError("no candidate pair overlaps the gold labels")
    result = calibrate_threshold(scored)
    _write_json(ws / "reports" / "calibration.json", result.as_dict())
    rpt.threshold_sweep_figure(
        sweep_thresholds(scored), result.threshold, ws / "reports" / "calibration_curve.png"
    )
    click.echo(
        f"threshold {result.threshold:.4f} (F1 {result.f1:.3f}, "
        f"precision {result.precision:.3f}, recall {result.recall:.3f}, "
        f"support {result.support})"
    )


@cli.command()
@click.option(
    "--backend",
    type=click.Choice(["tfidf", "embedding", "zero-shot"]),
    default="tfidf",
    show_default=True,
)
@click.option("--threshold", type=float, default=None, help="Similarity cutoff; defaults to the calibrated one.")
@click.option("--provider", "provider_spec", help="Embedding vectors file or HTTP endpoint.")
@click.option("--cache", "cache_path", type=click.Path(), help="LLM replay cache file.")
@click.option("--gold", "gold_path", type=click.Path(exists=True))
@click.pass_context
def match(ctx, backend, threshold, provider_spec, cache_path, gold_path):
    """Decide teaser-article matches with the chosen backend."""
    ws = _ws(ctx.obj["workspace"])
    _, teasers, articles, tokens, texts, _ = _corpus_documents(ws)
    pairs = build_candidates(teasers, articles)

    if backend == "tfidf":
        if threshold is None:
            calibration = ws / "reports" / "calibration.json"
            if not calibration.exists():
                raise MissingInputError(
                    "no --threshold given and no calibration report found; run calibrate first"
                )
            threshold = json.loads(calibration.read_text())["threshold"]
        model = fit_tfidf(list(tokens.values()))
        decided = decide_tfidf(pairs, model, threshold, tokens)
    elif backend == "embedding":
        if not provider_spec:
            raise MissingInputError("--provider is required for the embedding backend")
        if threshold is None:
            raise MissingInputError("--threshold is required for the embedding backend")
        if provider_spec.startswith(("http://", "https://")):
            from .llm import HttpEmbeddingProvider

            provider = HttpEmbeddingProvider(provider_spec)
        else:
            provider = FileEmbeddingProvider(provider_spec)
        decided = decide_embedding(pairs, provider, threshold, texts)
    else:
        cache = ReplayCache(cache_path) if cache_path else None
        client = ChatClient(cache=cache)
        if not client.endpoint and cache is None:
            raise EndpointUnavailableError(
                "zero-shot backend needs an endpoint or a replay cache"
            )
        decided = decide_zero_shot(pairs, client, texts)

    _write_jsonl(ws / "pairs" / "decisions.jsonl", _pair_rows(decided))
    matches = sum(1 for p in decided if p.decision is Decision.MATCH)
    undecided = sum(1 for p in decided if p.decision is Decision.UNDECIDED)
    click.echo(f"{len(decided)} pairs: {matches} matched, {undecided} undecided")

    if gold_path:
        report = evaluate_matching(decided, _load_match_gold(Path(gold_path)))
        _write_json(ws / "reports" / "matching_eval.json", report.as_dict())
        click.echo(
            f"accuracy {report.accuracy:.3f}  precision {report.precision:.3f}  "
            f"recall {report.recall:.3f}  f1 {report.f1:.3f}"
        )


@cli.command("assemble")
@click.pass_context
def assemble_cmd(ctx):
    """Assemble matched pairs into dataset samples."""
    ws = _ws(ctx.obj["workspace"])
    _, teasers, articles, _, _, languages = _corpus_documents(ws)
    decisions = _load_decisions(ws)
    samples, drop = assemble(teasers, articles, decisions, languages)
    _write_jsonl(ws / "dataset" / "samples.jsonl", [s.as_dict() for s in samples])
    _write_json(
        ws / "dataset" / "dropped.json",
        {"count": drop.count, "teaser_ids": drop.dropped_teaser_ids},
    )
    click.echo(f"assembled {len(samples)} samples ({drop.count} teasers dropped)")


@cli.command()
@click.pass_context
def stats(ctx):
    """Corpus-level abstractivity table and datacard, with figures."""
    ws = _ws(ctx.obj["workspace"])
    samples = read_samples(ws / "dataset" / "samples.jsonl")
    card = build_datacard(samples)
    _write_json(ws / "reports" / "datacard.json", card.as_dict())

    by_language: dict[str, list] = {}
    for sample in samples:
        by_language.setdefault(sample.language, []).append(sample)
    rows = []
    for language in sorted(by_language):
        sub = build_datacard(by_language[language])
        rows.append(
            [
                language,
                f"{sub.compression:.2f}",
                *(f"{sub.novel_ngram[n]:.2f}" for n in (1, 2, 3, 4)),
                f"{100 * sub.multi_doc_fraction:.0f}%",
            ]
        )
    table = rpt.render_table(
        ["Language", "Comp.", "Novel 1", "Novel 2", "Novel 3", "Novel 4", "%Multi-doc"],
        rows,
    )
    (ws / "reports" / "corpus_stats.txt").write_text(table, encoding="utf-8")
    _write_json(
        ws / "reports" / "corpus_stats.json",
        {
            language: build_datacard(group).as_dict()
            for language, group in by_language.items()
        },
    )
    rpt.novelty_figure(card.novel_ngram, card.compression, ws / "reports" / "novelty.png")
    rpt.length_bands_figure(card.length_counts, ws / "reports" / "length_bands.png")
    click.echo(table, nl=False)
    click.echo(
        f"size {card.size}  multi-doc {card.multi_doc_count} "
        f"({100 * card.multi_doc_fraction:.1f}%)  avg cluster {card.avg_cluster_size:.2f}"
    )


@cli.command("eval")
@click.option("--generated", "generated_path", required=True, type=click.Path(exists=True))
@click.option("--judge/--no-judge", default=False, show_default=True, help="Also score with the LLM judge.")
@click.option("--cache", "cache_path", type=click.Path(), help="LLM replay cache file.")
@click.pass_context
def eval_cmd(ctx, generated_path, judge, cache_path):
    """Score generated summaries against the dataset references."""
    from .llm import judge as judge_one

    ws = _ws(ctx.obj["workspace"])
    samples = {s.id: s for s in read_samples(ws / "dataset" / "samples.jsonl")}
    generated = {row["id"]: row["summary"] for row in _read_jsonl(Path(generated_path))}
    missing = set(generated) - set(samples)
    if missing:
        raise MissingInputError(f"generated ids not in dataset: {sorted(missing)[:5]}")

    tok = Tokenizer()
    sums = {"rouge1": 0.0, "rouge2": 0.0, "rougeL": 0.0}
    judge_sums = {"coherence": 0.0, "consistency": 0.0, "coverage": 0.0}
    judged = 0
    client = ChatClient(cache=ReplayCache(cache_path) if cache_path else None) if judge else None
    rows = []
    for sample_id in sorted(generated):
        reference = samples[sample_id].summary
        candidate = generated[sample_id]
        r1 = rouge_n(reference, candidate, 1, tok).f1
        r2 = rouge_n(reference, candidate, 2, tok).f1
        rl = rouge_l(reference, candidate, tok).f1
        sums["rouge1"] += r1
        sums["rouge2"] += r2
        sums["rougeL"] += rl
        row = {"id": sample_id, "rouge1": r1, "rouge2": r2, "rougeL": rl}
        if client is not None:
            source = "\n\n".join(samples[sample_id].documents)
            for dimension in ("coherence", "consistency", "coverage"):
                score = judge_one(
                    client,
                    dimension,
                    source=source,
                    reference=reference,
                    generated=candidate,
                )
                row[dimension] = score.value
                judge_sums[dimension] += score.value
            judged += 1
        rows.append(row)

    n = len(rows)
    summary = {key: value / n for key, value in sums.items()}
    if judged:
        summary.update({key: value / judged for key, value in judge_sums.items()})
    _write_json(ws / "reports" / "eval.json", {"mean": summary, "per_sample": rows})
    headers = list(summary)
    table = rpt.render_table(headers, [[f"{summary[h]:.3f}" for h in headers]])
    (ws / "reports" / "eval.txt").write_text(table, encoding="utf-8")
    rpt.rouge_figure(
        {k: v for k, v in summary.items() if k.startswith("rouge")},
        ws / "reports" / "eval_rouge.png",
    )
    click.echo(table, nl=False)


@cli.command()
@click.option("--records", "records_path", required=True, type=click.Path(exists=True))
@click.pass_context
def agree(ctx, records_path):
    """Inter-annotator agreement over an exported annotation record file."""
    ws = _ws(ctx.obj["workspace"])
    records = read_records(records_path)
    out: dict = {"kappa": None, "alpha": None, "alpha_per_dimension": None}
    try:
        out["kappa"] = cohens_kappa(records)
    except InsufficientOverlapError:
        pass
    try:
        out["alpha"] = krippendorff_alpha(records)
    except (InsufficientOverlapError, NoVariationError):
        pass
    if any(r.task == "quality_1_5" for r in records):
        out["alpha_per_dimension"] = krippendorff_alpha_per_dimension(records)
    _write_json(ws / "reports" / "agreement.json", out)
    click.echo(json.dumps(out, indent=1, sort_keys=True))


@cli.command()
@click.option("--port", default=8787, show_default=True)
@click.option("--ui-dir", "ui_dir", type=click.Path(), default=None, help="Built UI bundle to serve.")
@click.pass_context
def serve(ctx, port, ui_dir):
    """Run the local annotation service."""
    import uvicorn

    from .service import AnnotationStore, create_app

    ws = _ws(ctx.obj["workspace"])
    store = AnnotationStore(ws / "annotations")
    app = create_app(store, ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)


@cli.command("export")
@click.option("--manifest-only", is_flag=True, default=False)
@click.option("--ocr-fix", is_flag=True, default=False)
@click.option("--cache", "cache_path", type=click.Path(), help="LLM replay cache file.")
@click.pass_context
def export_cmd(ctx, manifest_only, ocr_fix, cache_path):
    """Write the shareable dataset files (manifest, samples, corrections)."""
    ws = _ws(ctx.obj["workspace"])
    samples = read_samples(ws / "dataset" / "samples.jsonl")
    client = None
    if ocr_fix:
        client = ChatClient(cache=ReplayCache(cache_path) if cache_path else None)
    written = export_samples(
        samples, ws / "dataset" / "export", manifest_only=manifest_only, ocr_client=client
    )
    for path in written:
        click.echo(str(path))


def main():
    try:
        cli(standalone_mode=False)
    except FrontpageError as exc:
        click.echo(json.dumps({"error": exc.code, "message": str(exc)}), err=True)
        sys.exit(1)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
