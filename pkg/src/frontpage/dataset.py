"""Dataset assembly: matched pairs become (summary, source articles)
samples, with datacard statistics and line-delimited export."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .detect import Teaser
from .errors import DanglingReferenceError, EmptyDatasetError
from .matching import CandidatePair, Decision
from .model import Article
from .textmetrics import (
    LengthBand,
    Tokenizer,
    length_category,
    sample_statistics,
    tokenize,
)


class Shape(Enum):
    PARAGRAPH = "paragraph"
    ONE_SENTENCE = "one_sentence"
    HIGHLIGHTS = "highlights"


_BULLET_RE = re.compile(r"^\s*(?:[•▪◦*–—-]|\d+[.)])\s+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?](?:\s|$)")


def classify_shape(summary: str) -> Shape:
    """highlights: >=2 line/bullet segments; one_sentence: exactly one
    terminal-punctuation sentence; paragraph otherwise. Abbreviation-blind
    by design."""
    lines = [line for line in summary.splitlines() if line.strip()]
    if len(lines) >= 2 or sum(1 for line in lines if _BULLET_RE.match(line)) >= 2:
        return Shape.HIGHLIGHTS
    sentences = [s for s in _SENTENCE_SPLIT_RE.split(summary) if s.strip()]
    if len(sentences) == 1:
        return Shape.ONE_SENTENCE
    return Shape.PARAGRAPH


@dataclass(frozen=True)
class Sample:
    id: str
    summary: str
    documents: tuple[str, ...]
    document_ids: tuple[str, ...]
    is_multi_doc: bool
    length_category: LengthBand
    shape: Shape
    title_id: str
    date: str
    language: str

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "summary": self.summary,
            "documents": list(self.documents),
            "document_ids": list(self.document_ids),
            "is_multi_doc": self.is_multi_doc,
            "length_category": self.length_category.value,
            "shape": self.shape.value,
            "title_id": self.title_id,
            "date": self.date,
            "language": self.language,
        }


def sample_from_dict(doc: dict) -> Sample:
    return Sample(
        id=doc["id"],
        summary=doc["summary"],
        documents=tuple(doc["documents"]),
        document_ids=tuple(doc["document_ids"]),
        is_multi_doc=bool(doc["is_multi_doc"]),
        length_category=LengthBand(doc["length_category"]),
        shape=Shape(doc["shape"]),
        title_id=doc["title_id"],
        date=doc["date"],
        language=doc["language"],
    )


@dataclass
class DropReport:
    """Teasers that matched nothing; reported rather than silently lost."""

    dropped_teaser_ids: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.dropped_teaser_ids)


def assemble(
    teasers: Sequence[Teaser],
    articles: Sequence[Article],
    decisions: Sequence[CandidatePair],
    languages: Mapping[tuple[str, str], str] | None = None,
    tok: Tokenizer | None = None,
) -> tuple[list[Sample], DropReport]:
    """One sample per teaser with at least one matched article.

    Documents are ordered by (first page, article id); undecided pairs
    never contribute. Unknown teaser/article ids raise dangling-reference.
    """
    tok = tok or Tokenizer()
    teasers_by_id = {t.id: t for t in teasers}
    articles_by_id = {a.id: a for a in articles}
    matched: dict[str, list[Article]] = {t.id: [] for t in teasers}
    for pair in decisions:
        if pair.teaser_id not in teasers_by_id:
            raise DanglingReferenceError(f"decision references unknown teaser {pair.teaser_id}")
        if pair.article_id not in articles_by_id:
            raise DanglingReferenceError(f"decision references unknown article {pair.article_id}")
        if pair.decision is Decision.MATCH:
            matched[pair.teaser_id].append(articles_by_id[pair.article_id])

    samples: list[Sample] = []
    drop = DropReport()
    for teaser in teasers:
        docs = sorted(matched[teaser.id], key=lambda a: (min(a.page_numbers), a.id))
        if not docs:
            drop.dropped_teaser_ids.append(teaser.id)
            continue
        language = (languages or {}).get(teaser.issue_ref, "und")
        samples.append(
            Sample(
                id=teaser.id,
                summary=teaser.text,
                documents=tuple(a.text for a in docs),
                document_ids=tuple(a.id for a in docs),
                is_multi_doc=len(docs) >= 2,
                length_category=length_category(teaser.text, tok),
                shape=classify_shape(teaser.text),
                title_id=teaser.title_id,
                date=teaser.date,
                language=language,
            )
        )
    return samples, drop


@dataclass
class Datacard:
    languages: list[str]
    size: int
    domain: str
    shape_counts: dict[str, int]
    length_counts: dict[str, int]
    novel_ngram: dict[int, float]
    compression: float
    single_doc_count: int
    multi_doc_count: int
    avg_document_words: float
    avg_summary_words: float
    avg_cluster_size: float

    @property
    def multi_doc_fraction(self) -> float:
        return self.multi_doc_count / self.size

    def as_dict(self) -> dict:
        return {
            "languages": self.languages,
            "size": self.size,
            "domain": self.domain,
            "shape_counts": self.shape_counts,
            "length_counts": self.length_counts,
            "novel_ngram": {str(n): v for n, v in self.novel_ngram.items()},
            "compression": self.compression,
            "single_doc_count": self.single_doc_count,
            "multi_doc_count": self.multi_doc_count,
            "multi_doc_fraction": self.multi_doc_fraction,
            "avg_document_words": self.avg_document_words,
            "avg_summary_words": self.avg_summary_words,
            "avg_cluster_size": self.avg_cluster_size,
        }


def build_datacard(samples: Sequence[Sample], tok: Tokenizer | None = None) -> Datacard:
    if not samples:
        raise EmptyDatasetError("cannot build a datacard for zero samples")
    tok = tok or Tokenizer()

    shape_counts = {shape.value: 0 for shape in Shape}
    length_counts = {band.value: 0 for band in LengthBand}
    novel_sums: dict[int, float] = {1: 0.0, 2: 0.0, 3: 0.0, 4: 0.0}
    novel_counts: dict[int, int] = {1: 0, 2: 0, 3: 0, 4: 0}
    compression_sum = 0.0
    doc_words = 0
    doc_count = 0
    summary_words = 0
    multi = 0
    cluster_sizes: list[int] = []

    for sample in samples:
        shape_counts[sample.shape.value] += 1
        length_counts[sample.length_category.value] += 1
        report = sample_statistics(sample.summary, sample.documents, tok)
        for n, value in report.novel_ngram.items():
            novel_sums[n] += value
            novel_counts[n] += 1
        compression_sum += report.compression
        doc_count += len(sample.documents)
        doc_words += sum(len(tokenize(d, tok)) for d in sample.documents)
        summary_words += len(tokenize(sample.summary, tok))
        if sample.is_multi_doc:
            multi += 1
            cluster_sizes.append(len(sample.documents))

    return Datacard(
        languages=sorted({s.language for s in samples}),
        size=len(samples),
        domain="news",
        shape_counts=shape_counts,
        length_counts=length_counts,
        novel_ngram={
            n: (novel_sums[n] / novel_counts[n]) if novel_counts[n] else 0.0
            for n in (1, 2, 3, 4)
        },
        compression=compression_sum / len(samples),
        single_doc_count=len(samples) - multi,
        multi_doc_count=multi,
        avg_document_words=doc_words / doc_count,
        avg_summary_words=summary_words / len(samples),
        avg_cluster_size=(sum(cluster_sizes) / len(cluster_sizes)) if cluster_sizes else 0.0,
    )


def _dump_line(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n"


def export(
    samples: Sequence[Sample],
    out_dir: str | Path,
    manifest_only: bool = False,
    ocr_client=None,
) -> list[Path]:
    """Write the dataset files; ordering and serialization are stable so
    re-export of unchanged samples is byte-identical.

    The manifest omits summary and document text so it can be shared
    without republishing copyrighted content. ``ocr_client`` additionally
    emits a parallel OCR-corrected file.
    """
    from .llm import ocr_post_correct

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(samples, key=lambda s: s.id)
    written: list[Path] = []

    manifest_path = out_dir / "manifest.jsonl"
    with manifest_path.open("w", encoding="utf-8") as handle:
        for sample in ordered:
            doc = sample.as_dict()
            doc.pop("summary")
            doc.pop("documents")
            handle.write(_dump_line(doc))
    written.append(manifest_path)

    if not manifest_only:
        samples_path = out_dir / "samples.jsonl"
        with samples_path.open("w", encoding="utf-8") as handle:
            for sample in ordered:
                handle.write(_dump_line(sample.as_dict()))
        written.append(samples_path)

        if ocr_client is not None:
            corrected_path = out_dir / "samples.corrected.jsonl"
            with corrected_path.open("w", encoding="utf-8") as handle:
                for sample in ordered:
                    doc = sample.as_dict()
                    doc["summary"] = ocr_post_correct(ocr_client, sample.summary)
                    doc["documents"] = [
                        ocr_post_correct(ocr_client, d) for d in sample.documents
                    ]
                    handle.write(_dump_line(doc))
            written.append(corrected_path)
    return written


def read_samples(path: str | Path) -> list[Sample]:
    samples = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            samples.append(sample_from_dict(json.loads(line)))
    return samples


def import_samples(paths: Iterable[str | Path]) -> list[Sample]:
    out: list[Sample] = []
    for path in paths:
        out.extend(read_samples(path))
    return out
