"""Teaser-to-article matching.

Candidates come from parsed page references; decisions come from one of
three interchangeable backends (corpus TF-IDF, external embedding
provider, zero-shot LLM) with threshold calibration against gold labels.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Protocol, Sequence

from .errors import (
    CoverageGapError,
    DegenerateLabelsError,
    EmptyCorpusError,
    ProviderUnavailableError,
)
from .detect import Teaser
from .model import Article


class Decision(Enum):
    MATCH = "match"
    NO_MATCH = "no_match"
    UNDECIDED = "undecided"


class Backend(Enum):
    TFIDF = "tfidf"
    EMBEDDING = "embedding"
    ZERO_SHOT = "zero_shot"


@dataclass(frozen=True)
class CandidatePair:
    teaser_id: str
    article_id: str
    score: float | None = None
    decision: Decision = Decision.UNDECIDED
    backend: Backend | None = None


def build_candidates(
    teasers: Sequence[Teaser], articles: Sequence[Article]
) -> list[CandidatePair]:
    """One undecided pair per (teaser, article on a referenced page)."""
    by_issue_page: dict[tuple[str, str, int], list[Article]] = {}
    for article in articles:
        for page in article.page_numbers:
            by_issue_page.setdefault((article.title_id, article.date, page), []).append(article)

    pairs: list[CandidatePair] = []
    for teaser in teasers:
        seen: set[str] = set()
        for page in teaser.page_refs:
            for article in by_issue_page.get((teaser.title_id, teaser.date, page), []):
                if article.id not in seen:
                    seen.add(article.id)
                    pairs.append(CandidatePair(teaser.id, article.id))
    return pairs


@dataclass(frozen=True)
class TfIdfModel:
    """Corpus statistics: smoothed idf = ln(N/df) + 1, so idf >= 1."""

    vocabulary: Mapping[str, int]
    idf: Mapping[str, float]
    doc_count: int


def fit_tfidf(corpus: Sequence[Sequence[str]]) -> TfIdfModel:
    """Fit idf over pre-tokenized documents."""
    if not corpus:
        raise EmptyCorpusError("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for tokens in corpus:
        df.update(set(tokens))
    n = len(corpus)
    vocabulary = {term: i for i, term in enumerate(sorted(df))}
    idf = {term: math.log(n / df[term]) + 1.0 for term in vocabulary}
    return TfIdfModel(vocabulary=vocabulary, idf=idf, doc_count=n)


def tfidf_vector(model: TfIdfModel, tokens: Sequence[str]) -> dict[str, float]:
    """Length-normalized term frequency times idf; unseen terms drop out."""
    if not tokens:
        return {}
    counts = Counter(tokens)
    total = len(tokens)
    return {
        term: (count / total) * model.idf[term]
        for term, count in counts.items()
        if term in model.idf
    }


def _cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(weight * b.get(term, 0.0) for term, weight in a.items())
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


def cosine_score(
    model: TfIdfModel, a: Sequence[str], b: Sequence[str]
) -> float:
    """Cosine of two TF-IDF vectors; 0 when either vector is all-zero."""
    return _cosine(tfidf_vector(model, a), tfidf_vector(model, b))


def decide_tfidf(
    pairs: Sequence[CandidatePair],
    model: TfIdfModel,
    threshold: float,
    documents: Mapping[str, Sequence[str]],
) -> list[CandidatePair]:
    """Score every pair and match exactly those with score >= threshold.

    ``documents`` maps teaser and article ids to their token sequences.
    """
    vectors = {
        doc_id: tfidf_vector(model, tokens) for doc_id, tokens in documents.items()
    }
    decided = []
    for pair in pairs:
        score = _cosine(vectors[pair.teaser_id], vectors[pair.article_id])
        decided.append(
            replace(
                pair,
                score=score,
                backend=Backend.TFIDF,
                decision=Decision.MATCH if score >= threshold else Decision.NO_MATCH,
            )
        )
    return decided


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    support: int
    tp: int
    fp: int
    fn: int
    tn: int

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "support": self.support,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
        }


def _confusion_at(scored: Sequence[tuple[float, bool]], t: float) -> tuple[int, int, int, int]:
    tp = fp = fn = tn = 0
    for score, label in scored:
        predicted = score >= t
        if predicted and label:
            tp += 1
        elif predicted:
            fp += 1
        elif label:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def _metrics(tp: int, fp: int, fn: int, tn: int) -> tuple[float, float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    return precision, recall, f1, accuracy


def calibrate_threshold(scored: Sequence[tuple[float, bool]]) -> CalibrationResult:
    """Sweep observed scores and return the max-F1 threshold.

    Classifies match iff score >= t; ties break toward the smallest t,
    which favors recall.
    """
    labels = {label for _, label in scored}
    if labels != {True, False}:
        raise DegenerateLabelsError(
            "calibration needs at least one positive and one negative label"
        )
    best: CalibrationResult | None = None
    for t in sorted({score for score, _ in scored}):
        tp, fp, fn, tn = _confusion_at(scored, t)
        precision, recall, f1, accuracy = _metrics(tp, fp, fn, tn)
        if best is None or f1 > best.f1:
            best = CalibrationResult(
                threshold=t,
                precision=precision,
                recall=recall,
                f1=f1,
                accuracy=accuracy,
                support=len(scored),
                tp=tp,
                fp=fp,
                fn=fn,
                tn=tn,
            )
    assert best is not None
    return best


def sweep_thresholds(
    scored: Sequence[tuple[float, bool]]
) -> list[tuple[float, float, float, float]]:
    """(threshold, precision, recall, f1) at every observed score; for reports."""
    points = []
    for t in sorted({score for score, _ in scored}):
        tp, fp, fn, tn = _confusion_at(scored, t)
        precision, recall, f1, _ = _metrics(tp, fp, fn, tn)
        points.append((t, precision, recall, f1))
    return points


class EmbeddingProvider(Protocol):
    """Batch text-in / vectors-out. Implementations may be file-backed or
    remote; a vector of None marks a per-text failure."""

    def embed(self, texts: Sequence[str]) -> list[list[float] | None]: ...


class FileEmbeddingProvider:
    """Precomputed vectors keyed by exact text in a JSON file
    ({"vectors": {text: [floats]}}); unknown texts fail individually."""

    def __init__(self, path):
        import json
        from pathlib import Path

        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        self._vectors: dict[str, list[float]] = doc["vectors"]

    def embed(self, texts: Sequence[str]) -> list[list[float] | None]:
        return [self._vectors.get(t) for t in texts]


def _dense_cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / (na * nb)))


def decide_embedding(
    pairs: Sequence[CandidatePair],
    provider: EmbeddingProvider,
    threshold: float,
    texts: Mapping[str, str],
) -> list[CandidatePair]:
    """Same decision rule as decide_tfidf over provider vectors.

    Pairs whose texts fail to embed stay undecided; if every embedding
    call fails the provider-unavailable error propagates.
    """
    unique = sorted({pair.teaser_id for pair in pairs} | {pair.article_id for pair in pairs})
    try:
        vectors = provider.embed([texts[doc_id] for doc_id in unique])
    except Exception as exc:
        raise ProviderUnavailableError(f"embedding provider failed: {exc}") from exc
    by_id = dict(zip(unique, vectors))
    if pairs and all(v is None for v in by_id.values()):
        raise ProviderUnavailableError("embedding provider returned no vectors")

    decided = []
    for pair in pairs:
        va, vb = by_id[pair.teaser_id], by_id[pair.article_id]
        if va is None or vb is None:
            decided.append(replace(pair, backend=Backend.EMBEDDING, decision=Decision.UNDECIDED))
            continue
        score = _dense_cosine(va, vb)
        decided.append(
            replace(
                pair,
                score=score,
                backend=Backend.EMBEDDING,
                decision=Decision.MATCH if score >= threshold else Decision.NO_MATCH,
            )
        )
    return decided


def decide_zero_shot(
    pairs: Sequence[CandidatePair],
    client,
    texts: Mapping[str, str],
) -> list[CandidatePair]:
    """Ask the LLM per pair whether the teaser summarizes the article.

    Only verbatim "Yes"/"No" answers decide; anything else, including
    per-pair client errors, leaves the pair undecided.
    """
    from . import llm

    decided = []
    for pair in pairs:
        prompt = llm.render_prompt(
            llm.Task.MATCH,
            {"text": texts[pair.article_id], "summary": texts[pair.teaser_id]},
        )
        try:
            answer = client.complete(prompt).strip()
        except Exception:
            decided.append(replace(pair, backend=Backend.ZERO_SHOT, decision=Decision.UNDECIDED))
            continue
        if answer == "Yes":
            decision = Decision.MATCH
        elif answer == "No":
            decision = Decision.NO_MATCH
        else:
            decision = Decision.UNDECIDED
        decided.append(replace(pair, backend=Backend.ZERO_SHOT, decision=decision))
    return decided


@dataclass(frozen=True)
class MatchReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
        }


def evaluate_matching(
    decided: Sequence[CandidatePair],
    gold: Mapping[tuple[str, str], bool],
) -> MatchReport:
    """Binary metrics over pairs; undecided counts as no_match."""
    tp = fp = fn = tn = 0
    for pair in decided:
        key = (pair.teaser_id, pair.article_id)
        if key not in gold:
            raise CoverageGapError(f"gold labels missing pair {key}")
        predicted = pair.decision is Decision.MATCH
        label = gold[key]
        if predicted and label:
            tp += 1
        elif predicted:
            fp += 1
        elif label:
            fn += 1
        else:
            tn += 1
    precision, recall, f1, accuracy = _metrics(tp, fp, fn, tn)
    return MatchReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )
