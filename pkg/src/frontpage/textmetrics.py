"""Shared tokenizer and text statistics.

Provides the tokenizer used everywhere downstream plus the summary
statistics: novel n-gram ratio, compression rate, length bands and
ROUGE-1/2/L.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import EmptyInputError, EmptySourcesError, TooShortError


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class Tokenizer:
    """Deterministic whitespace tokenizer with NFC normalization.

    Lowercasing uses ``str.casefold`` which is the identity for uncased
    scripts (Hebrew, CJK), so no per-script switch is needed.
    """

    language: str = "und"
    lowercase: bool = True
    strip_punctuation: bool = True

    def __call__(self, text: str) -> list[str]:
        return tokenize(text, self)


def tokenize(text: str, tok: Tokenizer | None = None) -> list[str]:
    """Split ``text`` into normalized, non-empty tokens."""
    tok = tok or Tokenizer()
    text = unicodedata.normalize("NFC", text)
    if tok.lowercase:
        text = text.casefold()
    out = []
    for raw in text.split():
        if tok.strip_punctuation:
            raw = "".join(ch for ch in raw if not _is_punct(ch))
        if raw:
            out.append(raw)
    return out


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def novel_ngram_ratio(
    summary: str, sources: Iterable[str], n: int, tok: Tokenizer | None = None
) -> float:
    """Fraction of summary n-gram *types* absent from the unioned sources."""
    if not 1 <= n <= 4:
        raise ValueError(f"n must be in 1..4, got {n}")
    tok = tok or Tokenizer()
    summary_tokens = tokenize(summary, tok)
    if len(summary_tokens) < n:
        raise TooShortError(f"summary has {len(summary_tokens)} tokens, need >= {n}")
    summary_grams = set(ngrams(summary_tokens, n))
    source_grams: set[tuple[str, ...]] = set()
    for src in sources:
        source_grams.update(ngrams(tokenize(src, tok), n))
    return len(summary_grams - source_grams) / len(summary_grams)


def compression_rate(
    summary: str, sources: Iterable[str], tok: Tokenizer | None = None
) -> float:
    """1 - summary/source word-count ratio, clamped to [0, 1]."""
    tok = tok or Tokenizer()
    source_words = sum(len(tokenize(src, tok)) for src in sources)
    if source_words == 0:
        raise EmptySourcesError("sources contain no tokens")
    summary_words = len(tokenize(summary, tok))
    return min(1.0, max(0.0, 1.0 - summary_words / source_words))


class LengthBand(Enum):
    """Summary length bands in words; left-closed, right-open."""

    UNDER_25 = "0-25"
    FROM_25 = "25-50"
    FROM_50 = "50-100"
    OVER_100 = ">100"


def band_for_count(words: int) -> LengthBand:
    if words < 25:
        return LengthBand.UNDER_25
    if words < 50:
        return LengthBand.FROM_25
    if words < 100:
        return LengthBand.FROM_50
    return LengthBand.OVER_100


def length_category(summary: str, tok: Tokenizer | None = None) -> LengthBand:
    return band_for_count(len(tokenize(summary, tok or Tokenizer())))


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def rouge_n(
    reference: str, candidate: str, n: int, tok: Tokenizer | None = None
) -> RougeScore:
    """Clipped n-gram overlap (multiset intersection) for n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    tok = tok or Tokenizer()
    ref = tokenize(reference, tok)
    if len(ref) < n:
        raise TooShortError(f"reference has {len(ref)} tokens, need >= {n}")
    cand = tokenize(candidate, tok)
    ref_counts = Counter(ngrams(ref, n))
    cand_counts = Counter(ngrams(cand, n))
    overlap = sum((ref_counts & cand_counts).values())
    recall = overlap / sum(ref_counts.values())
    cand_total = sum(cand_counts.values())
    precision = overlap / cand_total if cand_total else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length via the standard DP."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(reference: str, candidate: str, tok: Tokenizer | None = None) -> RougeScore:
    tok = tok or Tokenizer()
    ref = tokenize(reference, tok)
    cand = tokenize(candidate, tok)
    if not ref or not cand:
        raise EmptyInputError("rouge_l requires non-empty reference and candidate")
    length = lcs_length(ref, cand)
    recall = length / len(ref)
    precision = length / len(cand)
    return RougeScore(precision, recall, _f1(precision, recall))


@dataclass
class MetricReport:
    """Per-sample metric bundle used by the stats and eval flows."""

    novel_ngram: dict[int, float] = field(default_factory=dict)
    compression: float = 0.0
    length_category: LengthBand = LengthBand.UNDER_25
    rouge1: RougeScore | None = None
    rouge2: RougeScore | None = None
    rougeL: RougeScore | None = None


def sample_statistics(
    summary: str, sources: Sequence[str], tok: Tokenizer | None = None
) -> MetricReport:
    """Novelty, compression and length band for one (summary, sources) pair."""
    tok = tok or Tokenizer()
    report = MetricReport(
        compression=compression_rate(summary, sources, tok),
        length_category=length_category(summary, tok),
    )
    for n in (1, 2, 3, 4):
        try:
            report.novel_ngram[n] = novel_ngram_ratio(summary, sources, n, tok)
        except TooShortError:
            pass
    return report
