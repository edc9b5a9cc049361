"""Front-page teaser detection.

Rule-based: per-title profiles list the key phrases that signal a full
story inside the issue (e.g. "page 5"), continuation phrases that mark
article leads, and a small grammar for parsing the referenced page
numbers, including ranges like "8-9".
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import MismatchedIssuesError, NoReferenceError, ProfileError
from .model import BlockKind, Issue
from .textmetrics import Tokenizer, tokenize


@dataclass(frozen=True)
class PageRefGrammar:
    """How to find page numerals around a key phrase.

    ``marker_before_number`` means numbers follow the phrase ("page 5");
    when false the number precedes it ("5 Bls."). ``window`` bounds the
    numeral search to a few tokens so dates and prices are not captured.
    """

    marker_before_number: bool = True
    window: int = 3
    range_separators: tuple[str, ...] = ("-", "–")
    list_separators: tuple[str, ...] = (",",)


@dataclass(frozen=True)
class LanguageProfile:
    language: str
    title_id: str
    key_phrases: tuple[str, ...]
    continuation_phrases: tuple[str, ...] = ()
    grammar: PageRefGrammar = field(default_factory=PageRefGrammar)
    min_words: int = 10
    front_page_only: bool = True
    key_phrase_position: str = "anywhere"  # or "end"

    def __post_init__(self):
        if not self.key_phrases:
            raise ProfileError("profile needs at least one key phrase")
        if self.min_words < 0:
            raise ProfileError("min_words must be >= 0")
        keys = {_norm_phrase(p) for p in self.key_phrases}
        conts = {_norm_phrase(p) for p in self.continuation_phrases}
        if keys & conts:
            raise ProfileError(
                f"key and continuation phrases overlap: {sorted(keys & conts)}"
            )
        if self.key_phrase_position not in ("anywhere", "end"):
            raise ProfileError(f"bad key_phrase_position {self.key_phrase_position!r}")


def load_profile(path: str | Path) -> LanguageProfile:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProfileError(f"{path}: {exc}") from exc
    grammar = PageRefGrammar(
        marker_before_number=doc.get("marker_before_number", True),
        window=doc.get("window", 3),
        range_separators=tuple(doc.get("range_separators", ["-", "–"])),
        list_separators=tuple(doc.get("list_separators", [","])),
    )
    return LanguageProfile(
        language=doc["language"],
        title_id=doc["title_id"],
        key_phrases=tuple(doc["key_phrases"]),
        continuation_phrases=tuple(doc.get("continuation_phrases", [])),
        grammar=grammar,
        min_words=doc.get("min_words", 10),
        front_page_only=doc.get("front_page_only", True),
        key_phrase_position=doc.get("key_phrase_position", "anywhere"),
    )


def builtin_profile(language: str) -> LanguageProfile:
    """Load one of the shipped per-language default profiles."""
    from importlib import resources

    path = resources.files("frontpage").joinpath(f"profiles/{language}.json")
    if not path.is_file():
        raise ProfileError(f"no built-in profile for language '{language}'")
    with resources.as_file(path) as p:
        return load_profile(p)


@dataclass(frozen=True)
class Teaser:
    id: str
    title_id: str
    date: str
    text: str
    word_count: int
    page_refs: tuple[int, ...]  # sorted, never contains 1
    source_block_ids: tuple[str, ...]

    @property
    def issue_ref(self) -> tuple[str, str]:
        return (self.title_id, self.date)


def _norm_text(text: str) -> str:
    return " ".join(unicodedata.normalize("NFC", text).casefold().split())


def _cmp_token(token: str) -> str:
    # comparison form: drop punctuation entirely so "Pag." matches "pag"
    return "".join(ch for ch in token if not unicodedata.category(ch).startswith("P"))


def _norm_phrase(phrase: str) -> tuple[str, ...]:
    return tuple(_cmp_token(t) for t in _norm_text(phrase).split())


def _phrase_positions(tokens: Sequence[str], phrase: tuple[str, ...]) -> list[int]:
    cmp = [_cmp_token(t) for t in tokens]
    span = len(phrase)
    return [i for i in range(len(cmp) - span + 1) if tuple(cmp[i : i + span]) == phrase]


def _parse_numeral_token(token: str, grammar: PageRefGrammar) -> list[int]:
    token = token.strip("".join(ch for ch in token if not ch.isdigit() and ch not in
                               grammar.range_separators + grammar.list_separators))
    if not token:
        return []
    parts = [token]
    for sep in grammar.list_separators:
        parts = [piece for part in parts for piece in part.split(sep)]
    numbers: list[int] = []
    for part in parts:
        part = part.strip()
        if not part:
            continue
        for sep in grammar.range_separators:
            if sep in part:
                lo, _, hi = part.partition(sep)
                if lo.isdigit() and hi.isdigit():
                    a, b = int(lo), int(hi)
                    if 0 < a <= b:
                        numbers.extend(range(a, b + 1))
                break
        else:
            if part.isdigit() and int(part) > 0:
                numbers.append(int(part))
    return numbers


def parse_page_refs(
    text: str, grammar: PageRefGrammar, key_phrases: Iterable[str]
) -> set[int]:
    """Page numbers near key phrases; ranges expand inclusively.

    Raises no-reference when no parseable numeral sits inside the search
    window of any key phrase. Inverted ranges ("9-8") never parse.
    """
    tokens = _norm_text(text).split()
    refs: set[int] = set()
    for phrase in key_phrases:
        norm = _norm_phrase(phrase)
        if not norm:
            continue
        for pos in _phrase_positions(tokens, norm):
            if grammar.marker_before_number:
                window = tokens[pos + len(norm) : pos + len(norm) + grammar.window]
            else:
                window = tokens[max(0, pos - grammar.window) : pos]
            for token in window:
                refs.update(_parse_numeral_token(token, grammar))
    if not refs:
        raise NoReferenceError("no page numeral adjacent to a key phrase")
    return refs


def _contains_phrase(tokens: Sequence[str], phrases: Iterable[str]) -> bool:
    return any(
        _phrase_positions(tokens, norm)
        for norm in (_norm_phrase(p) for p in phrases)
        if norm
    )


def _phrase_near_end(tokens: Sequence[str], profile: LanguageProfile) -> bool:
    for phrase in profile.key_phrases:
        norm = _norm_phrase(phrase)
        if not norm:
            continue
        for pos in _phrase_positions(tokens, norm):
            if pos + len(norm) + profile.grammar.window >= len(tokens):
                return True
    return False


def detect_teasers(issue: Issue, profile: LanguageProfile) -> list[Teaser]:
    """Find teaser units on the front page.

    A unit is a body block merged with a directly preceding headline
    block. It becomes a teaser when it contains a key phrase, parses at
    least one page reference other than 1, contains no continuation
    phrase, and meets the profile's length floor.
    """
    page = issue.front_page()
    if page is None:
        return []
    candidates = [b for b in page.blocks if b.kind in (BlockKind.HEADLINE, BlockKind.BODY)]

    units: list[list] = []
    i = 0
    while i < len(candidates):
        block = candidates[i]
        if (
            block.kind is BlockKind.HEADLINE
            and i + 1 < len(candidates)
            and candidates[i + 1].kind is BlockKind.BODY
        ):
            units.append([block, candidates[i + 1]])
            i += 2
        else:
            units.append([block])
            i += 1

    tok = Tokenizer(language=profile.language)
    teasers: list[Teaser] = []
    for unit in units:
        text = " ".join(b.text for b in unit)
        tokens = _norm_text(text).split()
        if not _contains_phrase(tokens, profile.key_phrases):
            continue
        if profile.key_phrase_position == "end" and not _phrase_near_end(tokens, profile):
            continue
        if _contains_phrase(tokens, profile.continuation_phrases):
            continue
        try:
            refs = parse_page_refs(text, profile.grammar, profile.key_phrases)
        except NoReferenceError:
            continue
        refs -= {1}
        if not refs:
            continue
        word_count = len(tokenize(text, tok))
        if word_count < profile.min_words:
            continue
        teasers.append(
            Teaser(
                id=f"{issue.title_id}:{issue.date}:t{len(teasers)}",
                title_id=issue.title_id,
                date=issue.date,
                text=text,
                word_count=word_count,
                page_refs=tuple(sorted(refs)),
                source_block_ids=tuple(b.id for b in unit),
            )
        )
    return teasers


@dataclass(frozen=True)
class GoldBlock:
    """One labeled front-page block: is it part of a teaser, and if the
    rule got it wrong, which cause tag explains it."""

    title_id: str
    date: str
    block_id: str
    label: bool
    cause: str | None = None


@dataclass
class DetectionReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    false_negative_causes: dict[str, int]
    false_positive_causes: dict[str, int]

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "false_negative_causes": dict(sorted(self.false_negative_causes.items())),
            "false_positive_causes": dict(sorted(self.false_positive_causes.items())),
        }


def evaluate_detection(predicted: Sequence[Teaser], gold: Sequence[GoldBlock]) -> DetectionReport:
    """Block-level precision/recall/F1 with an error breakdown by cause."""
    gold_issues = {(g.title_id, g.date) for g in gold}
    pred_issues = {t.issue_ref for t in predicted}
    if pred_issues - gold_issues:
        raise MismatchedIssuesError(
            f"predictions cover issues absent from gold: {sorted(pred_issues - gold_issues)}"
        )

    pred_blocks = {
        (t.title_id, t.date, bid) for t in predicted for bid in t.source_block_ids
    }
    gold_pos = {(g.title_id, g.date, g.block_id) for g in gold if g.label}
    causes = {(g.title_id, g.date, g.block_id): g.cause for g in gold}

    tp = pred_blocks & gold_pos
    fp = pred_blocks - gold_pos
    fn = gold_pos - pred_blocks
    precision = len(tp) / len(pred_blocks) if pred_blocks else 0.0
    recall = len(tp) / len(gold_pos) if gold_pos else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    fn_causes = Counter(causes.get(key) or "unlabeled" for key in fn)
    fp_causes = Counter(causes.get(key) or "unlabeled" for key in fp)
    return DetectionReport(
        precision=precision,
        recall=recall,
        f1=f1,
        tp=len(tp),
        fp=len(fp),
        fn=len(fn),
        false_negative_causes=dict(fn_causes),
        false_positive_causes=dict(fp_causes),
    )
