"""Canonical data model for issues, pages and blocks, plus article grouping.

The on-disk issue format is one UTF-8 JSON document per file with exact,
case-sensitive field names:

    title_id, date, language, pages[] {number, blocks[] {id, kind, order, text}}
    optionally articles[] {id, page_numbers, headline_block, body_blocks[]}
"""

from __future__ import annotations

import datetime
import json
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from .errors import DuplicatePageError, MalformedDocumentError, SchemaViolationError
from .textmetrics import Tokenizer, tokenize


class BlockKind(Enum):
    HEADLINE = "headline"
    BODY = "body"
    CAPTION = "caption"
    OTHER = "other"


@dataclass(frozen=True)
class Block:
    id: str
    kind: BlockKind
    text: str
    order: int


@dataclass(frozen=True)
class Page:
    number: int
    blocks: tuple[Block, ...]


@dataclass(frozen=True)
class ArticleGroup:
    """Explicit article segmentation carried by the input file."""

    id: str
    page_numbers: tuple[int, ...]
    headline_block: str | None
    body_blocks: tuple[str, ...]


@dataclass(frozen=True)
class Issue:
    title_id: str
    date: str  # ISO-8601
    language: str
    pages: tuple[Page, ...]
    article_groups: tuple[ArticleGroup, ...] = ()

    @property
    def issue_ref(self) -> tuple[str, str]:
        return (self.title_id, self.date)

    def page(self, number: int) -> Page | None:
        for page in self.pages:
            if page.number == number:
                return page
        return None

    def front_page(self) -> Page | None:
        return self.page(1)


@dataclass(frozen=True)
class Article:
    id: str
    title_id: str
    date: str
    page_numbers: frozenset[int]
    headline: str | None
    body: str
    word_count: int

    @property
    def issue_ref(self) -> tuple[str, str]:
        return (self.title_id, self.date)

    @property
    def text(self) -> str:
        if self.headline:
            return self.headline + "\n" + self.body
        return self.body


def _require(doc: dict, field: str, context: str):
    if field not in doc:
        raise SchemaViolationError(f"{context}: missing required field '{field}'")
    return doc[field]


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def ingest_issue(
    path: str | Path,
    strict: bool = True,
    on_warning: Callable[[str], None] | None = None,
) -> Issue:
    """Read and validate one canonical issue file.

    In strict mode any schema violation aborts; otherwise offending blocks
    are dropped and reported through ``on_warning``.
    """
    path = Path(path)
    warn = on_warning or (lambda msg: None)
    try:
        raw = path.read_text(encoding="utf-8")
        doc = json.loads(raw)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocumentError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocumentError(f"{path}: top level must be an object")

    title_id = str(_require(doc, "title_id", str(path)))
    date = str(_require(doc, "date", str(path)))
    try:
        datetime.date.fromisoformat(date)
    except ValueError as exc:
        raise SchemaViolationError(f"{path}: invalid date '{date}'") from exc
    language = str(_require(doc, "language", str(path)))

    pages: list[Page] = []
    seen_pages: set[int] = set()
    seen_block_ids: set[str] = set()
    for page_doc in _require(doc, "pages", str(path)):
        number = _require(page_doc, "number", f"{path} page")
        if not isinstance(number, int) or number < 1:
            raise SchemaViolationError(f"{path}: page number must be a positive integer")
        if number in seen_pages:
            raise DuplicatePageError(f"{path}: duplicate page number {number}")
        seen_pages.add(number)

        blocks: list[Block] = []
        last_order: int | None = None
        for block_doc in _require(page_doc, "blocks", f"{path} page {number}"):
            ctx = f"{path} page {number} block"
            block_id = str(_require(block_doc, "id", ctx))
            kind_raw = _require(block_doc, "kind", ctx)
            order = _require(block_doc, "order", ctx)
            text = _nfc(str(_require(block_doc, "text", ctx)))

            problem = None
            if block_id in seen_block_ids:
                problem = f"duplicate block id '{block_id}'"
            elif kind_raw not in {k.value for k in BlockKind}:
                problem = f"unknown block kind '{kind_raw}'"
            elif not isinstance(order, int) or order < 0:
                problem = f"invalid order {order!r}"
            elif last_order is not None and order <= last_order:
                problem = f"non-increasing order {order}"
            elif not text.strip():
                problem = "empty text after normalization"
            if problem:
                msg = f"{ctx} '{block_id}': {problem}"
                if strict:
                    raise SchemaViolationError(msg)
                warn(msg + " (block dropped)")
                continue

            seen_block_ids.add(block_id)
            last_order = order
            blocks.append(Block(id=block_id, kind=BlockKind(kind_raw), text=text, order=order))
        pages.append(Page(number=number, blocks=tuple(blocks)))
    pages.sort(key=lambda p: p.number)

    groups: list[ArticleGroup] = []
    for art_doc in doc.get("articles", []):
        ctx = f"{path} article"
        group = ArticleGroup(
            id=str(_require(art_doc, "id", ctx)),
            page_numbers=tuple(int(n) for n in _require(art_doc, "page_numbers", ctx)),
            headline_block=art_doc.get("headline_block"),
            body_blocks=tuple(str(b) for b in _require(art_doc, "body_blocks", ctx)),
        )
        missing = set(group.page_numbers) - seen_pages
        if missing:
            msg = f"{ctx} '{group.id}': references missing pages {sorted(missing)}"
            if strict:
                raise SchemaViolationError(msg)
            warn(msg + " (article dropped)")
            continue
        groups.append(group)

    return Issue(
        title_id=title_id,
        date=date,
        language=language,
        pages=tuple(pages),
        article_groups=tuple(groups),
    )


def serialize_issue(issue: Issue) -> dict:
    doc: dict = {
        "title_id": issue.title_id,
        "date": issue.date,
        "language": issue.language,
        "pages": [
            {
                "number": page.number,
                "blocks": [
                    {"id": b.id, "kind": b.kind.value, "order": b.order, "text": b.text}
                    for b in page.blocks
                ],
            }
            for page in issue.pages
        ],
    }
    if issue.article_groups:
        doc["articles"] = [
            {
                "id": g.id,
                "page_numbers": list(g.page_numbers),
                "headline_block": g.headline_block,
                "body_blocks": list(g.body_blocks),
            }
            for g in issue.article_groups
        ]
    return doc


def write_issue(issue: Issue, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(serialize_issue(issue), ensure_ascii=False, sort_keys=True, indent=1)
        + "\n",
        encoding="utf-8",
    )


def _make_article(
    issue: Issue,
    article_id: str,
    page_numbers: Iterable[int],
    headline: str | None,
    body_texts: list[str],
    tok: Tokenizer,
) -> Article:
    body = "\n".join(body_texts)
    words = len(tokenize((headline + "\n" if headline else "") + body, tok))
    return Article(
        id=article_id,
        title_id=issue.title_id,
        date=issue.date,
        page_numbers=frozenset(page_numbers),
        headline=headline,
        body=body,
        word_count=words,
    )


def group_articles(issue: Issue, tok: Tokenizer | None = None) -> list[Article]:
    """Segment an issue into articles.

    Explicit ``articles[]`` groupings in the input are passed through.
    Otherwise, per page, each headline block opens a new article absorbing
    the body blocks that follow it; leading body blocks form a
    headline-less article; caption/other blocks never join a body.
    """
    tok = tok or Tokenizer(language=issue.language)

    if issue.article_groups:
        blocks_by_id = {b.id: b for page in issue.pages for b in page.blocks}
        articles = []
        for group in issue.article_groups:
            headline_block = blocks_by_id.get(group.headline_block) if group.headline_block else None
            bodies = [blocks_by_id[bid].text for bid in group.body_blocks if bid in blocks_by_id]
            articles.append(
                _make_article(
                    issue,
                    group.id,
                    group.page_numbers,
                    headline_block.text if headline_block else None,
                    bodies,
                    tok,
                )
            )
        return articles

    articles = []
    for page in issue.pages:
        counter = 0
        headline: str | None = None
        bodies: list[str] = []
        open_article = False

        def flush():
            nonlocal counter, headline, bodies, open_article
            if open_article:
                article_id = f"{issue.title_id}:{issue.date}:p{page.number}:a{counter}"
                articles.append(
                    _make_article(issue, article_id, {page.number}, headline, bodies, tok)
                )
                counter += 1
            headline = None
            bodies = []
            open_article = False

        for block in page.blocks:
            if block.kind is BlockKind.HEADLINE:
                flush()
                headline = block.text
                open_article = True
            elif block.kind is BlockKind.BODY:
                if not open_article:
                    open_article = True
                bodies.append(block.text)
            # caption/other blocks are excluded from article bodies
        flush()
    return articles
