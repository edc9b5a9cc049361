#!/usr/bin/env python3
"""Regenerate the synthetic fixture corpus under fixtures/.

Builds 20 issues of a fake newspaper with planted teasers and matches,
injected OCR noise, gold label files, and a gold-consistent LLM replay
cache. Fully deterministic: rerunning produces byte-identical files.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from frontpage import llm  # noqa: E402
from frontpage.detect import detect_teasers, load_profile  # noqa: E402
from frontpage.matching import build_candidates  # noqa: E402
from frontpage.model import group_articles, ingest_issue  # noqa: E402

FIXTURES = ROOT / "fixtures"
TITLE = "daily-fixture"
FILLER = ["the", "a", "of", "in", "and", "to", "was", "with", "for", "at"]

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"


def make_lexicon(rng: random.Random, count: int) -> list[str]:
    words: list[str] = []
    seen = set()
    while len(words) < count:
        word = "".join(
            rng.choice(CONSONANTS) + rng.choice(VOWELS)
            for _ in range(rng.randint(2, 4))
        )
        if word not in seen and word not in FILLER:
            seen.add(word)
            words.append(word)
    return words


def prose(rng: random.Random, vocab: list[str], n_words: int) -> str:
    out = []
    for i in range(n_words):
        if i % 5 == 4:
            out.append(rng.choice(FILLER))
        else:
            out.append(rng.choice(vocab))
    text = " ".join(out)
    return text[0].upper() + text[1:] + "."


def ocr_noise(rng: random.Random, text: str, rate: float = 0.03) -> str:
    subs = {"e": "c", "o": "0", "l": "1", "a": "u"}
    chars = list(text)
    for i, ch in enumerate(chars):
        if ch in subs and rng.random() < rate:
            chars[i] = subs[ch]
    return "".join(chars)


def main() -> None:
    rng = random.Random(20260823)
    corpus_dir = FIXTURES / "corpus"
    gold_dir = FIXTURES / "gold"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    gold_dir.mkdir(parents=True, exist_ok=True)

    profile_doc = {
        "language": "en",
        "title_id": TITLE,
        "key_phrases": ["page", "pages"],
        "continuation_phrases": ["continued on"],
        "marker_before_number": True,
        "window": 3,
        "range_separators": ["-", "–"],
        "list_separators": [","],
        "min_words": 10,
        "front_page_only": True,
        "key_phrase_position": "anywhere",
    }
    (FIXTURES / "profile.json").write_text(
        json.dumps(profile_doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )

    lexicon = make_lexicon(rng, 220 * 30)
    next_word = 0

    def take_vocab(n: int) -> list[str]:
        nonlocal next_word
        vocab = lexicon[next_word : next_word + n]
        next_word += n
        return vocab

    detection_gold: list[dict] = []
    # planted ground truth keyed by the teaser's key-phrase block id
    planted: dict[str, list[str]] = {}
    planted_meta: list[dict] = []

    for issue_index in range(20):
        date = f"1990-01-{issue_index + 1:02d}"
        # articles: pages 2..6, two per page; vocab[page][slot]
        article_vocab: dict[tuple[int, int], list[str]] = {}
        pages_doc = []
        noisy_issue = issue_index in (2, 3, 7)
        for page_number in range(2, 7):
            blocks = []
            order = 0
            for slot in range(2):
                vocab = take_vocab(30)
                article_vocab[(page_number, slot)] = vocab
                prefix = f"p{page_number}a{slot}"
                body2 = prose(rng, vocab, 55)
                if noisy_issue:
                    body2 = ocr_noise(rng, body2)
                blocks.append(
                    {
                        "id": f"{prefix}-h",
                        "kind": "headline",
                        "order": order,
                        "text": prose(rng, vocab, 6).rstrip("."),
                    }
                )
                blocks.append(
                    {"id": f"{prefix}-b1", "kind": "body", "order": order + 1,
                     "text": prose(rng, vocab, 60)}
                )
                blocks.append(
                    {"id": f"{prefix}-b2", "kind": "body", "order": order + 2,
                     "text": body2}
                )
                order += 3
            pages_doc.append({"number": page_number, "blocks": blocks})

        # front page: three teasers + index header + continued lead
        multi_count = 2 if issue_index < 10 else 1
        kinds = ["multi"] * multi_count + ["single"] * (3 - multi_count)
        front_blocks: list[dict] = []
        order = 0

        def teaser_words(targets: list[tuple[int, int]], n_per: int) -> str:
            parts = []
            for page_number, slot in targets:
                vocab = article_vocab[(page_number, slot)]
                picked = rng.sample(vocab, min(n_per, len(vocab)))
                parts.append(" ".join(picked))
            return " ".join(parts)

        for t_index, kind in enumerate(kinds):
            with_headline = t_index != 1
            if kind == "multi":
                if t_index == 0:
                    targets = [(4, 0), (5, 0)]
                    phrase = "Full stories on pages 4-5."
                else:
                    targets = [(2, 1), (6, 1)]
                    phrase = "More reports on pages 2, 6."
                n_per = 55 if issue_index < 5 and t_index == 0 else 25
            else:
                page_number = [2, 3, 6][t_index]
                targets = [(page_number, 0)]
                phrase = f"Full story on page {page_number}."
                n_per = 14 if t_index == 2 else 28

            body_text = teaser_words(targets, n_per).capitalize() + f". {phrase}"
            body_kind = "body"
            cause = None
            label = 1
            if issue_index == 0 and kind == "multi" and t_index == 1:
                # planted but marked as an image caption: segmentation miss
                body_kind = "caption"
                cause = "segmentation"
            if issue_index == 10 and kind == "single" and t_index == 1:
                # key phrase destroyed by recognition noise
                body_text = body_text.replace("page", "paqe").replace("pages", "paqes")
                cause = "ocr-noise"

            block_ids = []
            if with_headline:
                headline_id = f"fp-t{t_index}-h"
                front_blocks.append(
                    {
                        "id": headline_id,
                        "kind": "headline" if body_kind == "body" else "caption",
                        "order": order,
                        "text": teaser_words(targets[:1], 5).capitalize(),
                    }
                )
                block_ids.append(headline_id)
                order += 1
            body_id = f"fp-t{t_index}-b"
            front_blocks.append(
                {"id": body_id, "kind": body_kind, "order": order, "text": body_text}
            )
            block_ids.append(body_id)
            order += 1

            for block_id in block_ids:
                detection_gold.append(
                    {
                        "title_id": TITLE,
                        "date": date,
                        "block_id": block_id,
                        "label": label,
                        "cause": cause,
                    }
                )
            target_ids = [
                f"{TITLE}:{date}:p{page_number}:a{slot}" for page_number, slot in targets
            ]
            planted[f"{TITLE}:{date}:{body_id}"] = target_ids
            planted_meta.append(
                {
                    "date": date,
                    "block_id": body_id,
                    "multi": kind == "multi",
                    "detectable": cause is None,
                    "targets": target_ids,
                }
            )

        front_blocks.append(
            {"id": "fp-index", "kind": "body", "order": order,
             "text": "All sports results page 6"}
        )
        detection_gold.append(
            {"title_id": TITLE, "date": date, "block_id": "fp-index",
             "label": 0, "cause": "length"}
        )
        order += 1
        lead_vocab = take_vocab(30)
        front_blocks.append(
            {"id": "fp-lead-h", "kind": "headline", "order": order,
             "text": prose(rng, lead_vocab, 5).rstrip(".")}
        )
        front_blocks.append(
            {"id": "fp-lead-b", "kind": "body", "order": order + 1,
             "text": prose(rng, lead_vocab, 30).rstrip(".") + ", continued on page 3."}
        )
        for block_id in ("fp-lead-h", "fp-lead-b"):
            detection_gold.append(
                {"title_id": TITLE, "date": date, "block_id": block_id,
                 "label": 0, "cause": None}
            )

        issue_doc = {
            "title_id": TITLE,
            "date": date,
            "language": "en",
            "pages": [{"number": 1, "blocks": front_blocks}] + pages_doc,
        }
        (corpus_dir / f"{TITLE}-{date}.json").write_text(
            json.dumps(issue_doc, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
            encoding="utf-8",
        )

    with (gold_dir / "detection.jsonl").open("w", encoding="utf-8") as handle:
        for row in detection_gold:
            handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    # run the real pipeline to map planted blocks to detected teaser ids
    profile = load_profile(FIXTURES / "profile.json")
    issues = [ingest_issue(p) for p in sorted(corpus_dir.glob("*.json"))]
    teasers = [t for issue in issues for t in detect_teasers(issue, profile)]
    articles = [a for issue in issues for a in group_articles(issue)]
    pairs = build_candidates(teasers, articles)
    texts = {t.id: t.text for t in teasers}
    texts.update({a.id: a.text for a in articles})
    teaser_by_id = {t.id: t for t in teasers}

    def planted_targets(teaser) -> list[str]:
        for block_id in teaser.source_block_ids:
            key = f"{teaser.title_id}:{teaser.date}:{block_id}"
            if key in planted:
                return planted[key]
        raise SystemExit(f"detected teaser {teaser.id} is not planted: false positive")

    matching_gold = []
    for pair in pairs:
        label = pair.article_id in planted_targets(teaser_by_id[pair.teaser_id])
        matching_gold.append(
            {"teaser_id": pair.teaser_id, "article_id": pair.article_id,
             "label": int(label)}
        )
    with (gold_dir / "matching.jsonl").open("w", encoding="utf-8") as handle:
        for row in matching_gold:
            handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    # gold-consistent zero-shot replay cache; one entry deliberately malformed
    cache_path = FIXTURES / "llm_cache.jsonl"
    if cache_path.exists():
        cache_path.unlink()
    cache = llm.ReplayCache(cache_path)
    malformed_done = False
    for pair, row in zip(pairs, matching_gold):
        prompt = llm.render_prompt(
            llm.Task.MATCH,
            {"text": texts[pair.article_id], "summary": texts[pair.teaser_id]},
        )
        if row["label"]:
            response = "Yes"
        elif not malformed_done:
            response = "Yes, although only loosely related."
            malformed_done = True
        else:
            response = "No"
        cache.put(
            llm.request_key(prompt, 0.0, 1024),
            prompt,
            {"temperature": 0.0, "max_tokens": 1024, "model": "fixture"},
            response,
        )

    detectable = [m for m in planted_meta if m["detectable"]]
    summary = {
        "planted_teasers": len(planted_meta),
        "planted_multi": sum(1 for m in planted_meta if m["multi"]),
        "detectable_teasers": len(detectable),
        "detectable_multi": sum(1 for m in detectable if m["multi"]),
        "multi_fraction": sum(1 for m in detectable if m["multi"]) / len(detectable),
        "detected_teasers": len(teasers),
        "candidate_pairs": len(pairs),
        "gold_positive_pairs": sum(r["label"] for r in matching_gold),
    }
    (gold_dir / "planted.json").write_text(
        json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary, indent=1))


if __name__ == "__main__":
    main()
