import json

import pytest

from frontpage.dataset import (
    Shape,
    assemble,
    build_datacard,
    classify_shape,
    export,
    import_samples,
    read_samples,
)
from frontpage.detect import Teaser
from frontpage.errors import DanglingReferenceError, EmptyDatasetError
from frontpage.matching import CandidatePair, Decision
from frontpage.model import Article
from frontpage.textmetrics import LengthBand


def teaser(tid, text="summary words here", title="tg", date="1990-01-01"):
    return Teaser(
        id=tid,
        title_id=title,
        date=date,
        text=text,
        word_count=len(text.split()),
        page_refs=(2,),
        source_block_ids=("b0",),
    )


def article(aid, body="body text of the article", pages=(2,)):
    return Article(
        id=aid,
        title_id="tg",
        date="1990-01-01",
        page_numbers=frozenset(pages),
        headline=None,
        body=body,
        word_count=len(body.split()),
    )


def match(tid, aid, decision=Decision.MATCH):
    return CandidatePair(tid, aid, decision=decision)


# -- classify_shape --------------------------------------------------------

def test_shape_three_sentences_one_block_is_paragraph():
    assert classify_shape("A. B. C.") is Shape.PARAGRAPH


def test_shape_single_sentence():
    assert classify_shape("Single sentence here.") is Shape.ONE_SENTENCE


def test_shape_bullets_are_highlights():
    assert classify_shape("• item one\n• item two") is Shape.HIGHLIGHTS


def test_shape_plain_lines_are_highlights():
    assert classify_shape("first line\nsecond line") is Shape.HIGHLIGHTS


def test_shape_no_terminal_punctuation_is_one_sentence():
    assert classify_shape("a headline style teaser") is Shape.ONE_SENTENCE


# -- assemble --------------------------------------------------------------

def test_single_match_yields_single_doc_sample():
    samples, drop = assemble([teaser("t1")], [article("a1")], [match("t1", "a1")])
    assert len(samples) == 1
    assert not samples[0].is_multi_doc
    assert samples[0].document_ids == ("a1",)
    assert drop.count == 0


def test_three_matches_yield_multi_doc_sample():
    arts = [article(f"a{i}", pages=(i + 2,)) for i in range(3)]
    decisions = [match("t1", a.id) for a in arts]
    samples, _ = assemble([teaser("t1")], arts, decisions)
    assert samples[0].is_multi_doc
    assert len(samples[0].documents) == 3


def test_documents_ordered_by_page_then_id():
    arts = [article("z", pages=(2,)), article("a", pages=(4,)), article("m", pages=(2,))]
    decisions = [match("t1", a.id) for a in arts]
    samples, _ = assemble([teaser("t1")], arts, decisions)
    assert samples[0].document_ids == ("m", "z", "a")


def test_unmatched_teaser_dropped_and_reported():
    samples, drop = assemble(
        [teaser("t1"), teaser("t2")],
        [article("a1")],
        [match("t1", "a1"), match("t2", "a1", Decision.NO_MATCH)],
    )
    assert [s.id for s in samples] == ["t1"]
    assert drop.dropped_teaser_ids == ["t2"]


def test_undecided_pairs_never_contribute():
    samples, drop = assemble(
        [teaser("t1")], [article("a1")], [match("t1", "a1", Decision.UNDECIDED)]
    )
    assert samples == [] and drop.count == 1


def test_dangling_reference_errors():
    with pytest.raises(DanglingReferenceError):
        assemble([teaser("t1")], [article("a1")], [match("ghost", "a1")])
    with pytest.raises(DanglingReferenceError):
        assemble([teaser("t1")], [article("a1")], [match("t1", "ghost")])


def test_sample_carries_language_and_metadata():
    samples, _ = assemble(
        [teaser("t1")],
        [article("a1")],
        [match("t1", "a1")],
        languages={("tg", "1990-01-01"): "he"},
    )
    assert samples[0].language == "he"
    assert samples[0].title_id == "tg" and samples[0].date == "1990-01-01"


# -- datacard --------------------------------------------------------------

def fixture_samples():
    arts = [article(f"a{i}", body="word " * 40, pages=(i + 2,)) for i in range(4)]
    teasers = [
        teaser("t1", "short single sample."),
        teaser("t2", "multi sample covering two stories with several words."),
    ]
    decisions = [match("t1", "a0"), match("t2", "a1"), match("t2", "a2"), match("t2", "a3")]
    samples, _ = assemble(teasers, arts, decisions)
    return samples


def test_datacard_counts_and_cluster_size():
    card = build_datacard(fixture_samples())
    assert card.size == 2
    assert card.single_doc_count == 1 and card.multi_doc_count == 1
    assert card.avg_cluster_size == 3.0
    assert card.multi_doc_fraction == 0.5


def test_datacard_counts_sum_to_size():
    card = build_datacard(fixture_samples())
    assert sum(card.shape_counts.values()) == card.size
    assert sum(card.length_counts.values()) == card.size


def test_datacard_matches_brute_force_aggregation():
    from frontpage.textmetrics import sample_statistics, tokenize

    samples = fixture_samples()
    card = build_datacard(samples)
    compressions = [
        sample_statistics(s.summary, s.documents).compression for s in samples
    ]
    assert card.compression == pytest.approx(sum(compressions) / len(compressions))
    all_docs = [d for s in samples for d in s.documents]
    assert card.avg_document_words == pytest.approx(
        sum(len(tokenize(d)) for d in all_docs) / len(all_docs)
    )
    assert card.avg_summary_words == pytest.approx(
        sum(len(tokenize(s.summary)) for s in samples) / len(samples)
    )


def test_datacard_empty_errors():
    with pytest.raises(EmptyDatasetError):
        build_datacard([])


def test_multi_doc_flag_consistent_with_documents():
    for sample in fixture_samples():
        assert sample.is_multi_doc == (len(sample.documents) >= 2)


# -- export ----------------------------------------------------------------

def test_export_round_trip(tmp_path):
    samples = fixture_samples()
    export(samples, tmp_path)
    assert read_samples(tmp_path / "samples.jsonl") == sorted(samples, key=lambda s: s.id)
    assert import_samples([tmp_path / "samples.jsonl"]) == sorted(
        samples, key=lambda s: s.id
    )


def test_manifest_contains_no_text(tmp_path):
    export(fixture_samples(), tmp_path, manifest_only=True)
    assert not (tmp_path / "samples.jsonl").exists()
    for line in (tmp_path / "manifest.jsonl").read_text().splitlines():
        doc = json.loads(line)
        assert "summary" not in doc and "documents" not in doc
        assert doc["document_ids"]


def test_export_idempotent_byte_identical(tmp_path):
    samples = fixture_samples()
    export(samples, tmp_path / "one")
    export(list(reversed(samples)), tmp_path / "two")
    for name in ("manifest.jsonl", "samples.jsonl"):
        assert (tmp_path / "one" / name).read_bytes() == (
            tmp_path / "two" / name
        ).read_bytes()


def test_export_with_ocr_client_writes_corrections(tmp_path):
    from frontpage import llm

    samples = fixture_samples()
    cache = llm.ReplayCache(tmp_path / "cache.jsonl")
    for text in {s.summary for s in samples} | {d for s in samples for d in s.documents}:
        prompt = llm.render_prompt(llm.Task.OCR_FIX, {"text": text})
        cache.put(llm.request_key(prompt, 0.0, 1024), prompt, {}, text.upper())
    client = llm.ChatClient(endpoint=None, cache=cache)
    export(samples, tmp_path / "out", ocr_client=client)
    rows = [
        json.loads(line)
        for line in (tmp_path / "out" / "samples.corrected.jsonl").read_text().splitlines()
    ]
    assert all(row["summary"].isupper() for row in rows)


def test_length_band_serialization_round_trips():
    sample = fixture_samples()[0]
    assert sample.length_category in set(LengthBand)
    from frontpage.dataset import sample_from_dict

    assert sample_from_dict(sample.as_dict()) == sample
