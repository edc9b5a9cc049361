import json
from pathlib import Path

import pytest

from frontpage.detect import detect_teasers, load_profile
from frontpage.model import group_articles, ingest_issue

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
CORPUS_DIR = FIXTURES / "corpus"
PROFILE_PATH = FIXTURES / "profile.json"
DETECTION_GOLD = FIXTURES / "gold" / "detection.jsonl"
MATCHING_GOLD = FIXTURES / "gold" / "matching.jsonl"
PLANTED = FIXTURES / "gold" / "planted.json"
LLM_CACHE = FIXTURES / "llm_cache.jsonl"


def read_jsonl(path):
    return [
        json.loads(line)
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


@pytest.fixture(scope="session")
def fixture_profile():
    return load_profile(PROFILE_PATH)


@pytest.fixture(scope="session")
def fixture_issues():
    return [ingest_issue(p) for p in sorted(CORPUS_DIR.glob("*.json"))]


@pytest.fixture(scope="session")
def fixture_teasers(fixture_issues, fixture_profile):
    return [t for issue in fixture_issues for t in detect_teasers(issue, fixture_profile)]


@pytest.fixture(scope="session")
def fixture_articles(fixture_issues):
    return [a for issue in fixture_issues for a in group_articles(issue)]


@pytest.fixture(scope="session")
def matching_gold():
    return {
        (row["teaser_id"], row["article_id"]): bool(row["label"])
        for row in read_jsonl(MATCHING_GOLD)
    }


@pytest.fixture(scope="session")
def detection_gold_rows():
    return read_jsonl(DETECTION_GOLD)


@pytest.fixture(scope="session")
def planted():
    return json.loads(PLANTED.read_text(encoding="utf-8"))
