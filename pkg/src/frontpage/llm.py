"""Chat-completion client with prompt templates and a replay cache.

All network activity in the toolkit goes through this module. The cache
is a content-addressed append-only JSONL file so every consumer runs
deterministically offline once warmed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import string
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    EndpointUnavailableError,
    MissingSlotError,
    RateLimitedError,
    UnparseableScoreError,
)

log = logging.getLogger(__name__)

ENV_ENDPOINT = "FRONTPAGE_LLM_ENDPOINT"
ENV_API_KEY = "FRONTPAGE_LLM_API_KEY"
ENV_MODEL = "FRONTPAGE_LLM_MODEL"


class Task(Enum):
    MATCH = "match"
    SUMMARIZE = "summarize"
    JUDGE_COHERENCE = "judge_coherence"
    JUDGE_CONSISTENCY = "judge_consistency"
    JUDGE_COVERAGE = "judge_coverage"
    OCR_FIX = "ocr_fix"


@dataclass(frozen=True)
class PromptTemplate:
    task: Task
    template: str

    def slots(self) -> set[str]:
        return {
            field
            for _, field, _, _ in string.Formatter().parse(self.template)
            if field
        }

    def render(self, values: Mapping[str, str]) -> str:
        missing = self.slots() - set(values)
        if missing:
            raise MissingSlotError(
                f"{self.task.value}: missing slots {sorted(missing)}"
            )
        return self.template.format(**values)


def load_template(task: Task, path: str | Path | None = None) -> PromptTemplate:
    """Built-in template for a task, or an editable override from ``path``."""
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (
            resources.files("frontpage")
            .joinpath(f"prompts/{task.value}.txt")
            .read_text(encoding="utf-8")
        )
    return PromptTemplate(task=task, template=text.rstrip("\n"))


def render_prompt(
    task: Task,
    slots: Mapping[str, str],
    few_shot: Sequence[Mapping[str, str]] | None = None,
    k: int = 3,
    template_path: str | Path | None = None,
) -> str:
    """Instantiate a task template; few-shot prepends up to k exemplars.

    Exemplar mappings must carry the template slots plus an ``output``
    field with the expected completion.
    """
    template = load_template(task, template_path)
    parts = []
    for exemplar in (few_shot or [])[:k]:
        body = {key: value for key, value in exemplar.items() if key != "output"}
        parts.append(template.render(body) + "\n" + exemplar.get("output", ""))
    parts.append(template.render(slots))
    return "\n\n".join(parts)


def request_key(prompt: str, temperature: float, max_tokens: int) -> str:
    payload = json.dumps(
        {"prompt": prompt, "temperature": temperature, "max_tokens": max_tokens},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ReplayCache:
    """Append-only JSONL of request/response pairs keyed by request hash.

    Concurrent readers are free; appends serialize through one lock.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    doc = json.loads(line)
                    self._entries[doc["key"]] = doc["response"]

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> str | None:
        return self._entries.get(key)

    def put(self, key: str, prompt: str, params: dict, response: str) -> None:
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = response
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps(
                        {"key": key, "prompt": prompt, "params": params, "response": response},
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )


class ChatClient:
    """Talks to a chat-completion endpoint (system + user message, text
    response); defaults come from environment variables."""

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        cache: ReplayCache | None = None,
        system_prompt: str = "You are a helpful assistant.",
        max_retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 60.0,
        pool_width: int = 4,
    ):
        self.endpoint = endpoint if endpoint is not None else os.environ.get(ENV_ENDPOINT)
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY)
        self.model = model if model is not None else os.environ.get(ENV_MODEL, "default")
        self.cache = cache
        self.system_prompt = system_prompt
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout
        self.pool_width = pool_width

    def complete(
        self, prompt: str, temperature: float = 0.0, max_tokens: int = 1024
    ) -> str:
        key = request_key(prompt, temperature, max_tokens)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        if not self.endpoint:
            raise EndpointUnavailableError(
                "no endpoint configured and no cached response for this prompt"
            )
        response = self._post(prompt, temperature, max_tokens)
        if self.cache is not None:
            self.cache.put(
                key,
                prompt,
                {"temperature": temperature, "max_tokens": max_tokens, "model": self.model},
                response,
            )
        return response

    def complete_many(
        self,
        prompts: Sequence[str],
        temperature: float = 0.0,
        max_tokens: int = 1024,
    ) -> list[str]:
        """Bounded-concurrency batch; results return in submission order."""
        with ThreadPoolExecutor(max_workers=self.pool_width) as pool:
            futures = [
                pool.submit(self.complete, p, temperature, max_tokens) for p in prompts
            ]
            return [f.result() for f in futures]

    def _post(self, prompt: str, temperature: float, max_tokens: int) -> str:
        import requests

        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": self.system_prompt},
                {"role": "user", "content": prompt},
            ],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        rate_limited = False
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = requests.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code == 429:
                rate_limited = True
                last_error = RateLimitedError("endpoint returned 429")
                continue
            if resp.status_code >= 500:
                last_error = EndpointUnavailableError(f"endpoint returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise EndpointUnavailableError(
                    f"endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise EndpointUnavailableError(f"unexpected response shape: {exc}") from exc
        if rate_limited:
            raise RateLimitedError(f"gave up after {self.max_retries} retries")
        raise EndpointUnavailableError(f"endpoint unreachable: {last_error}")


class HttpEmbeddingProvider:
    """Remote batch embedding endpoint: POST {"texts": [...]} returning
    {"vectors": [[...], ...]} with null for per-text failures."""

    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url
        self.timeout = timeout

    def embed(self, texts: Sequence[str]) -> list[list[float] | None]:
        import requests

        resp = requests.post(self.url, json={"texts": list(texts)}, timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()["vectors"]


@dataclass(frozen=True)
class JudgeScore:
    dimension: str  # coherence | consistency | coverage
    value: int
    raw_response: str


_SCORE_RE = re.compile(r"(?<![\d.])([1-5])(?!\d)")


def parse_judge(response: str) -> int:
    """First standalone integer 1-5 in the response; numeric only."""
    match = _SCORE_RE.search(response)
    if not match:
        raise UnparseableScoreError(f"no 1-5 score in {response!r}")
    return int(match.group(1))


def judge(
    client: ChatClient,
    dimension: str,
    *,
    source: str | None = None,
    reference: str | None = None,
    generated: str,
) -> JudgeScore:
    """Score a generated summary on one dimension via the judge prompts."""
    if dimension == "coverage":
        prompt = render_prompt(
            Task.JUDGE_COVERAGE, {"reference": reference or "", "generated": generated}
        )
    elif dimension == "coherence":
        prompt = render_prompt(
            Task.JUDGE_COHERENCE, {"text": source or "", "generated": generated}
        )
    elif dimension == "consistency":
        prompt = render_prompt(
            Task.JUDGE_CONSISTENCY, {"text": source or "", "generated": generated}
        )
    else:
        raise ValueError(f"unknown judge dimension {dimension!r}")
    raw = client.complete(prompt)
    return JudgeScore(dimension=dimension, value=parse_judge(raw), raw_response=raw)


def ocr_post_correct(
    client: ChatClient, text: str, max_length_deviation: float = 0.5
) -> str:
    """Prompt-based OCR cleanup with a hallucination guard.

    Returns the original text when the endpoint fails or the corrected
    output's length strays more than ``max_length_deviation`` from the
    input's.
    """
    prompt = render_prompt(Task.OCR_FIX, {"text": text})
    try:
        corrected = client.complete(prompt)
    except (EndpointUnavailableError, RateLimitedError) as exc:
        log.warning("OCR correction unavailable, keeping original text: %s", exc)
        return text
    if not text:
        return corrected
    deviation = abs(len(corrected) - len(text)) / len(text)
    if deviation > max_length_deviation:
        log.warning(
            "OCR correction length deviates %.0f%%, keeping original text",
            deviation * 100,
        )
        return text
    return corrected
