"""Text-completion providers for the generation loop.

Three interchangeable backends: a remote HTTP client, a recording wrapper
that captures every exchange to a fixture file, and a replay provider
that answers from such a fixture. Replay is keyed by the SHA-256 of the
exact rendered prompt, so a replayed run is deterministic and fails loudly
if any prompt drifts from what was recorded.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import urllib.request
from collections import deque
from dataclasses import dataclass
from typing import Optional, Protocol

__all__ = [
    "GenParams",
    "ProviderFailure",
    "TextProvider",
    "RemoteProvider",
    "RecordingProvider",
    "ReplayProvider",
    "prompt_hash",
    "API_KEY_ENV",
]

API_KEY_ENV = "PROPGPT_LLM_KEY"


class ProviderFailure(Exception):
    """A provider could not produce a completion."""


@dataclass(frozen=True)
class GenParams:
    """Sampling parameters sent with every completion request."""

    temperature: float = 0.8
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    max_tokens: int = 2000


class TextProvider(Protocol):
    concurrency: int

    def complete(self, prompt: str) -> str: ...


def prompt_hash(prompt: str) -> str:
    """Fixture key: SHA-256 hex digest of the exact rendered prompt."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class RemoteProvider:
    """Chat-completion HTTP client (OpenAI-style request/response shape)."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        key: Optional[str] = None,
        params: GenParams = GenParams(),
        timeout: float = 120.0,
        concurrency: int = 1,
    ):
        self.endpoint = endpoint
        self.model = model
        self.key = key if key is not None else os.environ.get(API_KEY_ENV, "")
        self.params = params
        self.timeout = timeout
        self.concurrency = max(1, concurrency)

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.params.temperature,
            "top_p": self.params.top_p,
            "frequency_penalty": self.params.frequency_penalty,
            "presence_penalty": self.params.presence_penalty,
            "max_tokens": self.params.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.key:
            headers["Authorization"] = f"Bearer {self.key}"
        req = urllib.request.Request(
            self.endpoint, data=json.dumps(payload).encode("utf-8"), headers=headers
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise ProviderFailure(f"completion request failed: {exc}") from exc
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderFailure("completion response has no message content") from exc
        if not isinstance(text, str):
            raise ProviderFailure("completion content is not text")
        return text


class RecordingProvider:
    """Delegates to an inner provider and appends each exchange to a
    JSONL fixture as {"prompt_hash": ..., "response": ...}."""

    def __init__(self, inner: TextProvider, path: str):
        self.inner = inner
        self.path = path
        self.concurrency = getattr(inner, "concurrency", 1)
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        response = self.inner.complete(prompt)
        record = json.dumps({"prompt_hash": prompt_hash(prompt), "response": response})
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(record + "\n")
        return response


class ReplayProvider:
    """Answers completions from a recorded fixture, in recorded order.

    Repeated identical prompts consume successive recorded responses. A
    prompt with no remaining recorded response is a failure: it means the
    run no longer matches the recording.
    """

    def __init__(self, path: str):
        self.path = path
        self.concurrency = 1
        self._responses: dict[str, deque[str]] = {}
        self._lock = threading.Lock()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ProviderFailure(f"{path}:{lineno}: not valid JSON: {exc}") from exc
                h, r = obj.get("prompt_hash"), obj.get("response")
                if not isinstance(h, str) or not isinstance(r, str):
                    raise ProviderFailure(f"{path}:{lineno}: record needs prompt_hash and response")
                self._responses.setdefault(h, deque()).append(r)

    def complete(self, prompt: str) -> str:
        h = prompt_hash(prompt)
        with self._lock:
            queue = self._responses.get(h)
            if not queue:
                raise ProviderFailure(
                    f"no recorded response for prompt hash {h[:12]}... in {self.path}"
                )
            return queue.popleft()
