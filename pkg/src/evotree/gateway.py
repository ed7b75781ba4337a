"""Chat-completion access: a real HTTP backend and a deterministic replay one.

Every generation request is a single user message.  Replay scripts are plain
text files, one response per line, with backslash escapes for embedded
newlines, so deterministic end-to-end runs can be committed as fixtures.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import requests

ENV_BASE_URL = "EVOTREE_BASE_URL"
ENV_API_KEY = "EVOTREE_API_KEY"
ENV_MODEL = "EVOTREE_MODEL"

DEFAULT_TEMPERATURE = 1.0


class GatewayError(Exception):
    """Base class for backend failures."""


class TransportError(GatewayError):
    """Connection problems, HTTP error statuses, malformed bodies."""

    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status

    @property
    def retryable(self) -> bool:
        if self.status is None:  # connection-level failure
            return True
        return self.status == 429 or self.status >= 500


class ReplayExhausted(GatewayError):
    """The replay script ran out of responses; the run cannot continue."""


class AllAttemptsFailed(GatewayError):
    def __init__(self, attempts: int, last: Exception) -> None:
        super().__init__(f"gave up after {attempts} attempts: {last}")
        self.attempts = attempts
        self.last = last


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    temperature: float = DEFAULT_TEMPERATURE


@dataclass(frozen=True)
class ChatResponse:
    text: str
    latency_ms: float = 0.0
    prompt_tokens: int | None = None
    completion_tokens: int | None = None


class HttpBackend:
    """OpenAI-style chat completion endpoint."""

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        timeout_s: float = 120.0,
    ) -> None:
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.timeout_s = timeout_s
        if not self.base_url or not self.model:
            raise ValueError(f"HTTP backend needs {ENV_BASE_URL} and {ENV_MODEL}")

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        started = time.monotonic()
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions", json=payload, headers=headers, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        latency = (time.monotonic() - started) * 1000.0
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}", status=resp.status_code)
        try:
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion body: {exc}", status=resp.status_code) from exc
        usage = body.get("usage") or {}
        return ChatResponse(
            text=text,
            latency_ms=latency,
            prompt_tokens=usage.get("prompt_tokens"),
            completion_tokens=usage.get("completion_tokens"),
        )


def encode_replay_line(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n")


def decode_replay_line(line: str) -> str:
    out = []
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == "\\" and i + 1 < len(line):
            nxt = line[i + 1]
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def save_replay_script(path: str, responses: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for text in responses:
            fh.write(encode_replay_line(text) + "\n")


def load_replay_script(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        data = fh.read()
    if data.endswith("\n"):
        data = data[:-1]
    if not data:
        return []
    return [decode_replay_line(line) for line in data.split("\n")]


@dataclass
class ReplayBackend:
    """Plays back a fixed response list; exhaustion is a hard error."""

    responses: list[str]
    cursor: int = 0
    requests_seen: list[str] = field(default_factory=list)

    @classmethod
    def from_file(cls, path: str) -> ReplayBackend:
        return cls(responses=load_replay_script(path))

    def complete(self, request: ChatRequest) -> ChatResponse:
        if self.cursor >= len(self.responses):
            raise ReplayExhausted(
                f"replay script exhausted after {len(self.responses)} responses"
            )
        self.requests_seen.append(request.prompt)
        text = self.responses[self.cursor]
        self.cursor += 1
        return ChatResponse(text=text)


def with_retry(backend, request: ChatRequest, max_attempts: int = 3, base_delay_s: float = 1.0, _sleep=time.sleep) -> ChatResponse:
    """Retry transport and rate-limit failures with exponential backoff.

    Content-level problems (an unparseable response) are not retried here;
    they count against the evaluation budget instead.
    """
    last: Exception | None = None
    for attempt in range(max_attempts):
        try:
            return backend.complete(request)
        except TransportError as exc:
            if not exc.retryable:
                raise
            last = exc
            if attempt + 1 < max_attempts:
                _sleep(base_delay_s * (2**attempt))
    raise AllAttemptsFailed(max_attempts, last)
