"""Chat backends: replay scripts, retry policy, HTTP response handling."""

import pytest
from hypothesis import given, strategies as st

from evotree.gateway import (
    AllAttemptsFailed,
    ChatRequest,
    ChatResponse,
    HttpBackend,
    ReplayBackend,
    ReplayExhausted,
    TransportError,
    decode_replay_line,
    encode_replay_line,
    load_replay_script,
    save_replay_script,
    with_retry,
)

REQ = ChatRequest(prompt="hello")


class TestReplayEncoding:
    def test_newlines_escaped(self):
        assert encode_replay_line("a\nb") == "a\\nb"
        assert decode_replay_line("a\\nb") == "a\nb"

    def test_backslash_escaped(self):
        assert encode_replay_line("a\\nb") == "a\\\\nb"
        assert decode_replay_line("a\\\\nb") == "a\\nb"

    @given(st.text())
    def test_round_trip(self, text):
        assert decode_replay_line(encode_replay_line(text)) == text

    def test_script_file_round_trip(self, tmp_path):
        path = str(tmp_path / "script.replay")
        responses = ["{idea}\n```python\ncode\n```", "", "plain line", "back\\slash"]
        save_replay_script(path, responses)
        assert load_replay_script(path) == responses

    def test_empty_script(self, tmp_path):
        path = str(tmp_path / "empty.replay")
        save_replay_script(path, [])
        assert load_replay_script(path) == []


class TestReplayBackend:
    def test_plays_in_order_and_records_prompts(self):
        backend = ReplayBackend(responses=["one", "two"])
        assert backend.complete(ChatRequest(prompt="p1")).text == "one"
        assert backend.complete(ChatRequest(prompt="p2")).text == "two"
        assert backend.requests_seen == ["p1", "p2"]
        assert backend.cursor == 2

    def test_exhaustion(self):
        backend = ReplayBackend(responses=[])
        with pytest.raises(ReplayExhausted):
            backend.complete(REQ)

    def test_cursor_can_be_repositioned(self):
        backend = ReplayBackend(responses=["one", "two"])
        backend.complete(REQ)
        backend.cursor = 0
        assert backend.complete(REQ).text == "one"


class FlakyBackend:
    def __init__(self, failures, status=None):
        self.failures = failures
        self.status = status
        self.calls = 0

    def complete(self, request):
        self.calls += 1
        if self.calls <= self.failures:
            raise TransportError("boom", status=self.status)
        return ChatResponse(text="ok")


class TestRetry:
    def test_retries_transport_errors(self):
        backend = FlakyBackend(failures=2)
        sleeps = []
        out = with_retry(backend, REQ, max_attempts=3, base_delay_s=1.0, _sleep=sleeps.append)
        assert out.text == "ok"
        assert backend.calls == 3
        assert sleeps == [1.0, 2.0]  # exponential backoff

    def test_gives_up_after_max_attempts(self):
        backend = FlakyBackend(failures=10)
        with pytest.raises(AllAttemptsFailed) as err:
            with_retry(backend, REQ, max_attempts=3, _sleep=lambda s: None)
        assert err.value.attempts == 3

    def test_rate_limit_is_retryable(self):
        backend = FlakyBackend(failures=1, status=429)
        assert with_retry(backend, REQ, _sleep=lambda s: None).text == "ok"

    def test_client_error_is_not_retried(self):
        backend = FlakyBackend(failures=5, status=400)
        with pytest.raises(TransportError):
            with_retry(backend, REQ, _sleep=lambda s: None)
        assert backend.calls == 1

    def test_server_error_is_retryable(self):
        assert TransportError("x", status=503).retryable
        assert TransportError("x", status=None).retryable
        assert not TransportError("x", status=404).retryable


class FakeResponse:
    def __init__(self, status_code=200, body=None, text=""):
        self.status_code = status_code
        self._body = body
        self.text = text

    def json(self):
        if self._body is None:
            raise ValueError("not json")
        return self._body


class TestHttpBackend:
    def make(self, monkeypatch, response):
        monkeypatch.setenv("EVOTREE_BASE_URL", "http://example.test/v1")
        monkeypatch.setenv("EVOTREE_MODEL", "test-model")
        backend = HttpBackend()
        captured = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            captured.update(url=url, payload=json, headers=headers)
            return response

        monkeypatch.setattr("evotree.gateway.requests.post", fake_post)
        return backend, captured

    def test_happy_path(self, monkeypatch):
        body = {"choices": [{"message": {"content": "reply"}}], "usage": {"prompt_tokens": 3, "completion_tokens": 5}}
        backend, captured = self.make(monkeypatch, FakeResponse(body=body))
        out = backend.complete(ChatRequest(prompt="hi", temperature=1.0))
        assert out.text == "reply"
        assert out.prompt_tokens == 3
        assert captured["url"] == "http://example.test/v1/chat/completions"
        assert captured["payload"]["messages"] == [{"role": "user", "content": "hi"}]
        assert captured["payload"]["temperature"] == 1.0

    def test_http_error_maps_to_transport_error(self, monkeypatch):
        backend, _ = self.make(monkeypatch, FakeResponse(status_code=500, body={}, text="oops"))
        with pytest.raises(TransportError) as err:
            backend.complete(REQ)
        assert err.value.status == 500
        assert err.value.retryable

    def test_malformed_body(self, monkeypatch):
        backend, _ = self.make(monkeypatch, FakeResponse(body={"nope": True}))
        with pytest.raises(TransportError):
            backend.complete(REQ)

    def test_requires_configuration(self, monkeypatch):
        monkeypatch.delenv("EVOTREE_BASE_URL", raising=False)
        monkeypatch.delenv("EVOTREE_MODEL", raising=False)
        with pytest.raises(ValueError):
            HttpBackend()
