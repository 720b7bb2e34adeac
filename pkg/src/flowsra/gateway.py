"""Provider-neutral chat-completion client.

Requests are content-addressed: the cache key hashes the full request, so a
warm cache replays a run byte-identically with zero network traffic. The
wire shape is the de-facto open chat-completions JSON contract; a scriptable
mock transport stands in for the network during tests and offline runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import requests


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 256
    seed: int | None = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def rendered(self) -> str:
        """The prompt as one string, used for matching and fingerprints."""
        return "\n\n".join(f"[{m.role}]\n{m.content}" for m in self.messages)


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass(frozen=True)
class ChatResponse:
    content: str
    usage: Usage = Usage()
    cached: bool = False


def cache_key(req: ChatRequest) -> str:
    """Stable hash of the request; independent of wall clock, host, and
    process (usable across restarts)."""
    payload = json.dumps(
        {
            "model": req.model,
            "messages": [[m.role, m.content] for m in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
            "seed": req.seed,
        },
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class TransportError(RuntimeError):
    """Transient failures exhausted, or no way to serve the request offline."""


class TransientError(RuntimeError):
    """Retryable provider failure (connection trouble, 5xx, 429)."""


class PermanentError(RuntimeError):
    """Non-retryable provider rejection (other 4xx)."""


class ProtocolError(RuntimeError):
    """Provider payload does not follow the chat-completions shape."""


class ScriptedMissError(RuntimeError):
    """A mock transport received a request its script does not cover."""


def parse_provider_payload(payload: dict, cached: bool = False) -> ChatResponse:
    try:
        content = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"malformed provider payload: {exc!r}") from exc
    if not isinstance(content, str):
        raise ProtocolError("provider payload content is not text")
    usage_raw = payload.get("usage") or {}
    usage = Usage(
        prompt_tokens=int(usage_raw.get("prompt_tokens", 0) or 0),
        completion_tokens=int(usage_raw.get("completion_tokens", 0) or 0),
    )
    return ChatResponse(content=content, usage=usage, cached=cached)


class HttpTransport:
    """POSTs to an OpenAI-style chat-completions endpoint."""

    is_network = True

    def __init__(self, endpoint: str, api_key: str | None = None, timeout: float = 120.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def __call__(self, req: ChatRequest) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body: dict = {
            "model": req.model,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.seed is not None:
            body["seed"] = req.seed
        try:
            resp = requests.post(self.endpoint, json=body, headers=headers,
                                 timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransientError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientError(f"HTTP {resp.status_code} from provider")
        if resp.status_code >= 400:
            raise PermanentError(f"HTTP {resp.status_code}: {resp.text[:500]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError("provider response is not JSON") from exc


@dataclass(frozen=True)
class MockRule:
    """One script entry: how to match a request and what to answer.

    ``match`` is ``contains`` (substring of the rendered prompt), ``exact``
    (whole rendered prompt), or ``hash`` (sha256 hex of the rendered prompt).
    """

    match: str
    pattern: str
    response: str

    def applies(self, rendered: str) -> bool:
        if self.match == "contains":
            return self.pattern in rendered
        if self.match == "exact":
            return self.pattern == rendered
        if self.match == "hash":
            return hashlib.sha256(rendered.encode("utf-8")).hexdigest() == self.pattern
        raise ValueError(f"unknown mock matcher {self.match!r}")


class MockTransport:
    """Scripted backend: first matching rule wins, unmatched requests fail
    loudly so tests cannot drift silently."""

    is_network = False

    def __init__(self, rules: Sequence[MockRule]):
        self.rules = list(rules)
        self.calls: list[ChatRequest] = []
        self._lock = threading.Lock()

    def __call__(self, req: ChatRequest) -> dict:
        with self._lock:
            self.calls.append(req)
        rendered = req.rendered()
        for rule in self.rules:
            if rule.applies(rendered):
                return {
                    "choices": [{"message": {"role": "assistant", "content": rule.response}}],
                    "usage": {
                        "prompt_tokens": len(rendered.split()),
                        "completion_tokens": len(rule.response.split()),
                    },
                }
        raise ScriptedMissError(
            f"no scripted response matches request (prompt starts: {rendered[:120]!r})")


def mock_backend(script: Sequence[tuple[str, str] | MockRule]) -> MockTransport:
    """Build a mock transport from (substring, response) pairs or MockRules."""
    rules = [
        entry if isinstance(entry, MockRule) else MockRule("contains", entry[0], entry[1])
        for entry in script
    ]
    return MockTransport(rules)


def load_mock_script(path: str | Path) -> MockTransport:
    """Read a JSON script file: a list of {match, pattern, response} objects."""
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    rules = [MockRule(e.get("match", "contains"), e["pattern"], e["response"])
             for e in entries]
    return MockTransport(rules)


class ChatGateway:
    """Caching, retrying, concurrency-bounded front of any chat transport."""

    def __init__(
        self,
        transport: Callable[[ChatRequest], dict] | None = None,
        *,
        cache_dir: str | Path | None = None,
        offline: bool = False,
        parallelism: int = 8,
        retries: int = 3,
        backoff: float = 0.25,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.transport = transport
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.offline = offline
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        self._semaphore = threading.BoundedSemaphore(max(1, parallelism))

    # -- cache ----------------------------------------------------------

    def _cache_path(self, key: str) -> Path | None:
        return self.cache_dir / f"{key}.json" if self.cache_dir else None

    def _cache_read(self, key: str) -> dict | None:
        path = self._cache_path(key)
        if path is None or not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def _cache_write(self, key: str, payload: dict) -> None:
        path = self._cache_path(key)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, ensure_ascii=False, sort_keys=True)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    # -- completion -----------------------------------------------------

    def complete(self, req: ChatRequest) -> ChatResponse:
        """Serve from cache, otherwise call the transport with retries."""
        key = cache_key(req)
        cached = self._cache_read(key)
        if cached is not None:
            return parse_provider_payload(cached, cached=True)
        if self.transport is None:
            raise TransportError(
                "request not in cache and no transport is configured"
                + (" (offline mode)" if self.offline else ""))
        if self.offline and getattr(self.transport, "is_network", False):
            raise TransportError("offline mode forbids network transports")
        attempt = 0
        while True:
            try:
                with self._semaphore:
                    payload = self.transport(req)
                break
            except TransientError as exc:
                attempt += 1
                if attempt >= self.retries:
                    raise TransportError(
                        f"gave up after {attempt} attempts: {exc}") from exc
                self._sleep(self.backoff * (2 ** (attempt - 1)))
        response = parse_provider_payload(payload)
        self._cache_write(key, payload)
        return response


def completion_backend(gateway: ChatGateway, model: str, *,
                       max_tokens: int = 256,
                       system: str | None = None) -> Callable[[str], str]:
    """Adapter: a plain prompt->text callable over the gateway, as expected
    by the router/judge/recognizer response parsers."""

    def call(prompt: str) -> str:
        messages: list[ChatMessage] = []
        if system:
            messages.append(ChatMessage("system", system))
        messages.append(ChatMessage("user", prompt))
        return gateway.complete(
            ChatRequest(model=model, messages=tuple(messages),
                        max_tokens=max_tokens)).content

    return call
