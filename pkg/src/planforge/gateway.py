"""Pluggable chat-completion gateway.

Providers are registered per model id and stream their output in chunks; the
gateway concatenates successful chunks, records per-chunk failures, and keeps
going, so one bad chunk never kills a call. The bundled mock provider is fully
deterministic (seeded hash prefix + scripted fixtures) and is what every test
in this repository runs against.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Protocol

from .errors import ProviderUnavailable, UnknownModel
from .hashing import fnv1a_64, hex64

ROLES = ("system", "user", "assistant")

# Separator for the canonical request serialization; chosen so role/content
# text cannot collide with the message boundary.
_RECORD_SEP = "\x1e"

DEFAULT_CALL_TIMEOUT = 60.0


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role '{self.role}'")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")


def system(content: str) -> ChatMessage:
    return ChatMessage("system", content)


def user(content: str) -> ChatMessage:
    return ChatMessage("user", content)


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    seed: int
    stream: bool = False
    model_id: str = "mock"
    max_output: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("request must carry at least one message")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        if self.max_output < 1:
            raise ValueError("max_output must be positive")

    def canonical_serialization(self) -> str:
        parts = [f"{m.role}\n{m.content}" for m in self.messages]
        parts.append(str(self.seed))
        return _RECORD_SEP.join(parts)


@dataclass
class CompletionResult:
    text: str
    chunks: int
    errors_logged: list[str]
    provider: str


@dataclass(frozen=True)
class StreamChunk:
    """One provider event: either a piece of content or a recorded failure."""

    content: str | None = None
    error: str | None = None


class CompletionProvider(Protocol):
    name: str

    def iter_chunks(self, request: CompletionRequest) -> Iterator[StreamChunk]: ...


@dataclass
class Fixture:
    match: str
    response: str


class MockProvider:
    """Deterministic offline provider.

    Output is ``MOCK[<hex64 of FNV-1a over the canonical request>] `` followed
    by the first scripted fixture whose substring matches the last user
    message, or that message verbatim when nothing matches. Fixtures are
    evaluated in registration order.
    """

    name = "mock"

    def __init__(self, fixtures: list[Fixture] | None = None, chunk_size: int = 32):
        self.fixtures: list[Fixture] = list(fixtures or [])
        self.chunk_size = chunk_size

    def add_fixture(self, match: str, response: str) -> None:
        self.fixtures.append(Fixture(match, response))

    @classmethod
    def from_fixture_file(cls, path: str | Path) -> "MockProvider":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, list):
            raise ValueError("fixture file must hold a JSON array")
        fixtures = [Fixture(item["match"], item["response"]) for item in raw]
        return cls(fixtures)

    def _response_body(self, request: CompletionRequest) -> str:
        last_user = ""
        for message in reversed(request.messages):
            if message.role == "user":
                last_user = message.content
                break
        for fixture in self.fixtures:
            if fixture.match in last_user:
                return fixture.response
        return last_user

    def render(self, request: CompletionRequest) -> str:
        digest = hex64(fnv1a_64(request.canonical_serialization()))
        return f"MOCK[{digest}] {self._response_body(request)}"

    def iter_chunks(self, request: CompletionRequest) -> Iterator[StreamChunk]:
        text = self.render(request)
        if not request.stream:
            yield StreamChunk(content=text)
            return
        for start in range(0, len(text), self.chunk_size):
            yield StreamChunk(content=text[start : start + self.chunk_size])


class HttpChatProvider:
    """Minimal adapter for an OpenAI-style JSON chat-completion endpoint.

    Network failures surface as a single error chunk so the gateway's
    bookkeeping stays uniform. Not exercised by the offline test suite.
    """

    def __init__(
        self,
        name: str,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 30.0,
    ):
        self.name = name
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout

    def iter_chunks(self, request: CompletionRequest) -> Iterator[StreamChunk]:
        import urllib.request

        payload = json.dumps(
            {
                "model": self.model,
                "messages": [{"role": m.role, "content": m.content} for m in request.messages],
                "seed": request.seed,
                "max_tokens": request.max_output,
                "stream": False,
            }
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=payload, headers=headers)
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode("utf-8"))
            yield StreamChunk(content=body["choices"][0]["message"]["content"])
        except Exception as exc:  # noqa: BLE001 - any transport fault becomes a logged error
            yield StreamChunk(error=f"{self.name}: {exc}")


class Gateway:
    """Routes completion requests to registered providers by model id."""

    def __init__(self, call_timeout: float = DEFAULT_CALL_TIMEOUT):
        self._providers: dict[str, CompletionProvider] = {}
        self._lock = threading.Lock()
        self.call_timeout = call_timeout

    def register_provider(self, model_id: str, provider: CompletionProvider) -> None:
        if not model_id:
            raise ValueError("model_id must be non-empty")
        with self._lock:
            self._providers[model_id] = provider

    def provider_for(self, model_id: str) -> CompletionProvider:
        provider = self._providers.get(model_id)
        if provider is None:
            raise UnknownModel(model_id)
        return provider

    def complete(
        self,
        request: CompletionRequest,
        sink: Callable[[str], None] | None = None,
    ) -> CompletionResult:
        """Run one completion; failed chunks are logged and skipped, not fatal."""
        provider = self.provider_for(request.model_id)
        deadline = time.monotonic() + self.call_timeout
        parts: list[str] = []
        errors: list[str] = []
        chunks = 0
        for chunk in provider.iter_chunks(request):
            if time.monotonic() > deadline:
                errors.append("call deadline exceeded; remaining chunks dropped")
                break
            if chunk.error is not None:
                errors.append(chunk.error)
                continue
            chunks += 1
            parts.append(chunk.content or "")
            if request.stream and sink is not None:
                sink(chunk.content or "")
        text = "".join(parts)
        if not text:
            raise ProviderUnavailable(
                "; ".join(errors) if errors else f"provider '{provider.name}' produced no output"
            )
        return CompletionResult(text=text, chunks=chunks, errors_logged=errors, provider=provider.name)

    def stream_text(self, request: CompletionRequest) -> Iterator[str]:
        """Yield successful chunk texts as they arrive (for chunked HTTP responses)."""
        provider = self.provider_for(request.model_id)
        deadline = time.monotonic() + self.call_timeout
        for chunk in provider.iter_chunks(request):
            if time.monotonic() > deadline:
                return
            if chunk.error is None and chunk.content:
                yield chunk.content
