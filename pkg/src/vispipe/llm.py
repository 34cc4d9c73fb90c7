"""Chat-completion client: one OpenAI-compatible wire protocol, two modes.

``live`` mode posts to a provider endpoint; ``fixture`` mode replays recorded
responses keyed by a digest of the request, which keeps every test and
benchmark deterministic and offline. Retry policy belongs to callers; this
client never retries on its own.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import (
    LlmProtocolError,
    LlmTransportError,
    MissingCredentialError,
    StorageError,
)

ROLES = ("system", "user", "assistant")

Message = tuple[str, str]


@dataclass(frozen=True)
class ChatRequest:
    """One chat-completion call."""

    model: str
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_output: int = 4096
    timeout: float = 60.0

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be nonempty")
        for role, _ in self.messages:
            if role not in ROLES:
                raise ValueError(f"unknown message role {role!r}")
        if self.messages[0][0] not in ("system", "user"):
            raise ValueError("first message role must be system or user")

    def digest(self) -> str:
        """Stable identity of the request; ignores timeout and wall clock."""
        payload = {
            "model": self.model,
            "messages": [[role, content] for role, content in self.messages],
            "temperature": self.temperature,
            "max_output": self.max_output,
        }
        canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class ChatResponse:
    content: str
    model: str = ""
    usage: dict = field(default_factory=dict)
    latency: float = 0.0


@dataclass
class BackendConfig:
    """Provider configuration, loadable from a JSON file."""

    name: str = "default"
    endpoint_url: str = ""
    model: str = "fixture-model"
    api_key_env: str = ""
    temperature: float = 0.0
    max_output: int = 4096
    timeout_ms: int = 60_000
    mode: str = "fixture"
    fixture_dir: str = "fixtures/llm"
    max_in_flight: int = 4

    @classmethod
    def from_file(cls, path: str | Path) -> "BackendConfig":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        cfg = cls(**known)
        if cfg.fixture_dir and not Path(cfg.fixture_dir).is_absolute():
            cfg.fixture_dir = str((path.parent / cfg.fixture_dir).resolve())
        return cfg


def _fixture_path(fixture_dir: str | Path, digest: str) -> Path:
    return Path(fixture_dir) / f"{digest}.json"


def record_fixture(request: ChatRequest, response: ChatResponse, fixture_dir: str | Path) -> str:
    """Persist a request/response pair; returns the fixture id (the digest).

    Idempotent: re-recording an identical pair rewrites the same file.
    """
    digest = request.digest()
    record = {
        "digest": digest,
        "model": request.model,
        "temperature": request.temperature,
        "max_output": request.max_output,
        "messages": [[role, content] for role, content in request.messages],
        "content": response.content,
    }
    try:
        path = _fixture_path(fixture_dir, digest)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(record, indent=2, ensure_ascii=False), encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot write fixture {digest}: {exc}") from exc
    return digest


def _complete_fixture(request: ChatRequest, fixture_dir: str | Path) -> ChatResponse:
    digest = request.digest()
    path = _fixture_path(fixture_dir, digest)
    if not path.is_file():
        raise LlmProtocolError(
            f"no recorded fixture for request digest {digest} under {fixture_dir}"
        )
    record = json.loads(path.read_text(encoding="utf-8"))
    return ChatResponse(content=record["content"], model=request.model, usage={}, latency=0.0)


def _complete_live(request: ChatRequest, backend: BackendConfig) -> ChatResponse:
    headers = {"Content-Type": "application/json"}
    if backend.api_key_env:
        key = os.environ.get(backend.api_key_env)
        if not key:
            raise MissingCredentialError(
                f"backend '{backend.name}' requires env var {backend.api_key_env}"
            )
        headers["Authorization"] = f"Bearer {key}"
    payload = {
        "model": request.model,
        "messages": [{"role": role, "content": content} for role, content in request.messages],
        "temperature": request.temperature,
        "max_tokens": request.max_output,
    }
    start = time.perf_counter()
    try:
        resp = httpx.post(backend.endpoint_url, json=payload, headers=headers, timeout=request.timeout)
    except httpx.HTTPError as exc:
        raise LlmTransportError(f"request to {backend.endpoint_url} failed: {exc}") from exc
    elapsed = time.perf_counter() - start
    if resp.status_code >= 400:
        raise LlmTransportError(
            f"provider returned HTTP {resp.status_code}: {resp.text[:500]}",
            status=resp.status_code,
        )
    try:
        data = resp.json()
        content = data["choices"][0]["message"]["content"]
    except (ValueError, LookupError, TypeError) as exc:
        raise LlmProtocolError(f"unparseable provider payload: {exc}") from exc
    if content is None:
        raise LlmProtocolError("provider returned null content")
    return ChatResponse(
        content=str(content),
        model=str(data.get("model", request.model)),
        usage=dict(data.get("usage") or {}),
        latency=elapsed,
    )


def complete(request: ChatRequest, backend: BackendConfig) -> ChatResponse:
    """Execute one chat completion against ``backend``."""
    if backend.mode == "fixture":
        return _complete_fixture(request, backend.fixture_dir)
    if backend.mode == "live":
        return _complete_live(request, backend)
    raise LlmProtocolError(f"unknown backend mode {backend.mode!r}")


class LlmClient:
    """Shareable client bound to one backend.

    A semaphore bounds in-flight requests so concurrent sessions cannot
    stampede a provider.
    """

    def __init__(self, backend: BackendConfig):
        self.backend = backend
        self._semaphore = threading.Semaphore(max(1, backend.max_in_flight))

    @classmethod
    def from_file(cls, path: str | Path) -> "LlmClient":
        return cls(BackendConfig.from_file(path))

    def build_request(self, messages: list[Message]) -> ChatRequest:
        return ChatRequest(
            model=self.backend.model,
            messages=tuple(messages),
            temperature=self.backend.temperature,
            max_output=self.backend.max_output,
            timeout=self.backend.timeout_ms / 1000.0,
        )

    def complete(self, messages: list[Message]) -> ChatResponse:
        request = self.build_request(messages)
        with self._semaphore:
            return complete(request, self.backend)

    @property
    def model(self) -> str:
        return self.backend.model
