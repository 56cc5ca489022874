"""Pluggable model providers: vision-language, text-to-speech.

The pipeline only ever talks to these interfaces. HTTP-backed
implementations follow the wire contract (request {prompt, images},
response {text}); scripted/deterministic implementations exist so every
pipeline stage is testable and reproducible without a model.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import requests

from .errors import ProviderFailure

logger = logging.getLogger(__name__)

BACKOFF_ATTEMPTS = 3
BACKOFF_BASE = 0.5


class VlmProvider(Protocol):
    name: str

    def generate(self, prompt: str, images: Sequence[str] = ()) -> str:
        """Return the model's text reply for a prompt plus frame references."""
        ...


@dataclass(frozen=True)
class SynthesisResult:
    audio_uri: str
    duration: float


class TtsProvider(Protocol):
    name: str

    def synthesize(self, text: str, voice: str) -> SynthesisResult:
        """Produce an audio clip reference and its measured duration."""
        ...


def call_with_backoff(fn: Callable[[], str], attempts: int = BACKOFF_ATTEMPTS,
                      base_delay: float = BACKOFF_BASE,
                      sleep: Callable[[float], None] = time.sleep) -> str:
    """Run fn, retrying transport failures with exponential backoff."""
    last: Exception | None = None
    for attempt in range(attempts):
        try:
            return fn()
        except ProviderFailure as exc:
            last = exc
            if attempt + 1 < attempts:
                delay = base_delay * (2 ** attempt)
                logger.warning("provider call failed (%s), retrying in %.1fs", exc, delay)
                sleep(delay)
    raise ProviderFailure(f"provider failed after {attempts} attempts: {last}")


@dataclass
class ScriptedVlm:
    """Deterministic provider: replies consumed in order, then the default.

    Records every call so tests can assert on prompts and attached frames.
    """

    replies: list[str] = field(default_factory=list)
    default: str = "[]"
    name: str = "scripted-vlm"
    calls: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)
    _cursor: int = 0

    def generate(self, prompt: str, images: Sequence[str] = ()) -> str:
        self.calls.append((prompt, tuple(images)))
        if self._cursor < len(self.replies):
            reply = self.replies[self._cursor]
            self._cursor += 1
            return reply
        return self.default


@dataclass
class RuleVlm:
    """Deterministic provider that answers by prompt-substring rules.

    rules is an ordered list of (substring, reply); first match wins.
    """

    rules: list[tuple[str, str]] = field(default_factory=list)
    default: str = "[]"
    name: str = "rule-vlm"
    calls: list[tuple[str, tuple[str, ...]]] = field(default_factory=list)

    def generate(self, prompt: str, images: Sequence[str] = ()) -> str:
        self.calls.append((prompt, tuple(images)))
        for needle, reply in self.rules:
            if needle in prompt:
                return reply
        return self.default


def _words_per_second(wpm: float) -> float:
    return wpm / 60.0


@dataclass
class MockTts:
    """Deterministic synthesizer: duration equals the word-rate estimate,
    clip URI is a content hash."""

    words_per_minute: float = 150.0
    duration_scale: float = 1.0
    name: str = "mock-tts"
    calls: list[tuple[str, str]] = field(default_factory=list)

    def synthesize(self, text: str, voice: str) -> SynthesisResult:
        self.calls.append((text, voice))
        if not text.strip():
            raise ProviderFailure("cannot synthesize empty text")
        words = len(text.split())
        duration = self.duration_scale * words / _words_per_second(self.words_per_minute)
        digest = hashlib.sha1(f"{voice}|{text}".encode("utf-8")).hexdigest()[:12]
        return SynthesisResult(audio_uri=f"mock://tts/{digest}.wav", duration=duration)


@dataclass(frozen=True)
class ProviderConfig:
    """One provider entry from the config file: {name, endpoint, auth env var}."""

    name: str
    endpoint: str = ""
    auth_env: Optional[str] = None
    kind: str = "http"
    replies_path: Optional[str] = None
    default_reply: str = "[]"

    @classmethod
    def from_dict(cls, raw: dict) -> "ProviderConfig":
        return cls(
            name=raw.get("name", "provider"),
            endpoint=raw.get("endpoint", ""),
            auth_env=raw.get("auth_env"),
            kind=raw.get("kind", "http"),
            replies_path=raw.get("replies_path"),
            default_reply=raw.get("default_reply", "[]"),
        )


def _auth_headers(config: ProviderConfig) -> dict[str, str]:
    if not config.auth_env:
        return {}
    token = os.environ.get(config.auth_env)
    if token is None:
        raise ProviderFailure(f"auth env var {config.auth_env} is not set")
    return {"Authorization": f"Bearer {token}"}


@dataclass
class HttpVlm:
    """VLM over HTTP: POST {prompt, images} -> {text}."""

    config: ProviderConfig
    timeout: float = 120.0

    @property
    def name(self) -> str:
        return self.config.name

    def generate(self, prompt: str, images: Sequence[str] = ()) -> str:
        try:
            resp = requests.post(
                self.config.endpoint,
                json={"prompt": prompt, "images": list(images)},
                headers=_auth_headers(self.config),
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()["text"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise ProviderFailure(str(exc)) from exc


@dataclass
class HttpTts:
    """TTS over HTTP: POST {text, voice} -> {audio_uri, duration}."""

    config: ProviderConfig
    timeout: float = 120.0

    @property
    def name(self) -> str:
        return self.config.name

    def synthesize(self, text: str, voice: str) -> SynthesisResult:
        try:
            resp = requests.post(
                self.config.endpoint,
                json={"text": text, "voice": voice},
                headers=_auth_headers(self.config),
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
            return SynthesisResult(audio_uri=body["audio_uri"],
                                   duration=float(body["duration"]))
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise ProviderFailure(str(exc)) from exc


def build_vlm(config: ProviderConfig, base_dir=None) -> VlmProvider:
    if config.kind == "mock":
        replies: list[str] = []
        if config.replies_path:
            path = config.replies_path
            if base_dir is not None:
                path = os.path.join(base_dir, path)
            with open(path, encoding="utf-8") as fh:
                replies = json.load(fh)["replies"]
        return ScriptedVlm(replies=replies, default=config.default_reply,
                           name=config.name)
    return HttpVlm(config)


def build_tts(config: ProviderConfig, wpm: float = 150.0) -> TtsProvider:
    if config.kind == "mock":
        return MockTts(words_per_minute=wpm, name=config.name)
    return HttpTts(config)
