"""Model backends. Real models are reached over a chat-completions API or
replayed from a cassette; the oracle and the corruptor are synthetic."""
from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import httpx

from ..describe import SYSTEM_INSTRUCTION
from ..parsers import NotRepresentable, serialize
from .corrupt import corrupt

log = logging.getLogger(__name__)


class BackendKind(enum.Enum):
    HTTP_CHAT = "HTTP_CHAT"
    REPLAY = "REPLAY"
    ORACLE = "ORACLE"
    CORRUPTOR = "CORRUPTOR"


class ConfigError(ValueError):
    """Run configuration is unusable; raised before any request is made."""


class BackendError(RuntimeError):
    """The backend could not produce a response for one sample."""


@dataclass(frozen=True)
class RunConfig:
    backend: BackendKind = BackendKind.ORACLE
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.1
    max_tokens: int = 4096
    api_key_env: str = "STRUCTEVAL_API_KEY"
    cassette: Optional[str] = None
    corruption_rate: float = 0.0
    corruption_seed: int = 0
    concurrency: int = 4
    timeout: float = 120.0
    retries: int = 3
    backoff: float = 1.0  # seconds before the first retry, doubled each time
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.backend, BackendKind):
            object.__setattr__(self, "backend", BackendKind(str(self.backend).upper()))
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if not 0.0 <= self.corruption_rate <= 1.0:
            raise ConfigError("corruption_rate must lie in [0, 1]")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.retries < 0 or self.timeout <= 0 or self.max_tokens < 1:
            raise ConfigError("retries must be >= 0, timeout and max_tokens positive")

    @property
    def model_label(self) -> str:
        if self.label:
            return self.label
        if self.backend is BackendKind.CORRUPTOR:
            return f"corruptor-{self.corruption_rate:g}"
        if self.backend is BackendKind.ORACLE:
            return "oracle"
        return self.model or self.backend.value.lower()


@dataclass
class Reply:
    text: str
    latency_ms: float = 0.0
    meta: dict = field(default_factory=dict)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def split_prompt(prompt: str) -> list[dict]:
    """Chat messages for a rendered prompt: the format instruction goes in
    the system turn, the description in the user turn."""
    head, _, body = prompt.partition("\n")
    if head.startswith(SYSTEM_INSTRUCTION.split("{", 1)[0]):
        return [{"role": "system", "content": head}, {"role": "user", "content": body}]
    return [{"role": "user", "content": prompt}]


class OracleBackend:
    def __init__(self, config: RunConfig):
        self.config = config

    def generate(self, sample) -> Reply:
        return Reply(serialize(sample.format, sample.ir))


class CorruptorBackend:
    def __init__(self, config: RunConfig):
        self.config = config

    def generate(self, sample) -> Reply:
        # seed mixes the run seed with the sample seed, so samples differ
        seed = (self.config.corruption_seed, sample.seed)
        damaged = corrupt(sample.ir, self.config.corruption_rate, seed)
        try:
            return Reply(serialize(sample.format, damaged))
        except NotRepresentable as exc:
            # the damaged document has no faithful spelling in this format
            return Reply(serialize(sample.format, sample.ir), meta={"note": f"corruption dropped: {exc}"})


def load_cassette(path) -> dict[str, str]:
    entries = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    entries[rec["prompt_hash"]] = rec["response"]
                except (ValueError, KeyError, TypeError) as exc:
                    raise ConfigError(f"{path}:{n}: malformed cassette line ({exc})") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read cassette {path}: {exc.strerror or exc}") from exc
    return entries


class ReplayBackend:
    def __init__(self, config: RunConfig):
        if not config.cassette:
            raise ConfigError("REPLAY needs a cassette path")
        self.entries = load_cassette(config.cassette)

    def generate(self, sample) -> Reply:
        key = prompt_hash(sample.prompt)
        if key not in self.entries:
            raise BackendError("cassette miss")
        return Reply(self.entries[key], meta={"prompt_hash": key})


_RETRY_STATUS = {408, 429, 500, 502, 503, 504}


class HttpChatBackend:
    """Chat-completions client. Network faults and overload statuses are
    retried with exponential backoff; a response that arrives is never
    retried, however poor its content."""

    def __init__(self, config: RunConfig, transport: Optional[httpx.BaseTransport] = None):
        if not config.endpoint:
            raise ConfigError("HTTP_CHAT needs an endpoint URL")
        if not config.model:
            raise ConfigError("HTTP_CHAT needs a model name")
        self.config = config
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self.url = config.endpoint.rstrip("/") + "/chat/completions"
        self.client = httpx.Client(headers=headers, timeout=config.timeout, transport=transport)
        self._sleep = time.sleep

    def _payload(self, prompt: str) -> dict:
        return {
            "model": self.config.model,
            "messages": split_prompt(prompt),
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }

    def complete(self, prompt: str) -> Reply:
        payload = self._payload(prompt)
        delay = self.config.backoff
        last = "no attempt made"
        for attempt in range(self.config.retries + 1):
            if attempt:
                self._sleep(delay)
                delay *= 2
            start = time.perf_counter()
            try:
                resp = self.client.post(self.url, json=payload)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                log.warning("request failed (attempt %d): %s", attempt + 1, last)
                continue
            elapsed = (time.perf_counter() - start) * 1000.0
            if resp.status_code in _RETRY_STATUS:
                last = f"HTTP {resp.status_code}"
                log.warning("request failed (attempt %d): %s", attempt + 1, last)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                text = resp.json()["choices"][0]["message"]["content"] or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"unexpected response body ({exc})") from exc
            return Reply(text, elapsed, {"attempts": attempt + 1})
        raise BackendError(f"giving up after {self.config.retries + 1} attempts: {last}")

    def generate(self, sample) -> Reply:
        return self.complete(sample.prompt)

    def close(self):
        self.client.close()


def make_backend(config: RunConfig, transport: Optional[httpx.BaseTransport] = None):
    kind = config.backend
    if kind is BackendKind.ORACLE:
        return OracleBackend(config)
    if kind is BackendKind.CORRUPTOR:
        return CorruptorBackend(config)
    if kind is BackendKind.REPLAY:
        return ReplayBackend(config)
    return HttpChatBackend(config, transport)


class CassetteWriter:
    """Thread-safe collector; entries are written sorted by hash."""

    def __init__(self):
        self._lock = threading.Lock()
        self.entries: dict[str, str] = {}

    def add(self, key: str, response: str):
        with self._lock:
            self.entries[key] = response

    def text(self) -> str:
        return "".join(
            json.dumps({"prompt_hash": k, "response": self.entries[k]}, ensure_ascii=False) + "\n"
            for k in sorted(self.entries)
        )
