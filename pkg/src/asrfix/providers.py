"""Provider clients: text completion, embeddings, NLI and SLU tagging.

HTTP providers speak plain JSON over ``httpx``. The completion client targets
an OpenAI-compatible ``/chat/completions`` route. Mock providers are
deterministic and need no network.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx
import numpy as np

from .cache import DiskCache, cache_key
from .metrics.slu import SluAnnotation

logger = logging.getLogger(__name__)

ENV_ENDPOINT = "HYPO_ENDPOINT"
ENV_MODEL = "HYPO_MODEL"
ENV_API_KEY = "HYPO_API_KEY"
ENV_CACHE_DIR = "HYPO_CACHE_DIR"


class ProviderError(RuntimeError):
    """Transport or server failure; retryable."""

    def __init__(self, message, attempts=1):
        super().__init__(f"{message} (after {attempts} attempt{'s' if attempts != 1 else ''})")
        self.attempts = attempts


class ProviderConfigError(ValueError):
    """Misconfigured provider (missing endpoint, bad auth); aborts a batch."""


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    max_tokens: int = 256
    temperature: float = 0.0
    stop: tuple[str, ...] | None = None
    system: str | None = None
    # routing hints for mock providers; never sent over the wire
    utterance_id: str | None = field(default=None, compare=False)
    candidates: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.temperature != 0:
            raise ValueError("correction requests must use temperature 0 (greedy decoding)")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


class CompletionProvider(Protocol):
    name: str

    def complete(self, request: CompletionRequest) -> str: ...


class EchoProvider:
    """Returns the top-ranked candidate verbatim."""

    name = "echo"

    def complete(self, request):
        if not request.candidates:
            raise ProviderError("echo provider needs request candidates")
        return request.candidates[0]


class ScriptedProvider:
    """Returns canned completions keyed by utterance id.

    Ids missing from the table fall back to echoing the top candidate when
    ``fallback_echo`` is set, else raise ``ProviderError``.
    """

    def __init__(self, table: dict[str, str], fallback_echo: bool = True, name: str = "scripted"):
        self.table = dict(table)
        self.fallback_echo = fallback_echo
        self.name = name

    @classmethod
    def from_file(cls, path, **kw):
        with open(path, encoding="utf-8") as f:
            return cls(json.load(f), **kw)

    def complete(self, request):
        if request.utterance_id in self.table:
            return self.table[request.utterance_id]
        if self.fallback_echo and request.candidates:
            return request.candidates[0]
        raise ProviderError(f"no scripted completion for {request.utterance_id!r}")


class RateLimiter:
    """Token bucket shared across worker threads."""

    def __init__(self, rate: float, burst: int = 1):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = max(1, burst)
        self._tokens = float(self.capacity)
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            time.sleep(wait)


def _post_json(client, url, payload, headers, max_attempts, backoff):
    last = None
    for attempt in range(1, max_attempts + 1):
        try:
            resp = client.post(url, json=payload, headers=headers)
        except httpx.TransportError as e:
            last = f"transport error: {e}"
        else:
            if resp.status_code in (401, 403, 404):
                raise ProviderConfigError(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}")
            if resp.status_code == 429 or resp.status_code >= 500:
                last = f"HTTP {resp.status_code}"
            elif resp.status_code >= 400:
                raise ProviderError(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}", attempt)
            else:
                try:
                    return resp.json()
                except ValueError as e:
                    raise ProviderError(f"{url} returned non-JSON body", attempt) from e
        if attempt < max_attempts:
            time.sleep(backoff * 2 ** (attempt - 1))
    raise ProviderError(f"{url}: {last}", max_attempts)


class _HttpBase:
    def __init__(self, endpoint=None, api_key=None, timeout=60.0, max_attempts=3,
                 backoff=1.0, transport=None, rate_limit=None):
        endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        if not endpoint:
            raise ProviderConfigError(f"no endpoint given (flag or ${ENV_ENDPOINT})")
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY)
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.limiter = RateLimiter(rate_limit) if rate_limit else None
        self._client = httpx.Client(timeout=timeout, transport=transport)

    @property
    def headers(self):
        h = {"Content-Type": "application/json"}
        if self.api_key:
            h["Authorization"] = f"Bearer {self.api_key}"
        return h

    def _post(self, url, payload):
        if self.limiter is not None:
            self.limiter.acquire()
        return _post_json(self._client, url, payload, self.headers, self.max_attempts, self.backoff)

    def close(self):
        self._client.close()


class OpenAICompatibleProvider(_HttpBase):
    """Chat-completions client; ``endpoint`` is the API base (…/v1)."""

    def __init__(self, endpoint=None, model=None, api_key=None, **kw):
        super().__init__(endpoint, api_key, **kw)
        self.model = model or os.environ.get(ENV_MODEL)
        if not self.model:
            raise ProviderConfigError(f"no model given (flag or ${ENV_MODEL})")
        self.name = f"openai:{self.model}"

    def payload(self, request: CompletionRequest) -> dict:
        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        messages.append({"role": "user", "content": request.prompt})
        body = {
            "model": self.model,
            "messages": messages,
            "temperature": 0.0,
            "max_tokens": request.max_tokens,
        }
        if request.stop:
            body["stop"] = list(request.stop)
        return body

    def complete(self, request):
        data = self._post(f"{self.endpoint}/chat/completions", self.payload(request))
        try:
            choice = data["choices"][0]
            if "message" in choice:
                return choice["message"]["content"] or ""
            return choice.get("text", "")
        except (KeyError, IndexError, TypeError) as e:
            raise ProviderError(f"unexpected completion response shape: {str(data)[:200]}") from e


class CachedCompletionProvider:
    def __init__(self, inner: CompletionProvider, cache_dir):
        self.inner = inner
        self.name = inner.name
        self.cache = DiskCache(Path(cache_dir) / "completions.jsonl")

    def complete(self, request):
        key = cache_key(self.name, request.system or "", request.prompt,
                        str(request.max_tokens), "\x1e".join(request.stop or ()))
        return self.cache.get_or_compute(key, lambda: self.inner.complete(request))


class HttpEmbeddingProvider(_HttpBase):
    """``POST {model, input: [texts]}``; token-level requests add ``"granularity": "token"``.

    Response: ``{"data": [{"embedding": [...]}, ...]}`` (sentence) or the same
    with a list of vectors per item (token).
    """

    def __init__(self, endpoint=None, model=None, api_key=None, **kw):
        super().__init__(endpoint, api_key, **kw)
        self.model = model or "embedding"
        self.name = f"embed:{self.model}"

    def _embed(self, text, granularity):
        body = {"model": self.model, "input": [text]}
        if granularity == "token":
            body["granularity"] = "token"
        data = self._post(self.endpoint, body)
        try:
            items = data["data"] if "data" in data else [{"embedding": v} for v in data["embeddings"]]
            return np.asarray(items[0]["embedding"], dtype=np.float64)
        except (KeyError, IndexError, TypeError) as e:
            raise ProviderError(f"unexpected embedding response shape: {str(data)[:200]}") from e

    def embed_sentence(self, text):
        return self._embed(text, "sentence")

    def embed_tokens(self, text):
        return np.atleast_2d(self._embed(text, "token"))


class HttpNliProvider(_HttpBase):
    """``POST {premise, hypothesis}`` -> ``{entail, neutral, contradict}``."""

    def __init__(self, endpoint=None, api_key=None, **kw):
        super().__init__(endpoint, api_key, **kw)
        self.name = f"nli:{self.endpoint}"

    def entail_prob(self, premise, hypothesis):
        data = self._post(self.endpoint, {"premise": premise, "hypothesis": hypothesis})
        try:
            return float(data["entail"])
        except (KeyError, TypeError, ValueError) as e:
            raise ProviderError(f"unexpected NLI response shape: {str(data)[:200]}") from e


class HttpTagger(_HttpBase):
    """``POST {text}`` -> ``{intent, slots: [{type, value}]}``."""

    def __init__(self, endpoint=None, api_key=None, **kw):
        super().__init__(endpoint, api_key, **kw)
        self.name = f"tagger:{self.endpoint}"

    def tag(self, text):
        data = self._post(self.endpoint, {"text": text})
        try:
            return SluAnnotation.create(data["intent"], [(s["type"], s["value"]) for s in data.get("slots", [])])
        except (KeyError, TypeError) as e:
            raise ProviderError(f"unexpected tagger response shape: {str(data)[:200]}") from e


class CachedEmbeddingProvider:
    def __init__(self, inner, cache_dir):
        self.inner = inner
        self.name = inner.name
        self.cache = DiskCache(Path(cache_dir) / "embeddings.jsonl")

    def embed_sentence(self, text):
        key = cache_key(self.name, "sentence", text)
        return np.asarray(self.cache.get_or_compute(key, lambda: self.inner.embed_sentence(text).tolist()))

    def embed_tokens(self, text):
        key = cache_key(self.name, "token", text)
        return np.asarray(self.cache.get_or_compute(key, lambda: np.asarray(self.inner.embed_tokens(text)).tolist()))


class CachedNliProvider:
    def __init__(self, inner, cache_dir):
        self.inner = inner
        self.name = inner.name
        self.cache = DiskCache(Path(cache_dir) / "nli.jsonl")

    def entail_prob(self, premise, hypothesis):
        key = cache_key(self.name, premise, hypothesis)
        return self.cache.get_or_compute(key, lambda: float(self.inner.entail_prob(premise, hypothesis)))


class CachedTagger:
    def __init__(self, inner, cache_dir):
        self.inner = inner
        self.name = inner.name
        self.cache = DiskCache(Path(cache_dir) / "tagger.jsonl")

    def tag(self, text):
        key = cache_key(self.name, text)

        def compute():
            ann = self.inner.tag(text)
            return {"intent": ann.intent, "slots": [list(s) for s in ann.slots]}

        obj = self.cache.get_or_compute(key, compute)
        return SluAnnotation(obj["intent"], tuple(tuple(s) for s in obj["slots"]))
