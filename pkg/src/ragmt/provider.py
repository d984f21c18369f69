"""Chat-completion and embedding access over an OpenAI-compatible wire.

Three layers:
  * a disk cache keyed by content hash of the request, one JSON file per
    exchange;
  * an HTTP provider with exponential-backoff retries and a bounded
    in-flight semaphore;
  * a replay provider that serves recorded fixtures (same JSON schema as
    the cache) and never touches the network, making whole-pipeline runs
    bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .prompt import RenderedPrompt

RETRYABLE_STATUSES = {429, 500, 502, 503, 504}


class ProviderError(RuntimeError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


@dataclass
class ProviderConfig:
    base_url: str = ""
    model_name: str = ""
    embedding_model_name: str = ""
    api_key_env: str = "RAGMT_API_KEY"
    temperature: float = 0.0
    max_retries: int = 3
    request_timeout: float = 60.0
    max_in_flight: int = 4
    embed_batch_size: int = 32
    backoff_base: float = 1.0
    cache_dir: str | None = None
    replay_dir: str | None = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderConfig":
        return cls(**data)


@dataclass
class ChatExchange:
    request: dict
    response_text: str
    latency: float
    token_usage: dict | None = None
    cache_hit: bool = False


@dataclass
class EmbeddingBatch:
    inputs: list[str]
    vectors: list[list[float]]

    def __post_init__(self):
        if len(self.inputs) != len(self.vectors):
            raise ProviderError(
                f"{len(self.vectors)} vectors for {len(self.inputs)} inputs"
            )
        dims = {len(v) for v in self.vectors}
        if len(dims) > 1:
            raise ProviderError(f"inconsistent embedding dimensions: {sorted(dims)}")


def _request_key(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, ensure_ascii=False).encode()
    ).hexdigest()


def chat_request_key(model: str, temperature: float, system: str, user: str) -> str:
    return _request_key(
        {"kind": "chat", "model": model, "temperature": temperature,
         "system": system, "user": user}
    )


def embedding_request_key(model: str, text: str) -> str:
    return _request_key({"kind": "embedding", "model": model, "text": text})


def _unit_normalize(vector: list[float]) -> list[float]:
    norm = math.sqrt(sum(v * v for v in vector))
    if norm == 0:
        raise ProviderError("provider returned a zero embedding vector")
    return [v / norm for v in vector]


class _JsonStore:
    """One JSON file per record under a directory, named by content hash."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def get(self, key: str) -> dict | None:
        path = self.directory / f"{key}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, key: str, record: dict) -> None:
        path = self.directory / f"{key}.json"
        with self._lock:
            tmp = path.with_suffix(".tmp")
            tmp.write_text(
                json.dumps(record, sort_keys=True, ensure_ascii=False), encoding="utf-8"
            )
            tmp.replace(path)


class HttpProvider:
    """OpenAI-compatible HTTP client with caching, retries, and a
    bounded-concurrency semaphore."""

    def __init__(self, config: ProviderConfig):
        if not config.base_url:
            raise ProviderError("base_url is required for the HTTP provider")
        self.config = config
        self.cache = _JsonStore(config.cache_dir) if config.cache_dir else None
        self._semaphore = threading.BoundedSemaphore(config.max_in_flight)
        self._session = requests.Session()
        self.request_count = 0

    @property
    def fingerprint(self) -> str:
        return f"{self.config.base_url}|{self.config.model_name}|{self.config.embedding_model_name}"

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, endpoint: str, body: dict) -> dict:
        url = self.config.base_url.rstrip("/") + endpoint
        last_error: ProviderError | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(self.config.backoff_base * 2 ** (attempt - 1))
            try:
                with self._semaphore:
                    self.request_count += 1
                    resp = self._session.post(
                        url, json=body, headers=self._headers(),
                        timeout=self.config.request_timeout,
                    )
            except requests.RequestException as exc:
                last_error = ProviderError(f"request failed: {exc}")
                continue
            if resp.status_code == 200:
                return resp.json()
            if resp.status_code in RETRYABLE_STATUSES:
                last_error = ProviderError(
                    f"transient HTTP {resp.status_code} from {url}", resp.status_code
                )
                continue
            raise ProviderError(
                f"HTTP {resp.status_code} from {url}: {resp.text[:200]}",
                resp.status_code,
            )
        raise ProviderError(
            f"exhausted {self.config.max_retries} retries: {last_error}",
            last_error.status if last_error else None,
        )

    def complete(self, prompt: RenderedPrompt) -> ChatExchange:
        cfg = self.config
        request = {
            "model": cfg.model_name,
            "temperature": cfg.temperature,
            "system": prompt.system,
            "user": prompt.user,
        }
        key = chat_request_key(cfg.model_name, cfg.temperature, prompt.system, prompt.user)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return ChatExchange(
                    request=cached["request"],
                    response_text=cached["response_text"],
                    latency=cached.get("latency", 0.0),
                    token_usage=cached.get("token_usage"),
                    cache_hit=True,
                )
        body = {
            "model": cfg.model_name,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": cfg.temperature,
        }
        start = time.monotonic()
        data = self._post("/chat/completions", body)
        latency = time.monotonic() - start
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ProviderError(f"malformed chat response: {str(data)[:200]}") from None
        if not isinstance(text, str) or not text.strip():
            raise ProviderError("empty response")
        exchange = ChatExchange(
            request=request,
            response_text=text,
            latency=latency,
            token_usage=data.get("usage"),
        )
        if self.cache is not None:
            self.cache.put(key, {
                "kind": "chat",
                "request": request,
                "response_text": text,
                "latency": latency,
                "token_usage": exchange.token_usage,
            })
        return exchange

    def embed(self, texts: list[str]) -> EmbeddingBatch:
        if not texts:
            raise ProviderError("embed() requires at least one text")
        cfg = self.config
        model = cfg.embedding_model_name or cfg.model_name
        vectors: dict[str, list[float]] = {}
        pending: list[str] = []
        for text in texts:
            if text in vectors or text in pending:
                continue
            cached = self.cache.get(embedding_request_key(model, text)) if self.cache else None
            if cached is not None:
                vectors[text] = cached["vector"]
            else:
                pending.append(text)
        for i in range(0, len(pending), cfg.embed_batch_size):
            chunk = pending[i : i + cfg.embed_batch_size]
            data = self._post("/embeddings", {"model": model, "input": chunk})
            try:
                rows = [item["embedding"] for item in data["data"]]
            except (KeyError, TypeError):
                raise ProviderError(
                    f"malformed embedding response: {str(data)[:200]}"
                ) from None
            if len(rows) != len(chunk):
                raise ProviderError(
                    f"{len(rows)} embeddings returned for {len(chunk)} inputs"
                )
            for text, row in zip(chunk, rows):
                vec = _unit_normalize([float(v) for v in row])
                vectors[text] = vec
                if self.cache is not None:
                    self.cache.put(embedding_request_key(model, text), {
                        "kind": "embedding",
                        "request": {"model": model, "text": text},
                        "vector": vec,
                    })
        return EmbeddingBatch(inputs=list(texts), vectors=[vectors[t] for t in texts])


class ReplayProvider:
    """Serves recorded exchanges from a fixture directory; never goes online.

    Fixture files use the cache schema, so a cache directory produced by a
    live run can be dropped in as a replay source unchanged.
    """

    def __init__(self, config: ProviderConfig):
        if not config.replay_dir:
            raise ProviderError("replay provider requires replay_dir")
        self.config = config
        self.store = _JsonStore(config.replay_dir)
        self.request_count = 0  # stays 0: replay never issues network calls

    @property
    def fingerprint(self) -> str:
        return f"replay|{self.config.model_name}|{self.config.embedding_model_name}"

    def complete(self, prompt: RenderedPrompt) -> ChatExchange:
        cfg = self.config
        key = chat_request_key(cfg.model_name, cfg.temperature, prompt.system, prompt.user)
        record = self.store.get(key)
        if record is None:
            raise ProviderError(
                f"no replay fixture for chat request {key} "
                f"(model={cfg.model_name!r}, user={prompt.user[:60]!r}...)"
            )
        return ChatExchange(
            request=record["request"],
            response_text=record["response_text"],
            latency=record.get("latency", 0.0),
            token_usage=record.get("token_usage"),
            cache_hit=True,
        )

    def embed(self, texts: list[str]) -> EmbeddingBatch:
        if not texts:
            raise ProviderError("embed() requires at least one text")
        model = self.config.embedding_model_name or self.config.model_name
        vectors = []
        for text in texts:
            record = self.store.get(embedding_request_key(model, text))
            if record is None:
                raise ProviderError(f"no replay fixture for embedding of {text[:60]!r}")
            vectors.append(record["vector"])
        return EmbeddingBatch(inputs=list(texts), vectors=vectors)


def build_provider(config: ProviderConfig):
    if config.replay_dir:
        return ReplayProvider(config)
    return HttpProvider(config)


def complete(prompt: RenderedPrompt, config: ProviderConfig) -> ChatExchange:
    return build_provider(config).complete(prompt)


def embed(texts: list[str], config: ProviderConfig) -> EmbeddingBatch:
    return build_provider(config).embed(texts)
