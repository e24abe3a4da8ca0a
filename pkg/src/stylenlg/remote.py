"""HTTP client for the scorer sidecar.

The sidecar hosts the neural scorers (personality classifier, similarity
metrics, LM log-probabilities) behind a small JSON contract:

    POST /classify   {"texts": [...]}                  -> {"probs": [[5 floats], ...]}
    POST /similarity {"pairs": [[a, b], ...], "metric": m} -> {"scores": [...]}
    POST /logprob    {"texts": [...]}                  -> {"logprobs": [...]}
    GET  /health                                        -> {"models": {...}}

Transport failures, malformed responses, and an unhealthy service raise
distinct exceptions so callers can decide whether to fall back locally.
"""

from __future__ import annotations

import requests


class SidecarError(RuntimeError):
    """Base class for sidecar client failures."""


class TransportError(SidecarError):
    """The sidecar could not be reached or returned an HTTP error."""


class MalformedResponseError(SidecarError):
    """The sidecar answered with a body that violates the contract."""


class ServiceUnhealthyError(SidecarError):
    """The sidecar is up but a required model is not loaded."""


class SidecarClient:
    def __init__(self, base_url: str, timeout: float = 30.0, batch_size: int = 64) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_size = batch_size

    def _post(self, path: str, payload: dict) -> dict:
        try:
            response = requests.post(
                f"{self.base_url}{path}", json=payload, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"sidecar unreachable at {self.base_url}{path}: {exc}") from exc
        if response.status_code == 503:
            raise ServiceUnhealthyError(f"sidecar has no model for {path}: {response.text}")
        if response.status_code != 200:
            raise TransportError(f"sidecar returned {response.status_code}: {response.text}")
        try:
            return response.json()
        except ValueError as exc:
            raise MalformedResponseError(f"non-JSON sidecar response from {path}") from exc

    def health(self) -> dict:
        try:
            response = requests.get(f"{self.base_url}/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"sidecar unreachable: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(f"health check returned {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise MalformedResponseError("non-JSON health response") from exc

    def require_models(self, names: list[str]) -> None:
        loaded = self.health().get("models", {})
        missing = [n for n in names if not loaded.get(n)]
        if missing:
            raise ServiceUnhealthyError(f"sidecar missing model(s): {', '.join(missing)}")

    def _batched(self, items: list, call) -> list:
        out: list = []
        for start in range(0, len(items), self.batch_size):
            out.extend(call(items[start : start + self.batch_size]))
        return out

    def classify(self, texts: list[str]) -> list[list[float]]:
        def call(batch: list[str]) -> list[list[float]]:
            body = self._post("/classify", {"texts": batch})
            probs = body.get("probs")
            if not isinstance(probs, list) or len(probs) != len(batch):
                raise MalformedResponseError("classify response misaligned with request")
            return probs

        return self._batched(texts, call)

    def similarity(self, pairs: list[tuple[str, str]], metric: str) -> list[float]:
        def call(batch: list[tuple[str, str]]) -> list[float]:
            body = self._post("/similarity", {"pairs": [list(p) for p in batch], "metric": metric})
            scores = body.get("scores")
            if not isinstance(scores, list) or len(scores) != len(batch):
                raise MalformedResponseError("similarity response misaligned with request")
            return scores

        return self._batched(pairs, call)

    def logprob(self, texts: list[str]) -> list[float]:
        def call(batch: list[str]) -> list[float]:
            body = self._post("/logprob", {"texts": batch})
            logprobs = body.get("logprobs")
            if not isinstance(logprobs, list) or len(logprobs) != len(batch):
                raise MalformedResponseError("logprob response misaligned with request")
            return logprobs

        return self._batched(texts, call)
