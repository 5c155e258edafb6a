"""HTTP client for remote objectives speaking the evaluation wire protocol.

GET /info advertises (embed_dim, prompt_length, vocab_size, verbalizer_ids,
task); POST /evaluate takes {"prompt": [...], "beta": float, "loss":
"ce"|"cr", "return_logits": bool} and returns the mean loss over the
server's fixed example set.  Requests are idempotent, so transport failures
are retried with exponential backoff; dimension mismatches are config
errors and never retried.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import httpx
import numpy as np

from .losses import LogitBundle
from .objectives import BlackBoxObjective, InvalidInputError


class TransportError(RuntimeError):
    """Remote evaluation failed after all retries."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class RemoteConfigError(ValueError):
    """The server rejected the request shape; retrying cannot help."""


@dataclass(frozen=True)
class ServerInfo:
    embed_dim: int
    prompt_length: int
    vocab_size: int
    verbalizer_ids: tuple[int, ...]
    task: str

    @property
    def ambient_dim(self) -> int:
        return self.embed_dim * self.prompt_length


class RemoteObjectiveClient:
    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        retries: int = 3,
        backoff_base: float = 0.1,
        backoff_factor: float = 4.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.retries = retries
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self):
        self._client.close()

    def _request_with_retry(self, method: str, path: str, **kwargs) -> httpx.Response:
        attempts = 0
        delay = self.backoff_base
        last_error = "unknown"
        while attempts <= self.retries:
            attempts += 1
            try:
                response = self._client.request(method, self.endpoint + path, **kwargs)
            except httpx.HTTPError as exc:
                last_error = str(exc)
            else:
                if response.status_code == 422:
                    raise RemoteConfigError(response.text)
                if response.status_code < 500:
                    return response
                last_error = f"server error {response.status_code}: {response.text}"
            if attempts <= self.retries:
                time.sleep(delay)
                delay *= self.backoff_factor
        raise TransportError(last_error, attempts)

    def info(self) -> ServerInfo:
        payload = self._request_with_retry("GET", "/info").json()
        return ServerInfo(
            embed_dim=int(payload["embed_dim"]),
            prompt_length=int(payload["prompt_length"]),
            vocab_size=int(payload["vocab_size"]),
            verbalizer_ids=tuple(int(v) for v in payload["verbalizer_ids"]),
            task=str(payload["task"]),
        )

    def evaluate(
        self,
        x: np.ndarray,
        loss: str = "ce",
        beta: float = 0.0,
        return_logits: bool = False,
    ) -> dict:
        body = {
            "prompt": [float(v) for v in np.asarray(x, dtype=np.float64)],
            "beta": float(beta),
            "loss": loss,
            "return_logits": bool(return_logits),
        }
        response = self._request_with_retry("POST", "/evaluate", json=body)
        return response.json()


class RemoteObjective(BlackBoxObjective):
    """Black-box objective backed by a served model."""

    def __init__(
        self,
        client: RemoteObjectiveClient,
        loss: str = "ce",
        beta: float = 0.0,
        info: ServerInfo | None = None,
    ):
        self.client = client
        self.server_info = info if info is not None else client.info()
        super().__init__(self.server_info.ambient_dim)
        self.loss = loss
        self.beta = beta

    def _loss(self, x: np.ndarray) -> float:
        return float(self.client.evaluate(x, loss=self.loss, beta=self.beta)["loss"])

    def evaluate_with_logits(self, x) -> tuple[float, list[LogitBundle]]:
        """Loss plus per-example logits as bundles (labels are server-side,
        so the bundles carry the predicted-verbalizer view only)."""
        x = self._check(x)
        payload = self.client.evaluate(x, loss=self.loss, beta=self.beta, return_logits=True)
        self.counter.increment()
        bundles = []
        labels = payload.get("labels")
        for i, row in enumerate(payload["logits"]):
            label = int(labels[i]) if labels else self.server_info.verbalizer_ids[0]
            bundles.append(
                LogitBundle(np.array(row, dtype=np.float64), self.server_info.verbalizer_ids, label)
            )
        return float(payload["loss"]), bundles
