"""Minimal chat-completion HTTP client shared by the pair classifier and
the metaphoric paraphraser.

Wire contract: POST ``{endpoint}`` with a JSON body of model name,
temperature, and system+user messages; the reply carries the assistant
text under ``choices[0].message.content``. The bearer token is read from
the ``COREF_LLM_TOKEN`` environment variable. Transport failures retry
with exponential backoff; content-level retries are the callers' job.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import httpx

from .errors import LlmTransportError, ValidationError

TOKEN_ENV_VAR = "COREF_LLM_TOKEN"


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model_name: str
    temperature: float = 0.7
    max_retries: int = 3
    max_in_flight: int = 4

    def __post_init__(self):
        if self.temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_retries < 0:
            raise ValidationError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.max_in_flight < 1:
            raise ValidationError(f"max_in_flight must be >= 1, got {self.max_in_flight}")

    @classmethod
    def load(cls, path: str) -> "LlmConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(**raw)


class ChatClient:
    """One chat request per call; counts requests, retries transport errors.

    ``transport`` is injectable so tests can run against a mock without a
    network; ``sleep`` likewise, to keep backoff out of test wall time.
    """

    def __init__(self, config: LlmConfig, transport: httpx.BaseTransport | None = None,
                 sleep=time.sleep):
        self.config = config
        self.requests_sent = 0
        self._sleep = sleep
        headers = {}
        token = os.environ.get(TOKEN_ENV_VAR)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(transport=transport, headers=headers, timeout=60.0)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def complete(self, system: str, user: str) -> str:
        """Send one chat completion; returns the assistant text."""
        payload = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        last_error = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._sleep(0.5 * 2 ** (attempt - 1))
            try:
                self.requests_sent += 1
                resp = self._client.post(self.config.endpoint, json=payload)
                resp.raise_for_status()
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = exc
            except (KeyError, IndexError, json.JSONDecodeError, ValueError) as exc:
                raise LlmTransportError(
                    f"malformed chat response from {self.config.endpoint}: {exc}") from exc
        raise LlmTransportError(
            f"chat endpoint unreachable after {self.config.max_retries + 1} attempts: "
            f"{last_error}") from last_error
