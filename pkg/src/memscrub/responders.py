"""Responder implementations: HTTP chat-completions client and transcript
record/replay. The synthetic oracle adapter lives in the oracle module and is
re-exported here for convenience.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from collections import deque
from dataclasses import dataclass

import requests

from memscrub.errors import IoFailure, ResponderFailure
from memscrub.oracle import OracleResponder

__all__ = [
    "HttpConfig",
    "HttpResponder",
    "OracleResponder",
    "TranscriptRecorder",
    "TranscriptReplayer",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HttpConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    timeout: float = 30.0
    retries: int = 3
    api_key_env: str = "MEMSCRUB_API_KEY"


class HttpResponder:
    """Chat-completions client with bounded retries and exponential backoff.

    The sample index is realized purely as separate calls; the payload
    carries model, message list, and temperature only.
    """

    def __init__(self, config: HttpConfig, session: requests.Session | None = None) -> None:
        self.config = config
        self.session = session or requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, prompt: str, sample_index: int) -> str:
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        delay = 0.5
        last_error: Exception | None = None
        for attempt in range(self.config.retries + 1):
            try:
                resp = self.session.post(
                    self.config.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
                resp.raise_for_status()
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                log.warning("completion attempt %d failed: %s", attempt + 1, exc)
                if attempt < self.config.retries:
                    time.sleep(delay)
                    delay *= 2
        raise ResponderFailure(
            f"endpoint {self.config.endpoint} failed after "
            f"{self.config.retries + 1} attempts: {last_error}"
        )


class TranscriptRecorder:
    """Wraps a responder, appending every (prompt, sample_index, response)
    to a JSONL transcript for later exact replay. Thread-safe."""

    def __init__(self, inner, path: str) -> None:
        self.inner = inner
        self.path = path
        self._lock = threading.Lock()
        try:
            self._fh = open(path, "a", encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot open transcript {path}: {exc}") from exc

    def complete(self, prompt: str, sample_index: int) -> str:
        response = self.inner.complete(prompt, sample_index)
        line = json.dumps(
            {"prompt": prompt, "sample_index": sample_index, "response": response},
            ensure_ascii=False,
        )
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()
        return response

    def close(self) -> None:
        with self._lock:
            self._fh.close()

    def __enter__(self) -> TranscriptRecorder:
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class TranscriptReplayer:
    """Replays a recorded transcript bit-exactly.

    Repeated calls for the same (prompt, sample_index) consume recorded
    responses in order, then stick to the last one, which reproduces any
    call sequence the recording run made. Unknown prompts fail.
    """

    def __init__(self, path: str) -> None:
        self._queues: dict[tuple[str, int], deque[str]] = {}
        self._lock = threading.Lock()
        try:
            with open(path, encoding="utf-8") as fh:
                for lineno, raw in enumerate(fh, 1):
                    raw = raw.strip()
                    if not raw:
                        continue
                    try:
                        entry = json.loads(raw)
                        key = (entry["prompt"], int(entry["sample_index"]))
                        self._queues.setdefault(key, deque()).append(entry["response"])
                    except (json.JSONDecodeError, KeyError, TypeError) as exc:
                        raise IoFailure(f"{path}:{lineno}: bad transcript line: {exc}") from exc
        except OSError as exc:
            raise IoFailure(f"cannot read transcript {path}: {exc}") from exc

    def complete(self, prompt: str, sample_index: int) -> str:
        key = (prompt, sample_index)
        with self._lock:
            queue = self._queues.get(key)
            if not queue:
                raise ResponderFailure(
                    f"transcript has no response for sample {sample_index} of "
                    f"prompt {prompt[:60]!r}..."
                )
            if len(queue) == 1:
                return queue[0]
            return queue.popleft()
