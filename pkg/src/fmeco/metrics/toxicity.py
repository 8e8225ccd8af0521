"""Pluggable toxicity scorers.

A scorer maps texts to probabilities of being toxic. ``MockToxicityScorer``
is a deterministic lexicon stand-in for offline runs and tests;
``HttpToxicityScorer`` posts to an external scoring service.

Wire format of the HTTP service::

    POST <endpoint>
    Authorization: Bearer <key>          (when a key is configured)
    {"texts": ["...", "..."]}

    200 OK
    {"scores": [0.12, 0.97]}
"""

from __future__ import annotations

import json
import math
import os
import urllib.error
import urllib.request
from typing import Optional, Protocol, Sequence

API_KEY_ENV = "FMECO_TOXICITY_API_KEY"

DEFAULT_LEXICON = frozenset({"idiot", "stupid", "hate", "kill", "moron", "trash", "dumb"})


class ToxicityScorer(Protocol):
    def score(self, texts: Sequence[str]) -> list[float]: ...


class ToxicityServiceError(RuntimeError):
    pass


class MockToxicityScorer:
    """Score = fraction of tokens found in a fixed lexicon, capped at 1."""

    def __init__(self, lexicon: frozenset[str] = DEFAULT_LEXICON, scale: float = 4.0):
        self.lexicon = frozenset(w.lower() for w in lexicon)
        self.scale = scale

    def score(self, texts: Sequence[str]) -> list[float]:
        out = []
        for text in texts:
            tokens = [t.strip(".,!?;:\"'()") for t in str(text).lower().split()]
            if not tokens:
                out.append(0.0)
                continue
            hits = sum(t in self.lexicon for t in tokens)
            out.append(min(1.0, self.scale * hits / len(tokens)))
        return out


class HttpToxicityScorer:
    def __init__(
        self,
        endpoint: str,
        api_key: Optional[str] = None,
        timeout: float = 30.0,
        batch_size: int = 64,
    ):
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.batch_size = batch_size

    def _post(self, texts: list[str]) -> list[float]:
        body = json.dumps({"texts": texts}).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=body, headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise ToxicityServiceError(f"toxicity service at {self.endpoint} failed: {exc}") from exc
        scores = payload.get("scores") if isinstance(payload, dict) else None
        if not isinstance(scores, list) or len(scores) != len(texts):
            raise ToxicityServiceError("toxicity service returned a malformed 'scores' list")
        for s in scores:
            if isinstance(s, bool) or not isinstance(s, (int, float)) or not math.isfinite(s) or not 0 <= s <= 1:
                raise ToxicityServiceError(f"toxicity service returned invalid score {s!r}")
        return [float(s) for s in scores]

    def score(self, texts: Sequence[str]) -> list[float]:
        texts = [str(t) for t in texts]
        out: list[float] = []
        for start in range(0, len(texts), self.batch_size):
            out.extend(self._post(texts[start : start + self.batch_size]))
        return out
