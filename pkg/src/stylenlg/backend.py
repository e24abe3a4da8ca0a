"""Candidate generation and fluency scoring.

A backend turns a prompt into n completions. The remote backend speaks a
minimal JSON completion contract so any hosted model can be adapted; the mock
realizer renders MRs through per-slot templates with controllable error
injection, making downstream error rates analytically predictable for tests.

Fluency is exp(mean per-token log-probability), so scores live in (0, 1] and
ranking does not systematically favor short strings.
"""

from __future__ import annotations

import math
import os
import random
import time
from dataclasses import dataclass, field

import requests

from stylenlg.metrics import ValueLexicon, default_lexicon, tokenize
from stylenlg.mr import Domain, MeaningRepresentation, Personality, SlotKind
from stylenlg.style import MarkerLexicon, default_marker_lexicon


class BackendError(RuntimeError):
    """A backend could not produce candidates."""


class RateLimitError(BackendError):
    """The remote endpoint kept rate-limiting past the retry cap."""


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    n: int = 10
    temperature: float = 0.7
    top_p: float = 1.0
    max_new_tokens: int = 120
    stop_sequences: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")


@dataclass(frozen=True)
class Candidate:
    text: str
    raw_completion: str
    prompt_id: str
    index: int
    backend_id: str


def truncate_at_stops(raw: str, stops: tuple[str, ...]) -> str:
    cut = len(raw)
    for stop in stops:
        idx = raw.find(stop)
        if idx >= 0 and idx < cut:
            cut = idx
    return raw[:cut].strip()


def make_candidates(
    completions: list[str], request: GenerationRequest, prompt_id: str, backend_id: str
) -> list[Candidate]:
    return [
        Candidate(
            text=truncate_at_stops(raw, request.stop_sequences),
            raw_completion=raw,
            prompt_id=prompt_id,
            index=i,
            backend_id=backend_id,
        )
        for i, raw in enumerate(completions)
    ]


# ---------------------------------------------------------------------------
# Remote completion backend


class RemoteCompletionBackend:
    """Client for a remote text-completion endpoint.

    Request body: {prompt, n, temperature, top_p, max_tokens, stop};
    response body: {"completions": [text, ...]}. The auth token is read from
    an environment variable so it never lands in config files.
    """

    def __init__(
        self,
        base_url: str,
        auth_env: str = "STYLENLG_API_TOKEN",
        max_retries: int = 5,
        backoff: float = 1.0,
        timeout: float = 120.0,
        backend_id: str = "remote",
    ) -> None:
        self.base_url = base_url
        self.auth_env = auth_env
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout
        self.backend_id = backend_id

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.auth_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, request: GenerationRequest) -> list[str]:
        payload = {
            "prompt": request.prompt,
            "n": request.n,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_new_tokens,
            "stop": list(request.stop_sequences),
        }
        for attempt in range(self.max_retries + 1):
            try:
                response = requests.post(
                    self.base_url,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                raise BackendError(f"completion endpoint unreachable: {exc}") from exc
            if response.status_code == 429:
                if attempt == self.max_retries:
                    raise RateLimitError(
                        f"rate limited {self.max_retries + 1} times in a row"
                    )
                time.sleep(self.backoff * (2**attempt))
                continue
            if response.status_code != 200:
                raise BackendError(
                    f"completion endpoint returned {response.status_code}: {response.text}"
                )
            try:
                completions = response.json()["completions"]
            except (ValueError, KeyError) as exc:
                raise BackendError("malformed completion response") from exc
            if not isinstance(completions, list) or len(completions) != request.n:
                raise BackendError(
                    f"expected {request.n} completions, got "
                    f"{len(completions) if isinstance(completions, list) else type(completions)}"
                )
            return [str(c) for c in completions]
        raise AssertionError("unreachable")

    def generate(self, request: GenerationRequest, prompt_id: str = "") -> list[Candidate]:
        completions = self.complete(request)
        return make_candidates(completions, request, prompt_id, self.backend_id)


# ---------------------------------------------------------------------------
# Mock realizer


@dataclass(frozen=True)
class NoiseSpec:
    """Independent per-slot error probabilities for the mock realizer."""

    p_drop: float = 0.0
    p_substitute: float = 0.0
    p_hallucinate: float = 0.0
    p_marker: float = 1.0

    def __post_init__(self) -> None:
        for name in ("p_drop", "p_substitute", "p_hallucinate", "p_marker"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.p_drop + self.p_substitute > 1:
            raise ValueError("p_drop + p_substitute cannot exceed 1")


_SIGNATURE_SENTENCES = {
    Personality.AGREEABLE: "You want to know more about it, okay?",
    Personality.DISAGREEABLE: "Damn, obviously this is basically it.",
    Personality.CONSCIENTIOUS: "Let's see, it seems this is what I see.",
    Personality.UNCONSCIENTIOUS: "Mmhm... I mean, I am not sure, anyway.",
    Personality.EXTRAVERT: "There you are, you know!",
}

_RESTAURANT_TEMPLATES = {
    "name": "Let me tell you about {v}.",
    "eattype": "It is a {v}.",
    "food": "It serves {v} food.",
    "pricerange": "Prices are {v}.",
    "customerrating": "It has a {v}.",
    "area": "It is in the {v}.",
    "near": "It is near {v}.",
}

_VIDEOGAME_TEMPLATES = {
    "name": "Let me tell you about {v}.",
    "developer": "It was developed by {v}.",
    "release_year": "It came out in {v}.",
    "exp_release_date": "It is expected on {v}.",
    "specifier": "It is a {v} game.",
    "rating": "It is {v}.",
    "genres": "It is a {v} game.",
    "player_perspective": "It is played from a {v} perspective.",
    "platforms": "It is available on {v}.",
}


def _surface(slot_name: str, value: str, lexicon: ValueLexicon) -> str:
    phrases = lexicon.phrases(slot_name, value)
    return phrases[0] if phrases else value


def _slot_sentence(domain: Domain, slot_name: str, kind: SlotKind, value: str, lexicon: ValueLexicon) -> str:
    if kind is SlotKind.BOOLEAN:
        return f"It is {_surface(slot_name, value, lexicon)}."
    if kind is SlotKind.CATEGORICAL and "," in value:
        items = [i.strip() for i in value.split(",") if i.strip()]
        rendered = ", ".join(_surface(slot_name, item, lexicon) for item in items)
    else:
        rendered = _surface(slot_name, value, lexicon)
    templates = _RESTAURANT_TEMPLATES if domain is Domain.RESTAURANT else _VIDEOGAME_TEMPLATES
    template = templates.get(slot_name, "The " + slot_name.replace("_", " ") + " is {v}.")
    return template.format(v=rendered)


def mock_realize(
    mr: MeaningRepresentation,
    personality: Personality,
    noise: NoiseSpec = NoiseSpec(),
    rng: random.Random | None = None,
    lexicon: ValueLexicon | None = None,
    markers: MarkerLexicon | None = None,
) -> str:
    """Template realization with injected, independently-drawn errors.

    Each slot is dropped with p_drop or value-swapped with p_substitute
    (mutually exclusive draws, so the per-slot error probability is exactly
    their sum); each known absent slot is hallucinated with p_hallucinate;
    a marker sentence of the target personality is prepended with p_marker.
    Slots with no alternative value fall back to a drop on a substitute draw.
    """
    if rng is None:
        rng = random.Random(0)
    if lexicon is None:
        lexicon = default_lexicon(mr.domain)
    if markers is None:
        markers = default_marker_lexicon()
    sentences: list[str] = []
    if rng.random() < noise.p_marker:
        sentences.append(_SIGNATURE_SENTENCES[personality])
    for slot in mr.slots:
        draw = rng.random()
        if draw < noise.p_drop:
            continue
        if draw < noise.p_drop + noise.p_substitute:
            alternatives = [
                v for v in lexicon.known_values(slot.name) if v.lower() != slot.value.lower()
            ]
            if not alternatives:
                continue  # nothing to swap in; count as a drop
            value = rng.choice(alternatives)
        else:
            value = slot.value
        sentences.append(_slot_sentence(mr.domain, slot.name, slot.kind, value, lexicon))
    present = set(mr.slot_names())
    for slot_name in sorted(lexicon.slots):
        if slot_name in present or lexicon.is_open(slot_name):
            continue
        values = lexicon.known_values(slot_name)
        if values and rng.random() < noise.p_hallucinate:
            value = rng.choice(values)
            kind = SlotKind.BOOLEAN if value in ("yes", "no") else SlotKind.CATEGORICAL
            sentences.append(_slot_sentence(mr.domain, slot_name, kind, value, lexicon))
    return " ".join(sentences)


class MockBackend:
    """Deterministic offline candidate source built on the mock realizer."""

    def __init__(self, noise: NoiseSpec = NoiseSpec(), seed: int = 0, backend_id: str = "mock") -> None:
        self.noise = noise
        self.seed = seed
        self.backend_id = backend_id

    def generate_for_mr(
        self,
        mr: MeaningRepresentation,
        personality: Personality,
        n: int,
        item_seed: int,
        prompt_id: str = "",
    ) -> list[Candidate]:
        rng = random.Random((self.seed + 1) * 1_000_003 + item_seed)
        candidates = []
        for i in range(n):
            text = mock_realize(mr, personality, self.noise, rng)
            candidates.append(
                Candidate(
                    text=text,
                    raw_completion=text,
                    prompt_id=prompt_id,
                    index=i,
                    backend_id=self.backend_id,
                )
            )
        return candidates


# ---------------------------------------------------------------------------
# Fluency


@dataclass
class NgramFluency:
    """Bigram language model with additive smoothing, trained on a text pool.

    score(text) = exp(mean log P(token | previous)), which is deterministic,
    length-normalized, and strictly inside (0, 1).
    """

    k: float = 0.1
    _bigrams: dict[tuple[str, str], int] = field(default_factory=dict)
    _contexts: dict[str, int] = field(default_factory=dict)
    _vocab: set[str] = field(default_factory=set)

    BOS = "<s>"
    UNK = "<unk>"

    def train(self, texts: list[str]) -> "NgramFluency":
        for text in texts:
            tokens = tokenize(text)
            prev = self.BOS
            for tok in tokens:
                self._vocab.add(tok)
                self._bigrams[(prev, tok)] = self._bigrams.get((prev, tok), 0) + 1
                self._contexts[prev] = self._contexts.get(prev, 0) + 1
                prev = tok
        return self

    def _token_logprob(self, prev: str, tok: str) -> float:
        vocab_size = len(self._vocab) + 1  # +1 for the unknown token
        count = self._bigrams.get((prev, tok), 0)
        context = self._contexts.get(prev, 0)
        return math.log((count + self.k) / (context + self.k * vocab_size))

    def mean_logprob(self, text: str) -> float:
        tokens = tokenize(text)
        if not tokens:
            raise ValueError("cannot score empty text")
        tokens = [t if t in self._vocab else self.UNK for t in tokens]
        prev = self.BOS
        total = 0.0
        for tok in tokens:
            total += self._token_logprob(prev, tok)
            prev = tok
        return total / len(tokens)

    def __call__(self, text: str) -> float:
        return math.exp(self.mean_logprob(text))


def constant_fluency(value: float = 0.5):
    """A fluency provider that scores every text the same; handy for tests."""
    if not 0 < value <= 1:
        raise ValueError("fluency must be in (0, 1]")

    def score(text: str) -> float:
        if not text or not text.strip():
            raise ValueError("cannot score empty text")
        return value

    return score


class SidecarFluency:
    """Fluency from the sidecar LM's mean per-token log-probabilities."""

    def __init__(self, client) -> None:
        self.client = client

    def __call__(self, text: str) -> float:
        if not text or not text.strip():
            raise ValueError("cannot score empty text")
        return math.exp(self.client.logprob([text])[0])
