"""Personality-strength scoring.

The local scorer matches a lexicon of stylistic marker phrases (hedges, tag
questions, exclamations, filled pauses) and turns the accumulated evidence
into a probability distribution over the five personalities via a softmax.
Texts with no markers score uniform. A remote neural classifier is reachable
through the sidecar client and honors the same distribution contract.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

from stylenlg.mr import Personality

PERSONALITIES = tuple(Personality)
# Wire order for remote classifiers: alphabetical over the label strings.
ALPHABETICAL = tuple(sorted(Personality, key=lambda p: p.value))


@dataclass(frozen=True)
class StyleDistribution:
    """Probability of each personality given a text."""

    probs: dict[Personality, float]

    def __post_init__(self) -> None:
        if set(self.probs) != set(PERSONALITIES):
            raise ValueError("distribution must cover exactly the five personalities")
        total = sum(self.probs.values())
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("probabilities must be nonnegative")

    def __getitem__(self, personality: Personality) -> float:
        return self.probs[personality]

    def argmax(self) -> Personality:
        best = max(self.probs.values())
        for p in PERSONALITIES:  # deterministic tie-break in declaration order
            if self.probs[p] == best:
                return p
        raise AssertionError("unreachable")

    @classmethod
    def uniform(cls) -> "StyleDistribution":
        return cls({p: 0.2 for p in PERSONALITIES})

    @classmethod
    def from_alphabetical(cls, values: Iterable[float]) -> "StyleDistribution":
        values = list(values)
        if len(values) != 5:
            raise ValueError(f"expected five probabilities, got {len(values)}")
        return cls(dict(zip(ALPHABETICAL, values)))


Classifier = Callable[[str], StyleDistribution]


def _pattern_regex(phrase: str) -> re.Pattern[str]:
    escaped = re.escape(phrase.lower()).replace(r"\ ", r"\s+").replace(" ", r"\s+")
    if phrase[0].isalnum():
        escaped = r"\b" + escaped
    if phrase[-1].isalnum():
        escaped = escaped + r"\b"
    return re.compile(escaped)


class MarkerLexicon:
    """Weighted marker phrases per personality, plus neutral-text cues."""

    def __init__(
        self,
        markers: dict[Personality, list[tuple[str, float]]],
        negative: list[tuple[str, float]] | None = None,
    ) -> None:
        for p in PERSONALITIES:
            entries = markers.get(p, [])
            if len(entries) < 5:
                raise ValueError(f"{p.value} needs at least five marker phrases")
            for phrase, weight in entries:
                if not (weight > 0 and math.isfinite(weight)):
                    raise ValueError(f"bad weight {weight!r} for {phrase!r}")
        self.markers = {p: list(markers.get(p, [])) for p in PERSONALITIES}
        self.negative = list(negative or [])
        self._compiled = {
            p: [(_pattern_regex(phrase), weight) for phrase, weight in entries]
            for p, entries in self.markers.items()
        }
        self._compiled_negative = [
            (_pattern_regex(phrase), weight) for phrase, weight in self.negative
        ]

    @classmethod
    def from_file(cls, source: str | Path) -> "MarkerLexicon":
        markers: dict[Personality, list[tuple[str, float]]] = {p: [] for p in PERSONALITIES}
        negative: list[tuple[str, float]] = []
        for raw in Path(source).read_text(encoding="utf-8").splitlines():
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"marker line needs personality<TAB>phrase<TAB>weight: {raw!r}")
            label, phrase, weight = fields
            if label.strip() == "*":
                negative.append((phrase, float(weight)))
            else:
                markers[Personality.parse(label)].append((phrase, float(weight)))
        return cls(markers, negative)

    def signature_phrase(self, personality: Personality) -> str:
        """The highest-weight phrase unique to one personality."""
        others = {
            phrase.lower()
            for p, entries in self.markers.items()
            if p is not personality
            for phrase, _ in entries
        }
        unique = [(w, phrase) for phrase, w in self.markers[personality] if phrase.lower() not in others]
        if not unique:
            raise ValueError(f"no unique marker for {personality.value}")
        return max(unique)[1]


_cached_lexicon: MarkerLexicon | None = None


def default_marker_lexicon() -> MarkerLexicon:
    global _cached_lexicon
    if _cached_lexicon is None:
        ref = resources.files("stylenlg").joinpath("data", "markers.tsv")
        with resources.as_file(ref) as path:
            _cached_lexicon = MarkerLexicon.from_file(path)
    return _cached_lexicon


def classify_local(
    text: str,
    lexicon: MarkerLexicon | None = None,
    temperature: float = 1.0,
) -> StyleDistribution:
    """Score a text's personality from lexical markers.

    Evidence per personality is the weight sum over matched marker
    occurrences (case-insensitive); neutral-text cues shrink all evidence
    toward zero. The distribution is a softmax of evidence / temperature;
    no matches at all yields the uniform distribution.
    """
    if not text or not text.strip():
        raise ValueError("cannot classify empty text")
    if lexicon is None:
        lexicon = default_marker_lexicon()
    lowered = text.lower()
    evidence: dict[Personality, float] = {}
    for p in PERSONALITIES:
        total = 0.0
        for pattern, weight in lexicon._compiled[p]:
            total += weight * len(pattern.findall(lowered))
        evidence[p] = total
    if all(v == 0.0 for v in evidence.values()):
        return StyleDistribution.uniform()
    neutral = sum(
        weight * len(pattern.findall(lowered))
        for pattern, weight in lexicon._compiled_negative
    )
    if neutral:
        evidence = {p: v / (1.0 + neutral) for p, v in evidence.items()}
    peak = max(evidence.values())
    exps = {p: math.exp((v - peak) / temperature) for p, v in evidence.items()}
    z = sum(exps.values())
    return StyleDistribution({p: e / z for p, e in exps.items()})


def make_local_classifier(
    lexicon: MarkerLexicon | None = None, temperature: float = 1.0
) -> Classifier:
    return lambda text: classify_local(text, lexicon, temperature)


def classify_remote(texts: list[str], client) -> list[StyleDistribution]:
    """Classify a batch through the sidecar; order matches the input."""
    rows = client.classify(texts)
    return [StyleDistribution.from_alphabetical(row) for row in rows]


def pac(
    selected: list[tuple[str, Personality]],
    classifier: Classifier,
) -> float:
    """Personality accuracy: fraction of texts whose argmax hits the target."""
    if not selected:
        raise ValueError("personality accuracy needs at least one item")
    hits = sum(1 for text, target in selected if classifier(text).argmax() is target)
    return hits / len(selected)
