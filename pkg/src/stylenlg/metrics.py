"""Semantic-accuracy and surface metrics.

The slot aligner searches a candidate utterance for lexicon phrases realizing
each MR slot and tallies substitutions (S), deletions (D), repeats (R) and
hallucinations (H). The slot error rate is (S+D+R+H)/N over the MR's N slots,
kept as an exact rational; semantic accuracy is its complement.

Matching runs longest-phrase-first over a lower-cased, punctuation-stripped
token stream; overlaps resolve greedily left to right. Per MR slot: a mention
of the correct value realizes the slot and every extra disjoint mention of the
slot counts one repeat; mentions of only wrong values count one substitution
(plus repeats for extras); no mention counts one deletion. Multi-valued slot
values (comma-separated) count as realized only when every item is mentioned.
Mentions of known slots absent from the MR count one hallucination each;
hallucinations are only detectable for values enumerated in the lexicon.
"""

from __future__ import annotations

import math
import re
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from stylenlg.mr import Domain, MeaningRepresentation, SlotKind


class LexiconError(ValueError):
    """A value lexicon does not cover a slot the aligner needs."""


class MetricError(ValueError):
    """A metric was called on inputs it is undefined for."""


_TOKEN_RE = re.compile(r"[a-z0-9£]+")


def tokenize(text: str) -> list[str]:
    """Lower-case and strip punctuation, keeping word and number tokens."""
    return _TOKEN_RE.findall(text.lower())


# ---------------------------------------------------------------------------
# Value lexicons


class ValueLexicon:
    """Per-domain map from (slot, value) to the surface phrases realizing it.

    File format: one entry per line, "slot<TAB>value<TAB>phrase1;phrase2;...".
    A line "slot<TAB>*<TAB>*" declares an open-valued slot (names, dates)
    whose mentions are matched against the literal value text instead.
    """

    def __init__(self) -> None:
        self._entries: dict[str, dict[str, list[str]]] = {}
        self._open: set[str] = set()

    @classmethod
    def from_file(cls, source: str | Path) -> "ValueLexicon":
        lex = cls()
        for raw in Path(source).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"lexicon line needs slot<TAB>value<TAB>phrases: {raw!r}")
            slot, value, phrases = fields
            slot = slot.strip().lower()
            if value.strip() == "*":
                lex._open.add(slot)
                lex._entries.setdefault(slot, {})
                continue
            bucket = lex._entries.setdefault(slot, {})
            bucket[value.strip()] = [p.strip() for p in phrases.split(";") if p.strip()]
        return lex

    @property
    def slots(self) -> set[str]:
        return set(self._entries)

    def is_open(self, slot: str) -> bool:
        return slot in self._open

    def known_values(self, slot: str) -> list[str]:
        return list(self._entries.get(slot, {}))

    def phrases(self, slot: str, value: str) -> list[str]:
        for known, phrases in self._entries.get(slot, {}).items():
            if known.lower() == value.lower():
                return list(phrases)
        return []


_LEXICON_FILES = {
    Domain.RESTAURANT: "restaurant_lexicon.tsv",
    Domain.VIDEOGAME: "viggo_lexicon.tsv",
}

_cached_lexicons: dict[Domain, ValueLexicon] = {}


def default_lexicon(domain: Domain) -> ValueLexicon:
    if domain not in _cached_lexicons:
        ref = resources.files("stylenlg").joinpath("data", _LEXICON_FILES[domain])
        with resources.as_file(ref) as path:
            _cached_lexicons[domain] = ValueLexicon.from_file(path)
    return _cached_lexicons[domain]


# ---------------------------------------------------------------------------
# Slot alignment and SER / SACC


@dataclass(frozen=True)
class SlotAlignment:
    """Slot-level alignment of a candidate against an MR."""

    substitutions: int
    deletions: int
    repeats: int
    hallucinations: int
    slot_count: int
    spans: dict[str, tuple[tuple[int, int], ...]] = field(default_factory=dict, compare=False)

    @property
    def error_total(self) -> int:
        return self.substitutions + self.deletions + self.repeats + self.hallucinations

    def is_perfect(self) -> bool:
        return self.error_total == 0


@dataclass(frozen=True)
class _Match:
    slot: str
    value: str
    start: int
    end: int


def _split_items(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _phrase_inventory(
    mr: MeaningRepresentation, lexicon: ValueLexicon
) -> list[tuple[str, str, tuple[str, ...]]]:
    inventory: list[tuple[str, str, tuple[str, ...]]] = []
    seen: set[tuple[str, str, tuple[str, ...]]] = set()

    def add(slot: str, value: str, phrase: str) -> None:
        tokens = tuple(tokenize(phrase))
        if not tokens:
            return
        key = (slot, value, tokens)
        if key not in seen:
            seen.add(key)
            inventory.append(key)

    for slot in lexicon.slots:
        for value in lexicon.known_values(slot):
            for phrase in lexicon.phrases(slot, value):
                add(slot, value, phrase)
    for sv in mr.slots:
        items = _split_items(sv.value) if sv.kind is SlotKind.CATEGORICAL else [sv.value]
        for item in items:
            add(sv.name, item, item)
    return inventory


def align_slots(
    candidate: str,
    mr: MeaningRepresentation,
    lexicon: ValueLexicon | None = None,
) -> SlotAlignment:
    """Align a candidate utterance against an MR and count S, D, R, H."""
    if lexicon is None:
        lexicon = default_lexicon(mr.domain)
    missing = [s.name for s in mr.slots if s.name not in lexicon.slots]
    if missing:
        raise LexiconError(f"lexicon has no entry for slot(s): {', '.join(missing)}")

    tokens = tokenize(candidate)
    inventory = _phrase_inventory(mr, lexicon)

    # Collect every phrase occurrence, then keep a disjoint set greedily:
    # leftmost start first, longer phrases beating shorter ones at a start.
    occurrences: list[tuple[int, int, str, str]] = []
    for slot, value, phrase in inventory:
        width = len(phrase)
        for start in range(len(tokens) - width + 1):
            if tuple(tokens[start : start + width]) == phrase:
                occurrences.append((start, width, slot, value))
    occurrences.sort(key=lambda o: (o[0], -o[1]))

    taken: list[bool] = [False] * len(tokens)
    matches: list[_Match] = []
    for start, width, slot, value in occurrences:
        if any(taken[start : start + width]):
            continue
        for i in range(start, start + width):
            taken[i] = True
        matches.append(_Match(slot, value, start, start + width))

    by_slot: dict[str, list[_Match]] = {}
    for m in matches:
        by_slot.setdefault(m.slot, []).append(m)

    substitutions = deletions = repeats = hallucinations = 0
    spans: dict[str, list[tuple[int, int]]] = {}
    mr_slot_names = set(mr.slot_names())

    for sv in mr.slots:
        slot_matches = by_slot.get(sv.name, [])
        spans[sv.name] = [(m.start, m.end) for m in slot_matches]
        items = _split_items(sv.value) if sv.kind is SlotKind.CATEGORICAL else [sv.value]
        items_lower = [i.lower() for i in items]
        matched_items = {
            m.value.lower() for m in slot_matches if m.value.lower() in items_lower
        }
        covered = all(item in matched_items for item in items_lower)
        total = len(slot_matches)
        if covered:
            repeats += total - len(items_lower)
        elif any(m.value.lower() not in items_lower for m in slot_matches):
            substitutions += 1
            repeats += total - 1
        elif total == 0:
            deletions += 1
        else:
            # Only correct items mentioned, but not all of them.
            deletions += 1
            repeats += total - len(matched_items)

    for slot, slot_matches in by_slot.items():
        if slot not in mr_slot_names:
            hallucinations += len(slot_matches)
            spans[slot] = [(m.start, m.end) for m in slot_matches]

    return SlotAlignment(
        substitutions=substitutions,
        deletions=deletions,
        repeats=repeats,
        hallucinations=hallucinations,
        slot_count=len(mr.slots),
        spans={k: tuple(v) for k, v in spans.items()},
    )


def ser(alignment: SlotAlignment) -> Fraction:
    """Slot error rate (S+D+R+H)/N as an exact rational."""
    if alignment.slot_count < 1:
        raise MetricError("slot error rate needs at least one slot")
    return Fraction(alignment.error_total, alignment.slot_count)


def sacc(alignment: SlotAlignment) -> Fraction:
    """Semantic accuracy 1 - SER; may go negative and is reported unclamped."""
    return 1 - ser(alignment)


# ---------------------------------------------------------------------------
# BLEU


def _ngram_counts(tokens: list[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def _closest_ref_len(cand_len: int, ref_lens: list[int]) -> int:
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


class CorpusBleu:
    """Accumulates 4-gram statistics across pairs; standard corpus BLEU."""

    MAX_N = 4

    def __init__(self) -> None:
        self.clipped = [0] * self.MAX_N
        self.totals = [0] * self.MAX_N
        self.cand_len = 0
        self.ref_len = 0

    def add(self, candidate: str, references: list[str]) -> None:
        if not candidate.strip() or not references or not any(r.strip() for r in references):
            raise MetricError("BLEU needs a nonempty candidate and reference(s)")
        cand = tokenize(candidate)
        refs = [tokenize(r) for r in references]
        self.cand_len += len(cand)
        self.ref_len += _closest_ref_len(len(cand), [len(r) for r in refs])
        for n in range(1, self.MAX_N + 1):
            cand_counts = _ngram_counts(cand, n)
            max_counts: dict[tuple[str, ...], int] = {}
            for ref in refs:
                for gram, count in _ngram_counts(ref, n).items():
                    if max_counts.get(gram, 0) < count:
                        max_counts[gram] = count
            self.totals[n - 1] += sum(cand_counts.values())
            self.clipped[n - 1] += sum(
                min(count, max_counts.get(gram, 0)) for gram, count in cand_counts.items()
            )

    def score(self) -> float:
        if self.totals[0] == 0:
            raise MetricError("no pairs accumulated")
        log_sum = 0.0
        for n in range(self.MAX_N):
            if self.totals[n] == 0:
                continue
            if self.clipped[n] == 0:
                return 0.0
            log_sum += 0.25 * math.log(self.clipped[n] / self.totals[n])
        if self.cand_len == 0:
            return 0.0
        bp = 1.0 if self.cand_len > self.ref_len else math.exp(1 - self.ref_len / self.cand_len)
        return bp * math.exp(log_sum)


def bleu(candidate: str, references: list[str]) -> float:
    """Sentence BLEU-4 with brevity penalty and add-one smoothing on n >= 2."""
    if not candidate.strip() or not references or not any(r.strip() for r in references):
        raise MetricError("BLEU needs a nonempty candidate and reference(s)")
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references]
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cand_counts = _ngram_counts(cand, n)
        total = sum(cand_counts.values())
        max_counts: dict[tuple[str, ...], int] = {}
        for ref in refs:
            for gram, count in _ngram_counts(ref, n).items():
                if max_counts.get(gram, 0) < count:
                    max_counts[gram] = count
        clipped = sum(min(c, max_counts.get(g, 0)) for g, c in cand_counts.items())
        if n == 1:
            if clipped == 0:
                return 0.0
            p_n = clipped / total
        else:
            p_n = (clipped + 1) / (total + 1)
        log_sum += 0.25 * math.log(p_n)
    ref_len = _closest_ref_len(len(cand), [len(r) for r in refs])
    bp = 1.0 if len(cand) > ref_len else math.exp(1 - ref_len / len(cand))
    return bp * math.exp(log_sum)


def pseudo_bleu(candidate: str, pseudo_reference: str) -> float:
    """Sentence BLEU of a candidate against the MR's pseudo-reference."""
    return bleu(candidate, [pseudo_reference])


# ---------------------------------------------------------------------------
# Pearson correlation


def pearson(xs: list[float], ys: list[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise MetricError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise MetricError("correlation needs at least two points")
    try:
        return statistics.correlation(xs, ys)
    except statistics.StatisticsError as exc:
        raise MetricError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Similarity scorers


def token_f1(candidate: str, reference: str) -> float:
    """Unigram overlap F1 between two texts."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        raise MetricError("token F1 needs nonempty texts")
    cand_counts = _ngram_counts(cand, 1)
    ref_counts = _ngram_counts(ref, 1)
    overlap = sum(min(c, ref_counts.get(g, 0)) for g, c in cand_counts.items())
    if overlap == 0:
        return 0.0
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class SimilarityScorer:
    """A named text-pair scorer; higher means more similar."""

    identifier: str
    locality: str  # "local" | "remote"
    fn: object

    def __call__(self, candidate: str, reference: str) -> float:
        return self.fn(candidate, reference)


LOCAL_SCORERS = {
    "pbleu": lambda: SimilarityScorer("pbleu", "local", pseudo_bleu),
    "token-f1": lambda: SimilarityScorer("token-f1", "local", token_f1),
}

REMOTE_METRIC_IDS = {
    "bbleu": "bleurt",  # beyond-bleu is served by the sidecar's bleurt-style head
    "bleurt": "bleurt",
    "bertscore-precision": "bertscore-precision",
    "bertscore-recall": "bertscore-recall",
    "bertscore-f1": "bertscore-f1",
}


def get_scorer(identifier: str, sidecar=None) -> SimilarityScorer:
    """Look up a similarity scorer; remote ones need a sidecar client."""
    if identifier in LOCAL_SCORERS:
        return LOCAL_SCORERS[identifier]()
    if identifier in REMOTE_METRIC_IDS:
        if sidecar is None:
            raise MetricError(f"scorer {identifier!r} needs a sidecar client")
        metric = REMOTE_METRIC_IDS[identifier]

        def score(candidate: str, reference: str, _m=metric) -> float:
            return sidecar.similarity([(candidate, reference)], _m)[0]

        return SimilarityScorer(identifier, "remote", score)
    raise MetricError(f"unknown similarity scorer: {identifier!r}")
