"""Ranking functions over per-candidate scores.

A candidate's quality decomposes into semantic accuracy, the probability of
the target personality, and fluency; the five ranking functions multiply
subsets of these with pseudo-reference similarity metrics:

    RF1 = sacc * pac * fluency          RF2 = RF1 * pbleu
    RF3 = pbbleu * pac * fluency        RF4 = pbleurt * pac * fluency
    RF5 = pbert * pac * fluency

Probabilities are floored at 1e-12 before multiplication so underflow cannot
manufacture ties, and similarity/sacc factors are floored at 0 so products
stay sign-consistent; reported values remain unclamped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from stylenlg.metrics import (
    SimilarityScorer,
    SlotAlignment,
    ValueLexicon,
    align_slots,
    sacc,
)
from stylenlg.mr import MeaningRepresentation, Personality
from stylenlg.style import Classifier

PROB_FLOOR = 1e-12


class RankingError(ValueError):
    """A ranking function referenced a score term that is not present."""


@dataclass(frozen=True)
class CandidateScore:
    """Every measured term for one candidate; similarity terms are optional."""

    sacc: float
    pac_prob: float
    fluency: float
    pbleu: float | None = None
    pbbleu: float | None = None
    pbleurt: float | None = None
    pbert: float | None = None
    index: int = 0
    text: str = ""
    alignment: SlotAlignment | None = None
    sacc_exact: Fraction | None = None
    argmax_personality: Personality | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.pac_prob <= 1:
            raise ValueError(f"pac_prob must be in [0, 1], got {self.pac_prob}")
        if not 0 < self.fluency <= 1:
            raise ValueError(f"fluency must be in (0, 1], got {self.fluency}")

    def term(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise RankingError(f"score is missing the {name!r} term")
        return value


class RankingFunction(enum.Enum):
    """The five published score products, keyed by their term lists."""

    RF1 = ("sacc", "pac_prob", "fluency")
    RF2 = ("sacc", "pac_prob", "fluency", "pbleu")
    RF3 = ("pbbleu", "pac_prob", "fluency")
    RF4 = ("pbleurt", "pac_prob", "fluency")
    RF5 = ("pbert", "pac_prob", "fluency")

    @property
    def terms(self) -> tuple[str, ...]:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "RankingFunction":
        try:
            return cls[name.upper()]
        except KeyError:
            raise RankingError(f"unknown ranking function {name!r}") from None


def rf_value(score: CandidateScore, rf: RankingFunction) -> float:
    """Evaluate a ranking function on one candidate's score."""
    product = 1.0
    for term in rf.terms:
        value = score.term(term)
        if term in ("pac_prob", "fluency"):
            value = max(value, PROB_FLOOR)
        else:
            value = max(value, 0.0)
        product *= value
    return product


def rank(
    candidates: Sequence[CandidateScore], rf: RankingFunction
) -> list[CandidateScore]:
    """Order candidates by descending RF value.

    Ties break toward higher semantic accuracy, then lower generation index,
    so the ordering is total and deterministic.
    """
    if not candidates:
        raise RankingError("cannot rank an empty pool")
    values = [rf_value(c, rf) for c in candidates]  # raises before sorting if a term is absent
    keyed = sorted(
        zip(values, candidates), key=lambda vc: (-vc[0], -vc[1].sacc, vc[1].index)
    )
    return [c for _, c in keyed]


def select_best(
    candidates: Sequence[CandidateScore], rf: RankingFunction
) -> CandidateScore:
    return rank(candidates, rf)[0]


@dataclass
class ScorerSuite:
    """The scorers a candidate is measured with.

    ``similarity`` maps term names (pbleu, pbbleu, pbleurt, pbert) to pair
    scorers applied against the MR's pseudo-reference.
    """

    classifier: Classifier
    fluency: Callable[[str], float]
    similarity: dict[str, SimilarityScorer]
    lexicon: ValueLexicon | None = None


def score_candidate(
    text: str,
    mr: MeaningRepresentation,
    target_personality: Personality,
    scorers: ScorerSuite,
    pseudo_reference: str,
    index: int = 0,
) -> CandidateScore:
    """Measure one candidate against its MR and target personality."""
    alignment = align_slots(text, mr, scorers.lexicon)
    exact = sacc(alignment)
    distribution = scorers.classifier(text)
    similarity_terms: dict[str, float | None] = {
        "pbleu": None,
        "pbbleu": None,
        "pbleurt": None,
        "pbert": None,
    }
    for term, scorer in scorers.similarity.items():
        if term not in similarity_terms:
            raise RankingError(f"unknown similarity term {term!r}")
        similarity_terms[term] = scorer(text, pseudo_reference)
    return CandidateScore(
        sacc=float(exact),
        pac_prob=distribution[target_personality],
        fluency=scorers.fluency(text),
        index=index,
        text=text,
        alignment=alignment,
        sacc_exact=exact,
        argmax_personality=distribution.argmax(),
        **similarity_terms,
    )
