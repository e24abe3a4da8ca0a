"""Few-shot prompt construction for the two prompt formats.

D2T prompts demonstrate generating straight from an MR line tagged with a
personality; TST prompts instruct a rewrite of the MR's pseudo-reference in
the named personality style. Example selection is either seeded-uniform or
diversity-promoting (greedy lowest mean pairwise similarity).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from stylenlg.linearize import linearize
from stylenlg.metrics import bleu
from stylenlg.mr import MeaningRepresentation, Personality, serialize_mr

D2T = "d2t"
TST = "tst"
MAX_EXAMPLES = 36


class PromptError(ValueError):
    """A prompt cannot be built from the given inputs."""


class InsufficientPoolError(PromptError):
    """The demonstration pool is too small for the requested selection."""


@dataclass(frozen=True)
class Demonstration:
    """An (MR, reference, personality) triple used as a prompt example."""

    mr: MeaningRepresentation
    reference: str
    personality: Personality | None
    pseudo_reference: str = field(default="")

    def __post_init__(self) -> None:
        expected = linearize(self.mr)
        if not self.pseudo_reference:
            object.__setattr__(self, "pseudo_reference", expected)
        elif self.pseudo_reference != expected:
            raise PromptError("cached pseudo-reference disagrees with the linearizer")


@dataclass(frozen=True)
class PromptSpec:
    """Everything that determines a prompt given a pool: format, size, sampling."""

    format: str
    k: int
    personality: Personality | None  # None means examples of all five
    sampling: str = "random"
    seed: int = 0
    target_mr: MeaningRepresentation | None = None

    def __post_init__(self) -> None:
        if self.format not in (D2T, TST):
            raise PromptError(f"unknown prompt format {self.format!r}")
        if not 1 <= self.k <= MAX_EXAMPLES:
            raise PromptError(f"k must be in 1..{MAX_EXAMPLES}, got {self.k}")
        if self.personality is None and self.k % 5 != 0:
            raise PromptError("all-personalities mode needs k divisible by 5")
        if self.sampling not in ("random", "diverse"):
            raise PromptError(f"unknown sampling strategy {self.sampling!r}")


def _mr_line(mr: MeaningRepresentation, personality: Personality) -> str:
    tagged = mr.with_personality(personality)
    return serialize_mr(tagged)


def build_d2t_prompt(
    examples: Sequence[Demonstration], target: MeaningRepresentation
) -> str:
    """Render example (MR line, reference) blocks and a referenceless target line."""
    if target.target_personality is None:
        raise PromptError("target MR needs a personality for a D2T prompt")
    blocks = []
    for d in examples:
        if d.personality is None:
            raise PromptError("every D2T example needs a personality")
        blocks.append(f"{_mr_line(d.mr, d.personality)}\n{d.reference}")
    blocks.append(serialize_mr(target))
    return "\n\n".join(blocks)


def build_tst_prompt(
    examples: Sequence[Demonstration], target: MeaningRepresentation
) -> str:
    """Render rewrite-instruction blocks; the target block stops at its open brace."""
    if target.target_personality is None:
        raise PromptError("target MR needs a personality for a TST prompt")
    blocks = []
    for d in examples:
        if d.personality is None:
            raise PromptError("every TST example needs a personality")
        blocks.append(
            f"Here is some text: {{{d.pseudo_reference}}}. "
            f"Here is a rewrite of the text which is {d.personality.value} : "
            f"{{{d.reference}}}."
        )
    pseudo = linearize(target.with_personality(None))
    blocks.append(
        f"Here is some text: {{{pseudo}}}. "
        f"Here is a rewrite of the text which is {target.target_personality.value} : {{"
    )
    return "\n\n".join(blocks)


def build_prompt(
    examples: Sequence[Demonstration],
    target: MeaningRepresentation,
    format: str,
) -> str:
    if format == D2T:
        return build_d2t_prompt(examples, target)
    if format == TST:
        return build_tst_prompt(examples, target)
    raise PromptError(f"unknown prompt format {format!r}")


def extract_completion(raw: str, format: str) -> str:
    """Cut a raw model completion at the format's delimiter.

    TST completions stop at the first unescaped "}"; D2T completions stop at
    the first blank line. Extraction is idempotent.
    """
    if format == TST:
        for i, ch in enumerate(raw):
            if ch == "}" and (i == 0 or raw[i - 1] != "\\"):
                return raw[:i].strip()
        return raw.strip()
    if format == D2T:
        lines = raw.splitlines()
        kept: list[str] = []
        for line in lines:
            if kept and not line.strip():
                break
            if line.strip() or kept:
                kept.append(line)
        return "\n".join(kept).strip()
    raise PromptError(f"unknown prompt format {format!r}")


def _filtered_pool(
    pool: Sequence[Demonstration], personality: Personality | None
) -> list[Demonstration]:
    if personality is None:
        return list(pool)
    return [d for d in pool if d.personality is personality]


def select_random(pool: Sequence[Demonstration], spec: PromptSpec) -> list[Demonstration]:
    """Pick k examples uniformly without replacement, reproducibly from the seed.

    All-personalities mode draws k/5 per personality, in a fixed personality
    order, so every prompt is balanced.
    """
    rng = random.Random(spec.seed)
    if spec.personality is not None:
        candidates = _filtered_pool(pool, spec.personality)
        if len(candidates) < spec.k:
            raise InsufficientPoolError(
                f"pool has {len(candidates)} {spec.personality.value} items, need {spec.k}"
            )
        return rng.sample(candidates, spec.k)
    per = spec.k // 5
    chosen: list[Demonstration] = []
    for p in Personality:
        candidates = _filtered_pool(pool, p)
        if len(candidates) < per:
            raise InsufficientPoolError(
                f"pool has {len(candidates)} {p.value} items, need {per}"
            )
        chosen.extend(rng.sample(candidates, per))
    return chosen


PairSimilarity = Callable[[str, str], float]


def reference_bleu_similarity(a: str, b: str) -> float:
    """Default local stand-in for a neural pair scorer: sentence BLEU."""
    return bleu(a, [b])


def select_diverse(
    pool: Sequence[Demonstration],
    k: int,
    similarity: PairSimilarity | None = None,
    seed: int = 0,
) -> list[Demonstration]:
    """Greedy diversity-promoting selection.

    The first example is a seeded-uniform draw; each later pick is the pool
    item with the lowest mean similarity to everything already selected, with
    ties broken by pool order.
    """
    if similarity is None:
        similarity = reference_bleu_similarity
    if len(pool) < k:
        raise InsufficientPoolError(f"pool has {len(pool)} items, need {k}")
    rng = random.Random(seed)
    remaining = list(pool)
    selected = [remaining.pop(rng.randrange(len(remaining)))]
    while len(selected) < k:
        best_idx = 0
        best_mean: float | None = None
        for idx, cand in enumerate(remaining):
            mean = sum(
                similarity(cand.reference, s.reference) for s in selected
            ) / len(selected)
            if best_mean is None or mean < best_mean:
                best_mean = mean
                best_idx = idx
        selected.append(remaining.pop(best_idx))
    return selected


def select_examples(pool: Sequence[Demonstration], spec: PromptSpec) -> list[Demonstration]:
    """Dispatch on the spec's sampling strategy, honoring the personality mode."""
    if spec.sampling == "random":
        return select_random(pool, spec)
    if spec.personality is not None:
        candidates = _filtered_pool(pool, spec.personality)
        return select_diverse(candidates, spec.k, seed=spec.seed)
    per = spec.k // 5
    chosen: list[Demonstration] = []
    for offset, p in enumerate(Personality):
        candidates = _filtered_pool(pool, p)
        chosen.extend(select_diverse(candidates, per, seed=spec.seed + offset))
    return chosen


def spec_for_target(spec: PromptSpec, target: MeaningRepresentation) -> PromptSpec:
    return replace(spec, target_mr=target)
