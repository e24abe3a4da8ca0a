"""Experiment runner: corpora in, before/after-ranking report out.

For every test MR the runner selects demonstrations, builds a prompt,
generates a candidate pool, scores every candidate, and keeps the ranking
function's argmax. Before-ranking (BR) aggregates average over the whole
pool; after-ranking (AR) aggregates average over the selected candidates
only. All generation traffic can be logged to a replay file and re-scored
offline with a different ranking function.
"""

from __future__ import annotations

import csv
import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from stylenlg.backend import (
    BackendError,
    GenerationRequest,
    MockBackend,
    NgramFluency,
    NoiseSpec,
    RemoteCompletionBackend,
    SidecarFluency,
    constant_fluency,
    make_candidates,
)
from stylenlg.linearize import linearize
from stylenlg.metrics import CorpusBleu, MetricError, get_scorer, pearson
from stylenlg.mr import MRParseError, Personality, parse_mr, serialize_mr
from stylenlg.prompts import (
    D2T,
    TST,
    Demonstration,
    PromptError,
    PromptSpec,
    build_prompt,
    extract_completion,
    select_examples,
)
from stylenlg.ranking import CandidateScore, RankingFunction, ScorerSuite, rank, score_candidate
from stylenlg.remote import SidecarClient
from stylenlg.style import make_local_classifier

log = logging.getLogger(__name__)

STOP_SEQUENCES = {TST: ("}",), D2T: ("\n\n",)}


class DatasetError(ValueError):
    """A corpus file is unreadable or too broken to trust."""


class ConfigError(ValueError):
    """An experiment config is inconsistent or incomplete."""


def load_dataset(path: str | Path, max_malformed_ratio: float = 0.1) -> list[Demonstration]:
    """Read a corpus CSV with columns mr, ref, personality.

    Malformed rows are logged with their line number and skipped; more than
    ``max_malformed_ratio`` of them aborts the load.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is None or not {"mr", "ref", "personality"} <= set(reader.fieldnames):
        raise DatasetError(f"{path} needs header columns mr, ref, personality")
    demonstrations: list[Demonstration] = []
    malformed = 0
    total = 0
    for line_no, row in enumerate(reader, start=2):
        total += 1
        try:
            mr = parse_mr(row["mr"])
            reference = (row["ref"] or "").strip()
            if not reference:
                raise MRParseError("empty reference text")
            label = (row["personality"] or "").strip()
            personality = Personality.parse(label) if label else mr.target_personality
            demonstrations.append(
                Demonstration(
                    mr=mr.with_personality(None),
                    reference=reference,
                    personality=personality,
                )
            )
        except (MRParseError, PromptError, ValueError) as exc:
            malformed += 1
            log.warning("%s line %d skipped: %s", path.name, line_no, exc)
    if total == 0:
        raise DatasetError(f"{path} has no data rows")
    if malformed > max_malformed_ratio * total:
        raise DatasetError(f"{path}: {malformed}/{total} rows malformed, aborting")
    if malformed:
        log.warning("%s: skipped %d of %d rows", path.name, malformed, total)
    return demonstrations


@dataclass
class ExperimentConfig:
    train_path: str
    test_path: str
    format: str = TST
    k: int = 10
    personality: str = "specific"  # "specific" (per-item target) | "all" | one label
    sampling: str = "random"
    rf: str = "RF2"
    n: int = 10
    seed: int = 0
    backend: str = "mock"  # mock | remote | replay
    endpoint: str = ""
    replay_path: str = ""
    classifier: str = "local"  # local | remote | uniform
    fluency: str = "ngram"  # ngram | constant | sidecar
    similarity: str = "pbleu"
    sidecar_url: str = ""
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    max_items: int = 0  # 0 means the whole test set
    workers: int = 1
    outdir: str = ""

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.backend not in ("mock", "remote", "replay"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.backend == "remote" and not self.endpoint:
            raise ConfigError("remote backend needs an endpoint")
        if self.backend == "replay" and not self.replay_path:
            raise ConfigError("replay backend needs a replay_path")


_NOISE_KEYS = {"noise.p_drop", "noise.p_substitute", "noise.p_hallucinate", "noise.p_marker"}


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse the flat "key = value" config format, '#' for comments."""
    raw: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    if overrides:
        raw.update({k: str(v) for k, v in overrides.items() if v is not None})
    return config_from_mapping(raw)


def config_from_mapping(raw: dict[str, str]) -> ExperimentConfig:
    noise_kwargs = {}
    for key in _NOISE_KEYS:
        if key in raw:
            noise_kwargs[key.split(".", 1)[1]] = float(raw[key])
    known = {
        "train": "train_path",
        "test": "test_path",
        "format": "format",
        "k": "k",
        "personality": "personality",
        "sampling": "sampling",
        "rf": "rf",
        "n": "n",
        "seed": "seed",
        "backend": "backend",
        "endpoint": "endpoint",
        "replay": "replay_path",
        "classifier": "classifier",
        "fluency": "fluency",
        "similarity": "similarity",
        "sidecar": "sidecar_url",
        "max_items": "max_items",
        "workers": "workers",
        "outdir": "outdir",
    }
    kwargs: dict = {}
    for key, value in raw.items():
        if key in _NOISE_KEYS:
            continue
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[known[key]] = value
    for int_key in ("k", "n", "seed", "max_items", "workers"):
        if int_key in kwargs:
            kwargs[int_key] = int(kwargs[int_key])
    if "train_path" not in kwargs or "test_path" not in kwargs:
        raise ConfigError("config needs train and test paths")
    return ExperimentConfig(noise=NoiseSpec(**noise_kwargs), **kwargs)


@dataclass
class ItemResult:
    index: int
    mr_line: str
    target: Personality
    prompt: str
    completions: list[str]
    scores: list[CandidateScore]
    selected: int


@dataclass
class ExperimentReport:
    sacc_br: float
    sacc_ar: float
    pac_br: float
    pac_ar: float
    perfect_br: float
    perfect_ar: float
    corpus_pbleu_ar: float
    items: int
    excluded: int
    ranking_function: str
    seed: int
    per_item: list[dict]

    def aggregates(self) -> dict:
        return {
            "SACC_BR": self.sacc_br,
            "SACC_AR": self.sacc_ar,
            "PAC_BR": self.pac_br,
            "PAC_AR": self.pac_ar,
            "Perfect_BR": self.perfect_br,
            "Perfect_AR": self.perfect_ar,
            "corpus_pBLEU_AR": self.corpus_pbleu_ar,
        }

    def to_json(self) -> str:
        payload = {
            "aggregates": self.aggregates(),
            "items": self.items,
            "excluded": self.excluded,
            "candidates_per_item": None if not self.per_item else len(self.per_item[0]["sacc"]),
            "ranking_function": self.ranking_function,
            "seed": self.seed,
            "per_item": self.per_item,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _build_scorer_suite(config: ExperimentConfig, train_pool: list[Demonstration]) -> ScorerSuite:
    sidecar = SidecarClient(config.sidecar_url) if config.sidecar_url else None

    if config.classifier == "local":
        classifier = make_local_classifier()
    elif config.classifier == "uniform":
        from stylenlg.style import StyleDistribution

        classifier = lambda text: StyleDistribution.uniform()  # noqa: E731
    elif config.classifier == "remote":
        if sidecar is None:
            raise ConfigError("remote classifier needs a sidecar url")
        from stylenlg.style import classify_remote

        classifier = lambda text: classify_remote([text], sidecar)[0]  # noqa: E731
    else:
        raise ConfigError(f"unknown classifier {config.classifier!r}")

    if config.fluency == "ngram":
        fluency = NgramFluency().train([d.reference for d in train_pool])
    elif config.fluency == "constant":
        fluency = constant_fluency()
    elif config.fluency == "sidecar":
        if sidecar is None:
            raise ConfigError("sidecar fluency needs a sidecar url")
        fluency = SidecarFluency(sidecar)
    else:
        raise ConfigError(f"unknown fluency provider {config.fluency!r}")

    similarity = {}
    for entry in config.similarity.split(","):
        entry = entry.strip()
        if not entry:
            continue
        if "=" in entry:
            term, _, scorer_id = entry.partition("=")
            term, scorer_id = term.strip(), scorer_id.strip()
        else:
            scorer_id = entry
            term = {
                "pbleu": "pbleu",
                "bbleu": "pbbleu",
                "bleurt": "pbleurt",
                "bertscore-precision": "pbert",
                "bertscore-recall": "pbert",
                "bertscore-f1": "pbert",
            }.get(scorer_id)
            if term is None:
                raise ConfigError(f"scorer {scorer_id!r} needs an explicit term=scorer mapping")
        similarity[term] = get_scorer(scorer_id, sidecar)
    return ScorerSuite(classifier=classifier, fluency=fluency, similarity=similarity)


def _load_replay(path: str | Path) -> dict[int, dict]:
    rows: dict[int, dict] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        rows[row["item"]] = row
    return rows


def _item_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    train_pool = load_dataset(config.train_path)
    test_pool = load_dataset(config.test_path)
    if config.max_items:
        test_pool = test_pool[: config.max_items]
    rf = RankingFunction.parse(config.rf)
    suite = _build_scorer_suite(config, train_pool)
    stops = STOP_SEQUENCES[config.format]

    mock = MockBackend(config.noise, config.seed) if config.backend == "mock" else None
    remote = (
        RemoteCompletionBackend(config.endpoint) if config.backend == "remote" else None
    )
    replay = _load_replay(config.replay_path) if config.backend == "replay" else None

    fixed_personality: Personality | None = None
    if config.personality not in ("specific", "all"):
        fixed_personality = Personality.parse(config.personality)

    def target_personality(index: int, demo: Demonstration) -> Personality:
        if fixed_personality is not None:
            return fixed_personality
        if demo.personality is not None:
            return demo.personality
        return list(Personality)[index % 5]

    def process(index: int, demo: Demonstration) -> ItemResult | None:
        target = target_personality(index, demo)
        target_mr = demo.mr.with_personality(target)
        spec = PromptSpec(
            format=config.format,
            k=config.k,
            personality=None if config.personality == "all" else target,
            sampling=config.sampling,
            seed=_item_seed(config.seed, index),
        )
        examples = select_examples(train_pool, spec)
        prompt = build_prompt(examples, target_mr, config.format)
        try:
            if mock is not None:
                candidates = mock.generate_for_mr(
                    demo.mr, target, config.n, _item_seed(config.seed, index), prompt_id=str(index)
                )
            elif remote is not None:
                request = GenerationRequest(prompt=prompt, n=config.n, stop_sequences=stops)
                candidates = remote.generate(request, prompt_id=str(index))
            else:
                row = replay.get(index) if replay else None
                if row is None:
                    raise BackendError(f"replay log has no item {index}")
                request = GenerationRequest(prompt=prompt, n=config.n, stop_sequences=stops)
                candidates = make_candidates(row["completions"], request, str(index), "replay")
        except BackendError as exc:
            log.warning("item %d excluded: %s", index, exc)
            return None
        pseudo = linearize(demo.mr)
        scores = []
        for candidate in candidates:
            text = extract_completion(candidate.text, config.format)
            scores.append(
                score_candidate(text, demo.mr, target, suite, pseudo, index=candidate.index)
            )
        ranked = rank(scores, rf)
        selected = ranked[0].index
        return ItemResult(
            index=index,
            mr_line=serialize_mr(demo.mr),
            target=target,
            prompt=prompt,
            completions=[c.raw_completion for c in candidates],
            scores=scores,
            selected=selected,
        )

    indexed = list(enumerate(test_pool))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda pair: process(*pair), indexed))
    else:
        results = [process(i, d) for i, d in indexed]

    items = [r for r in results if r is not None]
    excluded = len(results) - len(items)
    if not items:
        raise DatasetError("every test item was excluded; nothing to report")

    report = _aggregate(items, rf, config.seed, excluded)
    if config.outdir:
        _write_outputs(Path(config.outdir), config, items, report)
    return report


def _clamped(value: float) -> float:
    return max(value, 0.0)


def _aggregate(
    items: list[ItemResult], rf: RankingFunction, seed: int, excluded: int
) -> ExperimentReport:
    all_scores: list[CandidateScore] = []
    selected_scores: list[CandidateScore] = []
    per_item: list[dict] = []
    corpus = CorpusBleu()
    for item in items:
        all_scores.extend(item.scores)
        chosen = next(s for s in item.scores if s.index == item.selected)
        selected_scores.append(chosen)
        per_item.append(
            {
                "index": item.index,
                "mr": item.mr_line,
                "personality": item.target.value,
                "selected": item.selected,
                "selected_text": chosen.text,
                "sacc": [s.sacc for s in item.scores],
                "pac_prob": [s.pac_prob for s in item.scores],
                "argmax_match": [s.argmax_personality is item.target for s in item.scores],
            }
        )
        corpus.add(chosen.text or " ", [linearize(parse_mr(item.mr_line))])

    def mean(values: list[float]) -> float:
        return sum(values) / len(values)

    def perfect(score: CandidateScore, target_match: bool) -> bool:
        return score.alignment is not None and score.alignment.is_perfect() and target_match

    all_matches = [
        match for item in items for match in
        ((s.argmax_personality is item.target) for s in item.scores)
    ]
    selected_matches = [
        selected.argmax_personality is item.target
        for item, selected in zip(items, selected_scores)
    ]
    all_perfect = []
    for item in items:
        for s in item.scores:
            all_perfect.append(perfect(s, s.argmax_personality is item.target))
    selected_perfect = [
        perfect(s, match) for s, match in zip(selected_scores, selected_matches)
    ]

    return ExperimentReport(
        sacc_br=mean([_clamped(s.sacc) for s in all_scores]),
        sacc_ar=mean([_clamped(s.sacc) for s in selected_scores]),
        pac_br=mean([1.0 if m else 0.0 for m in all_matches]),
        pac_ar=mean([1.0 if m else 0.0 for m in selected_matches]),
        perfect_br=mean([1.0 if p else 0.0 for p in all_perfect]),
        perfect_ar=mean([1.0 if p else 0.0 for p in selected_perfect]),
        corpus_pbleu_ar=corpus.score(),
        items=len(items),
        excluded=excluded,
        ranking_function=rf.name,
        seed=seed,
        per_item=per_item,
    )


def _write_outputs(
    outdir: Path, config: ExperimentConfig, items: list[ItemResult], report: ExperimentReport
) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_text(report.to_json(), encoding="utf-8")
    with (outdir / "report.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", "value"])
        for name, value in report.aggregates().items():
            if name.startswith("corpus"):
                writer.writerow([name, f"{value:.4f}"])
            else:
                writer.writerow([name, f"{value * 100:.2f}%"])
        writer.writerow(["items", report.items])
        writer.writerow(["excluded", report.excluded])
    if config.backend != "replay":
        with (outdir / "replay.jsonl").open("w", encoding="utf-8") as handle:
            for item in items:
                handle.write(
                    json.dumps(
                        {
                            "item": item.index,
                            "mr": item.mr_line,
                            "personality": item.target.value,
                            "prompt": item.prompt,
                            "completions": item.completions,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
    with (outdir / "candidates.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["item", "candidate", "text", "sacc", "pac_prob", "fluency", "pbleu", "rank_selected"]
        )
        for item in items:
            for score in item.scores:
                writer.writerow(
                    [
                        item.index,
                        score.index,
                        score.text,
                        f"{score.sacc:.6f}",
                        f"{score.pac_prob:.6f}",
                        f"{score.fluency:.6f}",
                        "" if score.pbleu is None else f"{score.pbleu:.6f}",
                        1 if score.index == item.selected else 0,
                    ]
                )


def correlation_study(scores: list[CandidateScore]) -> dict[str, float | None]:
    """Pearson r of each available similarity metric against semantic accuracy.

    Metrics with zero variance (or too few points) report None: undefined.
    """
    if not scores:
        raise MetricError("correlation study needs a nonempty pool")
    sacc_column = [s.sacc for s in scores]
    table: dict[str, float | None] = {}
    for term in ("pbleu", "pbbleu", "pbleurt", "pbert"):
        column = [getattr(s, term) for s in scores]
        if any(v is None for v in column):
            continue
        try:
            table[term] = pearson(column, sacc_column)
        except MetricError:
            table[term] = None
    return table


def paired_bootstrap(
    xs: list[float], ys: list[float], iterations: int = 2000, seed: int = 0
) -> float:
    """Two-sided paired bootstrap p-value for the mean difference of two systems.

    This is this artifact's choice of significance test over per-item metrics.
    """
    if len(xs) != len(ys) or not xs:
        raise MetricError("paired bootstrap needs two equal-length nonempty lists")
    rng = random.Random(seed)
    diffs = [x - y for x, y in zip(xs, ys)]
    observed = sum(diffs) / len(diffs)
    if observed == 0:
        return 1.0
    extreme = 0
    for _ in range(iterations):
        sample = [diffs[rng.randrange(len(diffs))] for _ in diffs]
        mean = sum(sample) / len(sample)
        # Count resamples whose mean flips sign relative to the observation.
        if (observed > 0 and mean <= 0) or (observed < 0 and mean >= 0):
            extreme += 1
    return min(1.0, 2 * extreme / iterations)
