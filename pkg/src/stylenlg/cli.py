"""Command-line interface: corpus validation through full experiment runs."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from stylenlg.backend import GenerationRequest, MockBackend, RemoteCompletionBackend
from stylenlg.experiment import (
    STOP_SEQUENCES,
    ExperimentConfig,
    _build_scorer_suite,
    _item_seed,
    _load_replay,
    correlation_study,
    load_config,
    load_dataset,
    run_experiment,
)
from stylenlg.linearize import linearize
from stylenlg.mr import Personality, parse_mr, serialize_mr
from stylenlg.prompts import PromptSpec, build_prompt, extract_completion, select_examples
from stylenlg.ranking import CandidateScore, RankingFunction, rank, score_candidate


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="key = value experiment config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--backend", default=None, choices=["mock", "remote", "replay"])
    parser.add_argument("--rf", default=None, help="ranking function RF1..RF5")
    parser.add_argument("--format", default=None, choices=["d2t", "tst"])
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--personality", default=None)
    parser.add_argument("--sampling", default=None, choices=["random", "diverse"])
    parser.add_argument("--outdir", default=None)
    parser.add_argument("--max-items", type=int, default=None, dest="max_items")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "seed": args.seed,
        "backend": args.backend,
        "rf": args.rf,
        "format": args.format,
        "k": args.k,
        "personality": args.personality,
        "sampling": args.sampling,
        "outdir": args.outdir,
        "max_items": args.max_items,
    }
    return load_config(args.config, overrides)


def cmd_parse(args: argparse.Namespace) -> int:
    demonstrations = load_dataset(args.corpus)
    print(f"{args.corpus}: {len(demonstrations)} valid rows")
    return 0


def cmd_linearize(args: argparse.Namespace) -> int:
    if args.mr:
        lines = [args.mr]
    else:
        lines = [
            row["mr"]
            for row in csv.DictReader(Path(args.file).read_text(encoding="utf-8").splitlines())
        ]
    for line in lines:
        print(linearize(parse_mr(line)))
    return 0


def cmd_prompt(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    train = load_dataset(config.train_path)
    test = load_dataset(config.test_path)
    if config.max_items:
        test = test[: config.max_items]
    outdir = Path(config.outdir or "prompts")
    outdir.mkdir(parents=True, exist_ok=True)
    for index, demo in enumerate(test):
        target = demo.personality or list(Personality)[index % 5]
        spec = PromptSpec(
            format=config.format,
            k=config.k,
            personality=None if config.personality == "all" else target,
            sampling=config.sampling,
            seed=_item_seed(config.seed, index),
        )
        examples = select_examples(train, spec)
        prompt = build_prompt(examples, demo.mr.with_personality(target), config.format)
        (outdir / f"prompt_{index:04d}.txt").write_text(prompt, encoding="utf-8")
    print(f"wrote {len(test)} prompts to {outdir}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    train = load_dataset(config.train_path)
    test = load_dataset(config.test_path)
    if config.max_items:
        test = test[: config.max_items]
    outdir = Path(config.outdir or "out")
    outdir.mkdir(parents=True, exist_ok=True)
    mock = MockBackend(config.noise, config.seed) if config.backend == "mock" else None
    remote = RemoteCompletionBackend(config.endpoint) if config.backend == "remote" else None
    stops = STOP_SEQUENCES[config.format]
    with (outdir / "replay.jsonl").open("w", encoding="utf-8") as handle:
        for index, demo in enumerate(test):
            target = demo.personality or list(Personality)[index % 5]
            spec = PromptSpec(
                format=config.format,
                k=config.k,
                personality=None if config.personality == "all" else target,
                sampling=config.sampling,
                seed=_item_seed(config.seed, index),
            )
            examples = select_examples(train, spec)
            prompt = build_prompt(examples, demo.mr.with_personality(target), config.format)
            if mock is not None:
                candidates = mock.generate_for_mr(
                    demo.mr, target, config.n, _item_seed(config.seed, index), str(index)
                )
            else:
                request = GenerationRequest(prompt=prompt, n=config.n, stop_sequences=stops)
                candidates = remote.generate(request, prompt_id=str(index))
            handle.write(
                json.dumps(
                    {
                        "item": index,
                        "mr": serialize_mr(demo.mr),
                        "personality": target.value,
                        "prompt": prompt,
                        "completions": [c.raw_completion for c in candidates],
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    print(f"wrote replay log to {outdir / 'replay.jsonl'}")
    return 0


def _score_replay(config: ExperimentConfig, replay_path: str) -> list[tuple[int, CandidateScore]]:
    train = load_dataset(config.train_path)
    suite = _build_scorer_suite(config, train)
    scored: list[tuple[int, CandidateScore]] = []
    for index, row in sorted(_load_replay(replay_path).items()):
        mr = parse_mr(row["mr"])
        target = Personality.parse(row["personality"])
        pseudo = linearize(mr)
        for i, raw in enumerate(row["completions"]):
            text = extract_completion(raw, config.format)
            scored.append(
                (index, score_candidate(text, mr, target, suite, pseudo, index=i))
            )
    return scored


def cmd_score(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    replay_path = args.replay or config.replay_path
    if not replay_path:
        print("score needs --replay or a replay path in the config", file=sys.stderr)
        return 2
    scored = _score_replay(config, replay_path)
    writer = csv.writer(sys.stdout)
    writer.writerow(["item", "candidate", "sacc", "pac_prob", "fluency", "pbleu", "text"])
    for item, score in scored:
        writer.writerow(
            [
                item,
                score.index,
                f"{score.sacc:.6f}",
                f"{score.pac_prob:.6f}",
                f"{score.fluency:.6f}",
                "" if score.pbleu is None else f"{score.pbleu:.6f}",
                score.text,
            ]
        )
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    replay_path = args.replay or config.replay_path
    if not replay_path:
        print("rank needs --replay or a replay path in the config", file=sys.stderr)
        return 2
    rf = RankingFunction.parse(config.rf)
    scored = _score_replay(config, replay_path)
    by_item: dict[int, list[CandidateScore]] = {}
    for item, score in scored:
        by_item.setdefault(item, []).append(score)
    writer = csv.writer(sys.stdout)
    writer.writerow(["item", "rank", "candidate", "rf_value", "sacc", "text"])
    from stylenlg.ranking import rf_value

    for item in sorted(by_item):
        for position, score in enumerate(rank(by_item[item], rf)):
            writer.writerow(
                [
                    item,
                    position,
                    score.index,
                    f"{rf_value(score, rf):.6g}",
                    f"{score.sacc:.6f}",
                    score.text,
                ]
            )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = run_experiment(config)
    for name, value in report.aggregates().items():
        if name.startswith("corpus"):
            print(f"{name}: {value:.4f}")
        else:
            print(f"{name}: {value * 100:.2f}%")
    print(f"items: {report.items}  excluded: {report.excluded}")
    if config.outdir:
        print(f"outputs in {config.outdir}")
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    replay_path = args.replay or config.replay_path
    if not replay_path:
        print("correlate needs --replay or a replay path in the config", file=sys.stderr)
        return 2
    scored = [score for _, score in _score_replay(config, replay_path)]
    for metric, value in correlation_study(scored).items():
        print(f"{metric}: {'undefined' if value is None else f'{value:.4f}'}")
    return 0


def cmd_select_examples(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    train = load_dataset(config.train_path)
    personality = None
    if config.personality not in ("all", "specific"):
        personality = Personality.parse(config.personality)
    spec = PromptSpec(
        format=config.format,
        k=config.k,
        personality=personality,
        sampling=config.sampling,
        seed=config.seed,
    )
    for demo in select_examples(train, spec):
        label = demo.personality.value if demo.personality else "-"
        print(f"[{label}] {serialize_mr(demo.mr)}  ->  {demo.reference}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylenlg",
        description="Personality-styled data-to-text generation with overgenerate-and-rank.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate a corpus file")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("linearize", help="print pseudo-references")
    p.add_argument("mr", nargs="?", help="an MR line")
    p.add_argument("--file", help="corpus CSV to linearize instead")
    p.set_defaults(func=cmd_linearize)

    for name, func, needs_replay in [
        ("prompt", cmd_prompt, False),
        ("generate", cmd_generate, False),
        ("score", cmd_score, True),
        ("rank", cmd_rank, True),
        ("run", cmd_run, False),
        ("correlate", cmd_correlate, True),
        ("select-examples", cmd_select_examples, False),
    ]:
        p = sub.add_parser(name)
        _add_config_arguments(p)
        if needs_replay:
            p.add_argument("--replay", default=None, help="replay log to re-score")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
