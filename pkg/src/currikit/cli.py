"""Command-line entry point.

Subcommands: compile, audit, stats, prompts, bleu, signif, aggregate.
Every subcommand is deterministic given its flags and seed, and the
evaluation subcommands need no compiled corpus.
"""

from __future__ import annotations

import argparse
import json
import sys

from .corpus import load_corpus_config, read_parallel, corpus_stats
from .evaluate import (
    ResultTable,
    aggregate,
    bleu,
    build_prompts,
    paired_bootstrap,
    read_lines,
)
from .pipeline import compile_corpus
from .schedule import Strategy
from .shards import audit_shards, shard_stats
from .tokenizer import resolve_spec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="currikit",
        description="Compile block curricula for continual pretraining and "
        "score translation output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a corpus into a block schedule on disk")
    p.add_argument("--config", required=True, help="corpus configuration JSON")
    p.add_argument(
        "--strategy", required=True, choices=[s.value for s in Strategy]
    )
    p.add_argument("--budget-tokens", required=True, type=int)
    p.add_argument("--batch-blocks", type=int, default=8,
                   help="blocks per optimizer step (8 or 16 in the studied regimes)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--tokenizer", default="byte_fallback",
                   help="'byte_fallback' or a vocabulary file path")
    p.add_argument("--labels", choices=("name", "code"), default="name",
                   help="segment label style for parallel formatting")
    p.add_argument("--languages", default=None,
                   help="comma-separated ISO codes (default: inferred from config)")

    p = sub.add_parser("audit", help="re-verify a compiled corpus")
    p.add_argument("--dir", required=True)

    p = sub.add_parser("stats", help="summarize a compiled corpus or raw corpus files")
    p.add_argument("--dir", help="compiled corpus directory")
    p.add_argument("--config", help="corpus configuration JSON (raw accounting)")
    p.add_argument("--tokenizer", default="byte_fallback")

    p = sub.add_parser("prompts", help="assemble fixed few-shot translation prompts")
    p.add_argument("--dev", required=True, help="bitext file supplying exemplars")
    p.add_argument("--test", required=True, help="bitext file to prompt over")
    p.add_argument("--source-lang", required=True)
    p.add_argument("--target-lang", required=True)
    p.add_argument("-k", "--shots", type=int, default=5)
    p.add_argument("--labels", choices=("name", "code"), default="name")
    p.add_argument("--out", required=True, help="output JSONL path")

    p = sub.add_parser("bleu", help="corpus BLEU for a hypothesis file")
    p.add_argument("--hypotheses", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--mode", choices=("default", "zh"), default="default")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("signif", help="paired bootstrap significance of A over B")
    p.add_argument("--hypotheses-a", required=True)
    p.add_argument("--hypotheses-b", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("default", "zh"), default="default")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("aggregate", help="average per-language scores into a table row")
    p.add_argument("--scores", help="inline scores: id=49.48,km=32.92,...")
    p.add_argument("--scores-json", help="JSON file mapping ISO codes to scores")
    p.add_argument("--label", default="model")
    p.add_argument("--json", action="store_true")

    return parser


def _cmd_compile(args: argparse.Namespace) -> int:
    languages = args.languages.split(",") if args.languages else None
    result = compile_corpus(
        sources=args.config,
        strategy=args.strategy,
        token_budget=args.budget_tokens,
        batch_size_blocks=args.batch_blocks,
        seed=args.seed,
        out_dir=args.out,
        tokenizer_ref=args.tokenizer,
        label_style=args.labels,
        languages=languages,
        run_config={"command": "compile", "config": args.config, "out": args.out},
    )
    m = result.manifest
    print(
        f"compiled {m.n_blocks} blocks ({m.n_batches} batches of "
        f"{m.batch_size_blocks}) for {m.strategy.value} at seed {m.seed} "
        f"into {args.out}"
    )
    print(f"leftover budget: {m.leftover_tokens} tokens")
    return 0


def _cmd_audit(args: argparse.Namespace) -> int:
    report = audit_shards(args.dir)
    print(report.render())
    return 0 if report.passed else 1


def _cmd_stats(args: argparse.Namespace) -> int:
    if bool(args.dir) == bool(args.config):
        print("error: stats needs exactly one of --dir or --config", file=sys.stderr)
        return 2
    if args.dir:
        print(shard_stats(args.dir).render())
    else:
        spec = resolve_spec(args.tokenizer)
        print(corpus_stats(load_corpus_config(args.config), spec).render())
    return 0


def _cmd_prompts(args: argparse.Namespace) -> int:
    sea = args.source_lang if args.source_lang != "en" else args.target_lang
    dev = list(read_parallel(args.dev, sea))
    test = list(read_parallel(args.test, sea))
    prompts = build_prompts(
        dev, test, (args.source_lang, args.target_lang), k=args.shots,
        label_style=args.labels,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for record in prompts.to_records():
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"wrote {len(prompts.items)} prompts ({prompts.k}-shot) to {args.out}")
    return 0


def _cmd_bleu(args: argparse.Namespace) -> int:
    score = bleu(read_lines(args.hypotheses), read_lines(args.references), args.mode)
    if args.json:
        print(
            json.dumps(
                {
                    "score": score.score,
                    "precisions": list(score.precisions),
                    "brevity_penalty": score.brevity_penalty,
                    "hyp_len": score.hyp_len,
                    "ref_len": score.ref_len,
                    "mode": score.mode,
                    "case_sensitive": True,
                },
                sort_keys=True,
            )
        )
    else:
        print(score.format())
    return 0


def _cmd_signif(args: argparse.Namespace) -> int:
    result = paired_bootstrap(
        read_lines(args.hypotheses_a),
        read_lines(args.hypotheses_b),
        read_lines(args.references),
        n_samples=args.n,
        seed=args.seed,
        mode=args.mode,
    )
    if args.json:
        print(
            json.dumps(
                {
                    "score_a": result.score_a,
                    "score_b": result.score_b,
                    "delta": result.delta,
                    "p_value": result.p_value,
                    "n_samples": result.n_samples,
                    "seed": result.seed,
                    "mode": result.mode,
                },
                sort_keys=True,
            )
        )
    else:
        print(result.format())
    return 0


def _cmd_aggregate(args: argparse.Namespace) -> int:
    if bool(args.scores) == bool(args.scores_json):
        print("error: aggregate needs exactly one of --scores or --scores-json",
              file=sys.stderr)
        return 2
    if args.scores:
        mapping = {}
        for item in args.scores.split(","):
            code, _, value = item.partition("=")
            mapping[code.strip()] = float(value)
    else:
        with open(args.scores_json, encoding="utf-8") as fh:
            mapping = json.load(fh)
    row = aggregate(mapping, label=args.label)
    if args.json:
        print(json.dumps(
            {"label": row.label, "scores": row.scores, "avg": row.average},
            sort_keys=True,
        ))
    else:
        print(ResultTable(rows=[row]).render())
    return 0


_COMMANDS = {
    "compile": _cmd_compile,
    "audit": _cmd_audit,
    "stats": _cmd_stats,
    "prompts": _cmd_prompts,
    "bleu": _cmd_bleu,
    "signif": _cmd_signif,
    "aggregate": _cmd_aggregate,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
