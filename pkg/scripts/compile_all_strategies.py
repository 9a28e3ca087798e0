#!/usr/bin/env python3
"""Compile one corpus under every curriculum strategy and audit the results.

For each strategy this prints the block composition, the discarded token
counts, and the audit verdict, which is a quick way to sanity-check a new
corpus configuration before scaling the budget up.

Example:
    python scripts/make_synthetic_corpus.py --root /tmp/corpus --pairs 20000 --docs 400
    python scripts/compile_all_strategies.py --config /tmp/corpus/corpus.json \\
        --out /tmp/runs --blocks 16 --batch-blocks 4 --seed 0
"""

import argparse
from pathlib import Path

from currikit.packing import BLOCK_TOKENS
from currikit.pipeline import CompileError, compile_corpus
from currikit.schedule import Strategy
from currikit.shards import audit_shards


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="corpus configuration JSON")
    parser.add_argument("--out", required=True, help="directory for per-strategy runs")
    parser.add_argument("--blocks", type=int, default=16, help="token budget in blocks")
    parser.add_argument("--batch-blocks", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out_root = Path(args.out)
    budget = args.blocks * BLOCK_TOKENS
    for strategy in Strategy:
        out_dir = out_root / strategy.value
        print(f"\n=== {strategy.value} ===")
        try:
            result = compile_corpus(
                sources=args.config,
                strategy=strategy,
                token_budget=budget,
                batch_size_blocks=args.batch_blocks,
                seed=args.seed,
                out_dir=out_dir,
            )
        except CompileError as exc:
            print(f"skipped: {exc}")
            continue
        counts = result.manifest.kind_counts()
        print("blocks:", ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
        discards = result.manifest.metadata.get("discards", {})
        wasted = sum(d["discarded_tokens"] for d in discards.values())
        print(f"discarded tokens across streams: {wasted:,}")
        report = audit_shards(out_dir)
        print(report.render().splitlines()[-1])


if __name__ == "__main__":
    main()
