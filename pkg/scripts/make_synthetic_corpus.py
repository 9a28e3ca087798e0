#!/usr/bin/env python3
"""Generate a synthetic multilingual corpus for pipeline experiments.

Writes monolingual text files, english/SEA bitext TSVs, replay JSONL, and
a corpus.json configuration. Everything is deterministic in the seed.

Example:
    python scripts/make_synthetic_corpus.py --root /tmp/corpus \\
        --languages id,th --pairs 20000 --docs 400 --seed 0
"""

import argparse
from pathlib import Path

from currikit.synthetic import write_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--root", required=True, help="output directory")
    parser.add_argument("--languages", default="id,th", help="comma-separated ISO codes")
    parser.add_argument("--pairs", type=int, default=20_000, help="bitext rows per language")
    parser.add_argument("--docs", type=int, default=400, help="monolingual docs per language")
    parser.add_argument("--sentences-per-doc", type=int, default=40)
    parser.add_argument("--replay-files", type=int, default=2)
    parser.add_argument("--replay-docs", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    config = write_corpus(
        Path(args.root),
        languages=tuple(args.languages.split(",")),
        n_pairs=args.pairs,
        n_docs=args.docs,
        sentences_per_doc=args.sentences_per_doc,
        replay_files=args.replay_files,
        replay_docs=args.replay_docs,
        seed=args.seed,
    )
    print(f"corpus configuration: {config}")


if __name__ == "__main__":
    main()
