"""End-to-end corpus compilation: schedule -> packed streams -> shards.

The schedule dictates the exact sequence of block kinds; one packer stream
is kept per (kind, language) and the compiler pulls the next block from
whichever stream the schedule demands. Per-language monolingual and replay
data are drawn token-uniformly across their source files; parallel files
for one language are concatenated in configuration order.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .corpus import (
    CorpusSource,
    Document,
    SampleReport,
    SentencePair,
    load_corpus_config,
    read_monolingual,
    read_parallel,
    sample_uniform,
    sort_codes,
)
from .packing import (
    BLOCK_TOKENS,
    PackReport,
    TokenBlock,
    pack_monolingual,
    pack_parallel,
    pack_replacement,
    pack_replay,
)
from .schedule import CurriculumManifest, Strategy, build_schedule
from .shards import ShardLayout, write_shards
from .tokenizer import TokenizerSpec, resolve_spec

RUN_CONFIG_NAME = "run_config.json"


class CompileError(RuntimeError):
    """The corpus cannot feed the requested schedule."""


@dataclass
class CompileResult:
    layout: ShardLayout
    manifest: CurriculumManifest
    reports: dict[str, PackReport] = field(default_factory=dict)


def _group_sources(sources: list[CorpusSource]):
    mono: dict[str, list[CorpusSource]] = {}
    parallel: dict[str, list[CorpusSource]] = {}
    replay: list[CorpusSource] = []
    for src in sources:
        if src.kind == "monolingual":
            assert src.language is not None
            mono.setdefault(src.language, []).append(src)
        elif src.kind == "parallel":
            assert src.language is not None
            parallel.setdefault(src.language, []).append(src)
        else:
            replay.append(src)
    return mono, parallel, replay


def infer_language_set(
    strategy: Strategy, sources: list[CorpusSource]
) -> list[str]:
    """Languages that have every source kind the strategy schedules."""
    mono, parallel, _ = _group_sources(sources)
    if strategy is Strategy.MULTILINGUAL:
        langs = set(mono)
    elif strategy is Strategy.PARALLEL_ONLY:
        langs = set(parallel)
    elif strategy is Strategy.MULTILINGUAL_REPLACEMENT:
        langs = set(parallel) & set(mono)
    else:  # mixed, parallel-first, parallel-last
        langs = set(mono) & set(parallel)
    langs.discard("en")
    if not langs:
        raise CompileError(
            f"no language has the source kinds required by {strategy.value}"
        )
    return sort_codes(langs)


def _mono_documents(
    group: list[CorpusSource], lang: str, blocks_needed: int, spec: TokenizerSpec
) -> Iterator[Document]:
    readers = [
        read_monolingual(s.path, lang, source_id=s.source_id) for s in group
    ]
    budget = (blocks_needed + 1) * BLOCK_TOKENS
    return sample_uniform(readers, budget, spec, SampleReport())


def _parallel_pairs(group: list[CorpusSource], lang: str) -> Iterator[SentencePair]:
    return itertools.chain.from_iterable(
        read_parallel(s.path, lang, source_id=s.source_id) for s in group
    )


def _substitution_documents(group: list[CorpusSource], lang: str) -> Iterator[Document]:
    return itertools.chain.from_iterable(
        read_monolingual(s.path, lang, source_id=s.source_id) for s in group
    )


def compile_corpus(
    sources: list[CorpusSource] | str | os.PathLike[str],
    strategy: Strategy | str,
    token_budget: int,
    batch_size_blocks: int,
    seed: int,
    out_dir: str | os.PathLike[str],
    tokenizer_ref: str = "byte_fallback",
    label_style: str = "name",
    languages: list[str] | None = None,
    run_config: dict | None = None,
) -> CompileResult:
    """Compile one strategy at one seed into a shard directory.

    The effective configuration is echoed to ``run_config.json`` in the
    output directory; the manifest is written last, so a directory with a
    manifest is always complete. Identical inputs, flags, and seed produce
    a byte-identical tree.
    """
    strategy = Strategy(strategy)
    spec = resolve_spec(tokenizer_ref)
    if not isinstance(sources, list):
        sources = load_corpus_config(sources)
    mono, parallel, replay = _group_sources(sources)
    if not replay:
        raise CompileError("every strategy interleaves replay data; none configured")
    language_set = (
        sort_codes(languages) if languages else infer_language_set(strategy, sources)
    )

    manifest = build_schedule(
        strategy=strategy,
        token_budget=token_budget,
        language_set=language_set,
        batch_size_blocks=batch_size_blocks,
        seed=seed,
        tokenizer_id=spec.id,
    )
    needed = manifest.kind_counts()
    reports: dict[str, PackReport] = {}
    streams: dict[str, Iterator[TokenBlock]] = {}
    for key, count in needed.items():
        report = PackReport()
        reports[key] = report
        kind_name, _, lang = key.partition(":")
        if kind_name == "replay":
            docs = sample_uniform(
                [read_monolingual(s.path, "en", source_id=s.source_id) for s in replay],
                (count + 1) * BLOCK_TOKENS,
                spec,
                SampleReport(),
            )
            streams[key] = pack_replay(docs, spec, report)
        elif kind_name == "monolingual":
            if lang not in mono:
                raise CompileError(f"no monolingual sources for language {lang}")
            streams[key] = pack_monolingual(
                _mono_documents(mono[lang], lang, count, spec), lang, spec, report
            )
        elif kind_name == "parallel":
            if lang not in parallel:
                raise CompileError(f"no parallel sources for language {lang}")
            streams[key] = pack_parallel(
                _parallel_pairs(parallel[lang], lang), lang, spec, seed,
                label_style, report,
            )
        else:  # replacement
            if lang not in parallel:
                raise CompileError(f"no parallel sources for language {lang}")
            if lang not in mono:
                raise CompileError(
                    f"replacement needs monolingual {lang} text for substitution"
                )
            streams[key] = pack_replacement(
                _parallel_pairs(parallel[lang], lang),
                _substitution_documents(mono[lang], lang),
                lang, spec, seed, label_style, report,
            )

    def block_stream() -> Iterator[TokenBlock]:
        for entry in manifest.entries:
            key = entry.kind.key()
            try:
                yield next(streams[key])
            except StopIteration:
                raise CompileError(
                    f"{key} stream exhausted at schedule position {entry.position}: "
                    f"corpus too small for the requested budget"
                ) from None
        manifest.metadata["discards"] = {
            key: {
                "records": r.records,
                "tokens_in": r.tokens_in,
                "blocks": r.blocks,
                "discarded_tokens": r.unused_tokens,
                "en_first": r.en_first,
                "replacement_token_delta": r.replacement_token_delta,
            }
            for key, r in sorted(reports.items())
        }

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = dict(run_config or {})
    echo.setdefault("strategy", strategy.value)
    echo.setdefault("token_budget", token_budget)
    echo.setdefault("batch_size_blocks", batch_size_blocks)
    echo.setdefault("seed", seed)
    echo.setdefault("tokenizer", tokenizer_ref)
    echo.setdefault("label_style", label_style)
    echo.setdefault("language_set", language_set)
    (out / RUN_CONFIG_NAME).write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    layout = write_shards(block_stream(), manifest, out)
    return CompileResult(layout=layout, manifest=manifest, reports=reports)
