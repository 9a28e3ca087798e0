"""Fixed-size token-block construction.

Every training block holds exactly 262,144 token ids (64 sequences of
4,096, the context window). Records are encoded, terminated with the
end-of-text id, and appended to a carry buffer; whenever the buffer
reaches the block size a block is emitted and the remainder carries over,
so records may straddle sequence and block boundaries. The final partial
buffer is discarded and its size reported, never padded.

Parallel segments are rendered as two labeled lines::

    English: <english sentence>
    Indonesian: <translation>

with the side order drawn per pair from a counter-based generator keyed by
(seed, language, pair index), probability 1/2 each, so the draw sequence is
independent of chunking and worker layout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Iterator

import numpy as np

from . import rng
from .corpus import Document, LanguageTag, SentencePair, ShortfallError, language
from .tokenizer import TokenizerSpec, count_tokens, encode

SEQUENCE_LENGTH = 4_096
SEQUENCES_PER_BLOCK = 64
BLOCK_TOKENS = SEQUENCE_LENGTH * SEQUENCES_PER_BLOCK  # 262,144


KIND_NAMES = ("monolingual", "parallel", "replay", "replacement")


@dataclass(frozen=True)
class BlockKind:
    """What a block holds: monolingual(lang), parallel(lang), replay, replacement(lang)."""

    name: str
    language: str | None = None

    def __post_init__(self) -> None:
        if self.name not in KIND_NAMES:
            raise ValueError(f"unknown block kind {self.name!r}")
        if self.name == "replay":
            if self.language is not None:
                raise ValueError("replay blocks carry no language")
        else:
            if self.language is None:
                raise ValueError(f"{self.name} blocks need a language")
            language(self.language)
            if self.name in ("parallel", "replacement") and self.language == "en":
                raise ValueError(f"{self.name} blocks carry a non-English SEA language")

    @classmethod
    def monolingual(cls, code: str) -> "BlockKind":
        return cls("monolingual", code)

    @classmethod
    def parallel(cls, code: str) -> "BlockKind":
        return cls("parallel", code)

    @classmethod
    def replay(cls) -> "BlockKind":
        return cls("replay", None)

    @classmethod
    def replacement(cls, code: str) -> "BlockKind":
        return cls("replacement", code)

    def key(self) -> str:
        return self.name if self.language is None else f"{self.name}:{self.language}"

    @classmethod
    def from_key(cls, key: str) -> "BlockKind":
        name, _, lang = key.partition(":")
        return cls(name, lang or None)


class Direction(Enum):
    EN_FIRST = "en_first"
    SEA_FIRST = "sea_first"


FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a; cheap content audit, not a security primitive."""
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def block_checksum(ids: np.ndarray) -> int:
    return fnv1a64(ids.astype("<u4").tobytes())


@dataclass(frozen=True)
class ProvenanceSpan:
    source_id: str
    first_ordinal: int
    last_ordinal: int


@dataclass
class TokenBlock:
    ids: np.ndarray  # uint32, exactly BLOCK_TOKENS entries
    kind: BlockKind
    tokenizer_id: str
    checksum: int
    provenance: tuple[ProvenanceSpan, ...]
    seed_used: int  # 0 for kinds that draw no randomness

    def __post_init__(self) -> None:
        if len(self.ids) != BLOCK_TOKENS:
            raise ValueError(f"block has {len(self.ids)} ids, want {BLOCK_TOKENS}")

    def verify_checksum(self) -> bool:
        return block_checksum(self.ids) == self.checksum


@dataclass
class PackReport:
    """Accounting for one packed stream."""

    records: int = 0
    tokens_in: int = 0  # ids entering the buffer, separators included
    blocks: int = 0
    discarded_tokens: int = 0  # final partial buffer, set when input runs dry
    pending_tokens: int = 0  # live carry buffer; left over if a stream is abandoned
    en_first: int = 0  # direction draws landing English-first
    replacement_token_delta: int = 0  # replacement minus original SEA-side tokens

    @property
    def unused_tokens(self) -> int:
        return self.discarded_tokens + self.pending_tokens


def format_pair(pair: SentencePair, direction: Direction, label_style: str = "name") -> str:
    """Render one aligned pair as two labeled lines (no trailing marker)."""
    if label_style == "name":
        en_label = "English"
        sea_label = pair.sea_language.display_name
    elif label_style == "code":
        en_label = "en"
        sea_label = pair.sea_language.code
    else:
        raise ValueError(f"unknown label style {label_style!r}")
    if direction is Direction.EN_FIRST:
        return f"{en_label}: {pair.en_text}\n{sea_label}: {pair.sea_text}"
    return f"{sea_label}: {pair.sea_text}\n{en_label}: {pair.en_text}"


def direction_draw(seed: int, language_code: str, pair_index: int) -> Direction:
    """Per-pair side order; keyed draw, independent of chunking."""
    bit = rng.coin(seed, "direction", language_code, pair_index)
    return Direction.EN_FIRST if bit == 0 else Direction.SEA_FIRST


class _Assembler:
    """Carry-over buffer that slices exact blocks off a token stream."""

    def __init__(self, kind: BlockKind, spec: TokenizerSpec, seed_used: int, report: PackReport):
        self.kind = kind
        self.spec = spec
        self.seed_used = seed_used
        self.report = report
        self.buffer: list[int] = []
        # (source_id, ordinal, remaining token count) runs covering the buffer
        self.segments: list[list] = []

    def add(self, ids: list[int], source_id: str, ordinal: int) -> Iterator[TokenBlock]:
        self.buffer.extend(ids)
        self.segments.append([source_id, ordinal, len(ids)])
        self.report.records += 1
        self.report.tokens_in += len(ids)
        while len(self.buffer) >= BLOCK_TOKENS:
            yield self._emit()
        self.report.pending_tokens = len(self.buffer)

    def _emit(self) -> TokenBlock:
        ids = np.array(self.buffer[:BLOCK_TOKENS], dtype=np.uint32)
        del self.buffer[:BLOCK_TOKENS]
        spans = self._take_spans(BLOCK_TOKENS)
        self.report.blocks += 1
        self.report.pending_tokens = len(self.buffer)
        return TokenBlock(
            ids=ids,
            kind=self.kind,
            tokenizer_id=self.spec.id,
            checksum=block_checksum(ids),
            provenance=spans,
            seed_used=self.seed_used,
        )

    def _take_spans(self, count: int) -> tuple[ProvenanceSpan, ...]:
        spans: list[ProvenanceSpan] = []
        taken = 0
        while taken < count:
            source_id, ordinal, remaining = self.segments[0]
            use = min(remaining, count - taken)
            taken += use
            if spans and spans[-1].source_id == source_id and spans[-1].last_ordinal in (
                ordinal,
                ordinal - 1,
            ):
                spans[-1] = ProvenanceSpan(source_id, spans[-1].first_ordinal, ordinal)
            else:
                spans.append(ProvenanceSpan(source_id, ordinal, ordinal))
            if use == remaining:
                self.segments.pop(0)
            else:
                self.segments[0][2] = remaining - use
        return tuple(spans)

    def finish(self) -> None:
        self.report.discarded_tokens = len(self.buffer)
        self.report.pending_tokens = 0
        self.buffer.clear()
        self.segments.clear()


def pack_monolingual(
    docs: Iterable[Document],
    lang: str | LanguageTag,
    spec: TokenizerSpec,
    report: PackReport | None = None,
) -> Iterator[TokenBlock]:
    """Pack one language's documents, end-of-text separated, into blocks."""
    tag = language(lang)
    report = report if report is not None else PackReport()
    asm = _Assembler(BlockKind.monolingual(tag.code), spec, 0, report)
    for doc in docs:
        if doc.language.code != tag.code:
            raise ValueError(
                f"document language {doc.language.code} in a {tag.code} stream"
            )
        ids = encode(doc.text, spec).ids
        ids.append(spec.eot_id)
        yield from asm.add(ids, doc.source_id, doc.ordinal)
    asm.finish()


def pack_replay(
    docs: Iterable[Document],
    spec: TokenizerSpec,
    report: PackReport | None = None,
) -> Iterator[TokenBlock]:
    """Pack replay documents; identical mechanics, kind = replay."""
    report = report if report is not None else PackReport()
    asm = _Assembler(BlockKind.replay(), spec, 0, report)
    for doc in docs:
        ids = encode(doc.text, spec).ids
        ids.append(spec.eot_id)
        yield from asm.add(ids, doc.source_id, doc.ordinal)
    asm.finish()


def pack_parallel(
    pairs: Iterable[SentencePair],
    sea_lang: str | LanguageTag,
    spec: TokenizerSpec,
    seed: int,
    label_style: str = "name",
    report: PackReport | None = None,
) -> Iterator[TokenBlock]:
    """Pack formatted sentence pairs with per-pair direction randomization."""
    tag = language(sea_lang)
    report = report if report is not None else PackReport()
    asm = _Assembler(BlockKind.parallel(tag.code), spec, seed, report)
    for index, pair in enumerate(pairs):
        if pair.sea_language.code != tag.code:
            raise ValueError(
                f"pair language {pair.sea_language.code} in a {tag.code} stream"
            )
        direction = direction_draw(seed, tag.code, index)
        if direction is Direction.EN_FIRST:
            report.en_first += 1
        ids = encode(format_pair(pair, direction, label_style), spec).ids
        ids.append(spec.eot_id)
        yield from asm.add(ids, pair.source_id, pair.ordinal)
    asm.finish()


_SENTENCE_END = re.compile(r"(?<=[.!?。！？។။])\s*")


def split_sentences(text: str) -> list[str]:
    """Split on sentence-terminal punctuation (ASCII, CJK, Khmer, Burmese)."""
    return [s.strip() for s in _SENTENCE_END.split(text) if s.strip()]


def _sentence_supply(docs: Iterable[Document]) -> Iterator[str]:
    for doc in docs:
        yield from split_sentences(doc.text)


def pack_replacement(
    pairs: Iterable[SentencePair],
    sea_docs: Iterable[Document],
    sea_lang: str | LanguageTag,
    spec: TokenizerSpec,
    seed: int,
    label_style: str = "name",
    report: PackReport | None = None,
) -> Iterator[TokenBlock]:
    """Ablation packer: the SEA side of each pair is swapped for the next
    unused sentence of unaligned SEA text; the English side, the format, and
    the direction draw sequence are exactly those of ``pack_parallel``.

    Substitution is sentence-for-sentence with no length matching; the
    resulting SEA-side token delta is recorded in the report.
    """
    tag = language(sea_lang)
    report = report if report is not None else PackReport()
    asm = _Assembler(BlockKind.replacement(tag.code), spec, seed, report)
    supply = _sentence_supply(sea_docs)
    for index, pair in enumerate(pairs):
        try:
            substitute = next(supply)
        except StopIteration:
            raise ShortfallError(
                f"replacement text for {tag.code} exhausted after {index} pairs",
                {"pairs_substituted": index},
            ) from None
        report.replacement_token_delta += count_tokens(substitute, spec) - count_tokens(
            pair.sea_text, spec
        )
        swapped = replace(pair, sea_text=substitute)
        direction = direction_draw(seed, tag.code, index)
        if direction is Direction.EN_FIRST:
            report.en_first += 1
        ids = encode(format_pair(swapped, direction, label_style), spec).ids
        ids.append(spec.eot_id)
        yield from asm.add(ids, pair.source_id, pair.ordinal)
    asm.finish()
