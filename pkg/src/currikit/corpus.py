"""Streaming readers for language-tagged corpora and token-uniform sampling.

Input formats:

* monolingual / replay: plain text with one document per blank-line-separated
  record, or ``.jsonl`` with a ``"text"`` field per line;
* parallel bitext: 2-column TSV (english TAB sea) or ``.jsonl`` with
  ``"en"`` and ``"sea"`` fields.

Malformed rows are never fatal: they are skipped with a warning and show up
in the skip counts so dirty corpora stay auditable.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .tokenizer import TokenizerSpec, count_tokens

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LanguageTag:
    code: str
    display_name: str


# Fixed language registry; SEA codes are kept in the canonical table order
# used for all deterministic per-language cycling and rendering.
LANGUAGES: dict[str, LanguageTag] = {
    "en": LanguageTag("en", "English"),
    "id": LanguageTag("id", "Indonesian"),
    "km": LanguageTag("km", "Khmer"),
    "lo": LanguageTag("lo", "Lao"),
    "ms": LanguageTag("ms", "Malay"),
    "my": LanguageTag("my", "Burmese"),
    "ta": LanguageTag("ta", "Tamil"),
    "th": LanguageTag("th", "Thai"),
    "tl": LanguageTag("tl", "Tagalog"),
    "vi": LanguageTag("vi", "Vietnamese"),
    "zh": LanguageTag("zh", "Chinese"),
}

SEA_CODES: tuple[str, ...] = ("id", "km", "lo", "ms", "my", "ta", "th", "tl", "vi", "zh")

EN = LANGUAGES["en"]


def language(code: str | LanguageTag) -> LanguageTag:
    if isinstance(code, LanguageTag):
        return code
    try:
        return LANGUAGES[code]
    except KeyError:
        raise ValueError(
            f"unknown language code {code!r}; known: {', '.join(LANGUAGES)}"
        ) from None


def sort_codes(codes: Iterable[str]) -> list[str]:
    """Order language codes canonically (registry order)."""
    order = {c: i for i, c in enumerate(LANGUAGES)}
    out = []
    for c in codes:
        language(c)
        out.append(c)
    return sorted(set(out), key=order.__getitem__)


@dataclass
class Document:
    text: str
    language: LanguageTag
    source_id: str
    ordinal: int

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("document text is empty")


@dataclass
class SentencePair:
    en_text: str
    sea_text: str
    sea_language: LanguageTag
    source_id: str
    ordinal: int

    def __post_init__(self) -> None:
        if not self.en_text.strip() or not self.sea_text.strip():
            raise ValueError("sentence pair has an empty side")
        if self.sea_language.code == "en":
            raise ValueError("sea_language must not be English")


@dataclass
class ReadCounter:
    """Conservation bookkeeping: records == emitted + skipped per source."""

    records: int = 0
    emitted: int = 0
    skipped: int = 0


class ShortfallError(RuntimeError):
    """A sampling budget could not be met; carries per-source deficits."""

    def __init__(self, message: str, deficits: dict):
        super().__init__(message)
        self.deficits = deficits


def _iter_plain_records(path: str | os.PathLike[str]) -> Iterator[str]:
    """Blank-line-separated records; every record (even empty) is yielded."""
    chunk: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                chunk.append(line)
            else:
                yield "".join(chunk).strip()
                chunk = []
    if chunk:
        yield "".join(chunk).strip()


def _is_jsonl(path: str | os.PathLike[str]) -> bool:
    return os.path.splitext(str(path))[1].lower() in (".jsonl", ".ndjson")


def read_monolingual(
    path: str | os.PathLike[str],
    lang: str | LanguageTag,
    counter: ReadCounter | None = None,
    source_id: str | None = None,
) -> Iterator[Document]:
    """Stream documents from a monolingual corpus file in file order.

    Ordinals index records as they appear in the file, so skipped records
    leave gaps and every emitted document stays addressable in the source.
    """
    tag = language(lang)
    counter = counter if counter is not None else ReadCounter()
    source_id = source_id if source_id is not None else str(path)
    if _is_jsonl(path):
        with open(path, encoding="utf-8") as fh:
            for ordinal, line in enumerate(fh):
                counter.records += 1
                text = _jsonl_text(line, source_id, ordinal)
                if text is None:
                    counter.skipped += 1
                    continue
                counter.emitted += 1
                yield Document(text=text, language=tag, source_id=source_id, ordinal=ordinal)
    else:
        for ordinal, record in enumerate(_iter_plain_records(path)):
            counter.records += 1
            if not record:
                counter.skipped += 1
                continue
            counter.emitted += 1
            yield Document(text=record, language=tag, source_id=source_id, ordinal=ordinal)


def _jsonl_text(line: str, source_id: str, ordinal: int) -> str | None:
    try:
        obj = json.loads(line)
        text = obj["text"]
    except (json.JSONDecodeError, KeyError, TypeError):
        log.warning("%s: record %d is malformed, skipping", source_id, ordinal)
        return None
    if not isinstance(text, str) or not text.strip():
        log.warning("%s: record %d has empty text, skipping", source_id, ordinal)
        return None
    return text.strip()


def read_parallel(
    path: str | os.PathLike[str],
    sea_lang: str | LanguageTag,
    counter: ReadCounter | None = None,
    source_id: str | None = None,
) -> Iterator[SentencePair]:
    """Stream english/SEA sentence pairs from a bitext file in file order."""
    tag = language(sea_lang)
    counter = counter if counter is not None else ReadCounter()
    source_id = source_id if source_id is not None else str(path)
    jsonl = _is_jsonl(path)
    with open(path, encoding="utf-8") as fh:
        for ordinal, line in enumerate(fh):
            counter.records += 1
            sides = _pair_fields(line, jsonl, source_id, ordinal)
            if sides is None:
                counter.skipped += 1
                continue
            en_text, sea_text = sides
            counter.emitted += 1
            yield SentencePair(
                en_text=en_text,
                sea_text=sea_text,
                sea_language=tag,
                source_id=source_id,
                ordinal=ordinal,
            )


def _pair_fields(
    line: str, jsonl: bool, source_id: str, ordinal: int
) -> tuple[str, str] | None:
    if jsonl:
        try:
            obj = json.loads(line)
            en_text, sea_text = obj["en"], obj["sea"]
        except (json.JSONDecodeError, KeyError, TypeError):
            log.warning("%s: row %d is malformed, skipping", source_id, ordinal)
            return None
        if not isinstance(en_text, str) or not isinstance(sea_text, str):
            log.warning("%s: row %d has non-string sides, skipping", source_id, ordinal)
            return None
    else:
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 2:
            log.warning(
                "%s: row %d has %d fields (want 2), skipping", source_id, ordinal, len(fields)
            )
            return None
        en_text, sea_text = fields
    en_text, sea_text = en_text.strip(), sea_text.strip()
    if not en_text or not sea_text:
        log.warning("%s: row %d has an empty side, skipping", source_id, ordinal)
        return None
    return en_text, sea_text


def record_token_count(item: Document | SentencePair, spec: TokenizerSpec) -> int:
    """Raw text tokens of one record (separators are not counted)."""
    if isinstance(item, SentencePair):
        return count_tokens(item.en_text, spec) + count_tokens(item.sea_text, spec)
    return count_tokens(item.text, spec)


@dataclass
class SampleReport:
    """Outcome of one ``sample_uniform`` pass."""

    quota: float = 0.0
    drawn_tokens: dict[int, int] = field(default_factory=dict)
    drawn_records: dict[int, int] = field(default_factory=dict)
    deficits: dict[int, int] = field(default_factory=dict)

    @property
    def shortfall(self) -> bool:
        return any(v > 0 for v in self.deficits.values())


def sample_uniform(
    sources: Sequence[Iterable[Document] | Iterable[SentencePair]],
    token_budget: int,
    spec: TokenizerSpec,
    report: SampleReport | None = None,
) -> Iterator[Document | SentencePair]:
    """Interleave sources round-robin, equalizing tokens drawn from each.

    Whole records are drawn (never split); a source stops once its drawn
    tokens reach ``token_budget / len(sources)``, so per-source draws differ
    by at most one record's length. Sources that run dry end early and are
    listed in the report's deficits; only a completely empty pull with a
    positive budget raises.
    """
    if not sources:
        raise ValueError("sample_uniform requires at least one source")
    if token_budget < 0:
        raise ValueError("token_budget must be non-negative")
    n = len(sources)
    quota = token_budget / n
    report = report if report is not None else SampleReport()
    report.quota = quota
    iters = [iter(s) for s in sources]
    drawn = [0] * n
    records = [0] * n
    done = [quota <= 0] * n
    exhausted = [False] * n
    emitted_any = False
    while not all(done):
        for i in range(n):
            if done[i]:
                continue
            try:
                item = next(iters[i])
            except StopIteration:
                exhausted[i] = True
                done[i] = True
                continue
            drawn[i] += record_token_count(item, spec)
            records[i] += 1
            emitted_any = True
            yield item
            if drawn[i] >= quota:
                done[i] = True
    report.drawn_tokens = dict(enumerate(drawn))
    report.drawn_records = dict(enumerate(records))
    report.deficits = {
        i: math.ceil(quota - drawn[i])
        for i in range(n)
        if exhausted[i] and drawn[i] < quota
    }
    if token_budget > 0 and not emitted_any:
        raise ShortfallError(
            f"all {n} sources empty with budget {token_budget}", report.deficits
        )


# --- corpus configuration -------------------------------------------------

SOURCE_KINDS = ("monolingual", "parallel", "replay")


@dataclass(frozen=True)
class CorpusSource:
    path: str
    kind: str  # monolingual | parallel | replay
    language: str | None = None  # ISO code; None only for replay
    source_id: str | None = None  # provenance name; defaults to path

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "replay":
            if self.language not in (None, "en"):
                raise ValueError("replay sources are English")
        else:
            if self.language is None:
                raise ValueError(f"{self.kind} source needs a language")
            language(self.language)
            if self.kind == "parallel" and self.language == "en":
                raise ValueError("parallel sources are keyed by the SEA language")
        if self.source_id is None:
            object.__setattr__(self, "source_id", self.path)


def load_corpus_config(path: str | os.PathLike[str]) -> list[CorpusSource]:
    """Read a corpus configuration file.

    JSON shape: ``{"sources": [{"path": ..., "kind": ..., "language": ...}]}``.
    Relative paths are resolved against the config file's directory.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    sources = []
    for entry in raw["sources"]:
        p = entry["path"]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        sources.append(
            CorpusSource(
                path=p,
                kind=entry["kind"],
                language=entry.get("language"),
                source_id=entry["path"],
            )
        )
    return sources


# --- corpus accounting ----------------------------------------------------


@dataclass
class Tally:
    records: int = 0
    skipped: int = 0
    tokens: int = 0  # document tokens, or SEA-side tokens for pairs
    en_tokens: int = 0  # EN-side tokens for pairs

    def add(self, other: "Tally") -> None:
        self.records += other.records
        self.skipped += other.skipped
        self.tokens += other.tokens
        self.en_tokens += other.en_tokens


@dataclass
class CorpusStats:
    by_source: dict[str, Tally] = field(default_factory=dict)
    parallel: dict[str, Tally] = field(default_factory=dict)  # keyed by SEA code
    monolingual: dict[str, Tally] = field(default_factory=dict)
    replay: Tally = field(default_factory=Tally)
    tokenizer_id: str = ""

    def parallel_total(self) -> Tally:
        total = Tally()
        for tally in self.parallel.values():
            total.add(tally)
        return total

    def monolingual_total(self) -> Tally:
        total = Tally()
        for tally in self.monolingual.values():
            total.add(tally)
        return total

    def render(self) -> str:
        """Tabular summary; parallel rows use the canonical language order."""
        lines = [f"Corpus statistics (tokenizer: {self.tokenizer_id})"]
        if self.parallel:
            lines.append("")
            lines.append("Parallel data")
            header = f"{'ISO':<5}{'Language':<12}{'# sent.':>12}{'SEA tok':>14}{'EN tok':>14}"
            lines.append(header)
            for code in SEA_CODES:
                if code not in self.parallel:
                    continue
                t = self.parallel[code]
                lines.append(
                    f"{code:<5}{LANGUAGES[code].display_name:<12}"
                    f"{t.records:>12,}{t.tokens:>14,}{t.en_tokens:>14,}"
                )
            t = self.parallel_total()
            lines.append(
                f"{'Total':<17}{t.records:>12,}{t.tokens:>14,}{t.en_tokens:>14,}"
            )
        if self.monolingual:
            lines.append("")
            lines.append("Monolingual data")
            lines.append(f"{'ISO':<5}{'Language':<12}{'# docs':>12}{'tokens':>14}")
            for code in SEA_CODES:
                if code not in self.monolingual:
                    continue
                t = self.monolingual[code]
                lines.append(
                    f"{code:<5}{LANGUAGES[code].display_name:<12}"
                    f"{t.records:>12,}{t.tokens:>14,}"
                )
            t = self.monolingual_total()
            lines.append(f"{'Total':<17}{t.records:>12,}{t.tokens:>14,}")
        if self.replay.records or self.replay.skipped:
            lines.append("")
            lines.append(
                f"Replay data: {self.replay.records:,} docs, {self.replay.tokens:,} tokens"
            )
        skipped = sum(t.skipped for t in self.by_source.values())
        if skipped:
            lines.append(f"Skipped records: {skipped:,}")
        return "\n".join(lines)


def corpus_stats(sources: Sequence[CorpusSource], spec: TokenizerSpec) -> CorpusStats:
    """Exact per-source and per-language record/token accounting."""
    stats = CorpusStats(tokenizer_id=spec.id)
    for src in sources:
        counter = ReadCounter()
        tally = Tally()
        if src.kind == "parallel":
            assert src.language is not None
            for pair in read_parallel(src.path, src.language, counter):
                tally.records += 1
                tally.tokens += count_tokens(pair.sea_text, spec)
                tally.en_tokens += count_tokens(pair.en_text, spec)
            tally.skipped = counter.skipped
            stats.parallel.setdefault(src.language, Tally()).add(tally)
        else:
            lang = src.language or "en"
            for doc in read_monolingual(src.path, lang, counter):
                tally.records += 1
                tally.tokens += count_tokens(doc.text, spec)
            tally.skipped = counter.skipped
            if src.kind == "replay":
                stats.replay.add(tally)
            else:
                stats.monolingual.setdefault(lang, Tally()).add(tally)
        stats.by_source[src.source_id or src.path] = tally
    return stats
