"""Bit-exact on-disk layout for compiled corpora.

One file per block (little-endian uint32 ids, exactly 1,048,576 bytes),
one sidecar record per block with its checksum and provenance, and the
manifest written last as the commit marker: a directory containing a
manifest is guaranteed to contain every block it names.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .corpus import LANGUAGES, SEA_CODES
from .packing import BLOCK_TOKENS, TokenBlock, fnv1a64
from .schedule import (
    MANIFEST_NAME,
    CurriculumManifest,
    Violation,
    validate_schedule,
)

BLOCK_BYTES = BLOCK_TOKENS * 4


class ConsistencyError(RuntimeError):
    """Block stream and manifest disagree."""

    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class LayoutError(RuntimeError):
    """Directory does not hold a readable compiled corpus."""


@dataclass(frozen=True)
class ShardLayout:
    directory: Path

    @property
    def manifest_path(self) -> Path:
        return self.directory / MANIFEST_NAME

    def block_path(self, position: int) -> Path:
        return self.directory / f"block_{position:08d}.bin"

    def record_path(self, position: int) -> Path:
        return self.directory / f"block_{position:08d}.meta.json"


def _block_record(position: int, block: TokenBlock) -> str:
    doc = {
        "position": position,
        "kind": block.kind.name,
        "language": block.kind.language,
        "tokenizer_id": block.tokenizer_id,
        "checksum": f"{block.checksum:016x}",
        "seed_used": block.seed_used,
        "provenance": [
            {"source": s.source_id, "first": s.first_ordinal, "last": s.last_ordinal}
            for s in block.provenance
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_shards(
    blocks: Iterable[TokenBlock],
    manifest: CurriculumManifest,
    directory: str | os.PathLike[str],
) -> ShardLayout:
    """Persist a block stream whose order matches the manifest entries.

    A kind mismatch or a count mismatch aborts before the manifest is
    written, so a crashed or inconsistent run never looks complete.
    """
    layout = ShardLayout(Path(directory))
    layout.directory.mkdir(parents=True, exist_ok=True)
    it = iter(blocks)
    position = 0
    for entry in manifest.entries:
        try:
            block = next(it)
        except StopIteration:
            raise ConsistencyError(
                f"block stream ended at position {position}, "
                f"manifest has {len(manifest.entries)} entries",
                position,
            ) from None
        if block.kind != entry.kind:
            raise ConsistencyError(
                f"kind mismatch at position {position}: stream has "
                f"{block.kind.key()}, manifest wants {entry.kind.key()}",
                position,
            )
        layout.block_path(position).write_bytes(block.ids.astype("<u4").tobytes())
        layout.record_path(position).write_text(
            _block_record(position, block), encoding="utf-8"
        )
        position += 1
    try:
        next(it)
    except StopIteration:
        pass
    else:
        raise ConsistencyError(
            f"block stream continues past the {position} manifest entries", position
        )
    layout.manifest_path.write_text(manifest.to_json(), encoding="utf-8")
    return layout


def read_manifest(directory: str | os.PathLike[str]) -> CurriculumManifest:
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise LayoutError(f"{directory} has no {MANIFEST_NAME}; not a compiled corpus")
    return CurriculumManifest.from_json(path.read_text(encoding="utf-8"))


def iter_block_ids(directory: str | os.PathLike[str]) -> Iterator[np.ndarray]:
    """Yield block id arrays in schedule order."""
    manifest = read_manifest(directory)
    layout = ShardLayout(Path(directory))
    for e in manifest.entries:
        data = layout.block_path(e.position).read_bytes()
        yield np.frombuffer(data, dtype="<u4")


@dataclass
class BlockFailure:
    block_file: str
    reason: str

    def __str__(self) -> str:
        return f"{self.block_file}: {self.reason}"


@dataclass
class KindStats:
    blocks: int = 0
    tokens: int = 0


@dataclass
class AuditReport:
    blocks_checked: int = 0
    checksum_failures: list[BlockFailure] = field(default_factory=list)
    schedule_violations: list[Violation] = field(default_factory=list)
    stats: dict[str, KindStats] = field(default_factory=dict)  # keyed by kind key
    discards: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.checksum_failures and not self.schedule_violations

    def render(self) -> str:
        lines = [
            f"blocks checked: {self.blocks_checked}",
            f"checksum/size failures: {len(self.checksum_failures)}",
            f"schedule violations: {len(self.schedule_violations)}",
        ]
        lines.extend(f"  {f}" for f in self.checksum_failures[:20])
        lines.extend(f"  {v}" for v in self.schedule_violations[:20])
        if self.discards:
            lines.append(f"discard report: {json.dumps(self.discards, sort_keys=True)}")
        lines.append("audit: PASS" if self.passed else "audit: FAIL")
        return "\n".join(lines)


def audit_shards(directory: str | os.PathLike[str]) -> AuditReport:
    """Re-verify a compiled corpus: sizes, checksums, schedule constraints."""
    manifest = read_manifest(directory)
    layout = ShardLayout(Path(directory))
    report = AuditReport(discards=manifest.metadata.get("discards", {}))
    for entry in manifest.entries:
        bin_path = layout.block_path(entry.position)
        rec_path = layout.record_path(entry.position)
        report.blocks_checked += 1
        key = entry.kind.key()
        kstats = report.stats.setdefault(key, KindStats())
        kstats.blocks += 1
        kstats.tokens += BLOCK_TOKENS
        if not bin_path.exists():
            report.checksum_failures.append(BlockFailure(bin_path.name, "missing file"))
            continue
        size = bin_path.stat().st_size
        if size != BLOCK_BYTES:
            report.checksum_failures.append(
                BlockFailure(bin_path.name, f"size {size} != {BLOCK_BYTES}")
            )
            continue
        if not rec_path.exists():
            report.checksum_failures.append(BlockFailure(rec_path.name, "missing record"))
            continue
        record = json.loads(rec_path.read_text(encoding="utf-8"))
        actual = fnv1a64(bin_path.read_bytes())
        if f"{actual:016x}" != record.get("checksum"):
            report.checksum_failures.append(
                BlockFailure(
                    bin_path.name,
                    f"checksum {actual:016x} != recorded {record.get('checksum')}",
                )
            )
        if record.get("kind") != entry.kind.name or record.get("language") != entry.kind.language:
            report.checksum_failures.append(
                BlockFailure(
                    rec_path.name,
                    f"record kind {record.get('kind')}:{record.get('language')} "
                    f"!= manifest {entry.kind.key()}",
                )
            )
    report.schedule_violations = validate_schedule(manifest)
    return report


@dataclass
class ShardStats:
    by_language: dict[str, dict[str, int]]  # code (or "-") -> kind name -> blocks
    total_blocks: int
    total_tokens: int

    def render(self) -> str:
        kinds = ("monolingual", "parallel", "replacement", "replay")
        header = f"{'ISO':<5}{'Language':<12}" + "".join(f"{k:>14}" for k in kinds)
        lines = [header]
        codes = [c for c in SEA_CODES if c in self.by_language]
        if "-" in self.by_language:
            codes.append("-")
        for code in codes:
            row = self.by_language[code]
            name = LANGUAGES[code].display_name if code in LANGUAGES else "(none)"
            lines.append(
                f"{code:<5}{name:<12}" + "".join(f"{row.get(k, 0):>14,}" for k in kinds)
            )
        lines.append(
            f"Total blocks: {self.total_blocks:,}   "
            f"total tokens: {self.total_tokens:,}"
        )
        return "\n".join(lines)


def shard_stats(directory: str | os.PathLike[str]) -> ShardStats:
    """Per-language, per-kind block counts for a compiled corpus."""
    manifest = read_manifest(directory)
    by_language: dict[str, dict[str, int]] = {}
    for e in manifest.entries:
        code = e.kind.language if e.kind.language is not None else "-"
        row = by_language.setdefault(code, {})
        row[e.kind.name] = row.get(e.kind.name, 0) + 1
    return ShardStats(
        by_language=by_language,
        total_blocks=manifest.n_blocks,
        total_tokens=manifest.total_tokens,
    )
