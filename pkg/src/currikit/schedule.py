"""Curriculum schedules: ordered block kinds per strategy.

A schedule is built batch by batch. Every batch holds exactly one replay
block per four blocks, the remaining slots are filled from a global
strategy-specific kind sequence, and the order inside each batch is
randomized with keyed draws. For the mixed strategy, permutations are
redrawn (bounded, then a constructive fallback) until every run of
non-replay blocks between two replay blocks contains at least one
monolingual and one parallel block, measured on the final order across
batch boundaries.

Budgets are floored to whole batches; leftover tokens are reported on the
manifest, never padded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from . import rng
from .corpus import sort_codes
from .packing import BLOCK_TOKENS, SEQUENCES_PER_BLOCK, BlockKind

REPLAY_DIVISOR = 4  # one block in four is replay, in every batch
MAX_PERMUTATION_ATTEMPTS = 1_000

MANIFEST_FORMAT = "curriculum-manifest-v1"
MANIFEST_NAME = "manifest.json"


class Strategy(str, Enum):
    MULTILINGUAL = "multilingual"
    MIXED = "mixed"
    PARALLEL_FIRST = "parallel-first"
    PARALLEL_LAST = "parallel-last"
    PARALLEL_ONLY = "parallel-only"
    MULTILINGUAL_REPLACEMENT = "multilingual-replacement"


# Which non-replay kinds a strategy schedules.
_USES_MONOLINGUAL = {
    Strategy.MULTILINGUAL,
    Strategy.MIXED,
    Strategy.PARALLEL_FIRST,
    Strategy.PARALLEL_LAST,
}
_USES_PARALLEL = {
    Strategy.MIXED,
    Strategy.PARALLEL_FIRST,
    Strategy.PARALLEL_LAST,
    Strategy.PARALLEL_ONLY,
}
_EQUAL_RATIO = {Strategy.MIXED, Strategy.PARALLEL_FIRST, Strategy.PARALLEL_LAST}


class SizingError(ValueError):
    """Budget or batch geometry cannot produce a whole schedule."""


class ConstraintError(RuntimeError):
    """A batch order satisfying the interleave constraint does not exist."""

    def __init__(self, message: str, batch_index: int):
        super().__init__(message)
        self.batch_index = batch_index


@dataclass(frozen=True)
class ScheduleEntry:
    position: int
    kind: BlockKind
    batch_index: int


@dataclass
class Violation:
    rule: str
    positions: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        where = ",".join(map(str, self.positions[:8]))
        return f"{self.rule} @ [{where}]: {self.detail}"


@dataclass
class CurriculumManifest:
    strategy: Strategy
    seed: int
    batch_size_blocks: int
    entries: list[ScheduleEntry]
    language_set: list[str]
    token_budget: int
    tokenizer_id: str
    leftover_tokens: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def n_blocks(self) -> int:
        return len(self.entries)

    @property
    def n_batches(self) -> int:
        return len(self.entries) // self.batch_size_blocks

    @property
    def sequences_per_step(self) -> int:
        return self.batch_size_blocks * SEQUENCES_PER_BLOCK

    @property
    def total_tokens(self) -> int:
        return self.n_blocks * BLOCK_TOKENS

    def batches(self) -> Iterable[list[ScheduleEntry]]:
        b = self.batch_size_blocks
        for start in range(0, len(self.entries), b):
            yield self.entries[start : start + b]

    def kind_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for e in self.entries:
            counts[e.kind.key()] = counts.get(e.kind.key(), 0) + 1
        return counts

    def to_json(self) -> str:
        """Stable serialization: identical manifests are byte-identical."""
        doc = {
            "format": MANIFEST_FORMAT,
            "strategy": self.strategy.value,
            "seed": self.seed,
            "batch_size_blocks": self.batch_size_blocks,
            "sequences_per_step": self.sequences_per_step,
            "language_set": self.language_set,
            "token_budget": self.token_budget,
            "leftover_tokens": self.leftover_tokens,
            "tokenizer_id": self.tokenizer_id,
            "block_tokens": BLOCK_TOKENS,
            "entries": [
                {
                    "position": e.position,
                    "batch": e.batch_index,
                    "kind": e.kind.name,
                    "language": e.kind.language,
                }
                for e in self.entries
            ],
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CurriculumManifest":
        doc = json.loads(text)
        if doc.get("format") != MANIFEST_FORMAT:
            raise ValueError(f"not a curriculum manifest: format={doc.get('format')!r}")
        entries = [
            ScheduleEntry(
                position=e["position"],
                kind=BlockKind(e["kind"], e.get("language")),
                batch_index=e["batch"],
            )
            for e in doc["entries"]
        ]
        return cls(
            strategy=Strategy(doc["strategy"]),
            seed=doc["seed"],
            batch_size_blocks=doc["batch_size_blocks"],
            entries=entries,
            language_set=list(doc["language_set"]),
            token_budget=doc["token_budget"],
            leftover_tokens=doc.get("leftover_tokens", 0),
            tokenizer_id=doc["tokenizer_id"],
            metadata=doc.get("metadata", {}),
        )


def _cycle(codes: Sequence[str]):
    i = 0
    while True:
        yield codes[i % len(codes)]
        i += 1


def _non_replay_kinds(strategy: Strategy, total: int, langs: Sequence[str]) -> list[BlockKind]:
    """The global, pre-shuffle sequence of non-replay kinds."""
    mono = _cycle(langs)
    par = _cycle(langs)
    if strategy is Strategy.MULTILINGUAL:
        return [BlockKind.monolingual(next(mono)) for _ in range(total)]
    if strategy is Strategy.PARALLEL_ONLY:
        return [BlockKind.parallel(next(par)) for _ in range(total)]
    if strategy is Strategy.MULTILINGUAL_REPLACEMENT:
        return [BlockKind.replacement(next(par)) for _ in range(total)]
    if strategy is Strategy.MIXED:
        out = []
        for j in range(total):
            if j % 2 == 0:
                out.append(BlockKind.monolingual(next(mono)))
            else:
                out.append(BlockKind.parallel(next(par)))
        return out
    if strategy is Strategy.PARALLEL_FIRST:
        head = (total + 1) // 2
        return [BlockKind.parallel(next(par)) for _ in range(head)] + [
            BlockKind.monolingual(next(mono)) for _ in range(total - head)
        ]
    if strategy is Strategy.PARALLEL_LAST:
        head = (total + 1) // 2
        return [BlockKind.monolingual(next(mono)) for _ in range(head)] + [
            BlockKind.parallel(next(par)) for _ in range(total - head)
        ]
    raise ValueError(f"unhandled strategy {strategy}")


@dataclass
class _RunState:
    """Open run of non-replay kinds since the last replay block."""

    mono: int = 0
    parallel: int = 0
    bounded: bool = False  # True once any replay block has been seen

    def copy(self) -> "_RunState":
        return _RunState(self.mono, self.parallel, self.bounded)


def _scan_mixed(order: Sequence[BlockKind], state: _RunState) -> tuple[bool, _RunState]:
    """Check the inter-replay run constraint over one batch, given the open run."""
    s = state.copy()
    for kind in order:
        if kind.name == "replay":
            if s.bounded and (s.mono == 0 or s.parallel == 0):
                return False, s
            s.mono = s.parallel = 0
            s.bounded = True
        elif kind.name == "monolingual":
            s.mono += 1
        else:
            s.parallel += 1
    return True, s


def _mixed_fallback(
    base: Sequence[BlockKind], state: _RunState, batch_index: int
) -> list[BlockKind]:
    """Deterministic batch order that always satisfies the run constraint.

    Lays the batch out as replay-terminated groups of three non-replay
    blocks, seeding every group with one monolingual and one parallel
    block, which also heals whatever open run was carried in.
    """
    monos = [k for k in base if k.name == "monolingual"]
    pars = [k for k in base if k.name == "parallel"]
    replays = [k for k in base if k.name == "replay"]
    group_size = len(base) // len(replays) - 1 if replays else len(base)
    if replays and (len(monos) < len(replays) or len(pars) < len(replays)):
        raise ConstraintError(
            f"batch {batch_index} cannot satisfy the interleave constraint: "
            f"{len(monos)} monolingual / {len(pars)} parallel blocks "
            f"for {len(replays)} replay slots",
            batch_index,
        )
    order: list[BlockKind] = []
    for _ in replays:
        group = [monos.pop(0), pars.pop(0)]
        while len(group) < group_size and (monos or pars):
            group.append(monos.pop(0) if len(monos) >= len(pars) else pars.pop(0))
        order.extend(group)
        order.append(BlockKind.replay())
    # any remainder (no replays in batch, or uneven groups) goes at the end
    order.extend(monos)
    order.extend(pars)
    return order


def build_schedule(
    strategy: Strategy | str,
    token_budget: int,
    language_set: Iterable[str],
    batch_size_blocks: int,
    seed: int,
    tokenizer_id: str = "byte_fallback",
    metadata: dict | None = None,
) -> CurriculumManifest:
    """Build the full ordered schedule for one strategy and seed.

    The block count is the largest multiple of ``batch_size_blocks`` that
    fits the token budget. Languages cycle round-robin in the canonical
    code order, independently per kind.
    """
    strategy = Strategy(strategy)
    langs = sort_codes(language_set)
    if not langs:
        raise ValueError("language_set must not be empty")
    if strategy in _USES_PARALLEL or strategy is Strategy.MULTILINGUAL_REPLACEMENT:
        if "en" in langs:
            raise ValueError("English is implicit; language_set lists SEA languages")
    if batch_size_blocks < REPLAY_DIVISOR or batch_size_blocks % REPLAY_DIVISOR:
        raise SizingError(
            f"batch_size_blocks must be a positive multiple of {REPLAY_DIVISOR}, "
            f"got {batch_size_blocks}"
        )
    max_blocks = token_budget // BLOCK_TOKENS
    n_blocks = max_blocks - (max_blocks % batch_size_blocks)
    if n_blocks <= 0:
        raise SizingError(
            f"budget {token_budget} is below one batch "
            f"({batch_size_blocks} x {BLOCK_TOKENS} tokens)"
        )
    n_batches = n_blocks // batch_size_blocks
    replay_per_batch = batch_size_blocks // REPLAY_DIVISOR
    non_replay_per_batch = batch_size_blocks - replay_per_batch
    kinds = _non_replay_kinds(strategy, n_batches * non_replay_per_batch, langs)

    entries: list[ScheduleEntry] = []
    run = _RunState()
    for b in range(n_batches):
        chunk = kinds[b * non_replay_per_batch : (b + 1) * non_replay_per_batch]
        base = [BlockKind.replay()] * replay_per_batch + chunk
        order: list[BlockKind] | None = None
        for attempt in range(MAX_PERMUTATION_ATTEMPTS):
            candidate = rng.shuffled(base, seed, "batch", b, attempt)
            if strategy is not Strategy.MIXED:
                order = candidate
                break
            ok, next_run = _scan_mixed(candidate, run)
            if ok:
                order = candidate
                run = next_run
                break
        if order is None:
            order = _mixed_fallback(base, run, b)
            ok, run = _scan_mixed(order, run)
            if not ok:
                raise ConstraintError(
                    f"batch {b} fallback violates the interleave constraint", b
                )
        start = b * batch_size_blocks
        entries.extend(
            ScheduleEntry(position=start + i, kind=k, batch_index=b)
            for i, k in enumerate(order)
        )

    return CurriculumManifest(
        strategy=strategy,
        seed=seed,
        batch_size_blocks=batch_size_blocks,
        entries=entries,
        language_set=langs,
        token_budget=token_budget,
        leftover_tokens=token_budget - n_blocks * BLOCK_TOKENS,
        tokenizer_id=tokenizer_id,
        metadata=metadata or {},
    )


def validate_schedule(manifest: CurriculumManifest) -> list[Violation]:
    """Audit a manifest against every strategy postcondition.

    Returns an empty list iff the schedule is valid; violations name the
    broken rule and the positions involved.
    """
    v: list[Violation] = []
    entries = manifest.entries
    batch = manifest.batch_size_blocks
    strategy = manifest.strategy

    for i, e in enumerate(entries):
        if e.position != i:
            v.append(Violation("positions", (i,), f"position {e.position} at index {i}"))
        if e.batch_index != i // batch:
            v.append(
                Violation("positions", (i,), f"batch_index {e.batch_index} != {i // batch}")
            )
    if len(entries) % batch:
        v.append(
            Violation(
                "batch-multiple",
                (),
                f"{len(entries)} entries not a multiple of batch {batch}",
            )
        )

    want_replay = batch // REPLAY_DIVISOR
    for b, group in enumerate(manifest.batches()):
        got = sum(1 for e in group if e.kind.name == "replay")
        if got != want_replay:
            v.append(
                Violation(
                    "replay-ratio",
                    tuple(e.position for e in group),
                    f"batch {b} has {got} replay blocks, want {want_replay}",
                )
            )

    allowed = _allowed_kind_names(strategy)
    for e in entries:
        if e.kind.name != "replay" and e.kind.name not in allowed:
            v.append(
                Violation(
                    "kind-domain", (e.position,), f"{e.kind.key()} not allowed in {strategy.value}"
                )
            )
        if e.kind.language is not None and e.kind.language not in manifest.language_set:
            v.append(
                Violation(
                    "language-domain",
                    (e.position,),
                    f"{e.kind.language} not in the manifest language set",
                )
            )

    mono = sum(1 for e in entries if e.kind.name == "monolingual")
    par = sum(1 for e in entries if e.kind.name == "parallel")
    if strategy in _EQUAL_RATIO and abs(mono - par) > 1:
        v.append(
            Violation(
                "equal-ratio", (), f"{mono} monolingual vs {par} parallel blocks"
            )
        )

    if strategy is Strategy.MIXED:
        v.extend(_interleave_violations(entries))
    if strategy in (Strategy.PARALLEL_FIRST, Strategy.PARALLEL_LAST):
        v.extend(_phase_violations(manifest))
    v.extend(_language_balance_violations(manifest))
    return v


def _allowed_kind_names(strategy: Strategy) -> set[str]:
    allowed = set()
    if strategy in _USES_MONOLINGUAL:
        allowed.add("monolingual")
    if strategy in _USES_PARALLEL:
        allowed.add("parallel")
    if strategy is Strategy.MULTILINGUAL_REPLACEMENT:
        allowed.add("replacement")
    return allowed


def _interleave_violations(entries: Sequence[ScheduleEntry]) -> list[Violation]:
    out = []
    run_start: int | None = None
    mono = par = 0
    bounded = False
    for e in entries:
        if e.kind.name == "replay":
            if bounded and (mono == 0 or par == 0):
                span = (run_start, e.position) if run_start is not None else (e.position,)
                out.append(
                    Violation(
                        "interleave",
                        tuple(p for p in span if p is not None),
                        f"run before position {e.position} has "
                        f"{mono} monolingual and {par} parallel blocks",
                    )
                )
            mono = par = 0
            bounded = True
            run_start = e.position + 1
        elif e.kind.name == "monolingual":
            mono += 1
        else:
            par += 1
    return out


def _phase_violations(manifest: CurriculumManifest) -> list[Violation]:
    first = manifest.strategy is Strategy.PARALLEL_FIRST
    early, late = ("parallel", "monolingual") if first else ("monolingual", "parallel")
    last_early_batch = -1
    first_late_batch = None
    for b, group in enumerate(manifest.batches()):
        names = {e.kind.name for e in group}
        if early in names:
            last_early_batch = b
        if late in names and first_late_batch is None:
            first_late_batch = b
    if first_late_batch is not None and last_early_batch > first_late_batch:
        return [
            Violation(
                "phase-order",
                (first_late_batch * manifest.batch_size_blocks,),
                f"{early} blocks appear after batch {first_late_batch} "
                f"(up to batch {last_early_batch}); at most one transition "
                f"batch may hold both",
            )
        ]
    return []


def _language_balance_violations(manifest: CurriculumManifest) -> list[Violation]:
    out = []
    for name in ("monolingual", "parallel", "replacement"):
        counts: dict[str, int] = {code: 0 for code in manifest.language_set}
        seen = False
        for e in manifest.entries:
            if e.kind.name == name and e.kind.language is not None:
                counts[e.kind.language] = counts.get(e.kind.language, 0) + 1
                seen = True
        if seen and max(counts.values()) - min(counts.values()) > 1:
            out.append(
                Violation(
                    "language-balance",
                    (),
                    f"{name} blocks per language are uneven: {counts}",
                )
            )
    return out
