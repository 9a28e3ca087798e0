import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from currikit.packing import BLOCK_TOKENS, BlockKind
from currikit.schedule import (
    ConstraintError,
    CurriculumManifest,
    SizingError,
    Strategy,
    build_schedule,
    validate_schedule,
)

ALL_STRATEGIES = list(Strategy)
LANGS = ["id", "km", "lo", "ms", "my", "ta", "th", "tl", "vi", "zh"]


def blocks_budget(n):
    return n * BLOCK_TOKENS


def test_parallel_only_twelve_blocks_example():
    m = build_schedule(Strategy.PARALLEL_ONLY, blocks_budget(12) + 1, ["id"], 4, seed=7)
    assert m.n_blocks == 12
    counts = m.kind_counts()
    assert counts["replay"] == 3
    assert counts["parallel:id"] == 9
    for batch in m.batches():
        assert sum(1 for e in batch if e.kind.name == "replay") == 1
    assert m.leftover_tokens == 1


def test_multilingual_round_robin_language_uniformity():
    # 160 blocks at batch 4: 120 non-replay entries over 10 languages,
    # round robin gives exactly 12 monolingual blocks per language
    m = build_schedule(Strategy.MULTILINGUAL, blocks_budget(160), LANGS, 4, seed=0)
    counts = m.kind_counts()
    per_lang = [counts[f"monolingual:{c}"] for c in LANGS]
    assert per_lang == [12] * 10
    assert counts["replay"] == 40


def test_multilingual_uneven_total_stays_balanced():
    # non-replay total not divisible by the language count: counts may
    # differ by at most one
    m = build_schedule(Strategy.MULTILINGUAL, blocks_budget(56), LANGS, 8, seed=0)
    counts = m.kind_counts()
    non_replay = 56 - 56 // 4
    per_lang = [counts.get(f"monolingual:{c}", 0) for c in LANGS]
    assert sum(per_lang) == non_replay
    assert max(per_lang) - min(per_lang) <= 1


@pytest.mark.parametrize("strategy", ALL_STRATEGIES)
@pytest.mark.parametrize("batch", [4, 8, 16])
def test_replay_exactness_everywhere(strategy, batch):
    m = build_schedule(strategy, blocks_budget(batch * 6), ["id", "th"], batch, seed=3)
    for b, group in enumerate(m.batches()):
        assert sum(1 for e in group if e.kind.name == "replay") == batch // 4, (
            strategy,
            batch,
            b,
        )
    counts = m.kind_counts()
    assert counts["replay"] == m.n_blocks // 4


def test_equal_ratio_strategies():
    for strategy in (Strategy.MIXED, Strategy.PARALLEL_FIRST, Strategy.PARALLEL_LAST):
        m = build_schedule(strategy, blocks_budget(44), ["id", "th", "vi"], 4, seed=9)
        counts = m.kind_counts()
        mono = sum(v for k, v in counts.items() if k.startswith("monolingual"))
        par = sum(v for k, v in counts.items() if k.startswith("parallel"))
        assert abs(mono - par) <= 1


def test_parallel_first_phase_order():
    m = build_schedule(Strategy.PARALLEL_FIRST, blocks_budget(32), ["id"], 8, seed=1)
    batch_kinds = []
    for group in m.batches():
        names = {e.kind.name for e in group if e.kind.name != "replay"}
        batch_kinds.append(names)
    transition = [b for b, names in enumerate(batch_kinds) if len(names) == 2]
    assert len(transition) <= 1
    last_par = max(b for b, n in enumerate(batch_kinds) if "parallel" in n)
    first_mono = min(b for b, n in enumerate(batch_kinds) if "monolingual" in n)
    assert last_par <= first_mono or (transition and last_par == transition[0])


@pytest.mark.parametrize("strategy", [Strategy.PARALLEL_FIRST, Strategy.PARALLEL_LAST])
@pytest.mark.parametrize("seed", range(25))
def test_phase_monotonicity_many_seeds(strategy, seed):
    m = build_schedule(strategy, blocks_budget(40), ["id", "th"], 8, seed=seed)
    assert validate_schedule(m) == []


def test_mixed_interleave_constraint_holds():
    for seed in range(50):
        m = build_schedule(Strategy.MIXED, blocks_budget(64), ["id", "th"], 8, seed=seed)
        assert validate_schedule(m) == []


def test_budget_arithmetic_ten_billion():
    m = build_schedule(Strategy.MULTILINGUAL, 10 * 10**9, LANGS, 8, seed=0)
    assert m.n_blocks == 38_144
    assert m.sequences_per_step == 512
    m16 = build_schedule(Strategy.MULTILINGUAL, blocks_budget(32), LANGS, 16, seed=0)
    assert m16.sequences_per_step == 1024


def test_budget_below_one_batch_raises():
    with pytest.raises(SizingError):
        build_schedule(Strategy.MULTILINGUAL, blocks_budget(4) - 1, ["id"], 4, seed=0)


def test_batch_size_must_be_multiple_of_four():
    for bad in (0, 2, 3, 6, -4):
        with pytest.raises(SizingError):
            build_schedule(Strategy.MULTILINGUAL, blocks_budget(48), ["id"], bad, seed=0)


def test_english_not_allowed_in_parallel_language_set():
    with pytest.raises(ValueError, match="English is implicit"):
        build_schedule(Strategy.PARALLEL_ONLY, blocks_budget(8), ["en", "id"], 4, seed=0)


def test_seed_determinism_and_sensitivity():
    kwargs = dict(
        strategy=Strategy.MIXED,
        token_budget=blocks_budget(32),
        language_set=["id", "th"],
        batch_size_blocks=8,
    )
    a = build_schedule(seed=1, **kwargs)
    b = build_schedule(seed=1, **kwargs)
    assert a.to_json() == b.to_json()
    c = build_schedule(seed=2, **kwargs)
    orders_a = [[e.kind.key() for e in batch] for batch in a.batches()]
    orders_c = [[e.kind.key() for e in batch] for batch in c.batches()]
    assert orders_a != orders_c


def test_manifest_json_round_trip():
    m = build_schedule(Strategy.PARALLEL_LAST, blocks_budget(16), ["km", "lo"], 4, seed=5)
    again = CurriculumManifest.from_json(m.to_json())
    assert again.to_json() == m.to_json()
    assert again.entries == m.entries
    assert again.strategy is Strategy.PARALLEL_LAST


def test_validate_self_consistency_all_strategies():
    for strategy in ALL_STRATEGIES:
        m = build_schedule(strategy, blocks_budget(24), ["id", "th"], 4, seed=4)
        assert validate_schedule(m) == [], strategy


def _mutate(manifest, position, kind):
    entries = list(manifest.entries)
    entries[position] = dataclasses.replace(entries[position], kind=kind)
    return dataclasses.replace(manifest, entries=entries)


def test_validate_flags_replay_ratio_violation():
    m = build_schedule(Strategy.PARALLEL_ONLY, blocks_budget(12), ["id"], 4, seed=7)
    replay_pos = next(e.position for e in m.entries if e.kind.name == "replay")
    bad = _mutate(m, replay_pos, BlockKind.parallel("id"))
    rules = {v.rule for v in validate_schedule(bad)}
    assert "replay-ratio" in rules


def test_validate_flags_interleave_violation():
    m = build_schedule(Strategy.MIXED, blocks_budget(24), ["id"], 4, seed=2)
    # turn every monolingual entry between the first two replays into parallel
    entries = list(m.entries)
    replay_positions = [e.position for e in entries if e.kind.name == "replay"]
    lo, hi = replay_positions[0], replay_positions[1]
    bad = m
    for e in entries[lo + 1 : hi]:
        if e.kind.name == "monolingual":
            bad = _mutate(bad, e.position, BlockKind.parallel("id"))
    violations = validate_schedule(bad)
    rules = {v.rule for v in violations}
    assert "interleave" in rules
    interleave = next(v for v in violations if v.rule == "interleave")
    assert hi in interleave.positions or lo + 1 in interleave.positions


def test_validate_flags_kind_domain_violation():
    m = build_schedule(Strategy.MULTILINGUAL, blocks_budget(8), ["id"], 4, seed=0)
    mono_pos = next(e.position for e in m.entries if e.kind.name == "monolingual")
    bad = _mutate(m, mono_pos, BlockKind.parallel("id"))
    rules = {v.rule for v in validate_schedule(bad)}
    assert "kind-domain" in rules


def test_validate_flags_phase_violation():
    m = build_schedule(Strategy.PARALLEL_FIRST, blocks_budget(32), ["id"], 8, seed=1)
    # put a parallel entry into the last batch (monolingual phase)
    target = next(
        e.position
        for e in m.entries[-m.batch_size_blocks :]
        if e.kind.name == "monolingual"
    )
    bad = _mutate(m, target, BlockKind.parallel("id"))
    rules = {v.rule for v in validate_schedule(bad)}
    assert "phase-order" in rules


def test_mixed_fallback_unsatisfiable_batch():
    # A hand-made degenerate batch: all non-replay entries monolingual.
    # The builder never produces this, so drive the fallback directly.
    from currikit.schedule import _RunState, _mixed_fallback

    base = [BlockKind.replay()] * 2 + [BlockKind.monolingual("id")] * 6
    with pytest.raises(ConstraintError) as err:
        _mixed_fallback(base, _RunState(), batch_index=5)
    assert err.value.batch_index == 5


@settings(max_examples=30, deadline=None)
@given(
    strategy=st.sampled_from(ALL_STRATEGIES),
    batches=st.integers(min_value=1, max_value=12),
    batch=st.sampled_from([4, 8, 16]),
    langs=st.lists(st.sampled_from(LANGS), min_size=1, max_size=4, unique=True),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_every_built_schedule_validates(strategy, batches, batch, langs, seed):
    m = build_schedule(strategy, blocks_budget(batches * batch), langs, batch, seed=seed)
    assert validate_schedule(m) == []
    assert m.n_blocks == batches * batch
