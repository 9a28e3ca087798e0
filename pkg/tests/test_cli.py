import json

import pytest

from currikit.cli import main
from currikit.synthetic import write_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "corpus"
    return write_corpus(
        root, languages=("id",), n_pairs=18_000, n_docs=260, sentences_per_doc=60,
        seed=2,
    )


@pytest.fixture(scope="module")
def compiled(tmp_path_factory, corpus):
    out = tmp_path_factory.mktemp("cli-out") / "shards"
    code = main(
        [
            "compile",
            "--config", str(corpus),
            "--strategy", "parallel-only",
            "--budget-tokens", "3145728",  # exactly 12 blocks
            "--batch-blocks", "4",
            "--seed", "7",
            "--out", str(out),
        ]
    )
    assert code == 0
    return out


def test_compile_then_audit_exit_zero(compiled, capsys):
    assert main(["audit", "--dir", str(compiled)]) == 0
    out = capsys.readouterr().out
    assert "audit: PASS" in out


def test_audit_fails_on_corruption(compiled, tmp_path, capsys):
    import shutil

    broken = tmp_path / "broken"
    shutil.copytree(compiled, broken)
    victim = broken / "block_00000003.bin"
    data = bytearray(victim.read_bytes())
    data[7] ^= 1
    victim.write_bytes(bytes(data))
    assert main(["audit", "--dir", str(broken)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_stats_compiled_dir(compiled, capsys):
    assert main(["stats", "--dir", str(compiled)]) == 0
    out = capsys.readouterr().out
    assert "Total blocks: 12" in out


def test_compiled_corpus_has_expected_split(compiled):
    from currikit.shards import shard_stats

    stats = shard_stats(compiled)
    assert stats.by_language["id"]["parallel"] == 9
    assert stats.by_language["-"]["replay"] == 3


def test_stats_raw_config(corpus, capsys):
    assert main(["stats", "--config", str(corpus)]) == 0
    out = capsys.readouterr().out
    assert "Parallel data" in out and "Indonesian" in out


def test_stats_requires_exactly_one_input(capsys):
    assert main(["stats"]) == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["audit", "--no-such-flag"])
    assert err.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_missing_corpus_dir_reports_error(tmp_path, capsys):
    assert main(["audit", "--dir", str(tmp_path / "nope")]) == 1
    assert "error:" in capsys.readouterr().err


def test_bleu_subcommand(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("the cat sat on the mat\n", encoding="utf-8")
    ref.write_text("the cat sat on the mat\n", encoding="utf-8")
    assert main(["bleu", "--hypotheses", str(hyp), "--references", str(ref), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["score"] == 100.0


def test_signif_subcommand_deterministic(tmp_path, capsys):
    refs = tmp_path / "refs.txt"
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    lines = [f"reference line {i} with tokens" for i in range(20)]
    refs.write_text("\n".join(lines) + "\n", encoding="utf-8")
    a.write_text("\n".join(lines) + "\n", encoding="utf-8")
    b.write_text("\n".join(f"junk{i} junk{i} junk{i}" for i in range(20)) + "\n", encoding="utf-8")
    argv = [
        "signif",
        "--hypotheses-a", str(a),
        "--hypotheses-b", str(b),
        "--references", str(refs),
        "--n", "1000",
        "--seed", "1",
        "--json",
    ]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    assert json.loads(first)["p_value"] == pytest.approx(1 / 1001)


def test_prompts_subcommand(tmp_path, capsys):
    dev = tmp_path / "dev.tsv"
    test = tmp_path / "test.tsv"
    dev.write_text(
        "".join(f"dev en {i}.\tdev sea {i}.\n" for i in range(6)), encoding="utf-8"
    )
    test.write_text(
        "".join(f"test en {i}.\ttest sea {i}.\n" for i in range(3)), encoding="utf-8"
    )
    out = tmp_path / "prompts.jsonl"
    code = main(
        [
            "prompts",
            "--dev", str(dev),
            "--test", str(test),
            "--source-lang", "en",
            "--target-lang", "th",
            "-k", "5",
            "--out", str(out),
        ]
    )
    assert code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) == 3
    assert records[0]["direction"] == "en-th"
    assert records[0]["prompt"].count("English:") == 6
    assert records[0]["prompt"].endswith("Thai:")


def test_aggregate_subcommand_inline(capsys):
    argv = ["aggregate", "--scores", "id=24.12,km=26.24,lo=44.09", "--json"]
    assert main(argv) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["avg"] == 31.48


def test_aggregate_subcommand_json_file(tmp_path, capsys):
    scores = tmp_path / "scores.json"
    scores.write_text(json.dumps({"id": 1.0, "th": 2.0}), encoding="utf-8")
    assert main(["aggregate", "--scores-json", str(scores)]) == 0
    assert "1.50" in capsys.readouterr().out


def test_compile_writes_run_config(compiled):
    echo = json.loads((compiled / "run_config.json").read_text())
    assert echo["strategy"] == "parallel-only"
    assert echo["seed"] == 7
    assert echo["batch_size_blocks"] == 4
