"""Translation scoring and result aggregation.

Corpus BLEU with the standard decomposition: clipped n-gram precisions
(n = 1..4) pooled over sentences, geometric mean, brevity penalty, no
smoothing (any zero precision zeroes the score). Significance is a
one-sided paired bootstrap over sentence indices with an add-one
corrected p-value. Scoring is case-sensitive; tokenization mode and
sample counts are carried on every result so reports are self-describing.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

import numpy as np

from . import rng
from .corpus import SEA_CODES, LanguageTag, SentencePair, language

MAX_NGRAM = 4

TOKENIZATION_MODES = ("default", "zh")


def mode_for_language(code: str) -> str:
    """Word BLEU is meaningless for unsegmented CJK text; use zh mode there."""
    return "zh" if code == "zh" else "default"


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return (
        0x4E00 <= cp <= 0x9FFF
        or 0x3400 <= cp <= 0x4DBF
        or 0xF900 <= cp <= 0xFAFF
        or 0x20000 <= cp <= 0x2A6DF
        or 0x2A700 <= cp <= 0x2EBEF
    )


def tokenize(text: str, mode: str = "default") -> list[str]:
    """Separate punctuation (and CJK characters in zh mode), then split."""
    if mode not in TOKENIZATION_MODES:
        raise ValueError(f"unknown tokenization mode {mode!r}")
    out: list[str] = []
    for ch in text:
        if unicodedata.category(ch).startswith("P") or (mode == "zh" and _is_cjk(ch)):
            out.append(f" {ch} ")
        else:
            out.append(ch)
    return "".join(out).split()


@dataclass
class BleuScore:
    score: float  # 0..100
    precisions: tuple[float, float, float, float]  # fractions in [0, 1]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    mode: str = "default"

    def format(self) -> str:
        p = "/".join(f"{x:.3f}" for x in self.precisions)
        return (
            f"BLEU = {self.score:.2f} (precisions {p}, bp {self.brevity_penalty:.3f}, "
            f"hyp_len {self.hyp_len}, ref_len {self.ref_len}, mode {self.mode}, "
            f"case-sensitive)"
        )


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _sentence_stats(hyp_tokens: Sequence[str], ref_tokens: Sequence[str]) -> list[int]:
    """[correct_1..4, total_1..4, hyp_len, ref_len] for one sentence."""
    row = []
    for n in range(1, MAX_NGRAM + 1):
        hyp = _ngram_counts(hyp_tokens, n)
        ref = _ngram_counts(ref_tokens, n)
        row.append(sum(min(c, ref[g]) for g, c in hyp.items()))
    for n in range(1, MAX_NGRAM + 1):
        row.append(max(0, len(hyp_tokens) - n + 1))
    row.append(len(hyp_tokens))
    row.append(len(ref_tokens))
    return row


def _corpus_stats(
    hypotheses: Sequence[str], references: Sequence[str], mode: str
) -> np.ndarray:
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValueError("empty corpus")
    rows = []
    for i, (hyp, ref) in enumerate(zip(hypotheses, references)):
        if not ref.strip():
            raise ValueError(f"reference sentence {i} is empty")
        rows.append(_sentence_stats(tokenize(hyp, mode), tokenize(ref, mode)))
    return np.array(rows, dtype=np.int64)


def _score_from_totals(totals: Sequence[int], mode: str) -> BleuScore:
    correct = totals[:MAX_NGRAM]
    total = totals[MAX_NGRAM : 2 * MAX_NGRAM]
    hyp_len = int(totals[-2])
    ref_len = int(totals[-1])
    precisions = tuple(
        (correct[n] / total[n]) if total[n] > 0 else 0.0 for n in range(MAX_NGRAM)
    )
    if hyp_len >= ref_len:
        bp = 1.0
    elif hyp_len == 0:
        bp = 0.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    if min(precisions) > 0.0:
        score = bp * 100.0 * math.exp(sum(math.log(p) for p in precisions) / MAX_NGRAM)
    else:
        score = 0.0
    return BleuScore(
        score=score,
        precisions=precisions,  # type: ignore[arg-type]
        brevity_penalty=bp,
        hyp_len=hyp_len,
        ref_len=ref_len,
        mode=mode,
    )


def bleu(
    hypotheses: Sequence[str], references: Sequence[str], mode: str = "default"
) -> BleuScore:
    """Corpus-level BLEU: counts are pooled across sentences before division,
    and each hypothesis n-gram count is clipped at its reference count."""
    stats = _corpus_stats(hypotheses, references, mode)
    return _score_from_totals(stats.sum(axis=0), mode)


@dataclass
class SignificanceResult:
    delta: float  # score(A) - score(B) on the full corpus
    p_value: float
    n_samples: int
    seed: int
    score_a: float
    score_b: float
    mode: str = "default"

    def format(self) -> str:
        return (
            f"A = {self.score_a:.2f}, B = {self.score_b:.2f}, "
            f"delta = {self.delta:+.2f}, p = {self.p_value:.6f} "
            f"(one-sided, {self.n_samples} samples, seed {self.seed}, "
            f"mode {self.mode})"
        )


def paired_bootstrap(
    hyps_a: Sequence[str],
    hyps_b: Sequence[str],
    references: Sequence[str],
    n_samples: int = 1000,
    seed: int = 0,
    mode: str = "default",
) -> SignificanceResult:
    """One-sided paired bootstrap for "A better than B".

    Each sample redraws sentence indices with replacement (the same indices
    for both systems) and compares corpus BLEU. The p-value is add-one
    corrected, (1 + #{BLEU_A <= BLEU_B}) / (n_samples + 1), so ties count
    against A and p is never 0. Index draws are keyed by (seed, sample), so
    results are independent of evaluation order.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if len(hyps_a) != len(hyps_b) or len(hyps_a) != len(references):
        raise ValueError("hypothesis and reference lists must have equal length")
    if len(references) < 2:
        raise ValueError("paired bootstrap needs at least 2 sentences")
    stats_a = _corpus_stats(hyps_a, references, mode)
    stats_b = _corpus_stats(hyps_b, references, mode)
    n = len(references)
    score_a = _score_from_totals(stats_a.sum(axis=0), mode).score
    score_b = _score_from_totals(stats_b.sum(axis=0), mode).score
    worse_or_tied = 0
    for s in range(n_samples):
        idx = rng.indices_with_replacement(n, n, seed, "bootstrap", s)
        sample_a = _score_from_totals(stats_a[idx].sum(axis=0), mode).score
        sample_b = _score_from_totals(stats_b[idx].sum(axis=0), mode).score
        if sample_a <= sample_b:
            worse_or_tied += 1
    return SignificanceResult(
        delta=score_a - score_b,
        p_value=(1 + worse_or_tied) / (n_samples + 1),
        n_samples=n_samples,
        seed=seed,
        score_a=score_a,
        score_b=score_b,
        mode=mode,
    )


# --- few-shot prompt assembly ----------------------------------------------


@dataclass
class PromptItem:
    prompt: str
    reference: str


@dataclass
class PromptSet:
    items: list[PromptItem]
    source: str  # ISO code
    target: str  # ISO code
    k: int

    def to_records(self) -> list[dict]:
        d = f"{self.source}-{self.target}"
        return [
            {"prompt": it.prompt, "reference": it.reference, "direction": d}
            for it in self.items
        ]


def _pair_sides(pair: SentencePair, src: LanguageTag, tgt: LanguageTag) -> tuple[str, str]:
    sea = src if src.code != "en" else tgt
    if pair.sea_language.code != sea.code:
        raise ValueError(
            f"pair language {pair.sea_language.code} does not match direction "
            f"{src.code}-{tgt.code}"
        )
    if src.code == "en":
        return pair.en_text, pair.sea_text
    return pair.sea_text, pair.en_text


def build_prompts(
    dev_pairs: Sequence[SentencePair],
    test_pairs: Sequence[SentencePair],
    direction: tuple[str | LanguageTag, str | LanguageTag],
    k: int = 5,
    label_style: str = "name",
) -> PromptSet:
    """Fixed few-shot prompts mirroring the training segment template.

    The first k dev pairs (in file order) are the exemplars for every test
    item, rendered "{Source}: {src}\\n{Target}: {tgt}" and blank-line
    separated; the final item stops after "{Target}:".
    """
    src, tgt = language(direction[0]), language(direction[1])
    if (src.code == "en") == (tgt.code == "en"):
        raise ValueError("direction must pair English with a SEA language")
    if k < 0:
        raise ValueError("k must be non-negative")
    if len(dev_pairs) < k:
        raise ValueError(f"need {k} dev pairs for exemplars, have {len(dev_pairs)}")
    if label_style == "name":
        src_label, tgt_label = src.display_name, tgt.display_name
    elif label_style == "code":
        src_label, tgt_label = src.code, tgt.code
    else:
        raise ValueError(f"unknown label style {label_style!r}")
    shots = []
    for pair in dev_pairs[:k]:
        s, t = _pair_sides(pair, src, tgt)
        shots.append(f"{src_label}: {s}\n{tgt_label}: {t}\n\n")
    prefix = "".join(shots)
    items = []
    for pair in test_pairs:
        s, t = _pair_sides(pair, src, tgt)
        items.append(PromptItem(prompt=f"{prefix}{src_label}: {s}\n{tgt_label}:", reference=t))
    return PromptSet(items=items, source=src.code, target=tgt.code, k=k)


# --- per-language aggregation ----------------------------------------------


def round_half_up(value: float | Decimal, places: int = 2) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass
class ResultRow:
    label: str
    scores: dict[str, float]  # ISO code -> score
    average: float


def aggregate(per_language_scores: Mapping[str, float], label: str = "") -> ResultRow:
    """Arithmetic mean over languages, rounded half-up to 2 decimals."""
    if not per_language_scores:
        raise ValueError("no per-language scores to aggregate")
    scores = {language(code).code: float(v) for code, v in per_language_scores.items()}
    mean = sum(Decimal(str(v)) for v in scores.values()) / len(scores)
    return ResultRow(label=label, scores=scores, average=round_half_up(mean))


@dataclass
class ResultTable:
    rows: list[ResultRow]

    def render(self) -> str:
        codes = [c for c in ("en",) + SEA_CODES if any(c in r.scores for r in self.rows)]
        label_w = max(12, max((len(r.label) for r in self.rows), default=0) + 2)
        header = f"{'Model':<{label_w}}" + "".join(f"{c:>8}" for c in codes) + f"{'Avg':>8}"
        lines = [header]
        for r in self.rows:
            cells = "".join(
                f"{r.scores[c]:>8.2f}" if c in r.scores else f"{'-':>8}" for c in codes
            )
            lines.append(f"{r.label:<{label_w}}{cells}{r.average:>8.2f}")
        return "\n".join(lines)


def read_lines(path: str) -> list[str]:
    """One sentence per line, UTF-8; used for hypothesis/reference files."""
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


__all__ = [
    "BleuScore",
    "PromptItem",
    "PromptSet",
    "ResultRow",
    "ResultTable",
    "SignificanceResult",
    "aggregate",
    "bleu",
    "build_prompts",
    "mode_for_language",
    "paired_bootstrap",
    "read_lines",
    "round_half_up",
    "tokenize",
]
