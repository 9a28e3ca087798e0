"""Text <-> token-id conversion.

All block arithmetic downstream is defined over token ids, so tokenizers
are loadable, immutable specs. Two kinds are supported:

* ``byte_fallback`` -- ids 0..255 are raw UTF-8 byte values, id 256 is the
  end-of-text marker. Lossless and self-contained, used by default.
* ``bpe_file`` -- a vocabulary file with a token-to-id table (plus merge
  rules kept as provenance); encoding is greedy longest-match against the
  table. See ``load_vocab`` for the line format.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Mapping

EOT_TEXT = "<|endoftext|>"

BYTE_FALLBACK_VOCAB = 257  # 256 byte values + 1 end-of-text id


class TokenizerError(ValueError):
    """Invalid tokenizer configuration or vocabulary file."""


class UnknownTokenizerError(TokenizerError):
    """A tokenizer reference could not be resolved."""


@dataclass(frozen=True)
class TokenizerSpec:
    """Immutable description of one tokenizer.

    For ``bpe_file`` specs, ``pieces`` holds the id -> token-string table;
    it is runtime payload, not part of the spec identity.
    """

    id: str
    vocab_size: int
    eot_id: int
    kind: str  # "byte_fallback" | "bpe_file"
    pieces: Mapping[int, str] | None = field(default=None, compare=False, repr=False)
    piece_ids: Mapping[str, int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("byte_fallback", "bpe_file"):
            raise TokenizerError(f"unknown tokenizer kind: {self.kind!r}")
        if not 0 <= self.eot_id < self.vocab_size:
            raise TokenizerError(
                f"eot_id {self.eot_id} out of range for vocab_size {self.vocab_size}"
            )
        if self.kind == "byte_fallback" and self.vocab_size != BYTE_FALLBACK_VOCAB:
            raise TokenizerError(
                f"byte_fallback requires vocab_size {BYTE_FALLBACK_VOCAB}, "
                f"got {self.vocab_size}"
            )
        if self.kind == "bpe_file":
            if not self.pieces:
                raise TokenizerError("bpe_file spec requires a token table")
            if self.piece_ids is None:
                object.__setattr__(
                    self, "piece_ids", {p: i for i, p in self.pieces.items()}
                )


@dataclass
class TokenSequence:
    ids: list[int]
    tokenizer_id: str

    def __len__(self) -> int:
        return len(self.ids)


BYTE_FALLBACK = TokenizerSpec(
    id="byte_fallback", vocab_size=BYTE_FALLBACK_VOCAB, eot_id=256, kind="byte_fallback"
)


def encode(text: str, spec: TokenizerSpec = BYTE_FALLBACK) -> TokenSequence:
    """Encode UTF-8 text to token ids. Pure and deterministic per spec."""
    if spec.kind == "byte_fallback":
        ids = list(text.encode("utf-8"))
    else:
        ids = _greedy_encode(text, spec)
    return TokenSequence(ids=ids, tokenizer_id=spec.id)


def decode(seq: TokenSequence | list[int], spec: TokenizerSpec = BYTE_FALLBACK) -> str:
    """Decode token ids back to text; the eot id renders as its marker text."""
    ids = seq.ids if isinstance(seq, TokenSequence) else seq
    for i in ids:
        if not 0 <= i < spec.vocab_size:
            raise TokenizerError(
                f"token id {i} out of range for vocab_size {spec.vocab_size}"
            )
    if spec.kind == "byte_fallback":
        parts: list[str] = []
        run = bytearray()
        for i in ids:
            if i == spec.eot_id:
                parts.append(run.decode("utf-8"))
                parts.append(EOT_TEXT)
                run = bytearray()
            else:
                run.append(i)
        parts.append(run.decode("utf-8"))
        return "".join(parts)
    assert spec.pieces is not None
    return "".join(EOT_TEXT if i == spec.eot_id else spec.pieces[i] for i in ids)


def count_tokens(text: str, spec: TokenizerSpec = BYTE_FALLBACK) -> int:
    """Number of ids ``encode`` would produce (raw text, no separators)."""
    if spec.kind == "byte_fallback":
        return len(text.encode("utf-8"))
    return len(encode(text, spec).ids)


def _greedy_encode(text: str, spec: TokenizerSpec) -> list[int]:
    table = spec.piece_ids
    assert table is not None
    max_len = max(len(p) for p in table)
    ids: list[int] = []
    pos = 0
    n = len(text)
    while pos < n:
        for length in range(min(max_len, n - pos), 0, -1):
            candidate = text[pos : pos + length]
            if candidate in table:
                ids.append(table[candidate])
                pos += length
                break
        else:
            raise TokenizerError(
                f"no token covers {text[pos]!r} at position {pos} "
                f"(tokenizer {spec.id!r})"
            )
    return ids


def load_vocab(path: str | os.PathLike[str]) -> TokenizerSpec:
    """Load a ``bpe_file`` spec from its vocabulary file.

    Line format (UTF-8, ``#`` starts a comment line):

        bpe-vocab-v1
        name <identifier>
        eot <id>
        merge <left-json> <right-json>   # zero or more, provenance only
        token <id> <json-string>         # one or more

    Token strings are JSON-escaped so whitespace and control characters are
    representable. ``vocab_size`` is max id + 1; if the eot id has no table
    entry the literal marker text is synthesized for it.
    """
    pieces: dict[int, str] = {}
    name: str | None = None
    eot_id: int | None = None
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not body or body[0].strip() != "bpe-vocab-v1":
        raise TokenizerError(f"{path}: missing 'bpe-vocab-v1' header")
    for ln in body[1:]:
        fields = ln.split(maxsplit=1)
        tag = fields[0]
        rest = fields[1] if len(fields) > 1 else ""
        if tag == "name":
            name = rest.strip()
        elif tag == "eot":
            eot_id = _parse_int(rest, path, "eot")
        elif tag == "merge":
            _parse_merge(rest, path)  # validated, retained only as provenance
        elif tag == "token":
            tid_text, _, piece_json = rest.partition(" ")
            tid = _parse_int(tid_text, path, "token id")
            piece = _parse_json_string(piece_json, path)
            if tid in pieces:
                raise TokenizerError(f"{path}: duplicate token id {tid}")
            pieces[tid] = piece
        else:
            raise TokenizerError(f"{path}: unknown line tag {tag!r}")
    if eot_id is None:
        raise TokenizerError(f"{path}: missing 'eot' line")
    if not pieces:
        raise TokenizerError(f"{path}: empty token table")
    pieces.setdefault(eot_id, EOT_TEXT)
    vocab_size = max(pieces) + 1
    return TokenizerSpec(
        id=name or os.path.splitext(os.path.basename(path))[0],
        vocab_size=vocab_size,
        eot_id=eot_id,
        kind="bpe_file",
        pieces=pieces,
        piece_ids={piece: i for i, piece in pieces.items()},
    )


def resolve_spec(ref: str) -> TokenizerSpec:
    """Resolve a tokenizer reference: the name ``byte_fallback`` or a vocab path."""
    if ref == "byte_fallback":
        return BYTE_FALLBACK
    if os.path.exists(ref):
        return load_vocab(ref)
    raise UnknownTokenizerError(f"unknown tokenizer: {ref!r} (not a name or file)")


def _parse_int(text: str, path: object, what: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise TokenizerError(f"{path}: bad {what}: {text!r}") from None


def _parse_json_string(text: str, path: object) -> str:
    try:
        piece = json.loads(text)
    except json.JSONDecodeError:
        raise TokenizerError(f"{path}: bad token string: {text!r}") from None
    if not isinstance(piece, str) or not piece:
        raise TokenizerError(f"{path}: token string must be non-empty: {text!r}")
    return piece


def _parse_merge(text: str, path: object) -> tuple[str, str]:
    try:
        left_raw, right_raw = text.split(" ", 1)
        return _parse_json_string(left_raw, path), _parse_json_string(right_raw, path)
    except ValueError:
        raise TokenizerError(f"{path}: bad merge line: {text!r}") from None
