"""Note ingestion: sentence segmentation, token cleaning, WordPiece encoding.

A note comes in as raw text, is segmented into sentences, each sentence is
reduced to its cleaned lowercase words, and each sentence can be encoded to
vocabulary ids ready for the encoder.
"""

from __future__ import annotations

import json
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import EmptyDocument, MissingSpecialToken, ParseError

MAX_SEQUENCE_LENGTH = 128

_BLANK_LINE = re.compile(r"\n[ \t\r]*\n")
_TERMINATOR = re.compile(r"[.!?]+(?=\s)")
_PUNCT = string.punctuation


def default_abbreviations() -> frozenset[str]:
    """Abbreviations that suppress a sentence split at their trailing period."""
    text = resources.files("attnsum").joinpath("data/abbreviations.txt").read_text("utf-8")
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


def load_abbreviations(path: str | Path) -> frozenset[str]:
    lines = Path(path).read_text("utf-8").splitlines()
    return frozenset(line.strip().lower() for line in lines if line.strip())


@dataclass(frozen=True)
class RawNote:
    id: str
    text: str
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("note id must be nonempty")
        if not self.text.strip():
            raise ValueError("note text must be nonempty")


@dataclass(frozen=True)
class Sentence:
    index: int
    raw: str
    words: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    note_id: str
    sentences: tuple[Sentence, ...]
    word_counts: Counter = field(compare=False)

    @property
    def vocabulary(self) -> list[str]:
        """Distinct words of the note in sorted order."""
        return sorted(self.word_counts)


def segment_sentences(text: str, abbreviations: frozenset[str] | None = None) -> list[str]:
    """Split note text into sentences.

    Boundaries are '.', '!' or '?' followed by whitespace, plus blank lines.
    A period is not a boundary when the token ending at it is a guarded
    abbreviation ("dr.", "e.g.", ...). Stripping aside, every non-whitespace
    character of the input survives in order.
    """
    if not text.strip():
        raise EmptyDocument("note text is whitespace-only")
    if abbreviations is None:
        abbreviations = default_abbreviations()

    sentences: list[str] = []
    for block in _BLANK_LINE.split(text):
        start = 0
        for m in _TERMINATOR.finditer(block):
            end = m.end()
            # token ending at the terminator, e.g. "dr." in "dr. smith"
            tail = block[start:end].rsplit(None, 1)[-1].lower() if block[start:end].strip() else ""
            if tail in abbreviations:
                continue
            piece = block[start:end].strip()
            if piece:
                sentences.append(piece)
            start = end
        piece = block[start:].strip()
        if piece:
            sentences.append(piece)
    return sentences


def clean_words(raw_tokens: list[str]) -> list[str]:
    """Lowercase tokens, strip surrounding punctuation, keep only tokens with
    at least one alphabetic character. Tokens containing '%' are dropped
    (prescription-percentage rule). Idempotent."""
    out = []
    for tok in raw_tokens:
        if "%" in tok:
            continue
        word = tok.lower().strip(_PUNCT)
        if any(c.isalpha() for c in word):
            out.append(word)
    return out


def build_document(note: RawNote, abbreviations: frozenset[str] | None = None) -> Document:
    """Segment and clean a raw note. Raises EmptyDocument for blank text."""
    raws = segment_sentences(note.text, abbreviations)
    sentences = tuple(
        Sentence(index=i, raw=raw, words=tuple(clean_words(raw.split())))
        for i, raw in enumerate(raws)
    )
    counts: Counter = Counter()
    for s in sentences:
        counts.update(s.words)
    return Document(note_id=note.id, sentences=sentences, word_counts=counts)


def load_corpus(path: str | Path) -> list[RawNote]:
    """Read a JSON-lines corpus: one object per line with fields
    id, text and optional labels. Preserves input order."""
    notes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ParseError(lineno, "record is not a JSON object")
            if "id" not in record:
                raise ParseError(lineno, "missing 'id' field")
            if "text" not in record:
                raise ParseError(lineno, "missing 'text' field")
            labels = record.get("labels") or ()
            if not isinstance(labels, (list, tuple)) or not all(isinstance(x, str) for x in labels):
                raise ParseError(lineno, "'labels' must be a list of strings")
            try:
                notes.append(RawNote(id=str(record["id"]), text=str(record["text"]),
                                     labels=tuple(labels)))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from exc
    return notes


class Vocabulary:
    """Token vocabulary: plain text file, one token per line, line number = id."""

    CLS = "[CLS]"
    SEP = "[SEP]"
    UNK = "[UNK]"

    def __init__(self, tokens: list[str]):
        self._id_of = {tok: i for i, tok in enumerate(tokens)}
        self._tokens = list(tokens)
        for special in (self.CLS, self.SEP, self.UNK):
            if special not in self._id_of:
                raise MissingSpecialToken(f"vocabulary lacks {special}")
        self.cls_id = self._id_of[self.CLS]
        self.sep_id = self._id_of[self.SEP]
        self.unk_id = self._id_of[self.UNK]

    @classmethod
    def from_file(cls, path: str | Path) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh]
        while tokens and tokens[-1] == "":
            tokens.pop()
        return cls(tokens)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._id_of

    def id_of(self, token: str) -> int:
        return self._id_of[token]

    def token_of(self, idx: int) -> str:
        return self._tokens[idx]


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple[int, ...]
    segment_ids: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.ids)


def wordpiece_tokenize(sentence: Sentence, vocab: Vocabulary,
                       max_length: int = MAX_SEQUENCE_LENGTH) -> TokenSequence:
    """Encode a sentence with greedy longest-match WordPiece.

    The classifier token opens the sequence and the separator closes it;
    the subword payload is truncated (head kept) so the total length never
    exceeds max_length.
    """
    pieces: list[int] = []
    for word in sentence.words:
        start = 0
        word_ids: list[int] = []
        while start < len(word):
            end = len(word)
            found = None
            while start < end:
                sub = word[start:end]
                if start > 0:
                    sub = "##" + sub
                if sub in vocab:
                    found = vocab.id_of(sub)
                    break
                end -= 1
            if found is None:
                word_ids = [vocab.unk_id]
                break
            word_ids.append(found)
            start = end
        pieces.extend(word_ids)

    pieces = pieces[: max_length - 2]
    ids = (vocab.cls_id, *pieces, vocab.sep_id)
    return TokenSequence(ids=ids, segment_ids=(0,) * len(ids))
