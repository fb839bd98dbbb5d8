"""Supertag corpora, the category label inventory, and UNK masking."""
from __future__ import annotations

import hashlib
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Union

from .category import (
    Atom,
    Category,
    CategoryParseError,
    atoms,
    parse_category,
    print_category,
)

UNK_MARKER = "UNK"


class _Unk:
    """Sentinel for below-threshold labels. Not a Category, so no generator can emit it."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return UNK_MARKER

    def __reduce__(self):
        return (_Unk, ())


UNK = _Unk()


class CorpusFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        where = ""
        if path is not None and line is not None:
            where = f"{path}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.line = line
        self.path = path


class ReservedLabelError(ValueError):
    pass


@dataclass
class TaggedSentence:
    words: List[str]
    gold: List[Category]
    pos: Optional[List[str]] = None

    def __post_init__(self):
        if not self.words:
            raise ValueError("sentence must have at least one word")
        if len(self.gold) != len(self.words):
            raise ValueError("words and gold categories differ in length")
        if self.pos is not None and len(self.pos) != len(self.words):
            raise ValueError("words and POS tags differ in length")

    def __len__(self):
        return len(self.words)


def _is_comment(line: str) -> bool:
    return line.startswith("# ") or line.rstrip("\n") == "#"


def strip_comment_header(text: str) -> str:
    """Drop leading ``# `` comment lines (run configuration echoed by the CLI)."""
    lines = text.splitlines(keepends=True)
    i = 0
    while i < len(lines) and lines[i].startswith("# "):
        i += 1
    return "".join(lines[i:])


def _parse_cat(text: str, lineno: int, path: Optional[str]) -> Category:
    try:
        return parse_category(text)
    except CategoryParseError as err:
        raise CorpusFormatError(f"unparseable category {text!r}: {err}", lineno, path) from None


def _read_pipe(lines: Iterable[str], path: Optional[str]) -> List[TaggedSentence]:
    sentences = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip() or _is_comment(line):
            continue
        words, pos, gold = [], [], []
        for token in line.split():
            # words may contain '|' themselves, so split from the right
            parts = token.rsplit("|", 2)
            if len(parts) != 3:
                raise CorpusFormatError(f"missing POS field in token {token!r}", lineno, path)
            word, tag, cat = parts
            if not word or not tag or not cat:
                raise CorpusFormatError(f"empty field in token {token!r}", lineno, path)
            words.append(word)
            pos.append(tag)
            gold.append(_parse_cat(cat, lineno, path))
        sentences.append(TaggedSentence(words, gold, pos))
    return sentences


def _read_tsv(lines: Iterable[str], path: Optional[str]) -> List[TaggedSentence]:
    sentences = []
    words: List[str] = []
    gold: List[Category] = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if _is_comment(line):
            continue
        if not line.strip():
            if words:
                sentences.append(TaggedSentence(words, gold))
                words, gold = [], []
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise CorpusFormatError(f"expected 'word<TAB>category', got {line!r}", lineno, path)
        words.append(parts[0])
        gold.append(_parse_cat(parts[1], lineno, path))
    if words:
        sentences.append(TaggedSentence(words, gold))
    return sentences


def read_corpus(source: Union[str, os.PathLike, TextIO], format: str = "pipe") -> List[TaggedSentence]:
    """Read a supertagged corpus.

    ``pipe``: one sentence per line, ``word|POS|category`` tokens separated by spaces.
    ``tsv``: ``word<TAB>category`` per line, sentences separated by blank lines.
    Lines starting with ``"# "`` are comments.
    """
    if format not in ("pipe", "tsv"):
        raise ValueError(f"unknown corpus format {format!r}")
    if hasattr(source, "read"):
        path = getattr(source, "name", None)
        lines = source.read().splitlines()
    else:
        path = os.fspath(source)
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    reader = _read_pipe if format == "pipe" else _read_tsv
    sentences = reader(lines, path)
    if not sentences:
        raise CorpusFormatError("empty corpus", None, path)
    return sentences


def format_corpus(sentences: Sequence[TaggedSentence], format: str = "pipe") -> str:
    out = io.StringIO()
    for sent in sentences:
        if format == "pipe":
            pos = sent.pos or ["-"] * len(sent)
            out.write(" ".join(f"{w}|{p}|{print_category(c)}"
                               for w, p, c in zip(sent.words, pos, sent.gold)))
            out.write("\n")
        elif format == "tsv":
            for w, c in zip(sent.words, sent.gold):
                out.write(f"{w}\t{print_category(c)}\n")
            out.write("\n")
        else:
            raise ValueError(f"unknown corpus format {format!r}")
    return out.getvalue()


def write_corpus(sentences: Sequence[TaggedSentence], path, format: str = "pipe", header: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header)
        fh.write(format_corpus(sentences, format))


def _check_reserved(c: Category) -> None:
    if isinstance(c, Atom) and c.feature is None and c.base == UNK_MARKER:
        raise ReservedLabelError(f"reserved label in corpus: {UNK_MARKER!r}")


@dataclass
class LabelInventory:
    """Categories kept as classifier labels plus training counts for every category seen.

    ``frequencies`` covers all training categories, including those below threshold,
    so frequency-bucketed evaluation can place rare gold categories.
    """

    frequencies: Dict[Category, int]
    threshold: int
    categories: List[Category] = field(init=False)

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        ranked = sorted(self.frequencies.items(), key=lambda kv: (-kv[1], print_category(kv[0])))
        self.frequencies = dict(ranked)
        self.categories = [c for c, n in ranked if n >= self.threshold]
        self._index = {c: i for i, c in enumerate(self.categories)}

    def __len__(self):
        return len(self.categories)

    def __contains__(self, c) -> bool:
        return c in self._index

    def __iter__(self):
        return iter(self.categories)

    def index(self, c: Category) -> int:
        return self._index[c]

    def lookup(self, c: Category):
        return c if c in self._index else UNK

    def frequency(self, c: Category) -> int:
        return self.frequencies.get(c, 0)

    @property
    def excluded(self) -> List[Category]:
        return [c for c, n in self.frequencies.items() if n < self.threshold]

    def atoms(self) -> List[Atom]:
        """Distinct atomic categories used by kept categories, sorted by surface."""
        seen = {a for c in self.categories for a in atoms(c)}
        return sorted(seen, key=print_category)

    def to_text(self) -> str:
        lines = [f"threshold={self.threshold}"]
        lines += [f"{print_category(c)}\t{n}" for c, n in self.frequencies.items()]
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_text(cls, text: str) -> "LabelInventory":
        lines = strip_comment_header(text).splitlines()
        if not lines or not lines[0].startswith("threshold="):
            raise CorpusFormatError("inventory file lacks 'threshold=<n>' header", 1)
        try:
            threshold = int(lines[0].split("=", 1)[1])
        except ValueError:
            raise CorpusFormatError("bad threshold header", 1) from None
        freqs: Dict[Category, int] = {}
        for lineno, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusFormatError(f"expected 'category<TAB>count', got {line!r}", lineno)
            freqs[_parse_cat(parts[0], lineno, None)] = int(parts[1])
        return cls(freqs, threshold)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "LabelInventory":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def build_inventory(train: Sequence[TaggedSentence], threshold: int = 10) -> LabelInventory:
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    counts: Counter = Counter()
    for sent in train:
        for c in sent.gold:
            _check_reserved(c)
            counts[c] += 1
    if not counts:
        raise ValueError("empty training set")
    return LabelInventory(dict(counts), threshold)


def unk_mask(sentence: TaggedSentence, inv: LabelInventory) -> List[bool]:
    """True where the gold category is below threshold (its loss is skipped)."""
    mask = []
    for c in sentence.gold:
        _check_reserved(c)
        mask.append(c not in inv)
    return mask
