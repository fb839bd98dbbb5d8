"""Atomic tag vocabularies (AC, PA, NG, OR) and category decomposition.

A tag expands to a contiguous run of surface tokens of a category. Every
vocabulary contains the AC base (atomic categories plus ``( ) / \\``), so any
category over known atoms has at least one decomposition.
"""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .category import (
    STRUCTURAL_TOKENS,
    Category,
    CategoryParseError,
    LPAREN,
    RPAREN,
    lex,
    parse_tokens,
    tokenize,
)
from .corpus import LabelInventory, strip_comment_header

EOS_SURFACE = "EOS"
KINDS = ("AC", "PA", "NG", "OR")


@dataclass(frozen=True)
class AtomicTag:
    surface: str
    span: Tuple[str, ...]

    @classmethod
    def from_span(cls, span: Sequence[str]) -> "AtomicTag":
        span = tuple(span)
        if not span:
            raise ValueError("only EOS has an empty span")
        return cls("".join(span), span)

    @property
    def is_eos(self) -> bool:
        return not self.span

    def __repr__(self):
        return f"<{self.surface}>"


EOS = AtomicTag(EOS_SURFACE, ())


class IllFormedError(ValueError):
    """A tag sequence whose tokens do not form a category."""


class DecompositionError(ValueError):
    """A category contains a token the vocabulary cannot cover."""


@dataclass(frozen=True)
class OracleSpec:
    kind: str = "AC"
    k: int = 10
    n: int = 2
    deterministic: bool = True

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if kind in ("PA", "NG") and self.k < 1:
            raise ValueError("k must be >= 1")
        if kind == "NG" and self.n < 2:
            raise ValueError("n must be >= 2 for NG")

    def header(self) -> str:
        if self.kind == "PA":
            return f"kind=PA k={self.k}"
        if self.kind == "NG":
            return f"kind=NG n={self.n} k={self.k}"
        return f"kind={self.kind}"

    @classmethod
    def from_header(cls, line: str) -> "OracleSpec":
        fields = dict(item.split("=", 1) for item in line.split())
        return cls(fields["kind"], k=int(fields.get("k", 10)), n=int(fields.get("n", 2)))


class TagVocabulary:
    """Ordered tag set. Index 0 is always EOS."""

    def __init__(self, tags: Sequence[AtomicTag], origin: OracleSpec,
                 frequencies: Optional[Dict[Tuple[str, ...], int]] = None):
        if not tags or tags[0] != EOS:
            raise ValueError("vocabulary must start with EOS")
        self.tags = list(tags)
        self.origin = origin
        self.frequencies = dict(frequencies or {})
        self._by_span = {}
        for t in self.tags[1:]:
            if t.span in self._by_span:
                raise ValueError(f"duplicate tag span {t.span}")
            self._by_span[t.span] = t
        self._index = {t: i for i, t in enumerate(self.tags)}
        self._by_surface = {t.surface: t for t in self.tags}
        self.max_span = max((len(t.span) for t in self.tags), default=1)

    def __len__(self):
        return len(self.tags)

    def __iter__(self) -> Iterator[AtomicTag]:
        return iter(self.tags)

    def __contains__(self, tag) -> bool:
        return tag in self._index

    def index(self, tag: AtomicTag) -> int:
        return self._index[tag]

    def by_surface(self, surface: str) -> AtomicTag:
        return self._by_surface[surface]

    def tag_for_span(self, span) -> Optional[AtomicTag]:
        return self._by_span.get(tuple(span))

    @property
    def eos(self) -> AtomicTag:
        return EOS

    # -- matching ---------------------------------------------------------

    def matches(self, tokens: Sequence[str], i: int) -> List[AtomicTag]:
        """Tags whose span is a prefix of ``tokens[i:]``, longest first.

        Equal-length matches would need identical spans, which the vocabulary
        forbids; the frequency/surface key only fixes the order defensively.
        """
        found = []
        for length in range(min(self.max_span, len(tokens) - i), 0, -1):
            tag = self._by_span.get(tuple(tokens[i:i + length]))
            if tag is not None:
                found.append(tag)
        found.sort(key=lambda t: (-len(t.span), -self.frequencies.get(t.span, 0), t.surface))
        return found

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        lines = [self.origin.header()]
        for t in self.tags:
            lines.append(f"{t.surface}\t{''.join(t.span)}")
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_text(cls, text: str) -> "TagVocabulary":
        lines = strip_comment_header(text).splitlines()
        if not lines or not lines[0].startswith("kind="):
            raise ValueError("vocabulary file lacks 'kind=' header")
        origin = OracleSpec.from_header(lines[0])
        tags = []
        for lineno, line in enumerate(lines[1:], 2):
            if not line:
                continue
            surface, sep, joined = line.partition("\t")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'surface<TAB>span'")
            if surface == EOS_SURFACE and joined == "":
                tags.append(EOS)
                continue
            try:
                span = lex(joined)
            except CategoryParseError as err:
                raise ValueError(f"line {lineno}: {err}") from None
            tag = AtomicTag.from_span(span)
            if tag.surface != surface:
                raise ValueError(f"line {lineno}: surface {surface!r} does not match span {joined!r}")
            tags.append(tag)
        return cls(tags, origin)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "TagVocabulary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


# -- vocabulary construction ---------------------------------------------

def _top_k(counts: Counter, k: int) -> List[Tuple[Tuple[str, ...], int]]:
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], "".join(kv[0]), kv[0]))
    return ranked[:k]


def parenthesized_spans(tokens: Sequence[str]) -> List[Tuple[str, ...]]:
    """Token runs enclosed by matching parentheses, without the parentheses."""
    spans, stack = [], []
    for i, tok in enumerate(tokens):
        if tok == LPAREN:
            stack.append(i)
        elif tok == RPAREN:
            start = stack.pop()
            spans.append(tuple(tokens[start + 1:i]))
    return spans


def ngrams(tokens: Sequence[str], n: int) -> List[Tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def build_vocabulary(inv: LabelInventory, spec: OracleSpec) -> TagVocabulary:
    if len(inv) == 0:
        raise ValueError("inventory is empty")
    weighted = [(tokenize(c), inv.frequency(c)) for c in inv.categories]

    token_counts: Counter = Counter()
    for toks, freq in weighted:
        for tok in toks:
            token_counts[tok] += freq
    freqs: Dict[Tuple[str, ...], int] = {(tok,): n for tok, n in token_counts.items()}

    base = [AtomicTag.from_span((tok,)) for tok in STRUCTURAL_TOKENS]
    atom_tokens = sorted(tok for tok in token_counts if tok not in STRUCTURAL_TOKENS)
    base += [AtomicTag.from_span((tok,)) for tok in atom_tokens]
    for tok in STRUCTURAL_TOKENS:
        freqs.setdefault((tok,), 0)

    extra: List[Tuple[Tuple[str, ...], int]] = []
    if spec.kind == "PA":
        counts: Counter = Counter()
        for toks, freq in weighted:
            for span in parenthesized_spans(toks):
                counts[span] += freq
        extra = _top_k(counts, spec.k)
    elif spec.kind == "NG":
        counts = Counter()
        for toks, freq in weighted:
            for gram in ngrams(toks, spec.n):
                counts[gram] += freq
        extra = _top_k(counts, spec.k)
    elif spec.kind == "OR":
        extra = [(tuple(toks), freq) for toks, freq in weighted]
        extra.sort(key=lambda kv: (-kv[1], "".join(kv[0])))

    tags = [EOS] + base
    seen = {t.span for t in base}
    for span, freq in extra:
        if span in seen:
            continue
        seen.add(span)
        freqs[span] = freq
        tags.append(AtomicTag.from_span(span))
    return TagVocabulary(tags, spec, freqs)


# -- decomposition -------------------------------------------------------

def _tokens_for(c: Category, vocab: TagVocabulary) -> List[str]:
    toks = tokenize(c)
    for tok in toks:
        if vocab.tag_for_span((tok,)) is None:
            raise DecompositionError(f"token {tok!r} of {''.join(toks)} is not in the vocabulary")
    return toks


def decompose_deterministic(c: Category, vocab: TagVocabulary) -> List[AtomicTag]:
    """Longest forward match over the category's tokens, terminated by EOS."""
    toks = _tokens_for(c, vocab)
    out, i = [], 0
    while i < len(toks):
        tag = vocab.matches(toks, i)[0]
        out.append(tag)
        i += len(tag.span)
    out.append(EOS)
    return out


def _suffix_counts(toks: Sequence[str], vocab: TagVocabulary) -> List[int]:
    """counts[i] = number of segmentations of toks[i:]."""
    n = len(toks)
    counts = [0] * (n + 1)
    counts[n] = 1
    for i in range(n - 1, -1, -1):
        counts[i] = sum(counts[i + len(t.span)] for t in vocab.matches(toks, i))
    return counts


def count_decompositions(c: Category, vocab: TagVocabulary) -> int:
    return _suffix_counts(_tokens_for(c, vocab), vocab)[0]


def decompose_all(c: Category, vocab: TagVocabulary, limit: int = 1000) -> List[List[AtomicTag]]:
    """All segmentations, longest-span-first at every branch, truncated at ``limit``.

    The first element is always the deterministic decomposition.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    toks = _tokens_for(c, vocab)
    results: List[List[AtomicTag]] = []

    def walk(i: int, prefix: List[AtomicTag]) -> bool:
        if i == len(toks):
            results.append(prefix + [EOS])
            return len(results) >= limit
        for tag in vocab.matches(toks, i):
            if walk(i + len(tag.span), prefix + [tag]):
                return True
        return False

    walk(0, [])
    return results


def sample_decomposition(c: Category, vocab: TagVocabulary, rng_seed=None) -> List[AtomicTag]:
    """Draw one segmentation uniformly at random.

    ``rng_seed`` may be an int or a ``numpy.random.Generator``. Each branch is
    weighted by the number of completions below it, which makes the draw
    uniform over complete segmentations.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    toks = _tokens_for(c, vocab)
    counts = _suffix_counts(toks, vocab)
    out, i = [], 0
    while i < len(toks):
        options = vocab.matches(toks, i)
        weights = [counts[i + len(t.span)] for t in options]
        # python ints: counts can exceed float precision on long categories
        r = int(rng.integers(0, counts[i])) if counts[i] < 2**63 else int(rng.random() * counts[i])
        for tag, w in zip(options, weights):
            if r < w:
                break
            r -= w
        out.append(tag)
        i += len(tag.span)
    out.append(EOS)
    return out


def reassemble(seq: Sequence[AtomicTag]) -> Category:
    """Join tag spans back into a category; raises IllFormedError if they do not parse."""
    if not seq or not seq[-1].is_eos:
        raise IllFormedError("tag sequence must end with EOS")
    toks: List[str] = []
    for tag in seq[:-1]:
        if tag.is_eos:
            raise IllFormedError("EOS before end of sequence")
        toks.extend(tag.span)
    if not toks:
        raise IllFormedError("empty tag sequence")
    try:
        return parse_tokens(toks)
    except CategoryParseError as err:
        raise IllFormedError(str(err)) from None


def mean_sequence_length(cats: Sequence[Category], vocab: TagVocabulary) -> float:
    """Average deterministic decomposition length (EOS included)."""
    if not cats:
        return 0.0
    return sum(len(decompose_deterministic(c, vocab)) for c in cats) / len(cats)
