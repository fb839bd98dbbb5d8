"""CCG categories as immutable binary trees.

Text grammar (slashes fold to the left, so ``S\\NP/NP`` is ``(S\\NP)/NP``)::

    Cat     := Term (Slash Term)*
    Term    := AtomTok | "(" Cat ")"
    AtomTok := base ("[" feature "]")?
    Slash   := "/" | "\\"
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Union

FORWARD = "/"
BACKWARD = "\\"
SLASHES = (FORWARD, BACKWARD)

LPAREN = "("
RPAREN = ")"
STRUCTURAL_TOKENS = (LPAREN, RPAREN, FORWARD, BACKWARD)

_RESERVED = set("()[]/\\")

DEFAULT_PUNCTUATION = frozenset({".", ",", ";", ":", "LRB", "RRB"})


class CategoryParseError(ValueError):
    """Raised for malformed category text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


@dataclass(frozen=True)
class Atom:
    base: str
    feature: Optional[str] = None

    def __post_init__(self):
        if not self.base or any(ch in _RESERVED or ch.isspace() for ch in self.base):
            raise ValueError(f"invalid atomic base {self.base!r}")
        if self.feature is not None:
            if not self.feature or any(ch in "[]" for ch in self.feature):
                raise ValueError(f"invalid feature {self.feature!r}")

    def __str__(self):
        return print_category(self)


@dataclass(frozen=True)
class Functor:
    result: "Category"
    slash: str
    argument: "Category"

    def __post_init__(self):
        if self.slash not in SLASHES:
            raise ValueError(f"invalid slash {self.slash!r}")

    def __str__(self):
        return print_category(self)


Category = Union[Atom, Functor]


def is_atom(c: Category) -> bool:
    return isinstance(c, Atom)


def atom_text(a: Atom) -> str:
    if a.feature is None:
        return a.base
    return f"{a.base}[{a.feature}]"


# -- lexing ---------------------------------------------------------------

def lex(text: str) -> List[str]:
    """Split category text (or any fragment of one) into surface tokens.

    Atom tokens keep their feature attached, e.g. ``S[dcl]``.
    """
    return [tok for tok, _ in _lex_with_offsets(text)]


def _lex_with_offsets(text: str) -> Iterator[tuple]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in STRUCTURAL_TOKENS:
            yield ch, i
            i += 1
            continue
        if ch.isspace():
            raise CategoryParseError("unexpected whitespace", text, i)
        if ch in "[]":
            raise CategoryParseError("feature bracket without atomic base", text, i)
        start = i
        while i < n and text[i] not in _RESERVED and not text[i].isspace():
            i += 1
        if i < n and text[i] == "[":
            close = text.find("]", i + 1)
            if close == -1:
                raise CategoryParseError("unterminated feature bracket", text, i)
            if close == i + 1:
                raise CategoryParseError("empty feature", text, i)
            if "[" in text[i + 1:close]:
                raise CategoryParseError("nested feature bracket", text, i + 1 + text[i + 1:close].index("["))
            i = close + 1
            if i < n and text[i] not in STRUCTURAL_TOKENS:
                raise CategoryParseError("unexpected text after feature", text, i)
        yield text[start:i], start


def atom_from_token(token: str) -> Atom:
    if token.endswith("]") and "[" in token:
        base, feat = token[:-1].split("[", 1)
        return Atom(base, feat)
    return Atom(token)


# -- parsing --------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, toks=None):
        self.text = text
        self.toks = list(_lex_with_offsets(text)) if toks is None else toks
        self.pos = 0

    def _offset(self) -> int:
        if self.pos < len(self.toks):
            return self.toks[self.pos][1]
        return len(self.text)

    def _peek(self) -> Optional[str]:
        if self.pos < len(self.toks):
            return self.toks[self.pos][0]
        return None

    def parse(self) -> Category:
        if not self.toks:
            raise CategoryParseError("empty category", self.text, 0)
        cat = self._cat()
        if self.pos != len(self.toks):
            tok = self._peek()
            msg = "unbalanced ')'" if tok == RPAREN else f"unexpected token {tok!r}"
            raise CategoryParseError(msg, self.text, self._offset())
        return cat

    def _cat(self) -> Category:
        left = self._term()
        while self._peek() in SLASHES:
            slash = self._peek()
            self.pos += 1
            if self._peek() is None:
                raise CategoryParseError("dangling slash", self.text, self._offset())
            right = self._term()
            left = Functor(left, slash, right)
        return left

    def _term(self) -> Category:
        tok = self._peek()
        if tok is None:
            raise CategoryParseError("unexpected end of category", self.text, self._offset())
        if tok == LPAREN:
            open_at = self._offset()
            self.pos += 1
            if self._peek() == RPAREN:
                raise CategoryParseError("empty parentheses", self.text, self._offset())
            inner = self._cat()
            if self._peek() != RPAREN:
                if self._peek() is None:
                    raise CategoryParseError("unbalanced '('", self.text, open_at)
                raise CategoryParseError(f"expected ')' but found {self._peek()!r}", self.text, self._offset())
            self.pos += 1
            return inner
        if tok in SLASHES:
            raise CategoryParseError("missing category before slash", self.text, self._offset())
        if tok == RPAREN:
            raise CategoryParseError("empty argument", self.text, self._offset())
        self.pos += 1
        return atom_from_token(tok)


def parse_category(text: str) -> Category:
    """Parse CCGBank-style category text into a tree.

    >>> print_category(parse_category("S[dcl]\\\\NP/NP"))
    '(S[dcl]\\\\NP)/NP'
    """
    return _Parser(text).parse()


def parse_tokens(tokens: Sequence[str]) -> Category:
    """Parse an already-split token sequence.

    Unlike ``parse_category("".join(tokens))`` this keeps token boundaries, so
    two adjacent atom tokens are an error rather than one merged atom.
    """
    toks, offset = [], 0
    text = "".join(tokens)
    for tok in tokens:
        if lex(tok) != [tok]:
            raise CategoryParseError(f"invalid token {tok!r}", text, offset)
        toks.append((tok, offset))
        offset += len(tok)
    return _Parser(text, toks).parse()


# -- printing -------------------------------------------------------------

def tokenize(c: Category) -> List[str]:
    out: List[str] = []
    _emit(c, out, top=True)
    return out


def _emit(c: Category, out: List[str], top: bool) -> None:
    if isinstance(c, Atom):
        out.append(atom_text(c))
        return
    if not top:
        out.append(LPAREN)
    _emit(c.result, out, top=False)
    out.append(c.slash)
    _emit(c.argument, out, top=False)
    if not top:
        out.append(RPAREN)


def print_category(c: Category) -> str:
    return "".join(tokenize(c))


def category_length(c: Category) -> int:
    return len(tokenize(c))


# -- structure ------------------------------------------------------------

def atoms(c: Category) -> List[Atom]:
    """Atoms of ``c`` in left-to-right order."""
    if isinstance(c, Atom):
        return [c]
    return atoms(c.result) + atoms(c.argument)


def num_atoms(c: Category) -> int:
    return len(atoms(c))


def num_operators(c: Category) -> int:
    return num_atoms(c) - 1


def depth(c: Category) -> int:
    if isinstance(c, Atom):
        return 0
    return 1 + max(depth(c.result), depth(c.argument))


def strip_features(c: Category) -> Category:
    if isinstance(c, Atom):
        return c if c.feature is None else Atom(c.base)
    return Functor(strip_features(c.result), c.slash, strip_features(c.argument))


def is_punctuation_category(c: Category, punctuation=DEFAULT_PUNCTUATION) -> bool:
    return isinstance(c, Atom) and c.base in punctuation


def sort_key(c: Category) -> str:
    return print_category(c)
