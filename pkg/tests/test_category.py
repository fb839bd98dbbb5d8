import pytest
from hypothesis import given, settings

from catgen.category import (
    Atom,
    CategoryParseError,
    Functor,
    atoms,
    category_length,
    depth,
    is_punctuation_category,
    lex,
    num_atoms,
    num_operators,
    parse_category,
    parse_tokens,
    print_category,
    strip_features,
    tokenize,
)

from strategies import category_strategy

S, NP, N = Atom("S"), Atom("NP"), Atom("N")


@pytest.mark.parametrize("text, expected", [
    ("(S\\NP)/NP", Functor(Functor(S, "\\", NP), "/", NP)),
    ("NP", NP),
    ("S[dcl]\\NP", Functor(Atom("S", "dcl"), "\\", NP)),
    ("S\\NP/NP", Functor(Functor(S, "\\", NP), "/", NP)),
    ("((NP))", NP),
    ("N/(N/N)", Functor(N, "/", Functor(N, "/", N))),
    (",", Atom(",")),
])
def test_parse_examples(text, expected):
    assert parse_category(text) == expected


@pytest.mark.parametrize("text, printed", [
    ("(S\\NP)/NP", "(S\\NP)/NP"),
    ("N", "N"),
    ("(NP\\NP)/NP", "(NP\\NP)/NP"),
    ("S\\NP/NP", "(S\\NP)/NP"),
    ("((S[pt]\\NP)/PP)/NP", "((S[pt]\\NP)/PP)/NP"),
    ("(N)", "N"),
])
def test_print_canonical(text, printed):
    assert print_category(parse_category(text)) == printed


def test_left_associativity():
    assert parse_category("S\\NP/NP") == parse_category("(S\\NP)/NP")
    assert parse_category("S\\NP/NP") != parse_category("S\\(NP/NP)")


@pytest.mark.parametrize("text, tokens", [
    ("(NP\\NP)/NP", ["(", "NP", "\\", "NP", ")", "/", "NP"]),
    ("N", ["N"]),
    ("(S[dcl]\\NP)/NP", ["(", "S[dcl]", "\\", "NP", ")", "/", "NP"]),
])
def test_tokenize(text, tokens):
    c = parse_category(text)
    assert tokenize(c) == tokens
    assert parse_category("".join(tokens)) == c


@pytest.mark.parametrize("text, n", [("NP", 1), ("(S\\NP)/NP", 7), ("((S[pt]\\NP)/PP)/NP", 11)])
def test_category_length(text, n):
    assert category_length(parse_category(text)) == n


@pytest.mark.parametrize("text, stripped", [
    ("S[dcl]\\NP", "S\\NP"),
    ("NP", "NP"),
    ("(S[wq]/S[q])", "S/S"),
    ("(S[b]\\NP[nb])/NP", "(S\\NP)/NP"),
])
def test_strip_features(text, stripped):
    assert strip_features(parse_category(text)) == parse_category(stripped)


@pytest.mark.parametrize("text, expected", [
    (",", True), (".", True), (";", True), (":", True), ("LRB", True), ("RRB", True),
    ("NP", False), ("conj", False), ("S/S", False),
])
def test_is_punctuation(text, expected):
    assert is_punctuation_category(parse_category(text)) is expected


def test_punctuation_set_is_configurable():
    assert is_punctuation_category(Atom("conj"), punctuation={"conj"})
    assert not is_punctuation_category(Atom(","), punctuation={"conj"})


@pytest.mark.parametrize("text, fragment, offset", [
    ("((A", "unbalanced '('", 1),
    ("(S\\NP", "unbalanced '('", 0),
    ("S\\", "dangling slash", 2),
    ("/NP", "missing category before slash", 0),
    ("S\\NP)", "unbalanced ')'", 4),
    ("()", "empty parentheses", 1),
    ("S[dcl", "unterminated feature bracket", 1),
    ("S[]", "empty feature", 1),
    ("S[d[c]]", "nested feature bracket", 3),
    ("S[dcl]x", "unexpected text after feature", 6),
    ("", "empty category", 0),
    ("S\\NP NP", "unexpected whitespace", 4),
    ("(S/)", "empty argument", 3),
])
def test_parse_errors_report_offsets(text, fragment, offset):
    with pytest.raises(CategoryParseError) as info:
        parse_category(text)
    assert fragment in str(info.value)
    assert info.value.offset == offset


def test_parse_tokens_keeps_boundaries():
    assert parse_tokens(["(", "NP", "\\", "NP", ")"]) == Functor(NP, "\\", NP)
    # joined these would read as the single atom "NPNP"
    with pytest.raises(CategoryParseError):
        parse_tokens(["NP", "NP"])
    with pytest.raises(CategoryParseError):
        parse_tokens(["NP\\NP"])


def test_lex_keeps_features_attached():
    assert lex("S[dcl]\\NP[nb]") == ["S[dcl]", "\\", "NP[nb]"]


@pytest.mark.parametrize("bad", [dict(base=""), dict(base="N/P"), dict(base="S", feature="")])
def test_atom_validation(bad):
    with pytest.raises(ValueError):
        Atom(**bad)


def test_functor_rejects_unknown_slash():
    with pytest.raises(ValueError):
        Functor(S, "|", NP)


def test_structure_helpers():
    c = parse_category("((S[pt]\\NP)/PP)/NP")
    assert [str(a) for a in atoms(c)] == ["S[pt]", "NP", "PP", "NP"]
    assert num_atoms(c) == 4 and num_operators(c) == 3 and depth(c) == 3
    assert str(c) == "((S[pt]\\NP)/PP)/NP"


@settings(max_examples=300, deadline=None)
@given(category_strategy())
def test_roundtrip_fuzz(c):
    assert parse_category(print_category(c)) == c
    assert parse_tokens(tokenize(c)) == c


@settings(max_examples=300, deadline=None)
@given(category_strategy())
def test_length_law(c):
    toks = tokenize(c)
    parens = sum(t in "()" for t in toks)
    assert num_operators(c) == num_atoms(c) - 1
    assert category_length(c) == num_atoms(c) + num_operators(c) + parens


@settings(max_examples=200, deadline=None)
@given(category_strategy())
def test_strip_idempotent(c):
    once = strip_features(c)
    assert strip_features(once) == once
    assert all(a.feature is None for a in atoms(once))


def test_inventory_strings_roundtrip(synthetic_inventory):
    for c in synthetic_inventory.frequencies:
        text = print_category(c)
        assert print_category(parse_category(text)) == text
