import itertools
import math

import numpy as np
import pytest

from catgen.category import Atom, parse_category
from catgen.corpus import TaggedSentence, build_inventory
from catgen.decode import (
    ILLFORMED,
    DecodeResult,
    KBestEntry,
    Tagger,
    decode_tagwise,
    decode_transition,
    format_kbest,
    illegal_rate,
    parse_kbest,
    tag_sentence,
)
from catgen.model import (
    BOS,
    FingerprintMismatch,
    GeneratorStepQuery,
    ModelParameters,
    TrainConfig,
    generator_features,
    generator_step_probs,
    make_context,
    train_classifier,
    train_generator,
    train_transition,
    transition_labels,
)
from catgen.oracle import EOS, AtomicTag, OracleSpec, TagVocabulary, build_vocabulary
from catgen.transition import enumerate_terminated

WORDS = ["a", "b", "c"]
TINY = TagVocabulary([EOS] + [AtomicTag.from_span((t,)) for t in ["N", "/", "\\"]], OracleSpec("AC"))


def tiny_params(rng, scale=0.4):
    """Random weights on every feature the tiny vocabulary can fire at word 1.

    The scale keeps every step probability well above the log floor, so the
    brute force can use exact logarithms.
    """
    params = ModelParameters("generator", [t.surface for t in TINY])
    ctx = make_context(WORDS, 1)
    surfaces = [BOS] + [t.surface for t in TINY]
    for step in range(1, 4):
        for prev, prev2 in itertools.product(surfaces, repeat=2):
            for f in generator_features(GeneratorStepQuery(ctx, prev, step, prev2)):
                if f not in params.weights:
                    params.row(f)[:] = rng.normal(scale=scale, size=params.n_labels)
    return params


def step_logprob(params, ctx, surfaces, j):
    prev = surfaces[j - 1] if j > 0 else BOS
    prev2 = surfaces[j - 2] if j > 1 else BOS
    probs = generator_step_probs(GeneratorStepQuery(ctx, prev, j + 1, prev2), params)
    return math.log(probs[TINY.index(TINY.by_surface(surfaces[j]))])


def brute_force(params, max_steps):
    ctx = make_context(WORDS, 1)
    body = [t.surface for t in TINY.tags[1:]]
    out = []
    for n in range(max_steps):
        for seq in itertools.product(body, repeat=n):
            surf = list(seq) + ["EOS"]
            out.append((sum(step_logprob(params, ctx, surf, j) for j in range(len(surf))), tuple(surf)))
    out.sort(key=lambda x: (-x[0], " ".join(x[1])))
    return out


def test_beam_equals_exhaustive_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(100):
        params = tiny_params(rng)
        exact = brute_force(params, 3)
        assert len(exact) == 13
        res = decode_tagwise(WORDS, 1, TINY, params, beam=13, kbest=13, max_steps=3)
        assert [e.tags for e in res.kbest] == [s for _, s in exact]
        for e, (lp, _) in zip(res.kbest, exact):
            assert abs(e.logprob - lp) <= 1e-9


def test_greedy_is_argmax_chain():
    rng = np.random.default_rng(3)
    params = tiny_params(rng)
    ctx = make_context(WORDS, 1)
    chain = []
    for step in range(1, 4):
        prev = chain[-1] if chain else BOS
        prev2 = chain[-2] if len(chain) > 1 else BOS
        probs = generator_step_probs(GeneratorStepQuery(ctx, prev, step, prev2), params)
        best = TINY.tags[int(np.argmax(probs))].surface if step < 3 else "EOS"
        chain.append(best)
        if best == "EOS":
            break
    res = decode_tagwise(WORDS, 1, TINY, params, beam=1, kbest=1, max_steps=3)
    assert list(res.kbest[0].tags) == chain


def test_exact_beam_dominates_smaller_beams():
    rng = np.random.default_rng(11)
    for _ in range(30):
        params = tiny_params(rng)
        exact = decode_tagwise(WORDS, 1, TINY, params, beam=13, kbest=1, max_steps=3).kbest[0].logprob
        for b in (1, 2, 4, 8):
            got = decode_tagwise(WORDS, 1, TINY, params, beam=b, kbest=1, max_steps=3).kbest[0].logprob
            assert got <= exact + 1e-12


def test_scores_are_additive():
    rng = np.random.default_rng(5)
    params = tiny_params(rng)
    ctx = make_context(WORDS, 1)
    for e in decode_tagwise(WORDS, 1, TINY, params, beam=6, kbest=6, max_steps=3).kbest:
        assert math.isclose(e.logprob, math.fsum(e.step_logprobs), abs_tol=1e-9)
        again = sum(step_logprob(params, ctx, e.tags, j) for j in range(len(e.tags)))
        assert abs(e.logprob - again) <= 1e-9


def test_forced_eos_at_cap():
    params = ModelParameters("generator", [t.surface for t in TINY])
    params.row("bias")[:] = [0.0, 5.0, 0.0, 0.0]
    for step in "1234":
        params.row("step=" + step)[0] = -20.0  # EOS is very unlikely before the cap
    res = decode_tagwise(WORDS, 1, TINY, params, beam=4, kbest=4, max_steps=5)
    assert res.kbest[0].tags == ("N", "N", "N", "N", "EOS")
    assert all(len(e.tags) <= 5 and e.tags[-1] == "EOS" for e in res.kbest)
    assert all(not e.legal for e in res.kbest)


def test_illformed_entries_are_kept_and_marked():
    params = ModelParameters("generator", [t.surface for t in TINY])
    res = decode_tagwise(WORDS, 1, TINY, params, beam=13, kbest=13, max_steps=3)
    legal = {e.tags for e in res.kbest if e.legal}
    assert legal == {("N", "EOS")}
    assert len(res.kbest) == 13


@pytest.mark.parametrize("kwargs", [dict(beam=1, kbest=2), dict(kbest=0), dict(max_steps=0)])
def test_decode_argument_checks(kwargs):
    params = ModelParameters("generator", [t.surface for t in TINY])
    with pytest.raises(ValueError):
        decode_tagwise(WORDS, 0, TINY, params, **kwargs)


def test_decode_rejects_wrong_vocab():
    params = ModelParameters("generator", ["EOS", "N"])
    with pytest.raises(FingerprintMismatch):
        decode_tagwise(WORDS, 0, TINY, params)


def test_transition_results_always_well_formed():
    rng = np.random.default_rng(2)
    atoms = [Atom("N"), Atom("NP"), Atom(",")]
    for _ in range(20):
        params = ModelParameters("transition", transition_labels(atoms))
        for f in ["bias", "w=b", "p1=a", "n1=c", "tri=a|b|c"]:
            params.row(f)[:] = rng.normal(scale=3.0, size=params.n_labels)
        res = decode_transition(WORDS, 1, params, beam=8, kbest=8, max_actions=12)
        assert res.kbest
        assert illegal_rate([res], 8) == 0.0
        for e in res.kbest:
            assert e.legal and e.tags[-1] == "stop"
            assert math.isclose(e.logprob, math.fsum(e.step_logprobs), abs_tol=1e-9)


def test_transition_single_candidate():
    params = ModelParameters("transition", transition_labels([Atom("N")]))
    res = decode_transition(WORDS, 0, params, beam=8, kbest=8, max_actions=2)
    assert [e.category for e in res.kbest] == [parse_category("N")]


def test_transition_exact_beam_matches_enumeration():
    atoms = [Atom("N")]
    params = ModelParameters("transition", transition_labels(atoms))
    res = decode_transition(WORDS, 0, params, beam=64, kbest=64, max_actions=8)
    assert {e.category for e in res.kbest} == {c for _, c in enumerate_terminated(atoms, 8)}


def test_illegal_rate_arithmetic():
    good = KBestEntry(("N", "EOS"), (), -1.0, parse_category("N"))
    bad = KBestEntry(("/", "EOS"), (), -2.0, None)
    results = [DecodeResult(i, [good] * 4) for i in range(4)] + [DecodeResult(4, [good, good, good, bad])]
    assert illegal_rate(results, 4) == pytest.approx(0.05)
    assert illegal_rate(results, 1) == 0.0
    assert illegal_rate([], 4) == 0.0


def test_kbest_dump_roundtrip():
    res = DecodeResult(2, [KBestEntry(("(", "N", "/", "N", ")", "EOS"), (-0.1,) * 6, -0.6000000000000001, None),
                           KBestEntry(("N", "/", "N", "EOS"), (-0.3,) * 4, -1.2, parse_category("N/N"))], 5)
    text = format_kbest([res])
    lines = text.splitlines()
    assert lines[0].split("\t") == ["5", "2", "1", "-0.6000000000000001", "0", "( N / N ) EOS", ILLFORMED]
    back = parse_kbest(text)[(5, 2)]
    assert [(e.tags, e.logprob, e.category) for e in back.kbest] == \
        [(e.tags, e.logprob, e.category) for e in res.kbest]


def test_kbest_dump_bad_line():
    with pytest.raises(ValueError, match="7 fields"):
        parse_kbest("0\t0\t1\n")


# -- sentence level ------------------------------------------------------------------

SENTS = [
    TaggedSentence(["the", "dog", "barks"], [parse_category(c) for c in ["NP/N", "N", "S\\NP"]]),
    TaggedSentence(["dogs", "chase", "cats", "."], [parse_category(c) for c in ["NP", "(S\\NP)/NP", "NP", "."]]),
]


@pytest.fixture(scope="module")
def tagger():
    inv = build_inventory(SENTS, threshold=1)
    vocab = build_vocabulary(inv, OracleSpec("AC"))
    hyper = TrainConfig(epochs=60)
    return Tagger(inv, vocab, generator=train_generator(SENTS, inv, vocab, hyper=hyper),
                  classifier=train_classifier(SENTS, inv, hyper),
                  transition=train_transition(SENTS, inv, hyper))


@pytest.mark.parametrize("mode", ["classifier", "tagwise", "transition"])
def test_tag_sentence_overfit(tagger, mode):
    for sent in SENTS:
        assert tag_sentence(sent.words, mode, tagger) == sent.gold
    assert tag_sentence([], mode, tagger) == []


def test_greedy_transition_on_overfit(tagger):
    for sent in SENTS:
        for i, c in enumerate(sent.gold):
            assert decode_transition(sent.words, i, tagger.transition, beam=1, kbest=1).kbest[0].category == c


def test_classifier_stays_in_inventory(tagger):
    for w in ["unknown", "words", "here"]:
        assert tagger.classify([w, "x"], 0) in tagger.inventory


def test_tagger_fingerprint_checks(tagger):
    other_inv = build_inventory(SENTS[:1], threshold=1)
    with pytest.raises(FingerprintMismatch):
        Tagger(other_inv, classifier=tagger.classifier)
    other_vocab = build_vocabulary(tagger.inventory, OracleSpec("NG", n=2, k=3))
    with pytest.raises(FingerprintMismatch):
        Tagger(tagger.inventory, other_vocab, generator=tagger.generator)


def test_unknown_mode(tagger):
    with pytest.raises(ValueError):
        tag_sentence(["a"], "oracle", tagger)
