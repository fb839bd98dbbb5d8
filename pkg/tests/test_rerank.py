import math

import numpy as np
import pytest

from catgen.category import parse_category, print_category
from catgen.decode import KBestEntry
from catgen.model import PROB_FLOOR
from catgen.rerank import (
    DEFAULT_LAMBDA,
    DEFAULT_NU,
    generator_confidence,
    rerank_position,
    score_pool,
)

CATS = [parse_category(c) for c in ["N", "NP", "N/N", "NP/N", "S\\NP", "(S\\NP)/NP", "PP", "(N/N)/N"]]


def entry(cat, steps):
    return KBestEntry(tuple(["x"] * (len(steps) - 1) + ["EOS"]), tuple(steps), math.fsum(steps), cat)


def random_pool(rng):
    n_sources = int(rng.integers(1, 3))
    pool = []
    for s in range(n_sources):
        for _ in range(int(rng.integers(1, 6))):
            legal = rng.random() > 0.15
            cat = CATS[rng.integers(len(CATS))] if legal else None
            m = int(rng.integers(1, 8))
            pool.append((f"gen{s}", entry(cat, rng.uniform(-3, 0, size=m))))
    inventory = CATS[: int(rng.integers(3, len(CATS) + 1))]
    raw = rng.random(len(inventory)) + 1e-3
    probs = dict(zip(inventory, raw / raw.sum()))
    return pool, probs


@pytest.mark.parametrize("nu, total, m, expected", [
    (0.0, -2.0, 4, -2.0),
    (0.15, -2.0, 4, -2.0 / 4 ** 0.15),
    (0.7, -2.0, 1, -2.0),
])
def test_generator_confidence(nu, total, m, expected):
    tags = ["t"] * (m - 1) + ["EOS"]
    assert generator_confidence(tags, nu=nu, total=total) == pytest.approx(expected, abs=1e-12)


def test_confidence_with_nu_zero_is_raw_sum():
    rng = np.random.default_rng(0)
    for _ in range(200):
        steps = rng.uniform(-5, 0, size=int(rng.integers(1, 10)))
        assert abs(generator_confidence(["t"] * len(steps), steps, nu=0.0) - math.fsum(steps)) <= 1e-12


def test_confidence_argument_checks():
    with pytest.raises(ValueError):
        generator_confidence([], [])
    with pytest.raises(ValueError):
        generator_confidence(["a", "EOS"], [-1.0])


def test_defaults():
    assert DEFAULT_NU == 0.15 and DEFAULT_LAMBDA == 0.9


def test_lambda_degeneration_on_random_pools():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        pool, probs = random_pool(rng)
        legal = [(src, e) for src, e in pool if e.legal]
        if not legal:
            continue
        best_u = {}
        for _, e in legal:
            u = generator_confidence(e.tags, e.step_logprobs, DEFAULT_NU)
            best_u[e.category] = max(best_u.get(e.category, -math.inf), u)
        gen_pick = min(best_u, key=lambda c: (-best_u[c], print_category(c)))
        assert rerank_position(pool, probs, lam=1.0).category == gen_pick

        v = {c: math.log(max(probs.get(c, 0.0), PROB_FLOOR)) for c in best_u}
        clf_pick = min(v, key=lambda c: (-v[c], print_category(c)))
        assert rerank_position(pool, probs, lam=0.0).category == clf_pick


def test_combined_score_formula():
    cat = CATS[2]
    e = entry(cat, [-0.5, -0.25, -0.1])
    sc = rerank_position([("g", e)], {cat: 0.25, CATS[0]: 0.75}, lam=0.6, nu=0.3)
    u = math.fsum([-0.5, -0.25, -0.1]) / 3 ** 0.3
    assert sc.u == pytest.approx(u) and sc.v == pytest.approx(math.log(0.25))
    assert sc.combined == pytest.approx(0.6 * u + 0.4 * math.log(0.25))


def test_unseen_candidate_gets_floor_not_excluded():
    unseen = parse_category("(A\\B)/B")
    pool = [("g", entry(unseen, [-0.01, -0.01])), ("g", entry(CATS[0], [-4.0, -4.0]))]
    sc = rerank_position(pool, {CATS[0]: 1.0}, lam=1.0)
    assert sc.category == unseen
    assert sc.v == pytest.approx(math.log(PROB_FLOOR))


def test_illformed_never_scored():
    pool = [("g", entry(None, [-0.01])), ("g", entry(CATS[1], [-5.0]))]
    assert [c.category for c in score_pool(pool, {CATS[1]: 1.0})] == [CATS[1]]


def test_fallback_to_classifier():
    sc = rerank_position([("g", entry(None, [-0.1]))], {CATS[0]: 0.2, CATS[3]: 0.8})
    assert sc.fallback and sc.category == CATS[3] and sc.source == "classifier"
    with pytest.raises(ValueError):
        rerank_position([], {})


def test_duplicates_keep_best_source():
    pool = [("a", entry(CATS[0], [-2.0])), ("b", entry(CATS[0], [-0.5]))]
    scored = score_pool(pool, {CATS[0]: 1.0}, lam=0.9)
    assert len(scored) == 1 and scored[0].source == "b"


def test_lambda_range():
    with pytest.raises(ValueError):
        score_pool([], {}, lam=1.5)


def test_argmax_invariant_under_shift():
    rng = np.random.default_rng(9)
    for _ in range(200):
        pool, probs = random_pool(rng)
        if not any(e.legal for _, e in pool):
            continue
        base = rerank_position(pool, probs)
        shift = rng.uniform(-3, 3)
        # shift every u by the same constant: total' = total + shift * m**nu
        shifted = [(s, KBestEntry(e.tags, (), e.logprob + shift * len(e.tags) ** DEFAULT_NU, e.category))
                   for s, e in pool]
        assert rerank_position(shifted, probs).category == base.category
        scaled = {c: p * 0.5 for c, p in probs.items()}  # every v moves by log(0.5)
        if all(e.category in probs for _, e in pool if e.legal):
            assert rerank_position(pool, scaled).category == base.category


def test_pooling_monotonicity():
    rng = np.random.default_rng(4)
    for _ in range(200):
        pool, probs = random_pool(rng)
        if not any(e.legal for _, e in pool):
            continue
        full = rerank_position(pool, probs).combined
        subset = [pool[i] for i in range(len(pool)) if rng.random() < 0.5]
        if any(e.legal for _, e in subset):
            assert full >= rerank_position(subset, probs).combined
