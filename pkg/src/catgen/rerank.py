"""Rerank pooled generator candidates with classifier confidence.

Score of a candidate category ``t`` with tag log-probabilities ``l_1..l_m``::

    u = sum(l_j) / m ** nu                      (generator confidence)
    v = log p_classifier(t)                     (floored for unseen categories)
    combined = lam * u + (1 - lam) * v
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .category import Category, print_category
from .decode import KBestEntry
from .model import PROB_FLOOR

DEFAULT_NU = 0.15
DEFAULT_LAMBDA = 0.9
DEFAULT_BEAM = 4


@dataclass(frozen=True)
class ScoredCandidate:
    category: Category
    u: float
    v: float
    combined: float
    source: str
    fallback: bool = False


def generator_confidence(tags: Sequence[str], step_logprobs: Optional[Sequence[float]] = None,
                         nu: float = DEFAULT_NU, total: Optional[float] = None) -> float:
    """Length-normalised log-probability; ``m`` counts every tag including EOS.

    Pass either the per-step log-probabilities or their ``total``.
    """
    m = len(tags)
    if m < 1:
        raise ValueError("empty tag sequence")
    if total is None:
        if step_logprobs is None or len(step_logprobs) != m:
            raise ValueError("need one log-probability per tag")
        total = math.fsum(step_logprobs)
    return total / m ** nu


def entry_confidence(e: KBestEntry, nu: float = DEFAULT_NU) -> float:
    if e.step_logprobs:
        return generator_confidence(e.tags, e.step_logprobs, nu)
    return generator_confidence(e.tags, nu=nu, total=e.logprob)


def classifier_score(category: Category, probs: Mapping[Category, float]) -> float:
    return math.log(max(probs.get(category, 0.0), PROB_FLOOR))


def _pick(cands: Sequence[ScoredCandidate]) -> ScoredCandidate:
    # highest combined score; ties go to the lexicographically smallest category string
    return min(cands, key=lambda c: (-c.combined, print_category(c.category), c.source))


def score_pool(candidates: Sequence[Tuple[str, KBestEntry]], probs: Mapping[Category, float],
               lam: float = DEFAULT_LAMBDA, nu: float = DEFAULT_NU) -> List[ScoredCandidate]:
    """Score every legal candidate; a category proposed by several sources keeps its best score."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    best: Dict[Category, ScoredCandidate] = {}
    for source, e in candidates:
        if not e.legal:
            continue
        u = entry_confidence(e, nu)
        v = classifier_score(e.category, probs)
        sc = ScoredCandidate(e.category, u, v, lam * u + (1.0 - lam) * v, source)
        prev = best.get(e.category)
        if prev is None or _pick([prev, sc]) is sc:
            best[e.category] = sc
    return sorted(best.values(), key=lambda c: (-c.combined, print_category(c.category), c.source))


def rerank_position(candidates: Sequence[Tuple[str, KBestEntry]], probs: Mapping[Category, float],
                    lam: float = DEFAULT_LAMBDA, nu: float = DEFAULT_NU) -> ScoredCandidate:
    """Choose one category for a word from (source, k-best entry) pairs.

    ``probs`` is the classifier distribution over the label inventory. With no
    legal candidate the classifier argmax is returned with ``fallback=True``.
    """
    pool = score_pool(candidates, probs, lam, nu)
    if pool:
        return pool[0]
    if not probs:
        raise ValueError("no legal candidates and no classifier distribution to fall back on")
    cat = min(probs, key=lambda c: (-probs[c], print_category(c)))
    v = classifier_score(cat, probs)
    return ScoredCandidate(cat, float("nan"), v, v, "classifier", fallback=True)
