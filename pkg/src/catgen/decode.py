"""Per-word decoding: tag-wise beam search, transition beam search, k-best dumps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .category import DEFAULT_PUNCTUATION, Atom, Category, parse_category, print_category
from .corpus import LabelInventory
from .model import (
    BOS,
    PROB_FLOOR,
    FingerprintMismatch,
    GeneratorStepQuery,
    ModelParameters,
    classifier_probs,
    generator_step_probs,
    make_context,
    transition_action_probs,
    transition_atoms,
)
from .oracle import EOS, IllFormedError, TagVocabulary, reassemble
from .transition import apply, initial_state, legal_actions, parse_action, result

ILLFORMED = "ILLFORMED"
DEFAULT_MAX_STEPS = 32
DEFAULT_MAX_ACTIONS = 64


@dataclass(frozen=True)
class KBestEntry:
    tags: Tuple[str, ...]
    step_logprobs: Tuple[float, ...]
    logprob: float
    category: Optional[Category]  # None marks an ill-formed tag sequence

    @property
    def legal(self) -> bool:
        return self.category is not None

    @property
    def surface(self) -> str:
        return " ".join(self.tags)


@dataclass
class DecodeResult:
    word_index: int
    kbest: List[KBestEntry] = field(default_factory=list)
    sentence_index: int = 0

    def best_legal(self) -> Optional[Category]:
        for e in self.kbest:
            if e.legal:
                return e.category
        return None


def _rank_key(logprob: float, tags: Sequence[str]):
    return (-logprob, " ".join(tags))


def _log(p: float) -> float:
    return math.log(max(p, PROB_FLOOR))


def decode_tagwise(words: Sequence[str], position: int, vocab: TagVocabulary, params: ModelParameters,
                   beam: int = 4, kbest: int = 4, max_steps: int = DEFAULT_MAX_STEPS) -> DecodeResult:
    """Beam search over atomic tags for one word.

    All extensions (finished or not) compete for the ``beam`` slots at each step;
    EOS finishes a hypothesis. At step ``max_steps`` only EOS is allowed, scored
    with its actual probability. Ill-formed results are kept and marked.
    """
    if not (beam >= kbest >= 1):
        raise ValueError("need beam >= kbest >= 1")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if params.labels != [t.surface for t in vocab]:
        raise FingerprintMismatch("generator labels do not match the tag vocabulary")
    ctx = make_context(words, position)
    tags = list(vocab)
    eos_index = vocab.index(EOS)

    # (logprob, surfaces, step logprobs)
    live: List[Tuple[float, Tuple[str, ...], Tuple[float, ...]]] = [(0.0, (), ())]
    finished = []
    for step in range(1, max_steps + 1):
        cands = []
        for lp, surf, steps in live:
            prev = surf[-1] if surf else BOS
            prev2 = surf[-2] if len(surf) > 1 else BOS
            probs = generator_step_probs(GeneratorStepQuery(ctx, prev, step, prev2), params)
            choices = [eos_index] if step == max_steps else range(len(tags))
            for j in choices:
                s = _log(probs[j])
                cands.append((lp + s, surf + (tags[j].surface,), steps + (s,), j == eos_index))
        cands.sort(key=lambda c: _rank_key(c[0], c[1]))
        live = []
        for lp, surf, steps, done in cands[:beam]:
            if done:
                finished.append((lp, surf, steps))
            else:
                live.append((lp, surf, steps))
        if not live:
            break

    finished.sort(key=lambda c: _rank_key(c[0], c[1]))
    out = []
    for lp, surf, steps in finished[:kbest]:
        try:
            cat = reassemble([vocab.by_surface(s) for s in surf])
        except IllFormedError:
            cat = None
        out.append(KBestEntry(surf, steps, lp, cat))
    return DecodeResult(position, out)


def decode_transition(words: Sequence[str], position: int, params: ModelParameters,
                      beam: int = 4, kbest: int = 4, max_actions: int = DEFAULT_MAX_ACTIONS,
                      atoms: Optional[Sequence[Atom]] = None,
                      punctuation=DEFAULT_PUNCTUATION) -> DecodeResult:
    """Beam search over transition actions; hypotheses finish on stop.

    Runs that hit ``max_actions`` without stopping are dropped, so every
    returned entry is a well-formed category.
    """
    if not (beam >= kbest >= 1):
        raise ValueError("need beam >= kbest >= 1")
    ctx = make_context(words, position)
    atoms = transition_atoms(params) if atoms is None else list(atoms)
    labels = params.labels
    actions = [parse_action(lab) for lab in labels]

    live = [(0.0, (), (), initial_state())]
    finished = []
    while live:
        cands = []
        for lp, surf, steps, state in live:
            if not legal_actions(state, atoms, punctuation, max_actions):
                continue
            probs = transition_action_probs(state, ctx, params, atoms, punctuation, max_actions)
            for j in np.flatnonzero(probs > 0.0):
                s = _log(probs[j])
                nxt = apply(state, actions[j], punctuation, max_actions)
                cands.append((lp + s, surf + (labels[j],), steps + (s,), nxt))
        cands.sort(key=lambda c: _rank_key(c[0], c[1]))
        live = []
        for cand in cands[:beam]:
            if cand[3].terminated:
                finished.append(cand)
            else:
                live.append(cand)

    finished.sort(key=lambda c: _rank_key(c[0], c[1]))
    out = []
    for lp, surf, steps, state in finished[:kbest]:
        cat = result(state)
        assert cat is not None, "transition decoding produced an ill-formed category"
        out.append(KBestEntry(surf, steps, lp, cat))
    return DecodeResult(position, out)


def illegal_rate(results: Iterable[DecodeResult], k: int) -> float:
    """Fraction of ill-formed entries among the top-k of every result."""
    bad = total = 0
    for r in results:
        top = r.kbest[:k]
        total += len(top)
        bad += sum(1 for e in top if not e.legal)
    return bad / total if total else 0.0


# -- sentence-level tagging ------------------------------------------------

@dataclass
class Tagger:
    """Bundle of trained artifacts; only the ones a mode needs must be present."""

    inventory: LabelInventory
    vocab: Optional[TagVocabulary] = None
    generator: Optional[ModelParameters] = None
    classifier: Optional[ModelParameters] = None
    transition: Optional[ModelParameters] = None
    beam: int = 4
    kbest: int = 4
    max_steps: int = DEFAULT_MAX_STEPS
    max_actions: int = DEFAULT_MAX_ACTIONS

    def __post_init__(self):
        inv_fp = self.inventory.fingerprint()
        for params in (self.generator, self.classifier, self.transition):
            if params is not None and params.inventory_fingerprint != inv_fp:
                raise FingerprintMismatch(f"{params.component} model was trained with a different inventory")
        if self.generator is not None:
            if self.vocab is None or self.generator.vocab_fingerprint != self.vocab.fingerprint():
                raise FingerprintMismatch("generator model was trained with a different tag vocabulary")

    def decode(self, words: Sequence[str], position: int, mode: str) -> DecodeResult:
        if mode == "tagwise":
            if self.generator is None:
                raise ValueError("tagwise mode needs a generator model")
            return decode_tagwise(words, position, self.vocab, self.generator, self.beam, self.kbest,
                                  self.max_steps)
        if mode == "transition":
            if self.transition is None:
                raise ValueError("transition mode needs a transition model")
            return decode_transition(words, position, self.transition, self.beam, self.kbest,
                                     self.max_actions)
        raise ValueError(f"mode {mode!r} has no k-best decoder")

    def classify(self, words: Sequence[str], position: int) -> Category:
        if self.classifier is None:
            raise ValueError("classifier mode needs a classifier model")
        probs = classifier_probs(make_context(words, position), self.classifier)
        return self.inventory.categories[int(np.argmax(probs))]


def tag_sentence(words: Sequence[str], mode: str, tagger: Tagger) -> List[Optional[Category]]:
    """1-best category per word; None where a tag-wise beam held no well-formed candidate."""
    if mode not in ("classifier", "tagwise", "transition"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "classifier":
        return [tagger.classify(words, i) for i in range(len(words))]
    return [tagger.decode(words, i, mode).best_legal() for i in range(len(words))]


# -- k-best dump -----------------------------------------------------------------

def format_kbest(results: Iterable[DecodeResult]) -> str:
    lines = []
    for r in results:
        for rank, e in enumerate(r.kbest, 1):
            cat = print_category(e.category) if e.legal else ILLFORMED
            lines.append(f"{r.sentence_index}\t{r.word_index}\t{rank}\t{e.logprob!r}\t"
                         f"{1 if e.legal else 0}\t{e.surface}\t{cat}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_kbest(text: str) -> Dict[Tuple[int, int], DecodeResult]:
    """Read a k-best dump back. Per-step log-probabilities are not stored, so
    entries carry only the total and the tag count."""
    out: Dict[Tuple[int, int], DecodeResult] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 7:
            raise ValueError(f"k-best line {lineno}: expected 7 fields, found {len(parts)}")
        si, wi, _rank, lp, flag, surf, cat = parts
        key = (int(si), int(wi))
        res = out.setdefault(key, DecodeResult(int(wi), [], int(si)))
        category = parse_category(cat) if flag == "1" else None
        res.kbest.append(KBestEntry(tuple(surf.split(" ")), (), float(lp), category))
    return out
