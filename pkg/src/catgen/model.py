"""Log-linear (maximum entropy) scorers for classification, tag-wise generation
and transition actions.

Weights live in a table keyed by feature string; each row is a vector over the
component's output labels. Unknown features score zero, so a zero-initialised
model is uniform over its (legal) labels.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .category import DEFAULT_PUNCTUATION, Atom, Category, print_category
from .corpus import LabelInventory, TaggedSentence, unk_mask
from .oracle import (
    AtomicTag,
    OracleSpec,
    TagVocabulary,
    decompose_deterministic,
    sample_decomposition,
)
from .transition import (
    REDUCE,
    STOP,
    Action,
    Operator,
    TransitionState,
    apply,
    gen,
    initial_state,
    legal_actions,
    op,
    oracle_actions,
    parse_action,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
FEATURE_VERSION = 1
PROB_FLOOR = 1e-12
BOS = "<BOS>"
COMPONENTS = ("generator", "classifier", "transition")

_PAD_LEFT = "<s>"
_PAD_RIGHT = "</s>"


class ModelFormatError(ValueError):
    pass


class FingerprintMismatch(ValueError):
    pass


# -- contexts and features -------------------------------------------------

@dataclass(frozen=True)
class ContextVector:
    word: str
    lower: str
    prev: str
    next: str
    prev2: str
    next2: str
    position: int
    length: int


def make_context(words: Sequence[str], i: int) -> ContextVector:
    def at(j):
        if j < 0:
            return _PAD_LEFT
        if j >= len(words):
            return _PAD_RIGHT
        return words[j]

    return ContextVector(words[i], words[i].lower(), at(i - 1), at(i + 1), at(i - 2), at(i + 2),
                         i, len(words))


def context_features(ctx: ContextVector) -> List[str]:
    return [
        "bias",
        "w=" + ctx.word,
        "lw=" + ctx.lower,
        "p1=" + ctx.prev,
        "n1=" + ctx.next,
        "p2=" + ctx.prev2,
        "n2=" + ctx.next2,
        f"tri={ctx.prev}|{ctx.word}|{ctx.next}",
    ]


def _step_bucket(step: int) -> str:
    return str(step) if step < 5 else "5+"


@dataclass(frozen=True)
class GeneratorStepQuery:
    context: ContextVector
    prev_tag: str = BOS
    step_index: int = 1
    prev2_tag: str = BOS

    def __post_init__(self):
        if self.step_index < 1:
            raise ValueError("step_index starts at 1")


def generator_features(q: GeneratorStepQuery) -> List[str]:
    ctx = q.context
    pt, step = q.prev_tag, q.step_index
    bucket = _step_bucket(step)
    return context_features(ctx) + [
        "pt=" + pt,
        f"pt2={q.prev2_tag}|{pt}",
        "step=" + bucket,
        f"pt&step={pt}|{bucket}",
        f"w&pt={ctx.word}|{pt}",
        f"w&step={ctx.word}|{step}",
        f"tri&step&pt={ctx.prev}|{ctx.word}|{ctx.next}|{step}|{pt}",
    ]


def _render_item(item) -> str:
    return str(item) if isinstance(item, Operator) else print_category(item)


def transition_features(s: TransitionState, ctx: ContextVector) -> List[str]:
    top = _render_item(s.top) if s.stack else "<empty>"
    depth = str(min(len(s.stack), 4))
    last = str(s.last_action) if s.last_action is not None else "<none>"
    buf = str(min(len(s.buffer), 4))
    return context_features(ctx) + [
        "top=" + top,
        "depth=" + depth,
        "last=" + last,
        "buf=" + buf,
        f"top&last={top}|{last}",
        f"last&depth={last}|{depth}",
        f"w&t={ctx.word}|{s.timestep}",
        f"tri&t={ctx.prev}|{ctx.word}|{ctx.next}|{s.timestep}",
    ]


# -- parameters -------------------------------------------------------------

@dataclass
class ModelParameters:
    component: str
    labels: List[str]
    weights: Dict[str, np.ndarray] = field(default_factory=dict)
    learning_rate: float = 0.1
    epochs: int = 10
    seed: int = 13
    vocab_fingerprint: str = "-"
    inventory_fingerprint: str = "-"
    loss_history: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise ValueError(f"unknown component {self.component!r}")
        self.label_index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def scores(self, features: Sequence[str]) -> np.ndarray:
        total = np.zeros(self.n_labels)
        for f in features:
            row = self.weights.get(f)
            if row is not None:
                total += row
        return total

    def row(self, feature: str) -> np.ndarray:
        r = self.weights.get(feature)
        if r is None:
            r = self.weights[feature] = np.zeros(self.n_labels)
        return r

    def nonzero_table(self) -> List[Tuple[str, str, float]]:
        out = []
        for f in sorted(self.weights):
            row = self.weights[f]
            for j in np.flatnonzero(row):
                out.append((f, self.labels[j], float(row[j])))
        return out

    def same_weights(self, other: "ModelParameters") -> bool:
        return self.labels == other.labels and self.nonzero_table() == other.nonzero_table()

    def copy(self) -> "ModelParameters":
        dup = ModelParameters(self.component, list(self.labels), {f: r.copy() for f, r in self.weights.items()},
                              self.learning_rate, self.epochs, self.seed, self.vocab_fingerprint,
                              self.inventory_fingerprint, list(self.loss_history))
        return dup


def softmax(scores: np.ndarray, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Softmax with max subtraction; masked-out entries get exactly zero."""
    if mask is None:
        z = scores - scores.max()
        e = np.exp(z)
        return e / e.sum()
    out = np.zeros_like(scores, dtype=float)
    if not mask.any():
        raise ValueError("softmax over an empty support")
    z = scores[mask] - scores[mask].max()
    e = np.exp(z)
    out[mask] = e / e.sum()
    return out


def safe_log(p: float) -> float:
    return math.log(max(p, PROB_FLOOR))


# -- the three distributions ---------------------------------------------------

def _check_labels(params: ModelParameters, labels: Sequence[str], what: str) -> None:
    if list(labels) != params.labels:
        raise FingerprintMismatch(f"model labels do not match the {what}")


def generator_step_probs(q: GeneratorStepQuery, params: ModelParameters) -> np.ndarray:
    """Probabilities aligned with ``params.labels`` (the vocabulary order)."""
    return softmax(params.scores(generator_features(q)))


def generator_step_distribution(q: GeneratorStepQuery, vocab: TagVocabulary,
                                params: ModelParameters) -> Dict[AtomicTag, float]:
    _check_labels(params, [t.surface for t in vocab], "tag vocabulary")
    probs = generator_step_probs(q, params)
    return {t: float(p) for t, p in zip(vocab, probs)}


def classifier_probs(ctx: ContextVector, params: ModelParameters) -> np.ndarray:
    return softmax(params.scores(context_features(ctx)))


def classifier_distribution(ctx: ContextVector, inv: LabelInventory,
                            params: ModelParameters) -> Dict[Category, float]:
    _check_labels(params, [print_category(c) for c in inv.categories], "label inventory")
    probs = classifier_probs(ctx, params)
    return {c: float(p) for c, p in zip(inv.categories, probs)}


def transition_labels(atoms: Sequence[Atom]) -> List[str]:
    return [str(gen(a)) for a in atoms] + [str(op("/")), str(op("\\")), str(REDUCE), str(STOP)]


def transition_atoms(params: ModelParameters) -> List[Atom]:
    return [parse_action(lab).payload for lab in params.labels if lab.startswith("gen(")]


def legal_mask(s: TransitionState, params: ModelParameters, atoms: Sequence[Atom],
               punctuation=DEFAULT_PUNCTUATION, max_actions: int = 64) -> np.ndarray:
    mask = np.zeros(params.n_labels, dtype=bool)
    for a in legal_actions(s, atoms, punctuation, max_actions):
        mask[params.label_index[str(a)]] = True
    return mask


def transition_action_probs(s: TransitionState, ctx: ContextVector, params: ModelParameters,
                            atoms: Optional[Sequence[Atom]] = None,
                            punctuation=DEFAULT_PUNCTUATION, max_actions: int = 64) -> np.ndarray:
    if s.terminated:
        raise ValueError("no actions in a terminated state")
    atoms = transition_atoms(params) if atoms is None else atoms
    mask = legal_mask(s, params, atoms, punctuation, max_actions)
    return softmax(params.scores(transition_features(s, ctx)), mask)


def transition_action_distribution(s: TransitionState, context: ContextVector, params: ModelParameters,
                                   atoms: Optional[Sequence[Atom]] = None,
                                   punctuation=DEFAULT_PUNCTUATION) -> Dict[Action, float]:
    probs = transition_action_probs(s, context, params, atoms, punctuation)
    return {parse_action(lab): float(p) for lab, p in zip(params.labels, probs)}


# -- training -----------------------------------------------------------------

# One training event: features, gold label index, optional legality mask.
Example = Tuple[List[str], int, Optional[np.ndarray]]


def example_loss(params: ModelParameters, ex: Example) -> float:
    feats, y, mask = ex
    p = softmax(params.scores(feats), mask)
    return -safe_log(p[y])


def example_gradient(params: ModelParameters, ex: Example) -> Dict[str, np.ndarray]:
    """d(-log p_y)/dW as a sparse row table; repeated features accumulate."""
    feats, y, mask = ex
    delta = softmax(params.scores(feats), mask)
    delta[y] -= 1.0
    grad: Dict[str, np.ndarray] = {}
    for f in feats:
        if f in grad:
            grad[f] = grad[f] + delta
        else:
            grad[f] = delta.copy()
    return grad


def sgd_step(params: ModelParameters, ex: Example, lr: float) -> float:
    feats, y, mask = ex
    p = softmax(params.scores(feats), mask)
    loss = -safe_log(p[y])
    if lr != 0.0:
        delta = p
        delta[y] -= 1.0
        delta *= lr
        for f in feats:
            params.row(f)[:] -= delta
    return loss


def generator_examples(sent: TaggedSentence, i: int, tags: Sequence[AtomicTag],
                       params: ModelParameters) -> List[Example]:
    ctx = make_context(sent.words, i)
    out = []
    prev, prev2 = BOS, BOS
    for j, tag in enumerate(tags, 1):
        q = GeneratorStepQuery(ctx, prev, j, prev2)
        out.append((generator_features(q), params.label_index[tag.surface], None))
        prev2, prev = prev, tag.surface
    return out


def classifier_examples(sent: TaggedSentence, i: int, inv: LabelInventory,
                        params: ModelParameters) -> List[Example]:
    ctx = make_context(sent.words, i)
    return [(context_features(ctx), inv.index(sent.gold[i]), None)]


def transition_examples(sent: TaggedSentence, i: int, params: ModelParameters,
                        atoms: Sequence[Atom], punctuation=DEFAULT_PUNCTUATION) -> List[Example]:
    ctx = make_context(sent.words, i)
    out = []
    s = initial_state()
    for a in oracle_actions(sent.gold[i]):
        mask = legal_mask(s, params, atoms, punctuation)
        out.append((transition_features(s, ctx), params.label_index[str(a)], mask))
        s = apply(s, a, punctuation)
    return out


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 10
    seed: int = 13


def _positions(corpus: Sequence[TaggedSentence], inv: LabelInventory) -> List[Tuple[int, int]]:
    out = []
    for si, sent in enumerate(corpus):
        for i, masked in enumerate(unk_mask(sent, inv)):
            if not masked:
                out.append((si, i))
    if not out:
        raise ValueError("empty effective training set: every position is UNK-masked")
    return out


def _run_sgd(params: ModelParameters, corpus, positions, make_examples, hyper: TrainConfig,
             rng: np.random.Generator, cache: bool) -> ModelParameters:
    cached = {}
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(positions))
        total, count = 0.0, 0
        for idx in order:
            si, i = positions[idx]
            if cache and (si, i) in cached:
                exs = cached[(si, i)]
            else:
                exs = make_examples(corpus[si], i)
                if cache:
                    cached[(si, i)] = exs
            for ex in exs:
                total += sgd_step(params, ex, hyper.learning_rate)
                count += 1
        avg = total / max(count, 1)
        params.loss_history.append(avg)
        logger.info("%s epoch %d loss %.6f", params.component, epoch + 1, avg)
    return params


def train_generator(corpus: Sequence[TaggedSentence], inv: LabelInventory, vocab: TagVocabulary,
                    spec: Optional[OracleSpec] = None, hyper: Optional[TrainConfig] = None) -> ModelParameters:
    """SGD on the per-tag cross-entropy of each word's oracle tag sequence.

    A non-deterministic ``spec`` redraws every category's decomposition each
    time the word is visited.
    """
    hyper = hyper or TrainConfig()
    spec = spec or vocab.origin
    if not corpus:
        raise ValueError("empty corpus")
    positions = _positions(corpus, inv)
    params = ModelParameters("generator", [t.surface for t in vocab], learning_rate=hyper.learning_rate,
                             epochs=hyper.epochs, seed=hyper.seed, vocab_fingerprint=vocab.fingerprint(),
                             inventory_fingerprint=inv.fingerprint())
    rng = np.random.default_rng(hyper.seed)

    def make(sent, i):
        c = sent.gold[i]
        tags = decompose_deterministic(c, vocab) if spec.deterministic else sample_decomposition(c, vocab, rng)
        return generator_examples(sent, i, tags, params)

    return _run_sgd(params, corpus, positions, make, hyper, rng, cache=spec.deterministic)


def train_classifier(corpus: Sequence[TaggedSentence], inv: LabelInventory,
                     hyper: Optional[TrainConfig] = None) -> ModelParameters:
    hyper = hyper or TrainConfig()
    if not corpus:
        raise ValueError("empty corpus")
    positions = _positions(corpus, inv)
    params = ModelParameters("classifier", [print_category(c) for c in inv.categories],
                             learning_rate=hyper.learning_rate, epochs=hyper.epochs, seed=hyper.seed,
                             inventory_fingerprint=inv.fingerprint())
    rng = np.random.default_rng(hyper.seed)
    return _run_sgd(params, corpus, positions, lambda s, i: classifier_examples(s, i, inv, params),
                    hyper, rng, cache=True)


def train_transition(corpus: Sequence[TaggedSentence], inv: LabelInventory,
                     hyper: Optional[TrainConfig] = None, punctuation=DEFAULT_PUNCTUATION) -> ModelParameters:
    hyper = hyper or TrainConfig()
    if not corpus:
        raise ValueError("empty corpus")
    positions = _positions(corpus, inv)
    atoms = inv.atoms()
    params = ModelParameters("transition", transition_labels(atoms), learning_rate=hyper.learning_rate,
                             epochs=hyper.epochs, seed=hyper.seed, inventory_fingerprint=inv.fingerprint())
    rng = np.random.default_rng(hyper.seed)
    return _run_sgd(params, corpus, positions,
                    lambda s, i: transition_examples(s, i, params, atoms, punctuation),
                    hyper, rng, cache=True)


# -- persistence --------------------------------------------------------------

def format_model(params: ModelParameters) -> str:
    table = params.nonzero_table()
    lines = [
        f"format={FORMAT_VERSION}",
        f"component={params.component}",
        f"vocab_fingerprint={params.vocab_fingerprint}",
        f"inventory_fingerprint={params.inventory_fingerprint}",
        f"features=v{FEATURE_VERSION}",
        f"learning_rate={params.learning_rate!r}",
        f"epochs={params.epochs}",
        f"seed={params.seed}",
        "labels=" + " ".join(params.labels),
        f"n_weights={len(table)}",
    ]
    lines += [f"{f}\t{lab}\t{w!r}" for f, lab, w in table]
    return "\n".join(lines) + "\n"


def save_model(params: ModelParameters, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_model(params))


def parse_model(text: str) -> ModelParameters:
    lines = text.split("\n")
    while lines and lines[0].startswith("# "):
        lines.pop(0)
    if lines and lines[-1] == "":
        lines.pop()
    else:
        raise ModelFormatError("corrupt model file: missing final newline")
    header: Dict[str, str] = {}
    body_start = None
    for n, line in enumerate(lines):
        key, sep, value = line.partition("=")
        if "\t" in line or not sep:
            raise ModelFormatError(f"corrupt model file: bad header line {n + 1}")
        header[key] = value
        if key == "n_weights":
            body_start = n + 1
            break
    if header.get("format") is None:
        raise ModelFormatError("corrupt model file: missing format header")
    if header["format"] != str(FORMAT_VERSION):
        raise ModelFormatError(f"unsupported model format {header['format']!r} (expected {FORMAT_VERSION})")
    if header.get("features") != f"v{FEATURE_VERSION}":
        raise ModelFormatError(f"feature template version {header.get('features')!r} is not supported")
    if body_start is None:
        raise ModelFormatError("corrupt model file: truncated header")
    try:
        params = ModelParameters(
            header["component"], header["labels"].split(" ") if header["labels"] else [],
            learning_rate=float(header["learning_rate"]), epochs=int(header["epochs"]),
            seed=int(header["seed"]), vocab_fingerprint=header["vocab_fingerprint"],
            inventory_fingerprint=header["inventory_fingerprint"])
        expected = int(header["n_weights"])
    except (KeyError, ValueError) as err:
        raise ModelFormatError(f"corrupt model file: {err}") from None
    body = lines[body_start:]
    if len(body) != expected:
        raise ModelFormatError(f"corrupt model file: expected {expected} weights, found {len(body)}")
    for n, line in enumerate(body, body_start + 1):
        parts = line.split("\t")
        if len(parts) != 3 or parts[1] not in params.label_index:
            raise ModelFormatError(f"corrupt model file: bad weight line {n}")
        try:
            w = float(parts[2])
        except ValueError:
            raise ModelFormatError(f"corrupt model file: bad weight on line {n}") from None
        if not math.isfinite(w):
            raise ModelFormatError(f"corrupt model file: non-finite weight on line {n}")
        params.row(parts[0])[params.label_index[parts[1]]] = w
    return params


def load_model(path, vocab: Optional[TagVocabulary] = None, inventory: Optional[LabelInventory] = None,
               component: Optional[str] = None) -> ModelParameters:
    """Load a model, checking it against the vocabulary/inventory it will be used with."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"model file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        params = parse_model(fh.read())
    if component is not None and params.component != component:
        raise FingerprintMismatch(f"expected a {component} model, found {params.component}")
    if vocab is not None and params.vocab_fingerprint != vocab.fingerprint():
        raise FingerprintMismatch("model was trained with a different tag vocabulary")
    if inventory is not None and params.inventory_fingerprint != inventory.fingerprint():
        raise FingerprintMismatch("model was trained with a different label inventory")
    return params
