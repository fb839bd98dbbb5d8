"""Train the three scorers on the toy corpus, decode k-best lists, rerank and evaluate.

    python demos/03_train_decode_rerank.py
"""
from pathlib import Path

import catgen
from catgen.category import print_category
from catgen.corpus import build_inventory, read_corpus
from catgen.decode import Tagger, illegal_rate
from catgen.evaluation import evaluate, render_report
from catgen.model import TrainConfig, classifier_distribution, make_context, train_classifier, \
    train_generator, train_transition
from catgen.oracle import OracleSpec, build_vocabulary
from catgen.rerank import rerank_position

DATA = Path(catgen.__file__).parent / "data"

# %% Twenty hand-written sentences; every category becomes a label (threshold 1).
corpus = read_corpus(DATA / "toy20.pipe")
inv = build_inventory(corpus, threshold=1)
print(f"{len(corpus)} sentences, {sum(map(len, corpus))} tokens, {len(inv)} categories")

# %% A short training run, so the models are decent but not perfect.
hyper = TrainConfig(epochs=15, seed=13)
spec = OracleSpec("NG", n=2, k=10)
vocab = build_vocabulary(inv, spec)
tagger = Tagger(inv, vocab,
                generator=train_generator(corpus, inv, vocab, spec, hyper),
                classifier=train_classifier(corpus, inv, hyper),
                transition=train_transition(corpus, inv, hyper))
print("generator loss by epoch:", [round(x, 3) for x in tagger.generator.loss_history])

# %% Tag-wise beam search can emit ill-formed sequences; transition search cannot.
sent = corpus[3]
for mode in ("tagwise", "transition"):
    results = [tagger.decode(sent.words, i, mode) for i in range(len(sent))]
    print(f"\n{mode}: illegal rate among 4-best = {illegal_rate(results, 4):.3f}")
    for e in results[1].kbest:
        shown = print_category(e.category) if e.legal else "(ill-formed)"
        print(f"   {e.logprob:8.3f}  {e.surface:30s} {shown}")

# %% Rerank the pooled k-best lists with the classifier and evaluate.
gold, pred = [], []
for s in corpus:
    for i in range(len(s)):
        pool = [(m, e) for m in ("tagwise", "transition") for e in tagger.decode(s.words, i, m).kbest]
        probs = classifier_distribution(make_context(s.words, i), inv, tagger.classifier)
        pred.append(rerank_position(pool, probs).category)
        gold.append(s.gold[i])
print()
print(render_report(evaluate(pred, gold, inv)))
