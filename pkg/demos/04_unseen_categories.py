"""A generator can propose a category it never saw in training; a classifier cannot.

    python demos/04_unseen_categories.py
"""
from pathlib import Path

import numpy as np

import catgen
from catgen.category import parse_category, print_category
from catgen.corpus import build_inventory, read_corpus
from catgen.decode import decode_tagwise
from catgen.model import TrainConfig, classifier_probs, make_context, train_classifier, train_generator
from catgen.oracle import OracleSpec, build_vocabulary

DATA = Path(catgen.__file__).parent / "data"

train = read_corpus(DATA / "unseen_train.pipe")
test = read_corpus(DATA / "unseen_test.pipe")
inv = build_inventory(train, threshold=1)
target = parse_category("(A\\B)/B")
print("training categories:", [print_category(c) for c in inv.categories])
print("target in inventory:", target in inv)

spec = OracleSpec("AC")
vocab = build_vocabulary(inv, spec)
gen = train_generator(train, inv, vocab, spec, TrainConfig(epochs=200))
clf = train_classifier(train, inv, TrainConfig(epochs=200))

# %% Compare the 8-best lists at each occurrence of the unseen category.
for sent in test:
    i = sent.gold.index(target)
    res = decode_tagwise(sent.words, i, vocab, gen, beam=8, kbest=8)
    ranked = [print_category(e.category) if e.legal else "-" for e in res.kbest]
    probs = classifier_probs(make_context(sent.words, i), clf)
    top = [print_category(inv.categories[j]) for j in np.argsort(-probs, kind="stable")[:8]]
    print("\nsentence:", " ".join(sent.words))
    print("  generator 8-best: ", ranked, "<- hit" if print_category(target) in ranked else "")
    print("  classifier 8-best:", top)
