"""Categories as trees, and the four ways of cutting them into atomic tags.

    python demos/01_categories_and_oracles.py
"""
from pathlib import Path

import catgen
from catgen.category import category_length, parse_category, print_category, strip_features, tokenize
from catgen.corpus import LabelInventory
from catgen.oracle import (
    OracleSpec,
    build_vocabulary,
    count_decompositions,
    decompose_all,
    decompose_deterministic,
    mean_sequence_length,
)

DATA = Path(catgen.__file__).parent / "data"

# %% Parsing folds slashes to the left; printing parenthesizes every nested functor.
c = parse_category("S[dcl]\\NP/NP")
print(repr(c))
print("canonical:", print_category(c))
print("tokens:   ", tokenize(c))
print("length:   ", category_length(c))
print("stripped: ", print_category(strip_features(c)))

# %% The bundled inventory mimics CCGBank label statistics.
inv = LabelInventory.load(DATA / "synthetic_inventory.txt")
print(f"\n{len(inv.frequencies)} distinct categories, {len(inv)} kept at threshold {inv.threshold}")

# %% Richer tag sets shorten the sequences a generator has to emit.
for spec in [OracleSpec("AC"), OracleSpec("PA", k=10), OracleSpec("NG", n=2, k=10),
             OracleSpec("NG", n=4, k=10), OracleSpec("OR")]:
    vocab = build_vocabulary(inv, spec)
    print(f"{spec.header():18s} tags={len(vocab):4d}  mean length={mean_sequence_length(inv.categories, vocab):.3f}")

# %% With a parenthesized span in the vocabulary a category can be cut more than one way.
small = LabelInventory({parse_category("(NP/NP)\\NP"): 4, parse_category("NP/NP"): 9}, threshold=1)
pa = build_vocabulary(small, OracleSpec("PA", k=10))
target = parse_category("(NP/NP)\\NP")
print("\nlongest match:", [t.surface for t in decompose_deterministic(target, pa)])
print(f"all {count_decompositions(target, pa)} segmentations:")
for seq in decompose_all(target, pa):
    print("   ", [t.surface for t in seq])
