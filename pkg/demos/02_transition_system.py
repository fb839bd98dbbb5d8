"""The in-order transition system: legal moves, an oracle trace, exhaustive search.

    python demos/02_transition_system.py
"""
from collections import Counter

from catgen.category import Atom, num_atoms, parse_category
from catgen.transition import (
    enumerate_terminated,
    format_trace,
    initial_state,
    legal_actions,
    oracle_actions,
    replay,
    trace,
)

# %% The oracle walks the tree in order: result, slash, argument, reduce.
cat = parse_category("(S\\NP)/NP")
print(format_trace(trace(oracle_actions(cat))))

# %% Only gen is legal at the start; after generating a category, gen is blocked until an operator arrives.
atoms = [Atom("S"), Atom("NP"), Atom(",")]
s = initial_state()
print("start:", legal_actions(s, atoms))
s = replay(oracle_actions(cat)[:1])
print("after gen(S):", legal_actions(s, atoms))

# %% Punctuation is an island: generated only on an empty stack, then only stop follows.
s = replay(oracle_actions(parse_category(","))[:1])
print("after gen(,):", legal_actions(s, atoms))

# %% Every run that terminates yields a category. Count them by size.
found = enumerate_terminated([Atom("N"), Atom("NP")], 11)
sizes = Counter(num_atoms(c) for _, c in found)
print("\nterminated runs with <= 11 actions, by number of atoms:", dict(sorted(sizes.items())))
