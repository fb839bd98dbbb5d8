"""Regenerate src/catgen/data/synthetic_inventory.txt.

The inventory mimics CCGBank's training label statistics: 1285 distinct
categories, 425 of them seen at least 10 times, 253 of those fewer than 100
times. Real high-frequency CCGBank categories come first; the tail is random
trees over CCGBank atoms. Output is deterministic.

    python tools/make_fixtures.py
"""
from pathlib import Path

import numpy as np

from catgen.category import Atom, Functor, parse_category
from catgen.corpus import LabelInventory

COMMON = r"""
N NP N/N NP[nb]/N (S[dcl]\NP)/NP (NP\NP)/NP ((S\NP)\(S\NP))/NP , . conj PP/NP
(S\NP)\(S\NP) S[dcl]\NP (S[b]\NP)/NP (S[to]\NP)/(S[b]\NP) S[adj]\NP (S[dcl]\NP)/(S[b]\NP)
(S[pss]\NP)/PP S[pss]\NP (S[dcl]\NP)/S[dcl] (S[ng]\NP)/NP (S[pt]\NP)/NP (S\NP)/(S\NP)
(NP\NP)/(S[dcl]\NP) S[b]\NP (S[dcl]\NP)/(S[pt]\NP) NP\NP (S[dcl]\NP)/(S[adj]\NP) PP
(S[dcl]\NP)/(S[ng]\NP) (S[dcl]\NP)/(S[pss]\NP) (S/S)/NP S/S (N/N)/(N/N) NP[nb]/N\NP
(S[dcl]\NP)/(S[to]\NP) S[ng]\NP S[pt]\NP N\N S[em]/S[dcl] (S[b]\NP)/(S[to]\NP)
((S[dcl]\NP)/PP)/NP ((S[b]\NP)/PP)/NP (S[to]\NP)/(S[b]\NP) ((S\NP)\(S\NP))/S[dcl]
(S[dcl]\S[dcl])\NP ; : LRB RRB S[wq]/(S[q]/NP) S[wq]/(S[dcl]\NP) (S[adj]\NP)/PP
(S[adj]\NP)\(S[adj]\NP) (S\NP)/(S\NP)\NP (NP\NP)/S[dcl] (NP/NP)\NP ((S[pt]\NP)/PP)/NP
(S[q]/(S[ng]\NP))/NP S[dcl]/S[dcl] (S[dcl]\NP)/S[em] N/PP (N/N)\N NP[expl] NP[thr]
(S[dcl]\NP[expl])/S[em] S[qem]/S[dcl] (S[qem]/S[dcl])/(S[adj]\NP) N[num] (N/N)/N[num]
(S[ng]\NP)/(S[to]\NP) (S[pss]\NP)/(S[to]\NP) (S[dcl]\NP)/PP S[frg] S[intj] S/(S\NP)
((N/N)/(N/N))\(S[adj]\NP) (S[for]/(S[to]\NP))/NP (S[inv]/NP)/NP S[poss] NP[nb]/N/(N/N)
"""

ATOMS = [
    "S", "S[dcl]", "S[b]", "S[ng]", "S[pt]", "S[pss]", "S[to]", "S[adj]", "S[em]", "S[q]",
    "S[wq]", "S[qem]", "S[inv]", "S[for]", "S[intj]", "S[frg]", "S[poss]", "S[asup]",
    "NP", "NP[nb]", "NP[expl]", "NP[thr]", "N", "N[num]", "PP", "conj",
]

N_TOTAL, N_KEPT, N_KEPT_RARE = 1285, 425, 253


def random_category(rng, max_depth):
    if max_depth == 0 or rng.random() < 0.35:
        return parse_category(ATOMS[rng.integers(len(ATOMS))])
    slash = "/" if rng.random() < 0.55 else "\\"
    return Functor(random_category(rng, max_depth - 1), slash, random_category(rng, max_depth - 1))


def main():
    rng = np.random.default_rng(20210101)
    cats = []
    seen = set()
    for text in COMMON.split():
        c = parse_category(text)
        if c not in seen:
            seen.add(c)
            cats.append(c)
    while len(cats) < N_TOTAL:
        c = random_category(rng, 4)
        if isinstance(c, Atom) or c in seen:
            continue
        seen.add(c)
        cats.append(c)

    n_frequent = N_KEPT - N_KEPT_RARE
    counts = []
    for r in range(N_TOTAL):
        if r < n_frequent:
            counts.append(int(100 + 60000 / (r + 1) ** 1.1))
        elif r < N_KEPT:
            counts.append(int(99 - 89 * (r - n_frequent) / (N_KEPT_RARE - 1)))
        else:
            counts.append(int(9 - 8 * (r - N_KEPT) / (N_TOTAL - N_KEPT - 1)))
    inv = LabelInventory(dict(zip(cats, counts)), threshold=10)
    assert len(inv.frequencies) == N_TOTAL and len(inv) == N_KEPT
    assert sum(1 for c in inv.categories if inv.frequency(c) < 100) == N_KEPT_RARE
    out = Path(__file__).resolve().parent.parent / "src" / "catgen" / "data" / "synthetic_inventory.txt"
    out.write_text(inv.to_text(), encoding="utf-8")
    print(f"wrote {out}: {len(inv.frequencies)} categories, {len(inv)} kept")


if __name__ == "__main__":
    main()
