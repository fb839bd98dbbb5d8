"""Tagging accuracy, frequency/length breakdowns and unseen-category p@k."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .category import Category, category_length, strip_features
from .corpus import LabelInventory

DEFAULT_BUCKETS = ((10, 100), (100, 400), (400, 2000))
DEFAULT_KS = (1, 2, 4, 8)


@dataclass
class Group:
    correct: int = 0
    total: int = 0

    @property
    def accuracy(self) -> Optional[float]:
        return self.correct / self.total if self.total else None


@dataclass
class BucketRow:
    label: str
    group: Group
    share: float


@dataclass
class EvalReport:
    overall: Group
    buckets: List[BucketRow] = field(default_factory=list)
    lengths: Dict[int, Group] = field(default_factory=dict)
    # (strip, k) -> Group over unseen-category tokens
    unseen: Dict[Tuple[bool, int], Group] = field(default_factory=dict)
    unseen_tokens: int = 0

    @property
    def accuracy(self) -> float:
        return self.overall.accuracy or 0.0


def _check_aligned(pred, gold):
    if len(pred) != len(gold):
        raise ValueError(f"prediction/gold length mismatch: {len(pred)} vs {len(gold)}")


def accuracy(pred: Sequence[Optional[Category]], gold: Sequence[Category]) -> float:
    _check_aligned(pred, gold)
    if not gold:
        return 0.0
    return sum(p == g for p, g in zip(pred, gold)) / len(gold)


def _bucket_label(lo, hi) -> str:
    return f"[{lo},{hi})"


def bucketed_accuracy(pred, gold, inv: LabelInventory, buckets=DEFAULT_BUCKETS) -> List[BucketRow]:
    """Accuracy grouped by the gold category's training frequency.

    Buckets are half-open. Tokens outside every bucket land in a "below" or
    "above" row, so the rows partition the test tokens; ``share`` is the
    fraction of all test tokens.
    """
    _check_aligned(pred, gold)
    buckets = sorted(tuple(b) for b in buckets)
    for (lo1, hi1), (lo2, _) in zip(buckets, buckets[1:]):
        if lo2 < hi1:
            raise ValueError("buckets overlap")
    lo_min, hi_max = buckets[0][0], buckets[-1][1]
    labels = [_bucket_label(lo, hi) for lo, hi in buckets]
    below, above = f"<{lo_min}", f">={hi_max}"
    groups = {lab: Group() for lab in [below] + labels + [above]}
    for p, g in zip(pred, gold):
        f = inv.frequency(g)
        if f < lo_min:
            key = below
        elif f >= hi_max:
            key = above
        else:
            # non-contiguous buckets leave gaps; those tokens get their own row
            key = next((lab for (lo, hi), lab in zip(buckets, labels) if lo <= f < hi), "gap")
            groups.setdefault(key, Group())
        groups[key].total += 1
        groups[key].correct += int(p == g)
    n = len(gold)
    return [BucketRow(lab, grp, grp.total / n if n else 0.0) for lab, grp in groups.items()]


def length_accuracy(pred, gold) -> Dict[int, float]:
    return {n: grp.accuracy for n, grp in _length_groups(pred, gold).items()}


def _length_groups(pred, gold) -> Dict[int, Group]:
    _check_aligned(pred, gold)
    groups: Dict[int, Group] = defaultdict(Group)
    for p, g in zip(pred, gold):
        grp = groups[category_length(g)]
        grp.total += 1
        grp.correct += int(p == g)
    return dict(sorted(groups.items()))


def unseen_p_at_k(kbest: Sequence[Sequence[Optional[Category]]], gold: Sequence[Category],
                  inv: LabelInventory, ks=DEFAULT_KS, strip: bool = False) -> Dict[int, Group]:
    """p@k restricted to tokens whose gold category is not in the inventory.

    ``kbest[i]`` lists token i's candidates in rank order (None for ill-formed
    entries). With ``strip`` both sides lose their features before comparison.
    """
    _check_aligned(kbest, gold)
    groups = {k: Group() for k in ks}
    for cands, g in zip(kbest, gold):
        if g in inv:
            continue
        target = strip_features(g) if strip else g
        ranked = [(strip_features(c) if strip else c) if c is not None else None for c in cands]
        hit = next((r for r, c in enumerate(ranked, 1) if c == target), None)
        for k in ks:
            groups[k].total += 1
            groups[k].correct += int(hit is not None and hit <= k)
    return groups


def evaluate(pred, gold, inv: LabelInventory, kbest=None, buckets=DEFAULT_BUCKETS, ks=DEFAULT_KS) -> EvalReport:
    _check_aligned(pred, gold)
    overall = Group(sum(p == g for p, g in zip(pred, gold)), len(gold))
    report = EvalReport(overall, bucketed_accuracy(pred, gold, inv, buckets), _length_groups(pred, gold))
    report.unseen_tokens = sum(1 for g in gold if g not in inv)
    if kbest is not None:
        for strip in (False, True):
            for k, grp in unseen_p_at_k(kbest, gold, inv, ks, strip).items():
                report.unseen[(strip, k)] = grp
    return report


# -- rendering -------------------------------------------------------------------

def _fmt(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.4f}"


def render_report(report: EvalReport, format: str = "text") -> str:
    """Render deterministically. TSV columns: section, group, correct, total, value, share."""
    if format == "tsv":
        return _render_tsv(report)
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    lines = [f"accuracy\t{_fmt(report.overall.accuracy)}\t({report.overall.correct}/{report.overall.total})", ""]
    lines.append("training-frequency buckets")
    lines.append("bucket\taccuracy\tcorrect/total\t% in test")
    for row in report.buckets:
        g = row.group
        lines.append(f"{row.label}\t{_fmt(g.accuracy)}\t{g.correct}/{g.total}\t{100 * row.share:.2f}%")
    lines.append("(% in test is over all test tokens)")
    lines.append("")
    lines.append("category length")
    lines.append("length\taccuracy\tcorrect/total")
    for n, g in report.lengths.items():
        lines.append(f"{n}\t{_fmt(g.accuracy)}\t{g.correct}/{g.total}")
    lines.append("")
    lines.append(f"unseen categories ({report.unseen_tokens} tokens)")
    ks = sorted({k for _, k in report.unseen})
    if not report.unseen:
        lines.append("p@k\tnot computed (no k-best input)")
    else:
        lines.append("mode\t" + "\t".join(f"p@{k}" for k in ks))
        for strip, name in ((False, "strict"), (True, "w/o feature")):
            cells = []
            for k in ks:
                g = report.unseen[(strip, k)]
                cells.append("n/a (0 tokens)" if g.total == 0 else _fmt(g.accuracy))
            lines.append(name + "\t" + "\t".join(cells))
    return "\n".join(lines) + "\n"


def _render_tsv(report: EvalReport) -> str:
    rows = [("section", "group", "correct", "total", "value", "share")]
    o = report.overall
    rows.append(("overall", "all", o.correct, o.total, _fmt(o.accuracy), ""))
    for row in report.buckets:
        g = row.group
        rows.append(("frequency", row.label, g.correct, g.total, _fmt(g.accuracy), f"{row.share:.4f}"))
    for n, g in report.lengths.items():
        rows.append(("length", n, g.correct, g.total, _fmt(g.accuracy), ""))
    for (strip, k), g in sorted(report.unseen.items()):
        name = f"{'nofeat' if strip else 'strict'}@{k}"
        value = "n/a (0 tokens)" if g.total == 0 else _fmt(g.accuracy)
        rows.append(("unseen", name, g.correct, g.total, value, ""))
    return "\n".join("\t".join(str(c) for c in r) for r in rows) + "\n"
