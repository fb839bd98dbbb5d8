"""In-order transition system that builds categories with gen/op/reduce/stop.

Stack items are atoms (generated leaves), ``Operator`` markers, or functor
subtrees produced by ``reduce``. Legality checks keep the stack alternating
between category items and operators, so every terminated run yields a
well-formed category.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .category import (
    DEFAULT_PUNCTUATION,
    SLASHES,
    Atom,
    Category,
    Functor,
    atom_text,
    parse_category,
    print_category,
)

DEFAULT_MAX_ACTIONS = 64


class IllegalAction(ValueError):
    pass


@dataclass(frozen=True)
class Operator:
    slash: str

    def __str__(self):
        return self.slash


StackItem = Union[Atom, Functor, Operator]


@dataclass(frozen=True)
class Action:
    kind: str  # gen | op | reduce | stop
    payload: Union[Atom, str, None] = None

    def __str__(self):
        if self.kind == "gen":
            return f"gen({atom_text(self.payload)})"
        if self.kind == "op":
            return f"op({self.payload})"
        return self.kind

    def __repr__(self):
        return str(self)


def gen(a: Union[Atom, str]) -> Action:
    if isinstance(a, str):
        a = parse_category(a)
        if not isinstance(a, Atom):
            raise ValueError("gen takes an atomic category")
    return Action("gen", a)


def op(slash: str) -> Action:
    if slash not in SLASHES:
        raise ValueError(f"invalid slash {slash!r}")
    return Action("op", slash)


REDUCE = Action("reduce")
STOP = Action("stop")


def parse_action(text: str) -> Action:
    if text == "reduce":
        return REDUCE
    if text == "stop":
        return STOP
    if text.startswith("gen(") and text.endswith(")"):
        return gen(text[4:-1])
    if text.startswith("op(") and text.endswith(")"):
        return op(text[3:-1])
    raise ValueError(f"unknown action {text!r}")


@dataclass(frozen=True)
class TransitionState:
    stack: Tuple[StackItem, ...] = ()
    buffer: Tuple[Atom, ...] = ()
    timestep: int = 0
    terminated: bool = False
    punct_generated: bool = False
    last_action: Optional[Action] = None

    @property
    def top(self) -> Optional[StackItem]:
        return self.stack[-1] if self.stack else None


def initial_state() -> TransitionState:
    return TransitionState()


def _is_op(item) -> bool:
    return isinstance(item, Operator)


def _is_punct(a: Atom, punctuation) -> bool:
    return a.base in punctuation


def violation(s: TransitionState, a: Action, punctuation=DEFAULT_PUNCTUATION,
              max_actions: int = DEFAULT_MAX_ACTIONS) -> Optional[str]:
    """Name of the side condition ``a`` violates in ``s``, or None if legal."""
    if s.terminated:
        return "state is terminated"
    if s.timestep >= max_actions:
        return f"action cap of {max_actions} reached"
    if s.punct_generated and a.kind != "stop":
        return "only stop may follow a punctuation category"
    top = s.top
    if a.kind == "gen":
        if not (top is None or _is_op(top)):
            return "gen requires an empty stack or an operator on top"
        if _is_punct(a.payload, punctuation) and s.stack:
            return "punctuation may only be generated on an empty stack"
        return None
    if a.kind == "op":
        if top is None:
            return "op requires a non-empty stack"
        if _is_op(top):
            return "op requires a non-operator on top"
        return None
    if a.kind == "reduce":
        if len(s.stack) < 3:
            return "reduce requires three stack items"
        s1, x, s0 = s.stack[-3:]
        if _is_op(s1) or not _is_op(x) or _is_op(s0):
            return "reduce requires <category, operator, category> on top"
        return None
    if a.kind == "stop":
        if len(s.stack) != 1:
            return "stop requires exactly one stack item"
        if _is_op(top):
            return "stop requires a category, not an operator"
        return None
    return f"unknown action kind {a.kind!r}"


def legal_actions(s: TransitionState, atoms: Iterable[Atom], punctuation=DEFAULT_PUNCTUATION,
                  max_actions: int = DEFAULT_MAX_ACTIONS) -> List[Action]:
    """Legal actions in a fixed order: gens (in ``atoms`` order), op(/), op(\\), reduce, stop."""
    candidates = [gen(a) for a in atoms] + [op("/"), op("\\"), REDUCE, STOP]
    return [a for a in candidates if violation(s, a, punctuation, max_actions) is None]


def apply(s: TransitionState, a: Action, punctuation=DEFAULT_PUNCTUATION,
          max_actions: int = DEFAULT_MAX_ACTIONS) -> TransitionState:
    why = violation(s, a, punctuation, max_actions)
    if why is not None:
        raise IllegalAction(f"{a} is illegal: {why}")
    t = s.timestep + 1
    if a.kind == "gen":
        return replace(s, stack=s.stack + (a.payload,), buffer=s.buffer + (a.payload,), timestep=t,
                       punct_generated=_is_punct(a.payload, punctuation), last_action=a)
    if a.kind == "op":
        return replace(s, stack=s.stack + (Operator(a.payload),), timestep=t, last_action=a)
    if a.kind == "reduce":
        s1, x, s0 = s.stack[-3:]
        return replace(s, stack=s.stack[:-3] + (Functor(s1, x.slash, s0),), timestep=t, last_action=a)
    return replace(s, timestep=t, terminated=True, last_action=a)


def result(s: TransitionState) -> Category:
    if not s.terminated:
        raise ValueError("state is not terminated")
    return s.stack[0]


def replay(actions: Sequence[Action], punctuation=DEFAULT_PUNCTUATION,
           max_actions: int = DEFAULT_MAX_ACTIONS) -> TransitionState:
    s = initial_state()
    for a in actions:
        s = apply(s, a, punctuation, max_actions)
    return s


def oracle_actions(c: Category) -> List[Action]:
    """In-order traversal: result, operator, argument, reduce; then stop."""
    out: List[Action] = []

    def visit(node: Category):
        if isinstance(node, Atom):
            out.append(gen(node))
            return
        visit(node.result)
        out.append(op(node.slash))
        visit(node.argument)
        out.append(REDUCE)

    visit(c)
    out.append(STOP)
    return out


def enumerate_terminated(atoms: Sequence[Atom], max_actions: int,
                         punctuation=DEFAULT_PUNCTUATION) -> List[Tuple[List[Action], Category]]:
    """Every terminated action sequence of length <= max_actions, in DFS order."""
    if max_actions < 2:
        raise ValueError("max_actions must be >= 2")
    atoms = list(atoms)
    found = []

    def dfs(s: TransitionState, path: List[Action]):
        if s.terminated:
            found.append((list(path), result(s)))
            return
        for a in legal_actions(s, atoms, punctuation, max_actions):
            path.append(a)
            dfs(apply(s, a, punctuation, max_actions), path)
            path.pop()

    dfs(initial_state(), [])
    return found


# -- trace rendering ------------------------------------------------------

def render_stack(s: TransitionState) -> str:
    return " | ".join(str(item) if _is_op(item) else print_category(item) for item in s.stack)


def render_buffer(s: TransitionState) -> str:
    return " | ".join(atom_text(a) for a in s.buffer)


def trace(actions: Sequence[Action], punctuation=DEFAULT_PUNCTUATION) -> List[Tuple[int, str, str, str]]:
    """Rows of (timestep, stack, buffer, action), one per action, state shown before the action."""
    rows = []
    s = initial_state()
    for a in actions:
        rows.append((s.timestep, render_stack(s), render_buffer(s), str(a)))
        s = apply(s, a, punctuation)
    return rows


def format_trace(rows) -> str:
    lines = ["T\tstack\tbuffer\taction"]
    lines += [f"{t}\t{stack}\t{buf}\t{act}" for t, stack, buf, act in rows]
    return "\n".join(lines) + "\n"
