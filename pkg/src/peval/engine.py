"""Unfolding engine: SLD resolution extended with an ancestor stack.

A state pairs a resolvent with a backend that tracks the covering
ancestors of the next selected atom.  Goals carry a pop pseudo-atom that
closes a depth scope: resolving against a clause with a nonempty body
pushes the selected atom and appends one pop mark behind the new body
atoms; reaching the mark pops the finished call.  Facts short-circuit the
push/pop pair, and external calls never touch the stack.  With the
leftmost rule the stack therefore always holds exactly the proof-tree
ancestors of the selected atom, which is what the admissibility test
wants to see.

Three interchangeable backends store the ancestors, differing only in
the memory a direct implementation of each strategy would retain:

* ``stacks``   -- the live stack; entries are freed when popped.
* ``trees``    -- a proof tree with parent links and a cursor; popping
                  moves the cursor but finished subtrees stay allocated
                  for the rest of the derivation.
* ``relation`` -- every resolvent atom carries its own unshared copy of
                  its ancestor list, and each derivation step rebuilds
                  the annotated goal, so list copies accumulate along a
                  derivation.

All three see the same admissibility sequence, so they produce identical
trees; ``peak_cells`` (term nodes of stored ancestor atoms, high-water
per run) is where they differ.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

from .builtins import BuiltinDef, check_sc, exec_builtin, registry_for
from .embedding import HEmbed, Wqo, admissible
from .terms import (
    Atom,
    Clause,
    Program,
    Struct,
    Subst,
    VarPool,
    indicator,
    mgu,
    rename_apart,
    term_size,
    term_vars,
)


class PopMark:
    """Pseudo-atom closing a depth scope; never unifies with anything."""

    __slots__ = ()

    def __repr__(self):
        return "<pop>"


POP = PopMark()
GoalItem = Union[Struct, PopMark]
Goal = tuple[GoalItem, ...]


def apply_goal(s: Subst, goal: Goal) -> Goal:
    return tuple(item if item is POP else s.apply(item) for item in goal)


def goal_atoms(goal: Goal) -> tuple[Atom, ...]:
    return tuple(item for item in goal if item is not POP)


class MemoryMeter:
    """High-water mark of ancestor cells, shared by one run's backends."""

    __slots__ = ("peak",)

    def __init__(self):
        self.peak = 0

    def note(self, cells: int):
        if cells > self.peak:
            self.peak = cells


class _Link:
    """Persistent chain node; ``below`` links double as proof-tree parents."""

    __slots__ = ("atom", "size", "below", "cum")

    def __init__(self, atom: Atom, below: "_Link | None"):
        self.atom = atom
        self.size = term_size(atom)
        self.below = below
        self.cum = self.size + (below.cum if below is not None else 0)


def _chain_atoms(link: _Link | None) -> Iterator[Atom]:
    while link is not None:
        yield link.atom
        link = link.below


class StackBackend:
    """Covering ancestors on a stack; memory is what is currently pushed."""

    kind = "stacks"
    __slots__ = ("meter", "top", "height")

    def __init__(self, meter: MemoryMeter, top: _Link | None = None, height: int = 0):
        self.meter = meter
        self.top = top
        self.height = height

    def derived(self, snapshot: Atom, body_len: int) -> "StackBackend":
        top = _Link(snapshot, self.top)
        self.meter.note(top.cum)
        return StackBackend(self.meter, top, self.height + 1)

    def consumed(self, snapshot: Atom) -> "StackBackend":
        return self

    def popped(self) -> "StackBackend":
        assert self.top is not None, "pop on empty ancestor stack"
        return StackBackend(self.meter, self.top.below, self.height - 1)

    def contents_for(self, selected: Atom) -> Iterator[Atom]:
        return _chain_atoms(self.top)

    @property
    def cells(self) -> int:
        return self.top.cum if self.top is not None else 0

    def peak_cells(self) -> int:
        return self.meter.peak


class TreeBackend:
    """Proof tree with a cursor; finished subtrees stay allocated."""

    kind = "trees"
    __slots__ = ("meter", "cursor", "height", "tree_cells")

    def __init__(
        self,
        meter: MemoryMeter,
        cursor: _Link | None = None,
        height: int = 0,
        tree_cells: int = 0,
    ):
        self.meter = meter
        self.cursor = cursor
        self.height = height
        self.tree_cells = tree_cells

    def derived(self, snapshot: Atom, body_len: int) -> "TreeBackend":
        node = _Link(snapshot, self.cursor)
        cells = self.tree_cells + node.size
        self.meter.note(cells)
        return TreeBackend(self.meter, node, self.height + 1, cells)

    def consumed(self, snapshot: Atom) -> "TreeBackend":
        return self

    def popped(self) -> "TreeBackend":
        assert self.cursor is not None, "pop above the proof-tree root"
        return TreeBackend(self.meter, self.cursor.below, self.height - 1, self.tree_cells)

    def contents_for(self, selected: Atom) -> Iterator[Atom]:
        return _chain_atoms(self.cursor)

    @property
    def cells(self) -> int:
        return self.tree_cells

    def peak_cells(self) -> int:
        return self.meter.peak


class RelationBackend:
    """Per-atom ancestor lists, rebuilt with the goal at every step.

    ``segments`` holds the number of resolvent atoms per depth scope
    (deepest first); the atoms of segment ``i`` each own a copy of the
    chain minus its top ``i`` entries.  Every step allocates the new
    goal's annotation lists afresh and the copies stay live until the
    derivation backtracks, which is the accumulation that makes this
    strategy collapse on larger inputs.
    """

    kind = "relation"
    __slots__ = ("meter", "top", "height", "segments", "alloc_cells")

    def __init__(
        self,
        meter: MemoryMeter,
        top: _Link | None = None,
        height: int = 0,
        segments: tuple[int, ...] = (1,),
        alloc_cells: int = 0,
    ):
        self.meter = meter
        self.top = top
        self.height = height
        self.segments = segments
        self.alloc_cells = alloc_cells

    @staticmethod
    def _annotation_cells(top: _Link | None, segments: tuple[int, ...]) -> int:
        total = 0
        link = top
        for count in segments:
            if link is None:
                break
            total += count * link.cum
            link = link.below
        return total

    def _next(self, top, height, segments) -> "RelationBackend":
        alloc = self.alloc_cells + self._annotation_cells(top, segments)
        self.meter.note(alloc)
        return RelationBackend(self.meter, top, height, segments, alloc)

    def derived(self, snapshot: Atom, body_len: int) -> "RelationBackend":
        assert self.segments[0] > 0, "derive outside the deepest scope"
        top = _Link(snapshot, self.top)
        segments = (body_len, self.segments[0] - 1) + self.segments[1:]
        return self._next(top, self.height + 1, segments)

    def consumed(self, snapshot: Atom) -> "RelationBackend":
        assert self.segments[0] > 0, "consume outside the deepest scope"
        segments = (self.segments[0] - 1,) + self.segments[1:]
        return self._next(self.top, self.height, segments)

    def popped(self) -> "RelationBackend":
        assert self.top is not None, "pop on empty ancestor chain"
        assert self.segments[0] == 0
        return self._next(self.top.below, self.height - 1, self.segments[1:])

    def contents_for(self, selected: Atom) -> Iterator[Atom]:
        return _chain_atoms(self.top)

    @property
    def cells(self) -> int:
        return self.alloc_cells

    def peak_cells(self) -> int:
        return self.meter.peak


BACKENDS = {
    "stacks": StackBackend,
    "trees": TreeBackend,
    "relation": RelationBackend,
}

BackendFactory = Callable[[MemoryMeter], object]


def make_backend(kind: Union[str, BackendFactory], meter: MemoryMeter):
    if callable(kind):
        return kind(meter)
    try:
        return BACKENDS[kind](meter)
    except KeyError:
        raise ValueError(f"unknown backend {kind!r}") from None


class _SeqLink:
    """Never-popped record of selected atoms, for the full-sequence ablation."""

    __slots__ = ("atom", "below")

    def __init__(self, atom: Atom, below: "_SeqLink | None"):
        self.atom = atom
        self.below = below


@dataclass
class Counters:
    derive: int = 0
    derive_fact: int = 0
    pop: int = 0
    external: int = 0
    steps: int = 0
    success_leaves: int = 0
    failure_leaves: int = 0
    residual_leaves: int = 0
    budget_hit: bool = False

    def merge(self, other: "Counters"):
        self.derive += other.derive
        self.derive_fact += other.derive_fact
        self.pop += other.pop
        self.external += other.external
        self.steps += other.steps
        self.success_leaves += other.success_leaves
        self.failure_leaves += other.failure_leaves
        self.residual_leaves += other.residual_leaves
        self.budget_hit = self.budget_hit or other.budget_hit

    def as_dict(self) -> dict:
        return {
            "steps": self.steps,
            "derive": self.derive,
            "derive_fact": self.derive_fact,
            "pop": self.pop,
            "external": self.external,
            "success_leaves": self.success_leaves,
            "failure_leaves": self.failure_leaves,
            "residual_leaves": self.residual_leaves,
            "budget_hit": self.budget_hit,
        }


class State:
    """Resolvent, ancestor backend, and answer so far (root variables only)."""

    __slots__ = ("goal", "ancestors", "answer", "seq")

    def __init__(self, goal: Goal, ancestors, answer: Subst, seq: _SeqLink | None = None):
        self.goal = goal
        self.ancestors = ancestors
        self.answer = answer
        self.seq = seq

    def pop_marks(self) -> int:
        return sum(1 for item in self.goal if item is POP)

    def seq_contents(self) -> Iterator[Atom]:
        link = self.seq
        while link is not None:
            yield link.atom
            link = link.below

    def comparison_sequence(self, wqo: Wqo, selected: Atom) -> Iterator[Atom]:
        if wqo.full_sequence:
            return self.seq_contents()
        return self.ancestors.contents_for(selected)


@dataclass
class UnfoldConfig:
    backend: Union[str, BackendFactory] = "stacks"
    wqo: Wqo = field(default_factory=HEmbed)
    rule: str = "leftmost"
    budget: int = 10**6
    determinacy_stop: bool = False

    def __post_init__(self):
        if self.rule != "leftmost":
            raise ValueError("only the leftmost computation rule is supported")


SELECT_EMPTY = "empty"
SELECT_POP = "pop-required"


def select(goal: Goal, rule: str = "leftmost"):
    """Leftmost selection: index 0, a pop request, or empty."""
    if rule != "leftmost":
        raise ValueError("only the leftmost computation rule is supported")
    if not goal:
        return SELECT_EMPTY
    if goal[0] is POP:
        return SELECT_POP
    return 0


def _try_clause(state: State, clause: Clause, pool: VarPool):
    """Rename the clause apart and unify its head with the selected atom.

    Head goes first so variable-variable bindings prefer the fresh clause
    variables and goal variables survive the step.
    """
    renamed = rename_apart(clause, pool)
    theta = mgu(renamed.head, state.goal[0])
    if theta is None:
        return None
    return renamed, theta


def _make_state(
    state: State,
    renamed: Clause,
    theta: Subst,
    root_vars: frozenset[int],
    record_seq: bool,
) -> State:
    # the full-sequence recorder mirrors a stack that never pops: only
    # rule steps push, facts never enter it
    selected = state.goal[0]
    seq = _SeqLink(selected, state.seq) if record_seq and renamed.body else state.seq
    answer = state.answer.compose_restrict(theta, root_vars)
    if renamed.body:
        new_goal = apply_goal(theta, renamed.body + (POP,) + state.goal[1:])
        backend = state.ancestors.derived(selected, len(renamed.body))
    else:
        new_goal = apply_goal(theta, state.goal[1:])
        backend = state.ancestors.consumed(selected)
    return State(new_goal, backend, answer, seq)


def _resolve(state: State, clause: Clause, pool: VarPool, root_vars: frozenset[int], record_seq: bool):
    """Shared resolution core for derive / derive-fact, admissibility done.

    Returns (new_state, theta) or None when the head does not unify.
    """
    match = _try_clause(state, clause, pool)
    if match is None:
        return None
    renamed, theta = match
    return _make_state(state, renamed, theta, root_vars, record_seq), theta


def derive(state: State, clause: Clause, wqo: Wqo, pool: VarPool, root_vars: frozenset[int] | None = None):
    """One resolution step against a rule clause.

    The selected atom is checked admissible against its comparison
    sequence first, then pushed in the instantiation it has right now;
    the renamed body atoms go to the left of the remaining goal with one
    pop mark separating the scopes.  Returns the new state,
    "inadmissible", or None when the head does not unify.
    """
    assert clause.body, "derive needs a clause with a nonempty body"
    selected = state.goal[0]
    assert isinstance(selected, Struct)
    if root_vars is None:
        root_vars = term_vars(selected)
    if not admissible(selected, state.comparison_sequence(wqo, selected), wqo):
        return "inadmissible"
    result = _resolve(state, clause, pool, root_vars, wqo.full_sequence)
    return None if result is None else result[0]


def derive_fact(state: State, clause: Clause, wqo: Wqo, pool: VarPool, root_vars: frozenset[int] | None = None):
    """Resolution against a fact: same admissibility, no push, no pop mark."""
    assert clause.is_fact, "derive_fact needs a fact"
    selected = state.goal[0]
    assert isinstance(selected, Struct)
    if root_vars is None:
        root_vars = term_vars(selected)
    if not admissible(selected, state.comparison_sequence(wqo, selected), wqo):
        return "inadmissible"
    result = _resolve(state, clause, pool, root_vars, wqo.full_sequence)
    return None if result is None else result[0]


def pop_derive(state: State) -> State:
    """Consume a leading pop mark; the finished call leaves the stack."""
    assert state.goal and state.goal[0] is POP
    return State(state.goal[1:], state.ancestors.popped(), state.answer, state.seq)


def external_derive(state: State, bdef: BuiltinDef, root_vars: frozenset[int] | None = None):
    """Run an external call; the ancestor stack is left untouched.

    Returns the successor states (one per answer, possibly none) or
    "not-evaluable" when the declared condition fails for this call.
    """
    selected = state.goal[0]
    assert isinstance(selected, Struct)
    if root_vars is None:
        root_vars = term_vars(selected)
    if not check_sc(bdef, selected):
        return "not-evaluable"
    out = []
    for theta in exec_builtin(bdef, selected).answers:
        new_goal = apply_goal(theta, state.goal[1:])
        backend = state.ancestors.consumed(selected)
        answer = state.answer.compose_restrict(theta, root_vars)
        out.append(State(new_goal, backend, answer, state.seq))
    return out


class UnfoldNode:
    __slots__ = ("state", "rule", "clause", "theta", "children", "leaf", "stop_reason", "depth")

    def __init__(self, state: State, rule=None, clause=None, theta=None, depth=0):
        self.state = state
        self.rule = rule  # edge label from the parent
        self.clause = clause
        self.theta = theta
        self.children: list[UnfoldNode] = []
        self.leaf: str | None = None  # success | failure | residualized
        self.stop_reason: str | None = None
        self.depth = depth


@dataclass(frozen=True)
class Resultant:
    """Residual clause read off a root-to-leaf derivation."""

    head: Atom
    body: tuple[Atom, ...]
    reason: str | None = None  # None for success leaves

    def to_clause(self) -> Clause:
        return Clause(self.head, self.body)


class UnfoldTree:
    def __init__(self, root_atom: Atom, root: UnfoldNode, counters: Counters, meter: MemoryMeter):
        self.root_atom = root_atom
        self.root = root
        self.counters = counters
        self.meter = meter

    def nodes(self) -> Iterator[UnfoldNode]:
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def leaves(self) -> Iterator[UnfoldNode]:
        for n in self.nodes():
            if n.leaf is not None:
                yield n

    def answers(self) -> list[Subst]:
        """Computed answers of success leaves, in discovery order."""
        return [leaf.state.answer for leaf in self.leaves() if leaf.leaf == "success"]


def unfold(
    atom: Atom,
    program: Program,
    cfg: UnfoldConfig | None = None,
    registry: dict | None = None,
    pool: VarPool | None = None,
    meter: MemoryMeter | None = None,
) -> UnfoldTree:
    """Build the (possibly incomplete) resolution tree rooted at ``atom``.

    Depth-first, children in clause order.  Every branch ends in success,
    failure, or residualization: an inadmissible step, a non-evaluable
    external call, the optional nondeterminism stop, or the step budget
    (a watchdog recorded per branch, never fatal).
    """
    cfg = cfg or UnfoldConfig()
    registry = registry if registry is not None else registry_for(program)
    if pool is None:
        pool = VarPool(max(program.max_var_id, max(term_vars(atom), default=-1)) + 1)
    meter = meter or MemoryMeter()
    counters = Counters()
    root_vars = term_vars(atom)
    wqo = cfg.wqo
    backend = make_backend(cfg.backend, meter)
    root = UnfoldNode(State((atom,), backend, Subst.identity()))
    todo = [root]
    while todo:
        node = todo.pop()
        state = node.state
        sel = select(state.goal, cfg.rule)
        if sel == SELECT_EMPTY:
            node.leaf = "success"
            counters.success_leaves += 1
            continue
        if counters.steps >= cfg.budget:
            node.leaf = "residualized"
            node.stop_reason = "budget"
            counters.residual_leaves += 1
            counters.budget_hit = True
            continue
        if sel == SELECT_POP:
            counters.pop += 1
            counters.steps += 1
            child = UnfoldNode(pop_derive(state), "pop-derive", depth=node.depth + 1)
            node.children.append(child)
            todo.append(child)
            continue
        selected = state.goal[0]
        key = indicator(selected)
        bdef = registry.get(key)
        if bdef is not None:
            result = external_derive(state, bdef, root_vars)
            if result == "not-evaluable":
                node.leaf = "residualized"
                node.stop_reason = "external-not-evaluable"
                counters.residual_leaves += 1
                continue
            counters.external += 1
            counters.steps += 1
            if not result:
                node.leaf = "failure"
                counters.failure_leaves += 1
                continue
            for st in result:
                node.children.append(UnfoldNode(st, "external-derive", depth=node.depth + 1))
            todo.extend(reversed(node.children))
            continue
        if not admissible(selected, state.comparison_sequence(wqo, selected), wqo):
            node.leaf = "residualized"
            node.stop_reason = "inadmissible"
            counters.residual_leaves += 1
            continue
        matches = []
        for clause in program.clauses_for(key):
            m = _try_clause(state, clause, pool)
            if m is not None:
                matches.append((clause,) + m)
        if not matches:
            node.leaf = "failure"
            counters.failure_leaves += 1
            continue
        if cfg.determinacy_stop and node.depth > 0 and len(matches) > 1:
            node.leaf = "residualized"
            node.stop_reason = "nondeterministic-stop"
            counters.residual_leaves += 1
            continue
        for clause, renamed, theta in matches:
            st = _make_state(state, renamed, theta, root_vars, wqo.full_sequence)
            if clause.is_fact:
                rule_name = "derive-fact"
                counters.derive_fact += 1
            else:
                rule_name = "derive"
                counters.derive += 1
            counters.steps += 1
            node.children.append(UnfoldNode(st, rule_name, clause, theta, depth=node.depth + 1))
        todo.extend(reversed(node.children))
    return UnfoldTree(atom, root, counters, meter)


def resultants(tree: UnfoldTree) -> list[Resultant]:
    """One residual clause per success or residualized leaf, pop marks gone."""
    out = []
    for leaf in tree.leaves():
        if leaf.leaf == "failure":
            continue
        head = leaf.state.answer.apply(tree.root_atom)
        body = goal_atoms(leaf.state.goal)
        reason = leaf.stop_reason if leaf.leaf == "residualized" else None
        out.append(Resultant(head, body, reason))
    return out
