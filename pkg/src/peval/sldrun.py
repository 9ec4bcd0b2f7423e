"""Plain leftmost-SLD interpreter, used as the semantics oracle.

Runs the same programs and builtin registry as the unfolding engine but
with no ancestor tracking: depth-first, clause order, leftmost selection,
under an explicit step budget so the oracle always returns.  Answers are
restricted to the query's variables and reported in discovery order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .builtins import check_sc, exec_builtin, registry_for
from .terms import (
    Atom,
    Program,
    Subst,
    VarPool,
    indicator,
    mgu,
    rename_apart,
    term_vars,
)


class BuiltinCallError(Exception):
    """A builtin was reached with its evaluability condition false."""


@dataclass(frozen=True)
class RunResult:
    answers: tuple[Subst, ...]
    steps: int
    outcome: str  # "complete" | "budget-exhausted"


def run(
    program: Program,
    query: Atom | tuple[Atom, ...],
    budget: int = 10**6,
    registry: dict | None = None,
) -> RunResult:
    """Depth-first resolution of ``query``; stops after ``budget`` steps."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    goal = (query,) if not isinstance(query, tuple) else query
    registry = registry if registry is not None else registry_for(program)
    hi = max(program.max_var_id, max((max(term_vars(a), default=-1) for a in goal), default=-1))
    pool = VarPool(hi + 1)
    query_vars = frozenset().union(*(term_vars(a) for a in goal)) if goal else frozenset()

    answers: list[Subst] = []
    steps = 0
    # frames of (goal, answer) expansions; each stack entry is an iterator
    stack = [iter([(goal, Subst.identity())])]
    while stack:
        if steps >= budget:
            return RunResult(tuple(answers), steps, "budget-exhausted")
        try:
            current_goal, answer = next(stack[-1])
        except StopIteration:
            stack.pop()
            continue
        if not current_goal:
            answers.append(answer)
            continue
        selected, rest = current_goal[0], current_goal[1:]
        key = indicator(selected)
        bdef = registry.get(key)
        if bdef is not None:
            if not check_sc(bdef, selected):
                raise BuiltinCallError(
                    f"builtin {key[0]}/{key[1]} called with its condition false"
                )
            steps += 1
            children = []
            for theta in exec_builtin(bdef, selected).answers:
                children.append(
                    (theta.apply_all(rest), answer.compose_restrict(theta, query_vars))
                )
            stack.append(iter(children))
            continue

        def expand(selected=selected, rest=rest, answer=answer, key=key):
            for clause in program.clauses_for(key):
                renamed = rename_apart(clause, pool)
                theta = mgu(renamed.head, selected)
                if theta is None:
                    continue
                new_goal = theta.apply_all(renamed.body + rest)
                yield new_goal, answer.compose_restrict(theta, query_vars)

        steps += 1
        stack.append(expand())
    return RunResult(tuple(answers), steps, "complete")
