"""Shared test utilities: tiny term builders and seeded random generators."""

from __future__ import annotations

import random

from peval.terms import NIL, Clause, Struct, Subst, Var, intc, mklist, struct

QSORT = """
qsort([],R,R).
qsort([X|L],R,R2) :-
   partition(L,X,L1,L2),
   qsort(L2,R1,R2),
   qsort(L1,R,[X|R1]).

partition([],_,[],[]).
partition([E|R],C,[E|Left1],Right) :-
   E =< C,
   partition(R,C,Left1,Right).
partition([E|R],C,Left,[E|Right1]) :-
   E > C,
   partition(R,C,Left,Right1).
"""


def v(i, name="_"):
    return Var(i, name)


def atom(name, *args):
    return Struct(name, tuple(args))


def const(name):
    return Struct(name)


def ints(values):
    return mklist([intc(n) for n in values])


def intlist(values, tail=NIL):
    return mklist([intc(n) for n in values], tail)


def random_term(rng: random.Random, var_ids, depth=3):
    """Random term over a small signature {f/2, g/1, a/0, b/0, vars}."""
    if depth <= 0 or rng.random() < 0.35:
        kind = rng.randrange(3)
        if kind == 0 and var_ids:
            return Var(rng.choice(var_ids))
        return const(rng.choice(("a", "b")))
    if rng.random() < 0.5:
        return struct("g", random_term(rng, var_ids, depth - 1))
    return struct(
        "f",
        random_term(rng, var_ids, depth - 1),
        random_term(rng, var_ids, depth - 1),
    )


def random_atom(rng: random.Random, var_ids, pred="p", arity=2, depth=2):
    return Struct(pred, tuple(random_term(rng, var_ids, depth) for _ in range(arity)))


def random_subst(rng: random.Random, dom_ids, range_ids, depth=2):
    m = {}
    for vid in dom_ids:
        if rng.random() < 0.6:
            m[vid] = random_term(rng, range_ids, depth)
    return Subst(m)


def variant_clauses(a: Clause, b: Clause) -> bool:
    from peval.terms import variant

    wrap = lambda c: Struct("$c", (c.head,) + c.body)
    return variant(wrap(a), wrap(b))
