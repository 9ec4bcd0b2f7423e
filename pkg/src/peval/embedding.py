"""Homeomorphic embedding and the admissibility test over ancestors.

An unfolding branch may continue only while the sequence of comparable
selected atoms stays admissible: no earlier atom embeds into a later one.
The relation is pluggable so ablations (always-admissible, plain depth
bound, embedding over the full selected-atom sequence) can be compared
against embedding over covering ancestors.
"""

from __future__ import annotations

from typing import Iterable

from .terms import Atom, Struct, Term, Var, indicator


def embeds_term(s: Term, t: Term) -> bool:
    """True iff ``s`` can be obtained from ``t`` by deleting operators.

    Rules: any variable embeds into any variable; ``s`` embeds into a
    compound if it embeds into one argument (diving) or if the functors
    match and all arguments embed pairwise (coupling).  Two integer
    constants embed only when equal.
    """
    if isinstance(t, Var):
        return isinstance(s, Var)
    if isinstance(s, Var):
        return any(embeds_term(s, a) for a in t.args)
    if s.functor == t.functor and len(s.args) == len(t.args):
        if all(embeds_term(a, b) for a, b in zip(s.args, t.args)):
            return True
    return any(embeds_term(s, a) for a in t.args)


def embeds_atom(a: Atom, b: Atom) -> bool:
    """Componentwise embedding; atoms of different predicates never embed."""
    if indicator(a) != indicator(b):
        return False
    return all(embeds_term(x, y) for x, y in zip(a.args, b.args))


def comparable(a: Atom, b: Atom) -> bool:
    return indicator(a) == indicator(b)


class Wqo:
    """Ordering used to stop unfolding; ``leq(earlier, later)`` signals danger."""

    name = "wqo"
    full_sequence = False

    def leq(self, earlier: Atom, later: Atom) -> bool:
        raise NotImplementedError

    def admissible(self, atom: Atom, ancestors: Iterable[Atom]) -> bool:
        return all(
            not self.leq(anc, atom) for anc in ancestors if comparable(anc, atom)
        )


class HEmbed(Wqo):
    name = "hembed"

    def leq(self, earlier: Atom, later: Atom) -> bool:
        return embeds_atom(earlier, later)


class NeverStop(Wqo):
    """Ablation: every sequence is admissible, unfolding never stops here."""

    name = "none"

    def leq(self, earlier: Atom, later: Atom) -> bool:
        return False


class DepthBound(Wqo):
    """Ablation: admit at most ``k`` comparable ancestors, ignore structure."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("depth bound must be positive")
        self.k = k
        self.name = f"depth:{k}"

    def leq(self, earlier: Atom, later: Atom) -> bool:
        return True

    def admissible(self, atom: Atom, ancestors: Iterable[Atom]) -> bool:
        n = sum(1 for anc in ancestors if comparable(anc, atom))
        return n < self.k


class FullSeqHEmbed(HEmbed):
    """Embedding checked over every selected atom, not just ancestors."""

    name = "fullseq-hembed"
    full_sequence = True


def admissible(atom: Atom, ancestors: Iterable[Atom], wqo: Wqo) -> bool:
    """True iff ``atom`` may be selected below the given comparable ancestors."""
    return wqo.admissible(atom, ancestors)


def make_wqo(spec: str) -> Wqo:
    """Wqo from its command-line name: hembed, none, fullseq-hembed, depth:<k>."""
    if spec == "hembed":
        return HEmbed()
    if spec == "none":
        return NeverStop()
    if spec == "fullseq-hembed":
        return FullSeqHEmbed()
    if spec.startswith("depth:"):
        return DepthBound(int(spec.split(":", 1)[1]))
    raise ValueError(f"unknown wqo {spec!r}")
