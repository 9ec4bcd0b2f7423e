"""Tests for the source-language reader and writer."""

from __future__ import annotations

import pytest

from helpers import QSORT, atom, const, ints, v, variant_clauses
from peval.builtins import SCAnd, SCCheck, SCTrue
from peval.parser import (
    ParseError,
    parse_program,
    parse_query,
    parse_term,
    render_clause,
    render_program,
    render_term,
)
from peval.terms import Clause, Program, Struct, indicator, intc, variant

class TestParseProgram:
    def test_quicksort_program(self):
        p = parse_program(QSORT)
        assert len(p.clauses) == 5
        assert p.predicates == {("qsort", 3), ("partition", 4)}
        assert p.clauses_for(("qsort", 3))[0].is_fact
        rec = p.clauses_for(("partition", 4))[1]
        assert [a.functor for a in rec.body] == ["=<", "partition"]

    def test_single_fact(self):
        p = parse_program("p(a).")
        assert len(p.clauses) == 1
        assert p.clauses[0].is_fact
        assert p.clauses[0].head == atom("p", const("a"))

    def test_eval_directive(self):
        p = parse_program(":- eval (A =< B) : (arithexpr(A), arithexpr(B)).")
        assert set(p.evals) == {("=<", 2)}
        head, sc = p.evals[("=<", 2)]
        assert indicator(head) == ("=<", 2)
        assert isinstance(sc, SCAnd)
        assert isinstance(sc.left, SCCheck) and sc.left.atom.functor == "arithexpr"

    def test_eval_true_condition(self):
        p = parse_program(":- eval (A = B) : true.")
        assert isinstance(p.evals[("=", 2)][1], SCTrue)

    def test_entry_directive(self):
        p = parse_program("p(a).\n:- entry p(X).")
        assert len(p.entries) == 1
        assert p.entries[0].functor == "p"

    def test_clause_lines_recorded(self):
        p = parse_program("p(a).\n\nq(X) :- p(X).\n")
        assert p.clauses[0].line == 1
        assert p.clauses[1].line == 3

    def test_list_sugar(self):
        t = parse_term("[1,2|T]")
        assert t.functor == "." and t.args[0] == intc(1)
        assert parse_term("[]") == Struct("[]")
        assert parse_term("[a]") == Struct(".", (const("a"), Struct("[]")))

    def test_operator_precedence(self):
        t = parse_term("X is 1+2*3")
        assert t.functor == "is"
        rhs = t.args[1]
        assert rhs.functor == "+"
        assert rhs.args[1].functor == "*"
        assert parse_term("1+2-3").functor == "-"
        assert parse_term("7 mod 2").functor == "mod"

    def test_negative_integers(self):
        assert parse_term("-3") == intc(-3)
        assert parse_term("f(-3)") == atom("f", intc(-3))
        t = parse_term("1-3")
        assert t.functor == "-" and t.args == (intc(1), intc(3))

    def test_anonymous_vars_fresh(self):
        p = parse_program("p(_,_).")
        a1, a2 = p.clauses[0].head.args
        assert a1 != a2

    def test_var_scope_per_clause(self):
        p = parse_program("p(X).\nq(X).")
        assert p.clauses[0].head.args[0] != p.clauses[1].head.args[0]


class TestParseErrors:
    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as e:
            parse_program("p(a).\nq(].\n")
        assert e.value.line == 2
        assert e.value.col >= 3

    def test_missing_period(self):
        with pytest.raises(ParseError):
            parse_program("p(a)")

    def test_duplicate_eval(self):
        with pytest.raises(ParseError, match="duplicate eval"):
            parse_program(
                ":- eval (A =< B) : arithexpr(A).\n:- eval (A =< B) : arithexpr(B)."
            )

    def test_eval_for_non_builtin(self):
        with pytest.raises(ParseError, match="unknown builtin"):
            parse_program(":- eval p(A) : ground(A).")

    def test_eval_condition_var_not_in_head(self):
        with pytest.raises(ParseError, match="variables not in"):
            parse_program(":- eval (A =< B) : arithexpr(C).")

    def test_entry_unknown_predicate(self):
        with pytest.raises(ParseError, match="entry for unknown"):
            parse_program("p(a).\n:- entry q(X).")

    def test_entry_builtin_allowed(self):
        p = parse_program(":- entry ground(X).")
        assert p.entries[0].functor == "ground"

    def test_redefining_builtin(self):
        with pytest.raises(ParseError, match="redefine builtin"):
            parse_program("is(X,Y).")

    def test_unknown_directive(self):
        with pytest.raises(ParseError, match="unknown directive"):
            parse_program(":- table p(X).")


class TestRender:
    def test_residual_fact(self):
        c = Clause(atom("qsort", ints([1, 1, 1]), ints([1, 1, 1]), ints([])))
        assert render_clause(c) == "qsort([1,1,1],[1,1,1],[])."

    def test_empty_program(self):
        assert render_program(Program(())) == ""

    def test_rule_with_operators(self):
        p = parse_program("p(X,Y) :- X =< Y, q(X).")
        assert render_clause(p.clauses[0]) == "p(A,B) :- A =< B, q(A)."

    def test_partial_list_render(self):
        x = v(5, "T")
        assert render_term(Struct(".", (intc(1), x))) == "[1|A]"

    def test_arith_parens(self):
        t = parse_term("(1+2)*3")
        assert render_term(t) == "(1 + 2) * 3"
        assert parse_term(render_term(t)) == t
        t2 = parse_term("1+2*3")
        assert render_term(t2) == "1 + 2 * 3"
        assert parse_term(render_term(t2)) == t2

    def test_roundtrip_quicksort(self):
        p1 = parse_program(QSORT)
        p2 = parse_program(render_program(p1))
        assert len(p1.clauses) == len(p2.clauses)
        for c1, c2 in zip(p1.clauses, p2.clauses):
            assert variant_clauses(c1, c2)
        # one more round trip is a fixpoint byte-for-byte
        assert render_program(p2) == render_program(parse_program(render_program(p2)))

    def test_roundtrip_directives(self):
        src = ":- entry p([1,2|T]).\n:- eval (A =< B) : (arithexpr(A), arithexpr(B)).\np([X|Y]) :- p(Y).\np([]).\n"
        p1 = parse_program(src)
        p2 = parse_program(render_program(p1))
        assert len(p2.entries) == 1
        assert variant(p1.entries[0], p2.entries[0])
        assert set(p2.evals) == set(p1.evals)
        assert render_program(p2) == render_program(parse_program(render_program(p2)))


class TestParseQuery:
    def test_single_atom(self):
        (g,) = parse_query("qsort([1,1,1],R,[])")
        assert g.functor == "qsort"

    def test_conjunction_and_period(self):
        gs = parse_query("p(X), q(X).")
        assert [g.functor for g in gs] == ["p", "q"]

    def test_shared_variables(self):
        g1, g2 = parse_query("p(X), q(X)")
        assert g1.args[0] == g2.args[0]
