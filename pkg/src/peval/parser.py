"""Reader and writer for the Prolog-subset source language.

Grammar (informally)::

    program   := (clause | directive)*
    clause    := atom [":-" body] "."
    body      := atom ("," atom)*
    directive := ":-" ("entry" atom | "eval" atom ":" sc) "."
    sc        := sc ";" sc | sc "," sc | "(" sc ")" | "true" | check-atom

Comments run from ``%`` to end of line.  Lists use the usual bracket
sugar over ``'.'/2`` and ``'[]'/0``.  The comparison operators, ``is``,
``=`` and integer arithmetic operators are read infix at fixed
precedences; users cannot declare operators.
"""

from __future__ import annotations

import re
from typing import Iterator

from .builtins import BUILTIN_INDICATORS, SCAnd, SCCheck, SCExpr, SCOr, SCTrue, sc_vars
from .terms import (
    NIL,
    Atom,
    Clause,
    Program,
    Struct,
    Term,
    Var,
    indicator,
    intc,
    is_int,
    term_vars,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


COMPARISONS = ("=<", ">=", "=:=", "=\\=", "<", ">", "=", "is")
_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<COMMENT>%[^\n]*)
    | (?P<ARROW>:-)
    | (?P<EVALSEP>:)
    | (?P<INT>\d+)
    | (?P<NAME>[a-z][A-Za-z0-9_]*)
    | (?P<VAR>[A-Z_][A-Za-z0-9_]*)
    | (?P<OP>=<|>=|=:=|=\\=|//|<|>|=|\+|-|\*)
    | (?P<PUNCT>[()\[\],|;.])
    """,
    re.VERBOSE,
)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):
        return f"Token({self.kind},{self.text!r}@{self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        piece = m.group()
        if kind not in ("WS", "COMMENT"):
            if kind == "OP" and piece == "-" and pos + 1 < n and text[pos + 1].isdigit():
                # negative integer literal, unless '-' follows a value
                prev = tokens[-1] if tokens else None
                if prev is None or not (
                    prev.kind in ("INT", "VAR", "NAME")
                    or (prev.kind == "PUNCT" and prev.text in (")", "]"))
                ):
                    m2 = _TOKEN_RE.match(text, pos + 1)
                    piece = "-" + m2.group()
                    kind = "INT"
                    m = m2
            tokens.append(Token(kind, piece, line, col))
        nl = piece.count("\n")
        if nl:
            line += nl
            col = len(piece) - piece.rfind("\n")
        else:
            col += len(piece)
        pos += len(piece)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.var_scope: dict[str, Var] = {}
        self.next_var_id = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if not self.at(kind, text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.take()

    def fail(self, message: str):
        t = self.peek()
        raise ParseError(message, t.line, t.col)

    # -- terms --------------------------------------------------------------

    def fresh_var(self, name: str) -> Var:
        v = Var(self.next_var_id, name)
        self.next_var_id += 1
        return v

    def variable(self, name: str) -> Var:
        if name == "_":
            return self.fresh_var("_")
        v = self.var_scope.get(name)
        if v is None:
            v = self.var_scope[name] = self.fresh_var(name)
        return v

    def term(self) -> Term:
        return self.comparison()

    def comparison(self) -> Term:
        left = self.additive()
        t = self.peek()
        if (t.kind == "OP" and t.text in COMPARISONS) or (t.kind == "NAME" and t.text == "is"):
            op = self.take().text
            right = self.additive()
            return Struct(op, (left, right))
        return left

    def additive(self) -> Term:
        left = self.multiplicative()
        while self.at("OP", "+") or self.at("OP", "-"):
            op = self.take().text
            left = Struct(op, (left, self.multiplicative()))
        return left

    def multiplicative(self) -> Term:
        left = self.primary()
        while self.at("OP", "*") or self.at("OP", "//") or self.at("NAME", "mod"):
            op = self.take().text
            left = Struct(op, (left, self.primary()))
        return left

    def primary(self) -> Term:
        t = self.peek()
        if t.kind == "INT":
            self.take()
            return intc(int(t.text))
        if t.kind == "VAR":
            self.take()
            return self.variable(t.text)
        if t.kind == "NAME":
            self.take()
            if self.at("PUNCT", "("):
                self.take()
                args = [self.term()]
                while self.at("PUNCT", ","):
                    self.take()
                    args.append(self.term())
                self.expect("PUNCT", ")")
                return Struct(t.text, tuple(args))
            return Struct(t.text)
        if t.kind == "PUNCT" and t.text == "[":
            return self.list_term()
        if t.kind == "PUNCT" and t.text == "(":
            self.take()
            inner = self.term()
            self.expect("PUNCT", ")")
            return inner
        self.fail(f"expected a term, found {t.text or 'end of input'!r}")

    def list_term(self) -> Term:
        self.expect("PUNCT", "[")
        if self.at("PUNCT", "]"):
            self.take()
            return NIL
        items = [self.term()]
        while self.at("PUNCT", ","):
            self.take()
            items.append(self.term())
        tail: Term = NIL
        if self.at("PUNCT", "|"):
            self.take()
            tail = self.term()
        self.expect("PUNCT", "]")
        out = tail
        for item in reversed(items):
            out = Struct(".", (item, out))
        return out

    def callable_atom(self) -> Atom:
        t = self.peek()
        a = self.term()
        if not isinstance(a, Struct) or isinstance(a.functor, int):
            raise ParseError("expected a callable atom", t.line, t.col)
        return a

    # -- conditions ---------------------------------------------------------

    def sc(self) -> SCExpr:
        left = self.sc_conj()
        while self.at("PUNCT", ";"):
            self.take()
            left = SCOr(left, self.sc_conj())
        return left

    def sc_conj(self) -> SCExpr:
        left = self.sc_primary()
        while self.at("PUNCT", ","):
            self.take()
            left = SCAnd(left, self.sc_primary())
        return left

    def sc_primary(self) -> SCExpr:
        if self.at("PUNCT", "("):
            self.take()
            inner = self.sc()
            self.expect("PUNCT", ")")
            return inner
        if self.at("NAME", "true"):
            self.take()
            return SCTrue()
        return SCCheck(self.callable_atom())

    # -- clauses and directives ----------------------------------------------

    def clause_end(self):
        self.expect("PUNCT", ".")

    def body(self) -> tuple[Atom, ...]:
        atoms = [self.callable_atom()]
        while self.at("PUNCT", ","):
            self.take()
            atoms.append(self.callable_atom())
        return tuple(atoms)

    def item(self):
        """One clause or directive; returns ('clause', c) / ('entry', a) / ('eval', ...)."""
        self.var_scope = {}
        start = self.peek()
        if self.at("ARROW"):
            self.take()
            kw = self.expect("NAME")
            if kw.text == "entry":
                a = self.callable_atom()
                self.clause_end()
                return ("entry", a, start)
            if kw.text == "eval":
                head = self.callable_atom()
                self.expect("EVALSEP")
                cond = self.sc()
                self.clause_end()
                return ("eval", (head, cond), start)
            raise ParseError(f"unknown directive {kw.text!r}", kw.line, kw.col)
        head = self.callable_atom()
        body: tuple[Atom, ...] = ()
        if self.at("ARROW"):
            self.take()
            body = self.body()
        self.clause_end()
        return ("clause", Clause(head, body, start.line), start)


def parse_program(text: str, source: str | None = None) -> Program:
    """Parse program text; raises ParseError with line/column on bad input."""
    p = _Parser(tokenize(text))
    clauses: list[Clause] = []
    entries: list[Atom] = []
    evals: dict[tuple, tuple[Atom, SCExpr]] = {}
    entry_tokens: list[Token] = []
    while not p.at("EOF"):
        kind, payload, start = p.item()
        if kind == "clause":
            if indicator(payload.head) in BUILTIN_INDICATORS:
                raise ParseError(
                    f"cannot redefine builtin {payload.head.functor}/{len(payload.head.args)}",
                    start.line,
                    start.col,
                )
            clauses.append(payload)
        elif kind == "entry":
            entries.append(payload)
            entry_tokens.append(start)
        else:
            head, cond = payload
            key = indicator(head)
            if key not in BUILTIN_INDICATORS:
                raise ParseError(
                    f"eval assertion for unknown builtin {key[0]}/{key[1]}", start.line, start.col
                )
            if key in evals:
                raise ParseError(
                    f"duplicate eval assertion for {key[0]}/{key[1]}", start.line, start.col
                )
            if not sc_vars(cond) <= term_vars(head):
                raise ParseError(
                    "eval condition uses variables not in the assertion head",
                    start.line,
                    start.col,
                )
            evals[key] = (head, cond)
    defined = {indicator(c.head) for c in clauses}
    for a, tok in zip(entries, entry_tokens):
        key = indicator(a)
        if key not in defined and key not in BUILTIN_INDICATORS:
            raise ParseError(f"entry for unknown predicate {key[0]}/{key[1]}", tok.line, tok.col)
    return Program(tuple(clauses), tuple(entries), evals, source)


def parse_query(text: str) -> tuple[Atom, ...]:
    """Parse a goal: comma-separated atoms, optional final period."""
    p = _Parser(tokenize(text))
    goal = p.body()
    if p.at("PUNCT", "."):
        p.take()
    p.expect("EOF")
    return goal


def parse_term(text: str) -> Term:
    p = _Parser(tokenize(text))
    t = p.term()
    p.expect("EOF")
    return t


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

# precedence, higher binds looser; (prec, left-max, right-max)
_INFIX = {}
for _op in COMPARISONS:
    _INFIX[_op] = (700, 699, 699)
for _op in ("+", "-"):
    _INFIX[_op] = (500, 500, 499)
for _op in ("*", "//", "mod"):
    _INFIX[_op] = (400, 400, 399)


def _canonical_names(vids: list[int]) -> dict[int, str]:
    names = {}
    for i, vid in enumerate(vids):
        letter = chr(ord("A") + i % 26)
        suffix = "" if i < 26 else str(i // 26)
        names[vid] = letter + suffix
    return names


def _collect_vids(t: Term, seen: list[int]):
    if isinstance(t, Var):
        if t.id not in seen:
            seen.append(t.id)
    else:
        for a in t.args:
            _collect_vids(a, seen)


def render_term(t: Term, names: dict[int, str] | None = None, max_prec: int = 1200) -> str:
    if names is None:
        seen: list[int] = []
        _collect_vids(t, seen)
        names = _canonical_names(seen)
    return _render(t, names, max_prec)


def _render(t: Term, names: dict[int, str], max_prec: int) -> str:
    if isinstance(t, Var):
        return names.get(t.id, f"_G{t.id}")
    if is_int(t):
        return str(t.functor)
    if t.functor == "[]" and not t.args:
        return "[]"
    if t.functor == "." and len(t.args) == 2:
        return _render_list(t, names)
    if len(t.args) == 2 and t.functor in _INFIX:
        prec, lmax, rmax = _INFIX[t.functor]
        s = f"{_render(t.args[0], names, lmax)} {t.functor} {_render(t.args[1], names, rmax)}"
        return f"({s})" if prec > max_prec else s
    if not t.args:
        return str(t.functor)
    inner = ",".join(_render(a, names, 999) for a in t.args)
    return f"{t.functor}({inner})"


def _render_list(t: Term, names: dict[int, str]) -> str:
    items = []
    while isinstance(t, Struct) and t.functor == "." and len(t.args) == 2:
        items.append(_render(t.args[0], names, 999))
        t = t.args[1]
    if isinstance(t, Struct) and t.functor == "[]" and not t.args:
        return "[" + ",".join(items) + "]"
    return "[" + ",".join(items) + "|" + _render(t, names, 999) + "]"


def render_clause(c: Clause) -> str:
    seen: list[int] = []
    _collect_vids(c.head, seen)
    for a in c.body:
        _collect_vids(a, seen)
    names = _canonical_names(seen)
    head = _render(c.head, names, 999)
    if not c.body:
        return head + "."
    body = ", ".join(_render(a, names, 999) for a in c.body)
    return f"{head} :- {body}."


def _render_sc(sc: SCExpr, names: dict[int, str]) -> str:
    if isinstance(sc, SCTrue):
        return "true"
    if isinstance(sc, SCCheck):
        return _render(sc.atom, names, 999)
    if isinstance(sc, SCAnd):
        return f"({_render_sc(sc.left, names)}, {_render_sc(sc.right, names)})"
    return f"({_render_sc(sc.left, names)}; {_render_sc(sc.right, names)})"


def render_program(p: Program) -> str:
    """Deterministic text for a program; parses back to an equal program
    up to variable display names."""
    lines = []
    for e in p.entries:
        seen: list[int] = []
        _collect_vids(e, seen)
        lines.append(f":- entry {_render(e, _canonical_names(seen), 999)}.")
    for _key, (head, cond) in sorted(p.evals.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        seen = []
        _collect_vids(head, seen)
        names = _canonical_names(seen)
        lines.append(f":- eval {_render(head, names, 999)} : {_render_sc(cond, names)}.")
    for c in p.clauses:
        lines.append(render_clause(c))
    return "\n".join(lines) + ("\n" if lines else "")
