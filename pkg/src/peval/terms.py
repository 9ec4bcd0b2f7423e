"""First-order terms, substitutions, unification and generalization.

Terms are immutable and shared freely.  A constant is a ``Struct`` with no
arguments; integers are constants whose functor is the Python int itself.
Lists are ordinary structures built from ``'.'/2`` and ``'[]'/0`` (the
parser provides the bracket sugar).  An atom (a callable goal) is just a
``Struct`` whose functor is the predicate name; ``Atom`` is an alias kept
for signatures that deal in goals rather than argument terms.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Union


class Var:
    """A logical variable, identified by a numeric id.

    The display name is cosmetic only: two Vars with the same id are the
    same variable regardless of name.
    """

    __slots__ = ("id", "name")

    def __init__(self, id: int, name: str = "_"):
        self.id = id
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Var) and other.id == self.id

    def __hash__(self):
        return hash(("var", self.id))

    def __repr__(self):
        return f"Var({self.id}, {self.name!r})"


class Struct:
    """A compound term ``f(t1, ..., tn)``; arity 0 means a constant."""

    __slots__ = ("functor", "args", "_hash", "_size", "_vars")

    def __init__(self, functor: Union[str, int], args: tuple = ()):
        self.functor = functor
        self.args = args
        self._hash = None
        self._size = None
        self._vars = None

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Struct)
            and other.functor == self.functor
            and other.args == self.args
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.functor, self.args))
        return h

    def __repr__(self):
        if not self.args:
            return f"Struct({self.functor!r})"
        return f"Struct({self.functor!r}, {self.args!r})"


Term = Union[Var, Struct]
Atom = Struct

NIL = Struct("[]")


def struct(functor: Union[str, int], *args: Term) -> Struct:
    return Struct(functor, args)


def intc(value: int) -> Struct:
    """Integer constant."""
    return Struct(value)


def is_int(t: Term) -> bool:
    return isinstance(t, Struct) and isinstance(t.functor, int)


def mklist(items: Iterable[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = Struct(".", (item, out))
    return out


def indicator(atom: Atom) -> tuple[Union[str, int], int]:
    """Predicate name/arity pair of an atom."""
    return (atom.functor, len(atom.args))


def term_size(t: Term) -> int:
    """Number of term nodes (the cell-count used by the memory proxy)."""
    if isinstance(t, Var):
        return 1
    n = t._size
    if n is None:
        n = 1
        for a in t.args:
            n += term_size(a)
        t._size = n
    return n


def term_vars(t: Term) -> frozenset[int]:
    """Set of variable ids occurring in ``t``."""
    if isinstance(t, Var):
        return frozenset((t.id,))
    vs = t._vars
    if vs is None:
        if not t.args:
            vs = frozenset()
        else:
            vs = frozenset().union(*(term_vars(a) for a in t.args))
        t._vars = vs
    return vs


class VarPool:
    """Monotone fresh-variable source; one per engine run."""

    __slots__ = ("next_id",)

    def __init__(self, start: int = 0):
        self.next_id = start

    def new(self, name: str = "_") -> Var:
        v = Var(self.next_id, name)
        self.next_id += 1
        return v


class Subst:
    """An idempotent substitution: a finite map from variable id to term."""

    __slots__ = ("_map", "_dom")

    def __init__(self, mapping: dict[int, Term] | None = None):
        m = {}
        if mapping:
            for vid, t in mapping.items():
                if isinstance(t, Var) and t.id == vid:
                    continue
                m[vid] = t
        self._map = m
        self._dom = frozenset(m)

    @classmethod
    def identity(cls) -> Subst:
        return _ID

    def __bool__(self):
        return bool(self._map)

    def __len__(self):
        return len(self._map)

    def __contains__(self, vid: int):
        return vid in self._map

    def __eq__(self, other):
        return isinstance(other, Subst) and other._map == self._map

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __repr__(self):
        inner = ", ".join(f"{v}->{t!r}" for v, t in sorted(self._map.items()))
        return f"Subst({{{inner}}})"

    def get(self, vid: int) -> Term | None:
        return self._map.get(vid)

    def items(self):
        return self._map.items()

    @property
    def domain(self) -> frozenset[int]:
        return self._dom

    def apply(self, t: Term) -> Term:
        """Replace every bound variable in ``t`` simultaneously."""
        if not self._map:
            return t
        if isinstance(t, Var):
            return self._map.get(t.id, t)
        if not self._dom & term_vars(t):
            return t
        new_args = tuple(self.apply(a) for a in t.args)
        return Struct(t.functor, new_args)

    def apply_all(self, terms: Iterable[Term]) -> tuple[Term, ...]:
        return tuple(self.apply(t) for t in terms)

    def compose(self, other: Subst) -> Subst:
        """Substitution equal to applying ``self`` first, then ``other``.

        The ranges of ``self`` are rewritten by ``other``, which is all the
        normalization composition needs: for step substitutions produced by
        ``mgu`` the result stays idempotent.
        """
        if not self._map:
            return other
        if not other._map:
            return self
        m = {vid: other.apply(t) for vid, t in self._map.items()}
        for vid, t in other._map.items():
            if vid not in m:
                m[vid] = t
        return Subst(m)

    def restrict(self, keep: frozenset[int]) -> Subst:
        return Subst({v: t for v, t in self._map.items() if v in keep})

    def compose_restrict(self, theta: Subst, keep: frozenset[int]) -> Subst:
        """``restrict(compose(self, theta), keep)`` for chains of mgus.

        Assumes ``self`` is already restricted to ``keep`` and that ``theta``
        is an idempotent step mgu, which is how answers accumulate during
        resolution; avoids building the full composition.
        """
        m = {vid: theta.apply(t) for vid, t in self._map.items()}
        for vid, t in theta._map.items():
            if vid in keep and vid not in m:
                m[vid] = t
        return Subst(m)


_ID = Subst()


def _walk(t: Term, bindings: dict[int, Term]) -> Term:
    while isinstance(t, Var):
        b = bindings.get(t.id)
        if b is None:
            return t
        t = b
    return t


def _occurs(vid: int, t: Term, bindings: dict[int, Term]) -> bool:
    stack = [t]
    while stack:
        s = _walk(stack.pop(), bindings)
        if isinstance(s, Var):
            if s.id == vid:
                return True
        else:
            stack.extend(s.args)
    return False


def mgu(a: Term, b: Term) -> Subst | None:
    """Most general unifier of ``a`` and ``b`` (occurs-check on), or None."""
    bindings: dict[int, Term] = {}
    stack = [(a, b)]
    while stack:
        s, t = stack.pop()
        s = _walk(s, bindings)
        t = _walk(t, bindings)
        if s is t:
            continue
        if isinstance(s, Var):
            if isinstance(t, Var) and t.id == s.id:
                continue
            if _occurs(s.id, t, bindings):
                return None
            bindings[s.id] = t
        elif isinstance(t, Var):
            if _occurs(t.id, s, bindings):
                return None
            bindings[t.id] = s
        else:
            if s.functor != t.functor or len(s.args) != len(t.args):
                return None
            stack.extend(zip(s.args, t.args))
    return Subst({vid: _resolve(t, bindings) for vid, t in bindings.items()})


def _resolve(t: Term, bindings: dict[int, Term]) -> Term:
    t = _walk(t, bindings)
    if isinstance(t, Var):
        return t
    if not t.args:
        return t
    return Struct(t.functor, tuple(_resolve(a, bindings) for a in t.args))


def variant(a: Term, b: Term) -> bool:
    """True iff the terms are equal up to a variable bijection."""
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    stack = [(a, b)]
    while stack:
        s, t = stack.pop()
        if isinstance(s, Var):
            if not isinstance(t, Var):
                return False
            if fwd.setdefault(s.id, t.id) != t.id:
                return False
            if bwd.setdefault(t.id, s.id) != s.id:
                return False
        else:
            if isinstance(t, Var):
                return False
            if s.functor != t.functor or len(s.args) != len(t.args):
                return False
            stack.extend(zip(s.args, t.args))
    return True


def subsumes(general: Term, specific: Term) -> bool:
    """True iff ``specific`` is an instance of ``general``."""
    binding: dict[int, Term] = {}
    stack = [(general, specific)]
    while stack:
        g, s = stack.pop()
        if isinstance(g, Var):
            seen = binding.get(g.id)
            if seen is None:
                binding[g.id] = s
            elif seen != s:
                return False
        else:
            if isinstance(s, Var) or g.functor != s.functor or len(g.args) != len(s.args):
                return False
            stack.extend(zip(g.args, s.args))
    return True


def msg(a: Atom, b: Atom, pool: VarPool) -> tuple[Atom, Subst, Subst]:
    """Most specific generalization (anti-unification) of two atoms.

    Returns ``(g, theta_a, theta_b)`` with ``theta_a(g) == a`` and
    ``theta_b(g) == b``.  Deterministic for a given pool state: disagreeing
    subterm pairs map to fresh variables, the same pair always to the same
    one.  Raises ValueError when the predicates differ.
    """
    if indicator(a) != indicator(b):
        raise ValueError(f"msg: predicate mismatch {indicator(a)} vs {indicator(b)}")
    table: dict[tuple[Term, Term], Var] = {}

    def gen(s: Term, t: Term) -> Term:
        if isinstance(s, Struct) and isinstance(t, Struct):
            if s.functor == t.functor and len(s.args) == len(t.args):
                return Struct(s.functor, tuple(gen(x, y) for x, y in zip(s.args, t.args)))
        elif isinstance(s, Var) and isinstance(t, Var) and s.id == t.id:
            return s
        key = (s, t)
        v = table.get(key)
        if v is None:
            v = table[key] = pool.new()
        return v

    g = Struct(a.functor, tuple(gen(x, y) for x, y in zip(a.args, b.args)))
    theta_a = Subst({v.id: s for (s, _t), v in table.items()})
    theta_b = Subst({v.id: t for (_s, t), v in table.items()})
    return g, theta_a, theta_b


class Clause:
    """``head :- body`` with an optional source line for error reporting."""

    __slots__ = ("head", "body", "line")

    def __init__(self, head: Atom, body: tuple[Atom, ...] = (), line: int | None = None):
        self.head = head
        self.body = body
        self.line = line

    @property
    def is_fact(self) -> bool:
        return not self.body

    def __eq__(self, other):
        return (
            isinstance(other, Clause)
            and other.head == self.head
            and other.body == self.body
        )

    def __hash__(self):
        return hash((self.head, self.body))

    def __repr__(self):
        return f"Clause({self.head!r}, {self.body!r})"


def clause_vars(c: Clause) -> frozenset[int]:
    vs = term_vars(c.head)
    for a in c.body:
        vs |= term_vars(a)
    return vs


def rename_apart(c: Clause, pool: VarPool) -> Clause:
    """Variant of ``c`` whose variable ids are fresh from ``pool``."""
    mapping: dict[int, Var] = {}

    def ren(t: Term) -> Term:
        if isinstance(t, Var):
            v = mapping.get(t.id)
            if v is None:
                v = mapping[t.id] = pool.new(t.name)
            return v
        if not term_vars(t):
            return t
        return Struct(t.functor, tuple(ren(a) for a in t.args))

    return Clause(ren(c.head), tuple(ren(b) for b in c.body), c.line)


def rename_term(t: Term, pool: VarPool) -> Term:
    c = rename_apart(Clause(Struct("$t", (t,))), pool)
    return c.head.args[0]


class Program:
    """An ordered clause list plus directives and a predicate index."""

    __slots__ = ("clauses", "entries", "evals", "source", "_index", "max_var_id")

    def __init__(
        self,
        clauses: tuple[Clause, ...],
        entries: tuple[Atom, ...] = (),
        evals: dict | None = None,
        source: str | None = None,
    ):
        self.clauses = tuple(clauses)
        self.entries = tuple(entries)
        self.evals = dict(evals or {})
        self.source = source
        index: dict[tuple, list[Clause]] = {}
        hi = -1
        for c in self.clauses:
            index.setdefault(indicator(c.head), []).append(c)
            for vid in clause_vars(c):
                hi = max(hi, vid)
        for e in self.entries:
            for vid in term_vars(e):
                hi = max(hi, vid)
        self._index = {k: tuple(v) for k, v in index.items()}
        self.max_var_id = hi

    def clauses_for(self, pred: tuple) -> tuple[Clause, ...]:
        return self._index.get(pred, ())

    @property
    def predicates(self) -> frozenset[tuple]:
        return frozenset(self._index)

    def __eq__(self, other):
        return (
            isinstance(other, Program)
            and other.clauses == self.clauses
            and other.entries == self.entries
            and other.evals == self.evals
        )

    def __repr__(self):
        return f"Program({len(self.clauses)} clauses, {len(self.entries)} entries)"
