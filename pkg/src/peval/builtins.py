"""External predicates: evaluability conditions and executors.

A builtin may only run at specialization time when a declared sufficient
condition holds for the call; the condition guarantees the call terminates
with no side effects, errors or exceptions.  Calls whose condition fails
are left residual.  Programs can override a builtin's condition with a
``:- eval Head : SC.`` directive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .terms import (
    Atom,
    Struct,
    Subst,
    Term,
    Var,
    indicator,
    intc,
    is_int,
    mgu,
    term_vars,
)


# ---------------------------------------------------------------------------
# Sufficient-condition expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SCTrue:
    pass


@dataclass(frozen=True)
class SCCheck:
    atom: Atom


@dataclass(frozen=True)
class SCAnd:
    left: "SCExpr"
    right: "SCExpr"


@dataclass(frozen=True)
class SCOr:
    left: "SCExpr"
    right: "SCExpr"


SCExpr = Union[SCTrue, SCCheck, SCAnd, SCOr]


def sc_vars(sc: SCExpr) -> frozenset[int]:
    if isinstance(sc, SCTrue):
        return frozenset()
    if isinstance(sc, SCCheck):
        return term_vars(sc.atom)
    return sc_vars(sc.left) | sc_vars(sc.right)


ARITH_OPS = {("+", 2), ("-", 2), ("*", 2), ("//", 2), ("mod", 2), ("-", 1)}


def is_arith_expr(t: Term) -> bool:
    """Closed integer arithmetic the evaluator cannot fail on.

    Built from integer constants and +, -, *, // and mod (plus prefix -);
    the right operand of // and mod must be a nonzero integer literal so
    division errors are ruled out before execution.
    """
    if isinstance(t, Var):
        return False
    if is_int(t):
        return True
    key = (t.functor, len(t.args))
    if key not in ARITH_OPS:
        return False
    if t.functor in ("//", "mod"):
        den = t.args[1]
        if not (is_int(den) and den.functor != 0):
            return False
        return is_arith_expr(t.args[0])
    return all(is_arith_expr(a) for a in t.args)


def eval_arith(t: Term) -> int:
    """Evaluate a term accepted by ``is_arith_expr``."""
    if is_int(t):
        return t.functor
    op = t.functor
    if op == "-" and len(t.args) == 1:
        return -eval_arith(t.args[0])
    x, y = eval_arith(t.args[0]), eval_arith(t.args[1])
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if op == "//":
        return x // y
    if op == "mod":
        return x % y
    raise AssertionError(f"not an arithmetic operator: {op}")


def is_ground(t: Term) -> bool:
    return not term_vars(t)


def eval_check(atom: Atom) -> bool:
    """Evaluate one condition atom; unknown checks are false."""
    key = indicator(atom)
    if key == ("arithexpr", 1):
        return is_arith_expr(atom.args[0])
    if key == ("ground", 1):
        return is_ground(atom.args[0])
    if key == ("var", 1):
        return isinstance(atom.args[0], Var)
    if key == ("nonvar", 1):
        return not isinstance(atom.args[0], Var)
    return False


def eval_sc(sc: SCExpr) -> bool:
    if isinstance(sc, SCTrue):
        return True
    if isinstance(sc, SCCheck):
        return eval_check(sc.atom)
    if isinstance(sc, SCAnd):
        return eval_sc(sc.left) and eval_sc(sc.right)
    return eval_sc(sc.left) or eval_sc(sc.right)


# ---------------------------------------------------------------------------
# Answer sequences and builtin definitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubstSeq:
    """Outcome of executing an external call.

    Bundled builtins always produce ``finite`` sequences; the other
    status markers exist for executors that cannot promise termination.
    """

    answers: tuple[Subst, ...]
    status: str = "finite"  # finite | incomplete | infinite


@dataclass(frozen=True)
class BuiltinDef:
    name: str
    arity: int
    pattern: Atom
    sc: SCExpr | None  # None: never evaluable, always residualized
    run: Callable[[Atom], SubstSeq]

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, self.arity)


def check_sc(b: BuiltinDef, call: Atom) -> bool:
    """True iff the call is known evaluable under b's declared condition."""
    if b.sc is None:
        return False
    sigma = mgu(call, b.pattern)
    if sigma is None:
        return False
    return eval_sc(_apply_sc(sigma, b.sc))


def _apply_sc(s: Subst, sc: SCExpr) -> SCExpr:
    if isinstance(sc, SCTrue):
        return sc
    if isinstance(sc, SCCheck):
        return SCCheck(s.apply(sc.atom))
    if isinstance(sc, SCAnd):
        return SCAnd(_apply_sc(s, sc.left), _apply_sc(s, sc.right))
    return SCOr(_apply_sc(s, sc.left), _apply_sc(s, sc.right))


def exec_builtin(b: BuiltinDef, call: Atom) -> SubstSeq:
    """Run an evaluable call; only legal after ``check_sc`` succeeded."""
    assert check_sc(b, call), f"exec of non-evaluable call {call!r}"
    seq = b.run(call)
    assert seq.status == "finite"
    return seq


# ---------------------------------------------------------------------------
# The bundled registry
# ---------------------------------------------------------------------------

def _pv(n: int) -> Var:
    # negative ids keep builtin patterns disjoint from every program variable
    return Var(-n, f"B{n}")


_CMP = {
    "=<": lambda x, y: x <= y,
    "<": lambda x, y: x < y,
    ">": lambda x, y: x > y,
    ">=": lambda x, y: x >= y,
    "=:=": lambda x, y: x == y,
    "=\\=": lambda x, y: x != y,
}


def _run_cmp(op: str) -> Callable[[Atom], SubstSeq]:
    rel = _CMP[op]

    def run(call: Atom) -> SubstSeq:
        if rel(eval_arith(call.args[0]), eval_arith(call.args[1])):
            return SubstSeq((Subst.identity(),))
        return SubstSeq(())

    return run


def _run_is(call: Atom) -> SubstSeq:
    value = intc(eval_arith(call.args[1]))
    s = mgu(call.args[0], value)
    if s is None:
        return SubstSeq(())
    return SubstSeq((s.restrict(term_vars(call)),))


def _run_unify(call: Atom) -> SubstSeq:
    s = mgu(call.args[0], call.args[1])
    if s is None:
        return SubstSeq(())
    return SubstSeq((s.restrict(term_vars(call)),))


def _run_ground(call: Atom) -> SubstSeq:
    return SubstSeq((Subst.identity(),))


def _run_never(call: Atom) -> SubstSeq:
    raise AssertionError("never-evaluable builtin was executed")


def _arith2(name: str) -> BuiltinDef:
    a, b = _pv(1), _pv(2)
    sc = SCAnd(SCCheck(Struct("arithexpr", (a,))), SCCheck(Struct("arithexpr", (b,))))
    return BuiltinDef(name, 2, Struct(name, (a, b)), sc, _run_cmp(name))


def default_registry() -> dict[tuple[str, int], BuiltinDef]:
    a, b = _pv(1), _pv(2)
    defs = [_arith2(op) for op in _CMP]
    defs.append(
        BuiltinDef("is", 2, Struct("is", (a, b)), SCCheck(Struct("arithexpr", (b,))), _run_is)
    )
    defs.append(BuiltinDef("=", 2, Struct("=", (a, b)), SCTrue(), _run_unify))
    defs.append(
        BuiltinDef("ground", 1, Struct("ground", (a,)), SCCheck(Struct("ground", (a,))), _run_ground)
    )
    # side-effecting predicates stay in the registry but never evaluate
    defs.append(BuiltinDef("write", 1, Struct("write", (a,)), None, _run_never))
    defs.append(BuiltinDef("nl", 0, Struct("nl", ()), None, _run_never))
    return {d.key: d for d in defs}


DEFAULT_REGISTRY = default_registry()
BUILTIN_INDICATORS = frozenset(DEFAULT_REGISTRY)


def registry_for(program) -> dict[tuple[str, int], BuiltinDef]:
    """Default registry with the program's eval directives overlaid."""
    reg = dict(DEFAULT_REGISTRY)
    for key, (pattern, sc) in program.evals.items():
        base = reg[key]
        reg[key] = BuiltinDef(base.name, base.arity, pattern, sc, base.run)
    return reg
