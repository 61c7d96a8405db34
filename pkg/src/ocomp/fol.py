"""Two-sorted first-order formulas over the program signature and its
extensions by order predicates and level functions, plus a bounded
finite-domain evaluator, a pretty-printer in the .spec surface syntax, and
the .spec parser.

The general sort ranges over precomputed terms and has the integers as a
sub-sort.  Quantifiers are evaluated over a finite general domain and an
inclusive integer interval; the evaluator reports when the truth value was
decided at an interval endpoint so callers can widen and re-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Union

from . import ground as _ground
from .ground import Domain, GroundAtom, Interpretation
from .syntax import (
    AbsoluteValue,
    BinaryOp,
    Infimum,
    Numeral,
    ParseError,
    PrecomputedTerm,
    Program,
    SymbolicConstant,
    Supremum,
    TokenStream,
    precomputed_sort_key,
    relation_holds,
    tokenize,
)


class Sort(Enum):
    GENERAL = "general"
    INTEGER = "integer"


class UnboundIntRangeError(RuntimeError):
    """An integer quantifier was evaluated without an integer interval."""


class ExtensionError(ValueError):
    """Extension components do not match the requested signature."""


# --------------------------------------------------------------------------
# Terms
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    sort: Sort = Sort.GENERAL


@dataclass(frozen=True, slots=True)
class Const:
    value: PrecomputedTerm


@dataclass(frozen=True, slots=True)
class AbsT:
    arg: "FoTerm"


@dataclass(frozen=True, slots=True)
class Arith:
    op: str  # one of + - *
    left: "FoTerm"
    right: "FoTerm"


@dataclass(frozen=True, slots=True)
class LvlApp:
    """Application of the derivation-level function of a predicate."""

    predicate: str
    args: tuple["FoTerm", ...]


FoTerm = Union[Var, Const, AbsT, Arith, LvlApp]


def term_sort(term: FoTerm) -> Sort:
    if isinstance(term, Var):
        return term.sort
    if isinstance(term, Const):
        return Sort.INTEGER if isinstance(term.value, Numeral) else Sort.GENERAL
    return Sort.INTEGER  # AbsT, Arith, LvlApp


# --------------------------------------------------------------------------
# Formulas
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PredApp:
    name: str
    args: tuple[FoTerm, ...] = ()


@dataclass(frozen=True, slots=True)
class Cmp:
    rel: str
    left: FoTerm
    right: FoTerm


@dataclass(frozen=True, slots=True)
class Top:
    pass


@dataclass(frozen=True, slots=True)
class Bottom:
    pass


@dataclass(frozen=True, slots=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Forall:
    var: Var
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Exists:
    var: Var
    body: "Formula"


Formula = Union[PredApp, Cmp, Top, Bottom, And, Or, Implies, Forall, Exists]

TRUE = Top()
FALSE = Bottom()


def Not(f: Formula) -> Formula:
    return Implies(f, FALSE)


def is_negation(f: Formula) -> bool:
    return isinstance(f, Implies) and isinstance(f.right, Bottom)


def make_and(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def make_or(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def forall(variables: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(tuple(variables)):
        body = Forall(v, body)
    return body


def exists(variables: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(tuple(variables)):
        body = Exists(v, body)
    return body


# --------------------------------------------------------------------------
# Structural helpers
# --------------------------------------------------------------------------


def term_vars(term: FoTerm) -> Iterator[Var]:
    if isinstance(term, Var):
        yield term
    elif isinstance(term, AbsT):
        yield from term_vars(term.arg)
    elif isinstance(term, Arith):
        yield from term_vars(term.left)
        yield from term_vars(term.right)
    elif isinstance(term, LvlApp):
        for a in term.args:
            yield from term_vars(a)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (And, Or)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, Implies):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from subformulas(f.body)


def free_vars(f: Formula) -> frozenset[Var]:
    if isinstance(f, PredApp):
        return frozenset(v for a in f.args for v in term_vars(a))
    if isinstance(f, Cmp):
        return frozenset(itertools.chain(term_vars(f.left), term_vars(f.right)))
    if isinstance(f, (Top, Bottom)):
        return frozenset()
    if isinstance(f, (And, Or)):
        out: frozenset[Var] = frozenset()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, Implies):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def count_nodes(f: Formula) -> int:
    def term_nodes(t: FoTerm) -> int:
        if isinstance(t, Var) or isinstance(t, Const):
            return 1
        if isinstance(t, AbsT):
            return 1 + term_nodes(t.arg)
        if isinstance(t, Arith):
            return 1 + term_nodes(t.left) + term_nodes(t.right)
        if isinstance(t, LvlApp):
            return 1 + sum(term_nodes(a) for a in t.args)
        raise TypeError(f"not a term: {t!r}")

    if isinstance(f, PredApp):
        return 1 + sum(term_nodes(a) for a in f.args)
    if isinstance(f, Cmp):
        return 1 + term_nodes(f.left) + term_nodes(f.right)
    if isinstance(f, (Top, Bottom)):
        return 1
    if isinstance(f, (And, Or)):
        return 1 + sum(count_nodes(p) for p in f.parts)
    if isinstance(f, Implies):
        return 1 + count_nodes(f.left) + count_nodes(f.right)
    if isinstance(f, (Forall, Exists)):
        return 1 + count_nodes(f.body)
    raise TypeError(f"not a formula: {f!r}")


def substitute_in_term(term: FoTerm, mapping: dict[Var, FoTerm]) -> FoTerm:
    if isinstance(term, Var):
        return mapping.get(term, term)
    if isinstance(term, AbsT):
        return AbsT(substitute_in_term(term.arg, mapping))
    if isinstance(term, Arith):
        return Arith(term.op, substitute_in_term(term.left, mapping), substitute_in_term(term.right, mapping))
    if isinstance(term, LvlApp):
        return LvlApp(term.predicate, tuple(substitute_in_term(a, mapping) for a in term.args))
    return term


def substitute(f: Formula, mapping: dict[Var, FoTerm]) -> Formula:
    """Capture-checked substitution of free variables by terms."""
    if not mapping:
        return f
    if isinstance(f, PredApp):
        return PredApp(f.name, tuple(substitute_in_term(a, mapping) for a in f.args))
    if isinstance(f, Cmp):
        return Cmp(f.rel, substitute_in_term(f.left, mapping), substitute_in_term(f.right, mapping))
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, And):
        return And(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, (Forall, Exists)):
        inner = {v: t for v, t in mapping.items() if v != f.var}
        for t in inner.values():
            if any(v == f.var for v in term_vars(t)):
                raise ValueError(f"substitution would capture {f.var!r}")
        body = substitute(f.body, inner)
        return Forall(f.var, body) if isinstance(f, Forall) else Exists(f.var, body)
    raise TypeError(f"not a formula: {f!r}")


def rename_bound(f: Formula, prefix: str = "B") -> Formula:
    """Rename every bound variable to a canonical name in traversal order.

    Names already free in the formula are skipped so that no free
    occurrence is shadowed.
    """
    counter = itertools.count(1)
    used = {v.name for v in free_vars(f)}

    def fresh(sort: Sort) -> Var:
        while True:
            name = f"{prefix}{next(counter)}"
            if name not in used:
                return Var(name, sort)

    def walk(g: Formula, env: dict[Var, Var]) -> Formula:
        if isinstance(g, PredApp):
            return PredApp(g.name, tuple(substitute_in_term(a, env) for a in g.args))
        if isinstance(g, Cmp):
            return Cmp(g.rel, substitute_in_term(g.left, env), substitute_in_term(g.right, env))
        if isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, And):
            return And(tuple(walk(p, env) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p, env) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left, env), walk(g.right, env))
        if isinstance(g, (Forall, Exists)):
            replacement = fresh(g.var.sort)
            env2 = dict(env)
            env2[g.var] = replacement
            body = walk(g.body, env2)
            return Forall(replacement, body) if isinstance(g, Forall) else Exists(replacement, body)
        raise TypeError(f"not a formula: {g!r}")

    return walk(f, {})


def alpha_equal(f: Formula, g: Formula) -> bool:
    return rename_bound(f) == rename_bound(g)


# --------------------------------------------------------------------------
# Signature extensions and finite standard interpretations
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Sigma0:
    pass


@dataclass(frozen=True, slots=True)
class SigmaOrder:
    order_preds: frozenset[tuple[str, str]]


@dataclass(frozen=True, slots=True)
class SigmaLevel:
    level_preds: frozenset[str]


SignatureExt = Union[Sigma0, SigmaOrder, SigmaLevel]

SIGMA0 = Sigma0()


@dataclass(frozen=True)
class FiniteStdInterp:
    """A standard interpretation restricted to finite quantifier ranges.

    `base` fixes the program predicates; object constants denote themselves
    and comparisons follow the precomputed-term order.  `order_facts` are the
    true order-predicate atoms (closed world); `level_map` assigns levels to
    atoms, defaulting to 0 where unset.
    """

    base: Interpretation
    general_domain: frozenset[PrecomputedTerm] = frozenset()
    int_range: tuple[int, int] | None = None
    order_facts: frozenset[GroundAtom] = frozenset()
    level_map: dict[GroundAtom, int] = field(default_factory=dict)

    def level_of(self, atom: GroundAtom) -> int:
        return self.level_map.get(atom, 0)

    def with_order_facts(self, facts: frozenset[GroundAtom]) -> "FiniteStdInterp":
        return replace(self, order_facts=facts)

    def with_level_map(self, mapping: dict[GroundAtom, int]) -> "FiniteStdInterp":
        return replace(self, level_map=dict(mapping))


def extend_standard(
    interp: Interpretation,
    ext: SignatureExt = SIGMA0,
    order_facts: frozenset[GroundAtom] | None = None,
    level_map: dict[GroundAtom, int] | None = None,
    *,
    general_domain: frozenset[PrecomputedTerm] | None = None,
    int_range: tuple[int, int] | None = None,
) -> FiniteStdInterp:
    """Extend a set of precomputed atoms to a standard interpretation.

    For Sigma0 no extras are allowed; SigmaOrder takes the true order facts
    and SigmaLevel the level assignment.
    """
    if isinstance(ext, Sigma0) and (order_facts or level_map):
        raise ExtensionError("sigma_0 admits no extension components")
    if isinstance(ext, SigmaOrder) and level_map:
        raise ExtensionError("order signature does not take a level map")
    if isinstance(ext, SigmaLevel) and order_facts:
        raise ExtensionError("level signature does not take order facts")
    if general_domain is None:
        general_domain = frozenset(a for atom in interp for a in atom.args)
    m = FiniteStdInterp(frozenset(interp), frozenset(general_domain), int_range)
    if isinstance(ext, SigmaOrder) and order_facts is not None:
        m = m.with_order_facts(frozenset(order_facts))
    if isinstance(ext, SigmaLevel) and level_map is not None:
        m = m.with_level_map(level_map)
    return m


def restrict(m: FiniteStdInterp) -> FiniteStdInterp:
    """Drop every component outside the base signature."""
    return replace(m, order_facts=frozenset(), level_map={})


def atoms_of(m: FiniteStdInterp) -> Interpretation:
    return m.base


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


class _EvalContext:
    __slots__ = ("m", "lo", "hi", "hit_bound", "members")

    def __init__(self, m: FiniteStdInterp):
        self.m = m
        if m.int_range is not None:
            self.lo, self.hi = m.int_range
        else:
            self.lo = self.hi = None
        self.hit_bound = False
        self.members = tuple(m.general_domain)


Value = Union[PrecomputedTerm, int]


def _as_precomputed(v: Value) -> PrecomputedTerm:
    return Numeral(v) if isinstance(v, int) else v


def _eval_term(t: FoTerm, env: dict[str, Value], ctx: _EvalContext) -> Value:
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return t.value.value if isinstance(t.value, Numeral) else t.value
    if isinstance(t, AbsT):
        return abs(_eval_term(t.arg, env, ctx))
    if isinstance(t, Arith):
        a = _eval_term(t.left, env, ctx)
        b = _eval_term(t.right, env, ctx)
        if t.op == "+":
            return a + b
        if t.op == "-":
            return a - b
        if t.op == "*":
            return a * b
        raise ValueError(f"unknown arithmetic operation: {t.op!r}")
    if isinstance(t, LvlApp):
        args = tuple(_as_precomputed(_eval_term(a, env, ctx)) for a in t.args)
        return ctx.m.level_of(GroundAtom(t.predicate, args))
    raise TypeError(f"not a term: {t!r}")


def _eval(f: Formula, env: dict[str, Value], ctx: _EvalContext) -> bool:
    if isinstance(f, PredApp):
        args = tuple(_as_precomputed(_eval_term(a, env, ctx)) for a in f.args)
        atom = GroundAtom(f.name, args)
        return atom in ctx.m.base or atom in ctx.m.order_facts
    if isinstance(f, Cmp):
        a = _eval_term(f.left, env, ctx)
        b = _eval_term(f.right, env, ctx)
        if isinstance(a, int) and isinstance(b, int):
            if f.rel == "=":
                return a == b
            if f.rel == "!=":
                return a != b
            if f.rel == "<":
                return a < b
            if f.rel == ">":
                return a > b
            if f.rel == "<=":
                return a <= b
            return a >= b
        return relation_holds(f.rel, _as_precomputed(a), _as_precomputed(b))
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, And):
        return all(_eval(p, env, ctx) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(p, env, ctx) for p in f.parts)
    if isinstance(f, Implies):
        return not _eval(f.left, env, ctx) or _eval(f.right, env, ctx)
    if isinstance(f, Forall):
        return _eval_quant(f.var, f.body, env, ctx, universal=True)
    if isinstance(f, Exists):
        return _eval_quant(f.var, f.body, env, ctx, universal=False)
    raise TypeError(f"not a formula: {f!r}")


def _eval_quant(var: Var, body: Formula, env: dict[str, Value], ctx: _EvalContext, universal: bool) -> bool:
    name = var.name
    old = env.get(name, _MISSING)
    try:
        if var.sort is Sort.INTEGER:
            if ctx.lo is None:
                raise UnboundIntRangeError(f"integer quantifier over {name} without an interval")
            for value in range(ctx.lo, ctx.hi + 1):
                env[name] = value
                result = _eval(body, env, ctx)
                if result is not universal:
                    # decided by a witness/counterexample; note endpoint decisions
                    if value == ctx.lo or value == ctx.hi:
                        ctx.hit_bound = True
                    return not universal
            return universal
        for member in ctx.members:
            env[name] = member
            result = _eval(body, env, ctx)
            if result is not universal:
                return not universal
        return universal
    finally:
        if old is _MISSING:
            env.pop(name, None)
        else:
            env[name] = old


_MISSING = object()


def evaluate(f: Formula, m: FiniteStdInterp) -> bool:
    """Classical satisfaction of a closed formula with bounded quantifiers."""
    return _eval(f, {}, _EvalContext(m))


def evaluate_flagged(f: Formula, m: FiniteStdInterp) -> tuple[bool, bool]:
    """Like evaluate, also reporting whether an integer quantifier was
    decided at an endpoint of the interval (widen and re-check if so)."""
    ctx = _EvalContext(m)
    result = _eval(f, {}, ctx)
    return result, ctx.hit_bound


# --------------------------------------------------------------------------
# Evaluation universes for program-derived formulas
# --------------------------------------------------------------------------


def term_integer_witnesses(term) -> set[int]:
    """Integers that quantified value-formula variables may need to take for
    this ground term: values of every subterm, and for division and modulo
    the internal quotient with both signs."""
    out: set[int] = set()
    for sub in _subterms_of(term):
        for v in _ground.values(sub):
            if isinstance(v, Numeral):
                out.add(v.value)
        if isinstance(sub, BinaryOp) and sub.op in ("/", "\\"):
            for q in _ground.values(BinaryOp("/", sub.left, sub.right)):
                if isinstance(q, Numeral):
                    out.update((q.value, -q.value))
    return out


from functools import lru_cache


@lru_cache(maxsize=4096)
def evaluation_universe(program: Program, domain: Domain) -> tuple[frozenset[PrecomputedTerm], tuple[int, int]]:
    """A general domain and integer interval sufficient for formulas
    produced from `program` when instantiation uses `domain`.

    Extends the domain by all values of all subterms of all rule instances,
    and takes the integer interval one past the extreme quantifier
    witnesses.
    """
    from .syntax import Literal

    universe: set[PrecomputedTerm] = set(domain) | set(_ground.program_constants(program))
    base = frozenset(universe) if universe else frozenset((Numeral(0),))
    ints: set[int] = {t.value for t in universe if isinstance(t, Numeral)}
    for inst in _ground.instantiate(program, base):
        terms = []
        if inst.head is not None:
            terms.extend(inst.head.args)
        for elem in inst.body:
            if isinstance(elem, Literal):
                terms.extend(elem.atom.args)
            else:
                terms.extend((elem.left, elem.right))
        for term in terms:
            for sub in _subterms_of(term):
                universe.update(_ground.values(sub))
            ints.update(term_integer_witnesses(term))
    ints.update(t.value for t in universe if isinstance(t, Numeral))
    if not ints:
        int_range = (-2, 2)
    else:
        int_range = (min(ints) - 1, max(ints) + 1)
    return frozenset(universe), int_range


def _subterms_of(term):
    yield term
    if isinstance(term, AbsoluteValue):
        yield from _subterms_of(term.arg)
    elif isinstance(term, BinaryOp):
        yield from _subterms_of(term.left)
        yield from _subterms_of(term.right)


def values_closed(program: Program, universe: frozenset[PrecomputedTerm]) -> bool:
    """True when head values of instances over `universe` stay in `universe`.

    This is the coverage condition under which the bounded evaluator and the
    ground oracle agree on rule satisfaction.
    """
    for inst in _ground.instantiate(program, universe):
        if inst.head is None:
            continue
        for vt in _ground.value_tuples(inst.head.args):
            if not set(vt) <= universe:
                return False
    return True


# --------------------------------------------------------------------------
# Printing (.spec surface syntax)
# --------------------------------------------------------------------------

_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4
_PREC_ATOM = 5

_ARITH_PREC = {"+": 1, "-": 1, "*": 2}


def format_fo_term(t: FoTerm, parent_prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name + ("$i" if t.sort is Sort.INTEGER else "")
    if isinstance(t, Const):
        v = t.value
        if isinstance(v, Numeral):
            return str(v.value)
        if isinstance(v, SymbolicConstant):
            return v.name
        return "#inf" if isinstance(v, Infimum) else "#sup"
    if isinstance(t, AbsT):
        return f"|{format_fo_term(t.arg)}|"
    if isinstance(t, Arith):
        if t.op == "-" and t.left == Const(Numeral(0)):
            return f"-{format_fo_term(t.right, 3)}"
        prec = _ARITH_PREC[t.op]
        text = f"{format_fo_term(t.left, prec)} {t.op} {format_fo_term(t.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(t, LvlApp):
        args = ", ".join(format_fo_term(a) for a in t.args)
        return f"lvl_{t.predicate}({args})" if args else f"lvl_{t.predicate}"
    raise TypeError(f"not a term: {t!r}")


def _quant_group(f: Formula) -> tuple[str, list[Var], Formula]:
    kind = "forall" if isinstance(f, Forall) else "exists"
    cls = Forall if isinstance(f, Forall) else Exists
    vars_: list[Var] = []
    while isinstance(f, cls):
        vars_.append(f.var)
        f = f.body
    return kind, vars_, f


def format_formula(f: Formula, rule_arrow: bool = False) -> str:
    """Render a formula in the listing syntax.

    With `rule_arrow`, an implication (possibly under leading universal
    quantifiers) is printed head-first using `<-`.
    """
    if rule_arrow:
        if isinstance(f, Forall):
            kind, vars_, body = _quant_group(f)
            inner = format_formula(body, rule_arrow=True)
            names = " ".join(format_fo_term(v) for v in vars_)
            return f"forall {names} ({inner})"
        if isinstance(f, Implies) and not isinstance(f.right, Bottom):
            head = _format(f.right, _PREC_OR)
            body = _format(f.left, _PREC_OR)
            return f"{head} <- {body}"
        return _format(f, 0)
    return _format(f, 0)


def _format(f: Formula, parent_prec: int) -> str:
    if isinstance(f, PredApp):
        if not f.args:
            return f.name
        return f"{f.name}({', '.join(format_fo_term(a) for a in f.args)})"
    if isinstance(f, Cmp):
        return f"{format_fo_term(f.left)} {f.rel} {format_fo_term(f.right)}"
    if isinstance(f, Top):
        return "#true"
    if isinstance(f, Bottom):
        return "#false"
    if isinstance(f, And):
        text = " and ".join(_format(p, _PREC_AND + 1) for p in f.parts)
        return f"({text})" if parent_prec > _PREC_AND else text
    if isinstance(f, Or):
        text = " or ".join(_format(p, _PREC_OR + 1) for p in f.parts)
        return f"({text})" if parent_prec > _PREC_OR else text
    if isinstance(f, Implies):
        if isinstance(f.right, Bottom):
            inner = f.left
            if isinstance(inner, (PredApp, Cmp, Top, Bottom)) or is_negation(inner):
                return f"not {_format(inner, _PREC_UNARY)}"
            return f"not ({_format(inner, 0)})"
        text = f"{_format(f.left, _PREC_IMPLIES + 1)} -> {_format(f.right, _PREC_IMPLIES)}"
        return f"({text})" if parent_prec > _PREC_IMPLIES else text
    if isinstance(f, (Forall, Exists)):
        kind, vars_, body = _quant_group(f)
        names = " ".join(format_fo_term(v) for v in vars_)
        if isinstance(body, (PredApp, Cmp, Top, Bottom)) or is_negation(body):
            return f"{kind} {names} {_format(body, _PREC_ATOM)}"
        return f"{kind} {names} ({_format(body, 0)})"
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# Parsing (.spec surface syntax)
# --------------------------------------------------------------------------


class _SpecParser:
    def __init__(self, ts: TokenStream):
        self.ts = ts
        self.scopes: list[dict[str, Var]] = []

    def lookup(self, name: str) -> Var | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def parse_sentences(self) -> list[Formula]:
        out = []
        while self.ts.peek().kind != "eof":
            out.append(self.parse_formula())
            self.ts.expect(".")
        return out

    def parse_formula(self) -> Formula:
        left = self.parse_disjunction()
        tok = self.ts.peek()
        if tok.kind == "sym" and tok.text in ("->", "<-", "<->"):
            self.ts.next()
            right = self.parse_formula()
            if tok.text == "->":
                return Implies(left, right)
            if tok.text == "<-":
                return Implies(right, left)
            return And((Implies(left, right), Implies(right, left)))
        return left

    def parse_disjunction(self) -> Formula:
        parts = [self.parse_conjunction()]
        while self.ts.accept("or"):
            parts.append(self.parse_conjunction())
        return make_or(parts)

    def parse_conjunction(self) -> Formula:
        parts = [self.parse_unary()]
        while self.ts.accept("and"):
            parts.append(self.parse_unary())
        return make_and(parts)

    def parse_unary(self) -> Formula:
        if self.ts.accept("not"):
            return Not(self.parse_unary())
        tok = self.ts.peek()
        if tok.kind == "keyword" and tok.text in ("forall", "exists"):
            self.ts.next()
            variables = [self.parse_bound_var()]
            while self.ts.peek().kind == "var":
                variables.append(self.parse_bound_var())
            self.scopes.append({v.name: v for v in variables})
            try:
                body = self.parse_unary()
            finally:
                self.scopes.pop()
            ctor = forall if tok.text == "forall" else exists
            return ctor(variables, body)
        if self.ts.accept("("):
            inner = self.parse_formula()
            self.ts.expect(")")
            return inner
        if tok.kind == "hash" and tok.text in ("#false", "#true"):
            self.ts.next()
            return FALSE if tok.text == "#false" else TRUE
        return self.parse_atomic()

    def parse_bound_var(self) -> Var:
        tok = self.ts.peek()
        if tok.kind != "var":
            raise self.ts.error("expected a variable")
        self.ts.next()
        sort = Sort.GENERAL
        if self.ts.accept("$"):
            sort = Sort.INTEGER
            nxt = self.ts.peek()
            if nxt.kind == "name" and nxt.text == "i":
                self.ts.next()
        return Var(tok.text, sort)

    def parse_atomic(self) -> Formula:
        tok = self.ts.peek()
        if (
            tok.kind == "name"
            and not tok.text.startswith("lvl_")
            and self.ts.peek(1).kind == "sym"
            and self.ts.peek(1).text == "("
        ):
            self.ts.next()
            self.ts.expect("(")
            args = [self.parse_term()]
            while self.ts.accept(","):
                args.append(self.parse_term())
            self.ts.expect(")")
            if self._peek_rel() is not None:
                raise self.ts.error("an atom cannot appear in a comparison")
            return PredApp(tok.text, tuple(args))
        term = self.parse_term()
        rel = self._peek_rel()
        if rel is not None:
            self.ts.next()
            return Cmp(rel, term, self.parse_term())
        if isinstance(term, Const) and isinstance(term.value, SymbolicConstant):
            return PredApp(term.value.name)
        raise self.ts.error("expected an atom or a comparison")

    def _peek_rel(self) -> str | None:
        tok = self.ts.peek()
        if tok.kind == "sym" and tok.text in ("=", "!=", "<", ">", "<=", ">="):
            return tok.text
        return None

    def parse_term(self) -> FoTerm:
        term = self.parse_term_mul()
        while True:
            tok = self.ts.peek()
            if tok.kind == "sym" and tok.text in ("+", "-"):
                self.ts.next()
                term = Arith(tok.text, term, self.parse_term_mul())
            else:
                return term

    def parse_term_mul(self) -> FoTerm:
        term = self.parse_term_primary()
        while True:
            tok = self.ts.peek()
            if tok.kind == "sym" and tok.text == "*":
                self.ts.next()
                term = Arith("*", term, self.parse_term_primary())
            else:
                return term

    def parse_term_primary(self) -> FoTerm:
        tok = self.ts.peek()
        if tok.kind == "number":
            self.ts.next()
            return Const(Numeral(int(tok.text)))
        if tok.kind == "name":
            self.ts.next()
            return Const(SymbolicConstant(tok.text))
        if tok.kind == "hash" and tok.text in ("#inf", "#sup"):
            self.ts.next()
            return Const(Infimum() if tok.text == "#inf" else Supremum())
        if tok.kind == "var":
            self.ts.next()
            suffixed = False
            if self.ts.accept("$"):
                suffixed = True
                nxt = self.ts.peek()
                if nxt.kind == "name" and nxt.text == "i":
                    self.ts.next()
            bound = self.lookup(tok.text)
            if bound is not None:
                return bound
            return Var(tok.text, Sort.INTEGER if suffixed else Sort.GENERAL)
        if self.ts.accept("("):
            term = self.parse_term()
            self.ts.expect(")")
            return term
        if self.ts.accept("|"):
            term = self.parse_term()
            self.ts.expect("|")
            return AbsT(term)
        if self.ts.accept("-"):
            inner = self.parse_term_primary()
            if isinstance(inner, Const) and isinstance(inner.value, Numeral):
                return Const(Numeral(-inner.value.value))
            return Arith("-", Const(Numeral(0)), inner)
        raise self.ts.error(f"expected a term, found {tok.text or 'end of input'!r}")


def parse_spec(text: str) -> list[Formula]:
    """Parse a .spec source into a list of closed formulas."""
    ts = TokenStream(tokenize(text, spec=True))
    return _SpecParser(ts).parse_sentences()
