"""Equivalence-preserving formula simplification.

The rewrite rules are applied bottom-up until a fixpoint: truth-constant
absorption, flattening of conjunctions and disjunctions, dropping unused
quantifiers, folding of ground comparisons, hoisting existentials out of
conjunctions, narrowing general variables that are forced to be integers,
inlining of variables bound by an equation, and removal of conjuncts that
are subsumed by a stronger sibling.  Every rule preserves equivalence over
standard interpretations, and no rule increases the node count.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fol import (
    And,
    AbsT,
    Arith,
    Bottom,
    Cmp,
    Const,
    Exists,
    FALSE,
    FoTerm,
    Forall,
    Formula,
    Implies,
    Or,
    PredApp,
    Sort,
    TRUE,
    Top,
    Var,
    count_nodes,
    free_vars,
    is_negation,
    make_and,
    make_or,
    rename_bound,
    substitute,
    term_sort,
    term_vars,
)
from .syntax import Numeral, relation_holds


@dataclass(frozen=True)
class SimplifyConfig:
    drop_double_negation: bool = False
    max_passes: int = 50


def simplify_formula(f: Formula, *, drop_double_negation: bool = False) -> Formula:
    """Simplify to a fixpoint; classically equivalent to the input.

    Double-negation elimination is off by default so that the marker
    `not not p` of choice rules stays visible; enable it for consumers that
    only care about classical truth.
    """
    cfg = SimplifyConfig(drop_double_negation=drop_double_negation)
    for _ in range(cfg.max_passes):
        g = _pass(f, cfg)
        if g == f:
            return f
        f = g
    return f


# --------------------------------------------------------------------------
# Term-level folding
# --------------------------------------------------------------------------


def _fold_term(t: FoTerm) -> FoTerm:
    if isinstance(t, AbsT):
        arg = _fold_term(t.arg)
        if isinstance(arg, Const) and isinstance(arg.value, Numeral):
            return Const(Numeral(abs(arg.value.value)))
        return AbsT(arg)
    if isinstance(t, Arith):
        left = _fold_term(t.left)
        right = _fold_term(t.right)
        if (
            isinstance(left, Const)
            and isinstance(left.value, Numeral)
            and isinstance(right, Const)
            and isinstance(right.value, Numeral)
        ):
            a, b = left.value.value, right.value.value
            value = a + b if t.op == "+" else a - b if t.op == "-" else a * b
            return Const(Numeral(value))
        return Arith(t.op, left, right)
    return t


def _ground_value(t: FoTerm):
    """The precomputed value of a variable-free term, or None."""
    t = _fold_term(t)
    if isinstance(t, Const):
        return t.value
    return None


# --------------------------------------------------------------------------
# One bottom-up pass
# --------------------------------------------------------------------------


def _pass(f: Formula, cfg: SimplifyConfig) -> Formula:
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, PredApp):
        return PredApp(f.name, tuple(_fold_term(a) for a in f.args))
    if isinstance(f, Cmp):
        return _simplify_cmp(Cmp(f.rel, _fold_term(f.left), _fold_term(f.right)))
    if isinstance(f, And):
        return _simplify_and(tuple(_pass(p, cfg) for p in f.parts))
    if isinstance(f, Or):
        return _simplify_or(tuple(_pass(p, cfg) for p in f.parts))
    if isinstance(f, Implies):
        return _simplify_implies(_pass(f.left, cfg), _pass(f.right, cfg), cfg)
    if isinstance(f, Forall):
        return _simplify_forall(f.var, _pass(f.body, cfg))
    if isinstance(f, Exists):
        return _simplify_exists(f.var, _pass(f.body, cfg))
    raise TypeError(f"not a formula: {f!r}")


def _simplify_cmp(f: Cmp) -> Formula:
    if f.left == f.right and not any(True for _ in term_vars(f.left)):
        pass  # fall through to ground folding, which also covers this
    lv = _ground_value(f.left)
    rv = _ground_value(f.right)
    if lv is not None and rv is not None:
        return TRUE if relation_holds(f.rel, lv, rv) else FALSE
    if f.left == f.right:
        return TRUE if f.rel in ("=", "<=", ">=") else FALSE
    return f


def _simplify_and(parts: tuple[Formula, ...]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif isinstance(p, Top):
            continue
        elif isinstance(p, Bottom):
            return FALSE
        else:
            flat.append(p)
    flat = _dedupe(flat)
    flat = _drop_subsumed(flat)
    return make_and(flat)


def _simplify_or(parts: tuple[Formula, ...]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        elif isinstance(p, Bottom):
            continue
        elif isinstance(p, Top):
            return TRUE
        else:
            flat.append(p)
    return make_or(_dedupe(flat))


def _dedupe(parts: list[Formula]) -> list[Formula]:
    seen = set()
    out = []
    for p in parts:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _simplify_implies(left: Formula, right: Formula, cfg: SimplifyConfig) -> Formula:
    if isinstance(left, Top):
        return right
    if isinstance(left, Bottom):
        return TRUE
    if isinstance(right, Top):
        return TRUE
    if cfg.drop_double_negation and isinstance(right, Bottom) and is_negation(left):
        return left.left
    return Implies(left, right)


def _simplify_forall(var: Var, body: Formula) -> Formula:
    if var not in free_vars(body):
        return body
    # forall X (X = t -> G), and the guarded variant with a conjunction
    if isinstance(body, Implies) and not isinstance(body.right, Bottom):
        narrowed = _narrow(var, body.left)
        if narrowed is not None:
            guard, consequent = narrowed, body.right
            mapping = {var: Var(var.name, Sort.INTEGER)}
            return Forall(Var(var.name, Sort.INTEGER), Implies(substitute(guard, mapping), substitute(consequent, mapping)))
        inlined = _inline_implication(var, body.left, body.right)
        if inlined is not None:
            return inlined
    return Forall(var, body)


def _simplify_exists(var: Var, body: Formula) -> Formula:
    if var not in free_vars(body):
        return body
    narrowed = _narrow(var, body)
    if narrowed is not None:
        mapping = {var: Var(var.name, Sort.INTEGER)}
        return Exists(Var(var.name, Sort.INTEGER), substitute(narrowed, mapping))
    hoisted = _hoist_exists(body)
    if hoisted is not None:
        return Exists(var, hoisted)
    inlined = _inline_exists(var, body)
    if inlined is not None:
        return inlined
    return Exists(var, body)


# --------------------------------------------------------------------------
# Existential hoisting: And(.., Exists(v, G), ..) => Exists(v, And(.., G, ..))
# --------------------------------------------------------------------------


def _hoist_exists(body: Formula) -> Formula | None:
    if not isinstance(body, And):
        return None
    for i, member in enumerate(body.parts):
        if isinstance(member, Exists):
            siblings = body.parts[:i] + body.parts[i + 1 :]
            if any(member.var in free_vars(s) for s in siblings):
                continue
            inner = make_and(
                body.parts[:i] + (member.body,) + body.parts[i + 1 :]
            )
            return Exists(member.var, inner)
    return None


# --------------------------------------------------------------------------
# Sort narrowing: a general variable forced equal to an integer term
# --------------------------------------------------------------------------


def _forces_integer(f: Formula, var: Var) -> bool:
    if isinstance(f, Cmp) and f.rel == "=":
        for a, b in ((f.left, f.right), (f.right, f.left)):
            if a == var and term_sort(b) is Sort.INTEGER and all(v != var for v in term_vars(b)):
                return True
        return False
    if isinstance(f, And):
        return any(_forces_integer(p, var) for p in f.parts)
    if isinstance(f, Exists) and f.var.name != var.name:
        return _forces_integer(f.body, var)
    return False


def _narrow(var: Var, body: Formula) -> Formula | None:
    """Return `body` unchanged when `var` (general) is integer-forced in it."""
    if var.sort is not Sort.GENERAL:
        return None
    if _forces_integer(body, var):
        return body
    return None


# --------------------------------------------------------------------------
# Equality inlining
# --------------------------------------------------------------------------


def _sort_compatible(var: Var, term: FoTerm) -> bool:
    if var.sort is Sort.GENERAL:
        return True
    return term_sort(term) is Sort.INTEGER


def _binding_from(conjunct: Formula, var: Var) -> FoTerm | None:
    if not (isinstance(conjunct, Cmp) and conjunct.rel == "="):
        return None
    for a, b in ((conjunct.left, conjunct.right), (conjunct.right, conjunct.left)):
        if a == var and all(v != var for v in term_vars(b)) and _sort_compatible(var, b):
            return b
    return None


def _inline_exists(var: Var, body: Formula) -> Formula | None:
    """Exists(var, Q.. (And(.., var = t, ..)))  =>  Q.. (And..[var := t])."""
    prefix: list[Var] = []
    inner = body
    while isinstance(inner, Exists):
        prefix.append(inner.var)
        inner = inner.body
    members = inner.parts if isinstance(inner, And) else (inner,)
    for i, member in enumerate(members):
        term = _binding_from(member, var)
        if term is None:
            continue
        rest = members[:i] + members[i + 1 :]
        try:
            replaced = make_and(substitute(p, {var: term}) for p in rest)
        except ValueError:  # would capture; names are normally fresh
            continue
        candidate: Formula = replaced
        for v in reversed(prefix):
            candidate = Exists(v, candidate)
        original = Exists(var, body)
        if count_nodes(candidate) <= count_nodes(original):
            return candidate
    return None


def _inline_implication(var: Var, antecedent: Formula, consequent: Formula) -> Formula | None:
    """Forall(var, And(.., var = t, ..) -> H)  =>  And..[var := t] -> H[var := t]."""
    members = antecedent.parts if isinstance(antecedent, And) else (antecedent,)
    for i, member in enumerate(members):
        term = _binding_from(member, var)
        if term is None:
            continue
        rest = members[:i] + members[i + 1 :]
        try:
            new_left = make_and(substitute(p, {var: term}) for p in rest)
            new_right = substitute(consequent, {var: term})
        except ValueError:
            continue
        candidate: Formula = new_right if isinstance(new_left, Top) else Implies(new_left, new_right)
        if count_nodes(candidate) <= count_nodes(Forall(var, Implies(antecedent, consequent))):
            return candidate
    return None


# --------------------------------------------------------------------------
# Subsumption between conjuncts
# --------------------------------------------------------------------------


def _chain_and_parts(f: Formula) -> tuple[tuple[Sort, ...], frozenset[Formula]] | None:
    """Decompose an existential chain over a conjunction, canonically renamed."""
    canon = rename_bound(f)
    sorts = []
    inner = canon
    while isinstance(inner, Exists):
        sorts.append(inner.var.sort)
        inner = inner.body
    parts = inner.parts if isinstance(inner, And) else (inner,)
    return tuple(sorts), frozenset(parts)


def _subsumes(stronger: Formula, weaker: Formula) -> bool:
    """True when `stronger` is an existential conjunction extending `weaker`."""
    if not isinstance(weaker, Exists) or not isinstance(stronger, Exists):
        return False
    ws, wp = _chain_and_parts(weaker)
    ss, sp = _chain_and_parts(stronger)
    return ws == ss and wp < sp


def _drop_subsumed(parts: list[Formula]) -> list[Formula]:
    if len(parts) < 2 or not any(isinstance(p, Exists) for p in parts):
        return parts
    out = []
    for i, p in enumerate(parts):
        if any(j != i and _subsumes(q, p) for j, q in enumerate(parts)):
            continue
        out.append(p)
    return out
