"""Translation of mini-gringo programs into closed two-sorted sentences:
value formulas for terms, the body translation, and the per-rule sentences.

A basic or choice rule becomes `forall V.. (exists Y.. (F) -> p(V..))` where
F relates the head terms to the head variables and translates the body; a
constraint becomes the universal closure of the negated body translation.
"""

from __future__ import annotations

from typing import Callable, Iterable

from .fol import (
    And,
    AbsT,
    Arith,
    Cmp,
    Const,
    Exists,
    FoTerm,
    Formula,
    Implies,
    Not,
    Or,
    PredApp,
    Sort,
    Var,
    exists,
    forall,
    make_and,
    make_or,
)
from .syntax import (
    AbsoluteValue,
    Atom,
    BinaryOp,
    Comparison,
    Literal,
    Numeral,
    Program,
    ProgramTerm,
    Rule,
    Variable,
    is_precomputed,
)


class FreshVarSource:
    """Deterministic fresh-variable names for one translation unit.

    Head variables are V1, V2, ...; general helper variables are Z, Z1, ...;
    integer variables come in per-use groups I/J/K, I1/J1/K1, and so on.
    Names in `reserved` (the rule's own variables) are never produced.
    """

    def __init__(self, reserved: Iterable[str] = ()) -> None:
        self._head = 0
        self._general = 0
        self._int_group = 0
        self._reserved = frozenset(reserved)

    def head_vars(self, n: int) -> tuple[Var, ...]:
        out = []
        while len(out) < n:
            self._head += 1
            name = f"V{self._head}"
            if name not in self._reserved:
                out.append(Var(name, Sort.GENERAL))
        return tuple(out)

    def general(self) -> Var:
        while True:
            self._general += 1
            name = "Z" if self._general == 1 else f"Z{self._general - 1}"
            if name not in self._reserved:
                return Var(name, Sort.GENERAL)

    def generals(self, n: int) -> tuple[Var, ...]:
        return tuple(self.general() for _ in range(n))

    def integers(self, n: int) -> tuple[Var, ...]:
        names = ("I", "J", "K")
        while True:
            suffix = "" if self._int_group == 0 else str(self._int_group)
            self._int_group += 1
            candidates = tuple(names[i] + suffix for i in range(n))
            if not any(c in self._reserved for c in candidates):
                return tuple(Var(c, Sort.INTEGER) for c in candidates)


def _fo_of_precomputed(term) -> FoTerm:
    return Const(term)


def fo_term_of(term: ProgramTerm) -> FoTerm:
    """Program terms that are precomputed or variables, as formula terms."""
    if isinstance(term, Variable):
        return Var(term.name, Sort.GENERAL)
    if is_precomputed(term):
        return Const(term)
    raise ValueError(f"term has no direct formula image: {term!r}")


def val_formula(term: ProgramTerm, var: Var, fresh: FreshVarSource) -> Formula:
    """The formula stating that `var` is one of the values of `term`."""
    if isinstance(term, Variable) or is_precomputed(term):
        return Cmp("=", var, fo_term_of(term))
    if isinstance(term, AbsoluteValue):
        (i,) = fresh.integers(1)
        return Exists(i, make_and((val_formula(term.arg, i, fresh), Cmp("=", var, AbsT(i)))))
    if isinstance(term, BinaryOp):
        op = term.op
        if op in ("+", "-", "*"):
            i, j = fresh.integers(2)
            # the value-defining equation comes first
            return exists(
                (i, j),
                make_and(
                    (
                        Cmp("=", var, Arith(op, i, j)),
                        val_formula(term.left, i, fresh),
                        val_formula(term.right, j, fresh),
                    )
                ),
            )
        if op in ("/", "\\"):
            i, j, k = fresh.integers(3)
            zero = Const(Numeral(0))
            one = Const(Numeral(1))
            bound = (
                Cmp("<=", Arith("*", k, AbsT(j)), AbsT(i)),
                Cmp("<", AbsT(i), Arith("*", Arith("+", k, one), AbsT(j))),
            )
            if op == "/":
                outcome = Or(
                    (
                        make_and((Cmp(">=", Arith("*", i, j), zero), Cmp("=", var, k))),
                        make_and((Cmp("<", Arith("*", i, j), zero), Cmp("=", var, Arith("-", zero, k)))),
                    )
                )
            else:
                outcome = Or(
                    (
                        make_and((Cmp(">=", Arith("*", i, j), zero), Cmp("=", var, Arith("-", i, Arith("*", k, j))))),
                        make_and((Cmp("<", Arith("*", i, j), zero), Cmp("=", var, Arith("+", i, Arith("*", k, j))))),
                    )
                )
            return exists(
                (i, j, k),
                make_and(
                    (val_formula(term.left, i, fresh), val_formula(term.right, j, fresh)) + bound + (outcome,)
                ),
            )
        if op == "..":
            i, j, k = fresh.integers(3)
            return exists(
                (i, j, k),
                make_and(
                    (
                        val_formula(term.left, i, fresh),
                        val_formula(term.right, j, fresh),
                        Cmp("<=", i, k),
                        Cmp("<=", k, j),
                        Cmp("=", var, k),
                    )
                ),
            )
    raise TypeError(f"not a program term: {term!r}")


def val_tuple(terms: Iterable[ProgramTerm], vars_: Iterable[Var], fresh: FreshVarSource) -> list[Formula]:
    return [val_formula(t, v, fresh) for t, v in zip(terms, vars_, strict=True)]


OrdBuilder = Callable[[str, tuple[Var, ...]], Formula]
"""Builds the derivation-order atom for a positive body literal: given the
body predicate name and its value variables, returns the order conjunct."""


def tau_b(elem, fresh: FreshVarSource, ord_for: OrdBuilder | None = None) -> Formula:
    """Translation of one body element.

    With `ord_for`, positive literals carry the derivation-order conjunct
    inline, grouped with the predicate atom.
    """
    if isinstance(elem, Comparison):
        v1 = fresh.general()
        v2 = fresh.general()
        return exists(
            (v1, v2),
            make_and(
                (
                    val_formula(elem.left, v1, fresh),
                    val_formula(elem.right, v2, fresh),
                    Cmp(elem.rel, v1, v2),
                )
            ),
        )
    if not isinstance(elem, Literal):
        raise TypeError(f"not a body element: {elem!r}")
    atom = elem.atom
    vars_ = fresh.generals(len(atom.args))
    pred: Formula = PredApp(atom.predicate, vars_)
    if elem.negations == 1:
        pred = Not(pred)
    elif elem.negations == 2:
        pred = Not(Not(pred))
    if ord_for is not None and elem.negations == 0:
        pred = And((pred, ord_for(atom.predicate, vars_)))
    parts = val_tuple(atom.args, vars_, fresh) + [pred]
    return exists(vars_, make_and(parts))


def tau_b_body(body, fresh: FreshVarSource, ord_for: OrdBuilder | None = None) -> list[Formula]:
    return [tau_b(elem, fresh, ord_for) for elem in body]


def form(rule: Rule, head_vars: tuple[Var, ...], fresh: FreshVarSource, ord_for: OrdBuilder | None = None) -> Formula:
    """The shared antecedent of the sentences for basic and choice rules."""
    if rule.is_constraint:
        raise ValueError("constraints have no head antecedent")
    head: Atom = rule.head
    parts = val_tuple(head.args, head_vars, fresh)
    parts.extend(tau_b_body(rule.body, fresh, ord_for))
    if rule.is_choice:
        parts.append(Not(Not(PredApp(head.predicate, head_vars))))
    return make_and(parts)


def _rule_var_list(rule: Rule) -> tuple[Var, ...]:
    return tuple(Var(name, Sort.GENERAL) for name in rule.variables())


def tau_star_rule(rule: Rule) -> Formula:
    fresh = FreshVarSource(reserved=rule.variables())
    if rule.is_constraint:
        body = make_and(tau_b_body(rule.body, fresh))
        return forall(_rule_var_list(rule), Not(body))
    head_vars = fresh.head_vars(len(rule.head.args))
    antecedent = exists(_rule_var_list(rule), form(rule, head_vars, fresh))
    return forall(head_vars, Implies(antecedent, PredApp(rule.head.predicate, head_vars)))


def tau_star_program(program: Program) -> list[Formula]:
    """One closed sentence per rule, in program order."""
    return [tau_star_rule(rule) for rule in program.rules]
