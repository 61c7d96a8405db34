"""Clark completion for mini-gringo programs and for theories in the shape
produced by the program-to-formula translation.

Each sentence `forall V.. (G -> p(V..))` contributes the disjunct G to the
definition of p; completion pairs the rule direction (`comp_rules`) with the
converse definition direction (`comp_def`), and collects constraint
sentences separately.  The syntactic tightness check inspects the
predicate-level positive dependency graph.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fol import (
    Bottom,
    Cmp,
    Forall,
    Formula,
    Implies,
    PredApp,
    Sort,
    Var,
    forall,
    free_vars,
    make_and,
    make_or,
    subformulas,
    substitute,
)
from .syntax import Program
from .tau_star import tau_star_program


class UnsupportedTheoryError(ValueError):
    """A sentence does not have the translated-rule shape."""


@dataclass(frozen=True)
class RuleEntry:
    """One defining disjunct for a predicate: `guard -> p(head_vars)`."""

    head_pred: str
    head_vars: tuple[Var, ...]
    guard: Formula


@dataclass(frozen=True)
class TheoryEntries:
    by_pred: dict[str, tuple[RuleEntry, ...]]
    constraints: tuple[Formula, ...]
    predicates: dict[str, int]


def _peel_forall(f: Formula) -> tuple[tuple[Var, ...], Formula]:
    vars_: list[Var] = []
    while isinstance(f, Forall):
        vars_.append(f.var)
        f = f.body
    return tuple(vars_), f


def _all_var_names(f: Formula) -> set[str]:
    from .fol import Exists, subformulas, term_vars

    names: set[str] = set()
    for sub in subformulas(f):
        if isinstance(sub, (Forall, Exists)):
            names.add(sub.var.name)
        elif isinstance(sub, PredApp):
            names.update(v.name for a in sub.args for v in term_vars(a))
        elif isinstance(sub, Cmp):
            names.update(v.name for v in term_vars(sub.left))
            names.update(v.name for v in term_vars(sub.right))
    return names


def _generalize_entry(pred: str, args: tuple[Var, ...], guard: Formula) -> RuleEntry:
    """Entries always define the predicate on general-sorted variables.

    A sentence quantifying its head variable over the integers says nothing
    about non-integer values, so the integer variable is re-bound inside the
    guard with an equation tying it to a fresh general head variable.
    """
    if all(v.sort is Sort.GENERAL for v in args):
        return RuleEntry(pred, args, guard)
    from .fol import Exists, exists

    avoid = _all_var_names(guard) | {v.name for v in args}
    fresh: list[Var] = []
    i = 0
    while len(fresh) < len(args):
        i += 1
        name = f"V{i}"
        if name not in avoid:
            fresh.append(Var(name, Sort.GENERAL))
    mapping = {}
    equations = []
    binders = []
    for new, old in zip(fresh, args):
        if old.sort is Sort.GENERAL:
            mapping[old] = new
        else:
            binders.append(old)
            equations.append(Cmp("=", new, old))
    new_guard = exists(binders, make_and(tuple(equations) + (substitute(guard, mapping),)))
    return RuleEntry(pred, tuple(fresh), new_guard)


def classify_sentence(sentence: Formula) -> RuleEntry | Formula:
    """A RuleEntry for a defining sentence, or the sentence itself for a
    constraint; raises UnsupportedTheoryError otherwise."""
    outer, matrix = _peel_forall(sentence)
    if isinstance(matrix, Implies) and isinstance(matrix.right, Bottom):
        return sentence
    if isinstance(matrix, Implies) and isinstance(matrix.right, PredApp):
        head = matrix.right
        args = head.args
        if (
            all(isinstance(a, Var) for a in args)
            and len(set(args)) == len(args)
            and set(args) == set(outer)
            and {v for v in free_vars(matrix.left)} <= set(args)
        ):
            return _generalize_entry(head.name, tuple(args), matrix.left)  # type: ignore[arg-type]
        raise UnsupportedTheoryError(
            f"head atom must apply the predicate to the quantified variables: {head}"
        )
    if isinstance(matrix, PredApp) and not outer and not free_vars(matrix):
        # a ground fact; reshape it into the standard defining form
        head_vars = tuple(Var(f"V{i + 1}", Sort.GENERAL) for i in range(len(matrix.args)))
        guard = make_and(Cmp("=", v, a) for v, a in zip(head_vars, matrix.args))
        return RuleEntry(matrix.name, head_vars, guard)
    raise UnsupportedTheoryError(f"sentence is not in translated-rule shape: {sentence}")


def _collect_predicates(sentences) -> dict[str, int]:
    out: dict[str, int] = {}
    for sentence in sentences:
        for sub in subformulas(sentence):
            if isinstance(sub, PredApp):
                old = out.setdefault(sub.name, len(sub.args))
                if old != len(sub.args):
                    raise UnsupportedTheoryError(
                        f"predicate {sub.name!r} used with arities {old} and {len(sub.args)}"
                    )
    return out


def theory_entries(sentences) -> TheoryEntries:
    by_pred: dict[str, list[RuleEntry]] = {}
    constraints: list[Formula] = []
    predicates = _collect_predicates(sentences)
    for name in predicates:
        by_pred[name] = []
    for sentence in sentences:
        item = classify_sentence(sentence)
        if isinstance(item, RuleEntry):
            by_pred[item.head_pred].append(item)
        else:
            constraints.append(item)
    return TheoryEntries({k: tuple(v) for k, v in by_pred.items()}, tuple(constraints), predicates)


def program_entries(program: Program) -> TheoryEntries:
    entries = theory_entries(tau_star_program(program))
    predicates = dict(entries.predicates)
    by_pred = dict(entries.by_pred)
    for name, arity in program.predicates().items():
        predicates.setdefault(name, arity)
        by_pred.setdefault(name, ())
    return TheoryEntries(by_pred, entries.constraints, predicates)


def standard_head_vars(arity: int) -> tuple[Var, ...]:
    return tuple(Var(f"V{i + 1}", Sort.GENERAL) for i in range(arity))


def aligned_guard(entry: RuleEntry, head_vars: tuple[Var, ...]) -> Formula:
    if entry.head_vars == head_vars:
        return entry.guard
    mapping = dict(zip(entry.head_vars, head_vars))
    try:
        return substitute(entry.guard, mapping)
    except ValueError:  # a binder shadows a target name; make binders unique first
        from .fol import rename_bound

        return substitute(rename_bound(entry.guard, prefix="R"), mapping)


def comp_rules(pred: str, entries: TheoryEntries) -> Formula:
    """The rule direction: the disjunction of the guards implies the predicate."""
    head_vars = standard_head_vars(entries.predicates[pred])
    guards = [aligned_guard(e, head_vars) for e in entries.by_pred.get(pred, ())]
    return forall(head_vars, Implies(make_or(guards), PredApp(pred, head_vars)))


def comp_def(pred: str, entries: TheoryEntries) -> Formula:
    """The definition direction added by completion."""
    head_vars = standard_head_vars(entries.predicates[pred])
    guards = [aligned_guard(e, head_vars) for e in entries.by_pred.get(pred, ())]
    return forall(head_vars, Implies(PredApp(pred, head_vars), make_or(guards)))


@dataclass(frozen=True)
class CompletionParts:
    comp_rules: dict[str, Formula]
    comp_def: dict[str, Formula]
    cons: tuple[Formula, ...]

    def formula(self) -> Formula:
        parts: list[Formula] = list(self.cons)
        for pred in sorted(self.comp_rules):
            parts.append(self.comp_rules[pred])
            parts.append(self.comp_def[pred])
        return make_and(parts)


def completion_parts(program: Program, complete_undefined: bool = True) -> CompletionParts:
    """Completion of every predicate of the program, plus the constraints.

    Predicates with no defining rules get the empty disjunction as their
    definition; with `complete_undefined` off they are skipped entirely.
    """
    entries = program_entries(program)
    rules: dict[str, Formula] = {}
    defs: dict[str, Formula] = {}
    for pred in sorted(entries.predicates):
        if not entries.by_pred.get(pred) and not complete_undefined:
            continue
        rules[pred] = comp_rules(pred, entries)
        defs[pred] = comp_def(pred, entries)
    return CompletionParts(rules, defs, entries.constraints)


def completion(program: Program, complete_undefined: bool = True) -> Formula:
    return completion_parts(program, complete_undefined).formula()


# --------------------------------------------------------------------------
# Tightness
# --------------------------------------------------------------------------


def positive_dependency_graph(program: Program) -> dict[str, set[str]]:
    """Edges head-predicate -> body-predicate over positive literals."""
    graph: dict[str, set[str]] = {name: set() for name in program.predicates()}
    for rule in program.rules:
        if rule.head is None:
            continue
        for lit in rule.positive_body:
            graph[rule.head.predicate].add(lit.atom.predicate)
    return graph


def is_tight(program: Program) -> bool:
    """True when the positive dependency graph is acyclic."""
    graph = positive_dependency_graph(program)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(node: str) -> bool:
        mark = state.get(node)
        if mark == 1:
            return False
        if mark == 2:
            return True
        state[node] = 1
        for succ in graph[node]:
            if not visit(succ):
                return False
        state[node] = 2
        return True

    return all(visit(node) for node in graph)
