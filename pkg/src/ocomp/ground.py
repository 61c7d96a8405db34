"""Finite-domain ground semantics: term values, rule transformation into
propositional formulas, reducts and their normalized clause form, the
immediate-consequence fixpoint, and the stable / supported / well-supported
model checks.

Instantiation is restricted to a caller-supplied finite domain, so every
check here is decidable by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

from .syntax import (
    AbsoluteValue,
    Atom,
    BinaryOp,
    Comparison,
    Literal,
    Numeral,
    PrecomputedTerm,
    Program,
    ProgramTerm,
    Rule,
    SymbolicConstant,
    is_ground,
    precomputed_sort_key,
    relation_holds,
    substitute_term,
)


class DomainError(ValueError):
    """The instantiation domain is unusable for the given program."""


@dataclass(frozen=True, slots=True)
class GroundAtom:
    predicate: str
    args: tuple[PrecomputedTerm, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        from .syntax import format_term

        return f"{self.predicate}({', '.join(format_term(a) for a in self.args)})"


Interpretation = frozenset[GroundAtom]

Domain = frozenset  # of PrecomputedTerm


def atom_sort_key(atom: GroundAtom):
    return (atom.predicate, tuple(precomputed_sort_key(a) for a in atom.args))


# --------------------------------------------------------------------------
# Values of ground terms
# --------------------------------------------------------------------------


def _round_toward_zero(n1: int, n2: int) -> int:
    q = abs(n1) // abs(n2)
    return q if (n1 < 0) == (n2 < 0) else -q


def values(term: ProgramTerm) -> frozenset[PrecomputedTerm]:
    """The set of values of a ground term.

    Arithmetic is defined on integers only; operations applied to symbolic
    constants (or to #inf/#sup) yield the empty set.  Division and modulo
    round toward zero and exclude zero divisors.
    """
    if not is_ground(term):
        raise ValueError(f"term is not ground: {term!r}")
    return _values(term)


def _int_values(term: ProgramTerm) -> Iterable[int]:
    for v in _values(term):
        if isinstance(v, Numeral):
            yield v.value


def _values(term: ProgramTerm) -> frozenset[PrecomputedTerm]:
    if isinstance(term, (Numeral, SymbolicConstant)) or not isinstance(term, (AbsoluteValue, BinaryOp)):
        return frozenset((term,))
    if isinstance(term, AbsoluteValue):
        return frozenset(Numeral(abs(n)) for n in _int_values(term.arg))
    lefts = tuple(_int_values(term.left))
    rights = tuple(_int_values(term.right))
    result: set[PrecomputedTerm] = set()
    op = term.op
    if op == "..":
        for n1 in lefts:
            for n2 in rights:
                result.update(Numeral(m) for m in range(n1, n2 + 1))
        return frozenset(result)
    for n1 in lefts:
        for n2 in rights:
            if op == "+":
                result.add(Numeral(n1 + n2))
            elif op == "-":
                result.add(Numeral(n1 - n2))
            elif op == "*":
                result.add(Numeral(n1 * n2))
            elif n2 != 0 and op == "/":
                result.add(Numeral(_round_toward_zero(n1, n2)))
            elif n2 != 0 and op == "\\":
                result.add(Numeral(n1 - n2 * _round_toward_zero(n1, n2)))
    return frozenset(result)


def value_tuples(terms: Iterable[ProgramTerm]) -> frozenset[tuple[PrecomputedTerm, ...]]:
    """All tuples of values of a term tuple (cartesian product of value sets)."""
    pools = [sorted(values(t), key=precomputed_sort_key) for t in terms]
    return frozenset(itertools.product(*pools))


def _tuple_sort_key(vt: tuple[PrecomputedTerm, ...]):
    return tuple(precomputed_sort_key(v) for v in vt)


def sorted_value_tuples(terms: Iterable[ProgramTerm]) -> list[tuple[PrecomputedTerm, ...]]:
    return sorted(value_tuples(terms), key=_tuple_sort_key)


# --------------------------------------------------------------------------
# Propositional formulas and the tau transformation of ground rules
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PAtom:
    atom: GroundAtom


@dataclass(frozen=True, slots=True)
class PTop:
    pass


@dataclass(frozen=True, slots=True)
class PBottom:
    pass


@dataclass(frozen=True, slots=True)
class PAnd:
    parts: tuple["PropFormula", ...]


@dataclass(frozen=True, slots=True)
class POr:
    parts: tuple["PropFormula", ...]


@dataclass(frozen=True, slots=True)
class PImplies:
    left: "PropFormula"
    right: "PropFormula"


PropFormula = Union[PAtom, PTop, PBottom, PAnd, POr, PImplies]

TOP = PTop()
BOTTOM = PBottom()


def prop_neg(f: PropFormula) -> PropFormula:
    return PImplies(f, BOTTOM)


def prop_holds(f: PropFormula, interp: Interpretation) -> bool:
    if isinstance(f, PAtom):
        return f.atom in interp
    if isinstance(f, PTop):
        return True
    if isinstance(f, PBottom):
        return False
    if isinstance(f, PAnd):
        return all(prop_holds(p, interp) for p in f.parts)
    if isinstance(f, POr):
        return any(prop_holds(p, interp) for p in f.parts)
    if isinstance(f, PImplies):
        return not prop_holds(f.left, interp) or prop_holds(f.right, interp)
    raise TypeError(f"not a propositional formula: {f!r}")


def tau_literal(lit: Literal) -> PropFormula:
    atoms = [PAtom(GroundAtom(lit.atom.predicate, vt)) for vt in sorted_value_tuples(lit.atom.args)]
    if lit.negations == 1:
        parts: list[PropFormula] = [prop_neg(a) for a in atoms]
    elif lit.negations == 2:
        parts = [prop_neg(prop_neg(a)) for a in atoms]
    else:
        parts = list(atoms)
    return POr(tuple(parts))


def tau_comparison(cmp: Comparison) -> PropFormula:
    for r1 in values(cmp.left):
        for r2 in values(cmp.right):
            if relation_holds(cmp.rel, r1, r2):
                return TOP
    return BOTTOM


def tau_body(body: Iterable) -> PropFormula:
    parts = []
    for elem in body:
        parts.append(tau_literal(elem) if isinstance(elem, Literal) else tau_comparison(elem))
    return PAnd(tuple(parts))


def tau_ground_rule(rule: Rule) -> PropFormula:
    """Transformation of a ground rule into a propositional formula."""
    body = tau_body(rule.body)
    if rule.is_constraint:
        return prop_neg(body)
    head_atoms = [GroundAtom(rule.head.predicate, vt) for vt in sorted_value_tuples(rule.head.args)]
    if rule.is_choice:
        head: PropFormula = PAnd(tuple(POr((PAtom(a), prop_neg(PAtom(a)))) for a in head_atoms))
    else:
        head = PAnd(tuple(PAtom(a) for a in head_atoms))
    return PImplies(body, head)


# --------------------------------------------------------------------------
# Instantiation
# --------------------------------------------------------------------------


def instantiate_rule(rule: Rule, domain: Domain) -> tuple[Rule, ...]:
    variables = rule.variables()
    if not variables:
        return (rule,)
    if not domain:
        raise DomainError("non-empty domain required to instantiate a rule with variables")
    members = sorted(domain, key=precomputed_sort_key)
    instances = []
    for combo in itertools.product(members, repeat=len(variables)):
        binding = dict(zip(variables, combo))
        head = rule.head
        if head is not None:
            head = Atom(head.predicate, tuple(substitute_term(t, binding) for t in head.args))
        body = []
        for elem in rule.body:
            if isinstance(elem, Literal):
                atom = Atom(elem.atom.predicate, tuple(substitute_term(t, binding) for t in elem.atom.args))
                body.append(Literal(atom, elem.negations))
            else:
                body.append(Comparison(elem.rel, substitute_term(elem.left, binding), substitute_term(elem.right, binding)))
        instances.append(Rule(head, tuple(body), rule.choice))
    return tuple(instances)


def instantiate(program: Program, domain: Domain) -> tuple[Rule, ...]:
    """All instances of the program's rules over the finite domain."""
    out: list[Rule] = []
    for rule in program.rules:
        out.extend(instantiate_rule(rule, domain))
    return tuple(out)


def tau_program(program: Program, domain: Domain) -> tuple[PropFormula, ...]:
    return tuple(tau_ground_rule(r) for r in instantiate(program, domain))


# --------------------------------------------------------------------------
# Reducts
# --------------------------------------------------------------------------


def reduct(f: PropFormula, interp: Interpretation) -> PropFormula:
    """The reduct of a propositional formula with respect to an interpretation."""
    if not prop_holds(f, interp):
        return BOTTOM
    if isinstance(f, PAtom):
        return f
    if isinstance(f, PTop):
        return TOP
    if isinstance(f, PAnd):
        return PAnd(tuple(reduct(p, interp) for p in f.parts))
    if isinstance(f, POr):
        return POr(tuple(reduct(p, interp) for p in f.parts))
    if isinstance(f, PImplies):
        return PImplies(reduct(f.left, interp), reduct(f.right, interp))
    raise TypeError(f"not a propositional formula: {f!r}")


class UnsatisfiedMarker:
    """Returned when the reduct of some rule instance is falsified by I."""

    _instance: "UnsatisfiedMarker | None" = None

    def __new__(cls) -> "UnsatisfiedMarker":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNSATISFIED"


UNSATISFIED = UnsatisfiedMarker()


@dataclass(frozen=True, slots=True)
class ReductClause:
    """body is a conjunction of disjunctions of atoms; head a conjunction of atoms."""

    body: tuple[frozenset[GroundAtom], ...]
    head: frozenset[GroundAtom]


@dataclass(frozen=True, slots=True)
class ReductTheory:
    clauses: tuple[ReductClause, ...]


# Precompiled per-instance data so that reduct construction over many
# candidate interpretations stays cheap.


@dataclass(frozen=True, slots=True)
class _GroundInstance:
    rule: Rule
    head_atoms: tuple[GroundAtom, ...] | None  # None for constraints
    choice: bool
    # (negations, atoms-over-values) per body literal; comparisons folded below
    body_literals: tuple[tuple[int, frozenset[GroundAtom]], ...]
    body_comparison_false: bool


@lru_cache(maxsize=4096)
def _prepare(program: Program, domain: Domain) -> tuple[_GroundInstance, ...]:
    prepared = []
    for rule in instantiate(program, domain):
        comparison_false = False
        body_literals = []
        for elem in rule.body:
            if isinstance(elem, Comparison):
                if isinstance(tau_comparison(elem), PBottom):
                    comparison_false = True
            else:
                atoms = frozenset(GroundAtom(elem.atom.predicate, vt) for vt in value_tuples(elem.atom.args))
                body_literals.append((elem.negations, atoms))
        if rule.is_constraint:
            head_atoms = None
        else:
            head_atoms = tuple(
                GroundAtom(rule.head.predicate, vt) for vt in sorted_value_tuples(rule.head.args)
            )
        prepared.append(_GroundInstance(rule, head_atoms, rule.choice, tuple(body_literals), comparison_false))
    return tuple(prepared)


def _body_reduct(inst: _GroundInstance, interp: Interpretation) -> tuple[frozenset[GroundAtom], ...] | None:
    """Positive body disjunctions restricted to I, or None when I falsifies the body."""
    if inst.body_comparison_false:
        return None
    out = []
    for negations, atoms in inst.body_literals:
        if negations == 0:
            kept = atoms & interp
            if not kept:
                return None
            out.append(kept)
        elif negations == 1:
            if atoms <= interp and atoms:
                return None
            if not atoms:  # empty disjunction of negated atoms is falsum
                return None
        else:  # negations == 2
            if not (atoms & interp):
                return None
    return tuple(out)


def normalize_reduct(
    program: Program, interp: Interpretation, domain: Domain
) -> ReductTheory | UnsatisfiedMarker:
    """The reduct of the instantiated program as a normalized clause theory.

    Returns UNSATISFIED exactly when the reduct of some instance is falsified
    by `interp` (a violated constraint, or a basic head not fully contained
    in `interp` while the body reduct holds).
    """
    clauses = []
    for inst in _prepare(program, domain):
        body = _body_reduct(inst, interp)
        if inst.head_atoms is None:  # constraint
            if body is not None:
                return UNSATISFIED
            continue
        if inst.choice:
            if body is None:
                continue
            head = frozenset(a for a in inst.head_atoms if a in interp)
        else:
            head = frozenset(inst.head_atoms)
            if not head <= interp:
                if body is not None:
                    return UNSATISFIED
                continue
            if body is None:
                continue
        if head:
            clauses.append(ReductClause(body, head))
    return ReductTheory(tuple(clauses))


# --------------------------------------------------------------------------
# Immediate consequences and minimal models
# --------------------------------------------------------------------------


def immediate_consequences(theory: ReductTheory, interp: Interpretation) -> Interpretation:
    derived: set[GroundAtom] = set()
    for clause in theory.clauses:
        if all(disjunction & interp for disjunction in clause.body):
            derived.update(clause.head)
    return frozenset(derived)


def minimal_model(theory: ReductTheory) -> Interpretation:
    """Least fixpoint of the immediate-consequence operator, starting from the empty set."""
    current: Interpretation = frozenset()
    while True:
        step = immediate_consequences(theory, current)
        merged = current | step
        if merged == current:
            return current
        current = merged


# --------------------------------------------------------------------------
# Stable, supported, and well-supported checks
# --------------------------------------------------------------------------


def is_stable(program: Program, interp: Interpretation, domain: Domain) -> bool:
    theory = normalize_reduct(program, interp, domain)
    if theory is UNSATISFIED:
        return False
    return minimal_model(theory) == interp


def _support_candidates(program: Program, interp: Interpretation, domain: Domain):
    """Per atom of I: the supporting instances, each with its positive-witness sets.

    An instance supports p(r) when its head literal takes value r and I
    satisfies tau of its body; the witness sets list, per positive body
    literal, the values that are in I.  Returns None when some atom has no
    supporting instance at all.
    """
    support: dict[GroundAtom, list[tuple[frozenset[GroundAtom], ...]]] = {a: [] for a in interp}
    for inst in _prepare(program, domain):
        if inst.head_atoms is None:
            continue
        body = _body_reduct(inst, interp)
        if body is None:  # I does not satisfy tau(body)
            continue
        for atom in inst.head_atoms:
            if atom in support:
                support[atom].append(body)
    if any(not options for options in support.values()):
        return None
    return support


def is_supported(program: Program, interp: Interpretation, domain: Domain) -> bool:
    if normalize_reduct(program, interp, domain) is UNSATISFIED:
        return False
    return _support_candidates(program, interp, domain) is not None


def well_support_ranks(
    program: Program, interp: Interpretation, domain: Domain
) -> dict[GroundAtom, int] | None:
    """Layered derivation ranks witnessing well-support, or None.

    An atom gets rank n+1 when some supporting instance has, for every
    positive body literal, a witness of rank at most n.  The ranks double as
    derivation levels: they are bounded by |I| and the induced order (lower
    rank precedes higher) is a strict well-founded partial order.
    """
    if normalize_reduct(program, interp, domain) is UNSATISFIED:
        return None
    support = _support_candidates(program, interp, domain)
    if support is None:
        return None
    ranks: dict[GroundAtom, int] = {}
    level = 0
    pending = set(interp)
    while pending:
        level += 1
        layer = set()
        for atom in pending:
            for witness_sets in support[atom]:
                if all(any(w in ranks for w in ws) for ws in witness_sets):
                    layer.add(atom)
                    break
        if not layer:
            return None
        for atom in layer:
            ranks[atom] = level
        pending -= layer
    return ranks


def is_well_supported(program: Program, interp: Interpretation, domain: Domain) -> bool:
    return well_support_ranks(program, interp, domain) is not None


@lru_cache(maxsize=8)
def _strict_partial_orders_on(n: int) -> tuple[frozenset[tuple[int, int]], ...]:
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    orders = []
    for bits in itertools.product((False, True), repeat=len(pairs)):
        rel = frozenset(p for p, bit in zip(pairs, bits) if bit)
        ok = True
        for a, b in rel:
            if not ok:
                break
            for c, d in rel:
                if b == c and (a, d) not in rel:
                    ok = False
                    break
        if ok:
            orders.append(rel)
    return tuple(orders)


def strict_partial_orders(items: tuple) -> list[frozenset[tuple]]:
    """All irreflexive transitive relations over `items` (meant for tiny sets)."""
    return [
        frozenset((items[i], items[j]) for i, j in rel)
        for rel in _strict_partial_orders_on(len(items))
    ]


def is_well_supported_by_order_enumeration(
    program: Program, interp: Interpretation, domain: Domain, max_size: int = 4
) -> bool:
    """Independent cross-check: search all strict partial orders directly."""
    if len(interp) > max_size:
        raise ValueError(f"order enumeration limited to |I| <= {max_size}")
    if normalize_reduct(program, interp, domain) is UNSATISFIED:
        return False
    support = _support_candidates(program, interp, domain)
    if support is None:
        return False
    atoms = tuple(sorted(interp, key=atom_sort_key))
    for order in strict_partial_orders(atoms):
        def supported_under(atom: GroundAtom) -> bool:
            return any(
                all(any((w, atom) in order for w in ws) for ws in witness_sets)
                for witness_sets in support[atom]
            )

        if all(supported_under(a) for a in atoms):
            return True
    return bool(not atoms)


# --------------------------------------------------------------------------
# Default domains and stable-model enumeration
# --------------------------------------------------------------------------


def _program_terms(program: Program):
    for rule in program.rules:
        if rule.head is not None:
            yield from rule.head.args
        for elem in rule.body:
            if isinstance(elem, Literal):
                yield from elem.atom.args
            else:
                yield elem.left
                yield elem.right


def _subterms(term: ProgramTerm):
    yield term
    if isinstance(term, AbsoluteValue):
        yield from _subterms(term.arg)
    elif isinstance(term, BinaryOp):
        yield from _subterms(term.left)
        yield from _subterms(term.right)


def program_constants(program: Program) -> frozenset[PrecomputedTerm]:
    """Precomputed terms occurring syntactically anywhere in the program."""
    out: set[PrecomputedTerm] = set()
    for term in _program_terms(program):
        for sub in _subterms(term):
            if isinstance(sub, (Numeral, SymbolicConstant)):
                out.add(sub)
            elif isinstance(sub, BinaryOp) and sub.op == "-" and sub.left == Numeral(0) and isinstance(sub.right, Numeral):
                out.add(Numeral(-sub.right.value))
    return frozenset(out)


def default_domain(program: Program, int_radius: int = 2) -> Domain:
    """Symbolic constants plus program integers widened by `int_radius`.

    Falls back to the integers -radius..radius when a program with variables
    mentions no terms at all.
    """
    constants = program_constants(program)
    out: set[PrecomputedTerm] = set(c for c in constants if isinstance(c, SymbolicConstant))
    ints = [c.value for c in constants if isinstance(c, Numeral)]
    for n in ints:
        out.update(Numeral(m) for m in range(n - int_radius, n + int_radius + 1))
    if not out and any(rule.variables() for rule in program.rules):
        out.update(Numeral(m) for m in range(-int_radius, int_radius + 1))
    return frozenset(out)


def possible_atoms(program: Program, domain: Domain) -> frozenset[GroundAtom]:
    """Optimistic upper bound: every stable model is a subset of this closure.

    Computed as the least fixpoint treating negated and doubly negated
    literals as satisfiable and choice heads as derivable.
    """
    instances = _prepare(program, domain)
    current: set[GroundAtom] = set()
    changed = True
    while changed:
        changed = False
        for inst in instances:
            if inst.head_atoms is None or inst.body_comparison_false:
                continue
            fires = True
            for negations, atoms in inst.body_literals:
                if negations == 0 and not (atoms & current):
                    fires = False
                    break
                if negations == 2 and not atoms:
                    fires = False
                    break
                if negations == 1 and not atoms:
                    fires = False
                    break
            if fires:
                for atom in inst.head_atoms:
                    if atom not in current:
                        current.add(atom)
                        changed = True
    return frozenset(current)


def stable_models(program: Program, domain: Domain, max_atoms: int = 20) -> list[Interpretation]:
    """All stable models over the domain, by candidate enumeration.

    Candidates are subsets of the optimistic closure; `max_atoms` guards the
    2^n enumeration.
    """
    pool = sorted(possible_atoms(program, domain), key=atom_sort_key)
    if len(pool) > max_atoms:
        raise ValueError(
            f"candidate space too large: {len(pool)} atoms (limit {max_atoms})"
        )
    models = []
    for size in range(len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            candidate = frozenset(combo)
            if is_stable(program, candidate, domain):
                models.append(candidate)
    return models
