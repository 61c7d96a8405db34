"""Ordered completion: derivation-order predicates with irreflexivity and
transitivity axioms, the level-mapping variant with non-negativity axioms,
the simplified forms, theory bundles, and the finite witness searches used
to decide whether an interpretation extends to a model.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Literal as TLiteral

from . import ground as _ground
from .completion import (
    RuleEntry,
    TheoryEntries,
    UnsupportedTheoryError,
    aligned_guard,
    comp_rules,
    program_entries,
    standard_head_vars,
    theory_entries,
)
from .fol import (
    FALSE,
    And,
    Cmp,
    Const,
    Exists,
    FiniteStdInterp,
    Forall,
    Formula,
    Implies,
    LvlApp,
    Not,
    PredApp,
    Sort,
    Var,
    evaluate,
    evaluation_universe,
    extend_standard,
    forall,
    make_and,
    make_or,
    rename_bound,
    substitute,
)
from .ground import Domain, GroundAtom, Interpretation, atom_sort_key
from .syntax import Numeral, Program


class VocabularyCollisionError(ValueError):
    """A generated order/level symbol clashes with an existing predicate."""


Variant = TLiteral["order_predicates", "level_mapping"]


@dataclass(frozen=True)
class OcConfig:
    variant: Variant = "order_predicates"
    simplified: bool = True
    complete_undefined: bool = True


def order_predicate_name(p: str, q: str) -> str:
    return f"less_{p}_{q}"


def level_function_name(p: str) -> str:
    return f"lvl_{p}"


def check_vocabulary(predicates: dict[str, int], variant: Variant) -> None:
    if variant == "order_predicates":
        generated: dict[str, tuple[str, str]] = {}
        for p in predicates:
            for q in predicates:
                name = order_predicate_name(p, q)
                if name in predicates:
                    raise VocabularyCollisionError(f"predicate {name!r} clashes with an order predicate")
                other = generated.setdefault(name, (p, q))
                if other != (p, q):
                    raise VocabularyCollisionError(
                        f"order predicates for {other} and {(p, q)} would both be named {name!r}"
                    )
    else:
        for p in predicates:
            name = level_function_name(p)
            if name in predicates:
                raise VocabularyCollisionError(f"predicate {name!r} clashes with a level function")


# --------------------------------------------------------------------------
# Axioms
# --------------------------------------------------------------------------


def _numbered_vars(count: int, start: int = 1) -> tuple[Var, ...]:
    return tuple(Var(f"X{start + i}", Sort.GENERAL) for i in range(count))


def axiom_formulas(predicates: dict[str, int], variant: Variant) -> list[Formula]:
    """Irreflexivity and transitivity axioms, or level non-negativity axioms."""
    out: list[Formula] = []
    if variant == "order_predicates":
        for p in sorted(predicates):
            xs = _numbered_vars(predicates[p])
            out.append(forall(xs, Not(PredApp(order_predicate_name(p, p), xs + xs))))
        for p, q, r in itertools.product(sorted(predicates), repeat=3):
            xs = _numbered_vars(predicates[p])
            ys = _numbered_vars(predicates[q], start=len(xs) + 1)
            zs = _numbered_vars(predicates[r], start=len(xs) + len(ys) + 1)
            out.append(
                forall(
                    xs + ys + zs,
                    Implies(
                        And(
                            (
                                PredApp(order_predicate_name(p, q), xs + ys),
                                PredApp(order_predicate_name(q, r), ys + zs),
                            )
                        ),
                        PredApp(order_predicate_name(p, r), xs + zs),
                    ),
                )
            )
    else:
        for p in sorted(predicates):
            xs = _numbered_vars(predicates[p])
            out.append(forall(xs, Cmp(">=", LvlApp(p, xs), Const(Numeral(0)))))
    return out


def axioms(program: Program, variant: Variant = "order_predicates") -> Formula:
    return make_and(axiom_formulas(program.predicates(), variant))


# --------------------------------------------------------------------------
# Ordered definitions
# --------------------------------------------------------------------------


def _ord_atom(variant: Variant, body_pred: str, body_args: tuple, head_pred: str, head_vars: tuple[Var, ...]) -> Formula:
    if variant == "order_predicates":
        return PredApp(order_predicate_name(body_pred, head_pred), tuple(body_args) + head_vars)
    return Cmp("<", LvlApp(body_pred, tuple(body_args)), LvlApp(head_pred, head_vars))


def _guard_members(guard: Formula) -> tuple[tuple[Var, ...], tuple[Formula, ...]]:
    prefix: list[Var] = []
    inner = guard
    while isinstance(inner, Exists):
        prefix.append(inner.var)
        inner = inner.body
    members = inner.parts if isinstance(inner, And) else (inner,)
    return tuple(prefix), members


def _rebuild_guard(prefix: tuple[Var, ...], members: Iterable[Formula]) -> Formula:
    out = make_and(members)
    for v in reversed(prefix):
        out = Exists(v, out)
    return out


def ordered_guard(guard: Formula, head_pred: str, head_vars: tuple[Var, ...], cfg: OcConfig) -> Formula:
    """Attach derivation-order conjuncts for the positive body literals.

    A positive body literal shows up in a guard as a top-level positive
    predicate application, either directly or under the existential binders
    of its value formula.  In the simplified form the order atom is grouped
    with the application in place; otherwise a copy of the literal conjunct
    carrying the order atom is appended, leaving the original intact.
    Double negations must be preserved in the input: `not not p` marks a
    choice head, not a positive literal.
    """

    def ord_for(atom: PredApp) -> Formula:
        return _ord_atom(cfg.variant, atom.name, atom.args, head_pred, head_vars)

    prefix, members = _guard_members(guard)
    new_members: list[Formula] = []
    appended: list[Formula] = []
    for member in members:
        binders, parts = _guard_members(member)
        indices = [i for i, part in enumerate(parts) if isinstance(part, PredApp)]
        if not indices:
            new_members.append(member)
            continue
        if cfg.simplified:
            grouped = list(parts)
            for i in indices:
                grouped[i] = And((parts[i], ord_for(parts[i])))
            new_members.append(_rebuild_guard(binders, grouped))
        else:
            new_members.append(member)
            extended = list(parts)
            for i in reversed(indices):
                extended[i + 1 : i + 1] = [ord_for(parts[i])]
            copy = _rebuild_guard(binders, extended)
            appended.append(rename_bound(copy, prefix="W") if binders else copy)
    return _rebuild_guard(prefix, tuple(new_members) + tuple(appended))


def oc_def_from_entries(pred: str, entries: TheoryEntries, cfg: OcConfig) -> Formula:
    head_vars = standard_head_vars(entries.predicates[pred])
    guards = []
    for entry in entries.by_pred.get(pred, ()):
        guards.append(ordered_guard(aligned_guard(entry, head_vars), pred, head_vars, cfg))
    return forall(head_vars, Implies(PredApp(pred, head_vars), make_or(guards)))


def oc_def(pred: str, program: Program, cfg: OcConfig = OcConfig()) -> Formula:
    """The ordered definition of one predicate."""
    return oc_def_from_entries(pred, program_entries(program), cfg)


# --------------------------------------------------------------------------
# Theory bundles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoryBundle:
    """Named groups of sentences, ordered for reporting and emission."""

    sections: tuple[tuple[str, tuple[Formula, ...]], ...]

    def section(self, name: str) -> tuple[Formula, ...]:
        for key, formulas in self.sections:
            if key == name:
                return formulas
        return ()

    def section_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.sections)

    def all_formulas(self, skip: tuple[str, ...] = ()) -> list[Formula]:
        out: list[Formula] = []
        for name, formulas in self.sections:
            if name not in skip:
                out.extend(formulas)
        return out

    def conjunction(self, skip: tuple[str, ...] = ()) -> Formula:
        return make_and(self.all_formulas(skip))

    def map_formulas(self, fn: Callable[[Formula], Formula]) -> "TheoryBundle":
        return TheoryBundle(
            tuple((name, tuple(fn(f) for f in formulas)) for name, formulas in self.sections)
        )


def ordered_bundle_from_entries(entries: TheoryEntries, cfg: OcConfig) -> TheoryBundle:
    check_vocabulary(entries.predicates, cfg.variant)
    sections: list[tuple[str, tuple[Formula, ...]]] = [
        ("axioms", tuple(axiom_formulas(entries.predicates, cfg.variant))),
        ("constraints", entries.constraints),
    ]
    rules: list[Formula] = []
    defs: list[tuple[str, tuple[Formula, ...]]] = []
    for pred in sorted(entries.predicates):
        if not entries.by_pred.get(pred) and not cfg.complete_undefined:
            continue
        rules.append(comp_rules(pred, entries))
        defs.append((f"definition:{pred}", (oc_def_from_entries(pred, entries, cfg),)))
    sections.append(("rules", tuple(rules)))
    sections.extend(defs)
    return TheoryBundle(tuple(sections))


from functools import lru_cache


@lru_cache(maxsize=4096)
def ordered_completion(program: Program, cfg: OcConfig = OcConfig()) -> TheoryBundle:
    """The ordered completion of a program as a named theory bundle."""
    return ordered_bundle_from_entries(program_entries(program), cfg)


def ordered_completion_of_theory(sentences: Iterable[Formula], cfg: OcConfig = OcConfig()) -> TheoryBundle:
    """Ordered completion of a theory in translated-rule shape."""
    return ordered_bundle_from_entries(theory_entries(list(sentences)), cfg)


def completion_bundle(program: Program, complete_undefined: bool = True) -> TheoryBundle:
    """Ordinary completion arranged like an ordered-completion bundle."""
    entries = program_entries(program)
    from .completion import comp_def

    sections: list[tuple[str, tuple[Formula, ...]]] = [
        ("axioms", ()),
        ("constraints", entries.constraints),
    ]
    rules: list[Formula] = []
    defs: list[tuple[str, tuple[Formula, ...]]] = []
    for pred in sorted(entries.predicates):
        if not entries.by_pred.get(pred) and not complete_undefined:
            continue
        rules.append(comp_rules(pred, entries))
        defs.append((f"definition:{pred}", (comp_def(pred, entries),)))
    sections.append(("rules", tuple(rules)))
    sections.extend(defs)
    return TheoryBundle(tuple(sections))


# --------------------------------------------------------------------------
# Witness searches over finite interpretations
# --------------------------------------------------------------------------


def order_facts_from_relation(pairs: Iterable[tuple[GroundAtom, GroundAtom]]) -> frozenset[GroundAtom]:
    return frozenset(
        GroundAtom(order_predicate_name(a.predicate, b.predicate), a.args + b.args) for a, b in pairs
    )


def rank_order_pairs(ranks: dict[GroundAtom, int]) -> frozenset[tuple[GroundAtom, GroundAtom]]:
    return frozenset((a, b) for a in ranks for b in ranks if ranks[a] < ranks[b])


def total_order_pairs(atoms: tuple[GroundAtom, ...]) -> frozenset[tuple[GroundAtom, GroundAtom]]:
    return frozenset((atoms[i], atoms[j]) for i in range(len(atoms)) for j in range(i + 1, len(atoms)))


@dataclass(frozen=True)
class _SearchSetup:
    bundle: TheoryBundle
    base: FiniteStdInterp
    sigma0_ok: bool
    order_sensitive: list[Formula]
    def_instances: dict[GroundAtom, Formula]


def _definition_instance(def_formula: Formula, atom: GroundAtom) -> Formula:
    """The right-hand side of a definition, instantiated at one true atom."""
    vars_: list[Var] = []
    matrix = def_formula
    while isinstance(matrix, Forall):
        vars_.append(matrix.var)
        matrix = matrix.body
    if not isinstance(matrix, Implies):
        raise ValueError(f"not a definition formula: {def_formula}")
    mapping = {v: Const(value) for v, value in zip(vars_, atom.args)}
    return substitute(matrix.right, mapping)


def _prepare_search(program: Program, interp: Interpretation, domain: Domain, cfg: OcConfig) -> _SearchSetup:
    bundle = ordered_completion(program, cfg)
    general, int_range = evaluation_universe(program, domain)
    lo, hi = int_range
    # level values range over 0..|I|; make sure the interval covers them
    int_range = (min(lo, -1), max(hi, len(interp) + 1))
    m = extend_standard(interp, general_domain=general, int_range=int_range)
    sigma0 = list(bundle.section("constraints")) + list(bundle.section("rules"))
    sigma0_ok = all(evaluate(f, m) for f in sigma0)
    # definitions first: during enumeration they fail fastest
    defs_by_pred = {
        name.split(":", 1)[1]: fs[0] for name, fs in bundle.sections if name.startswith("definition:")
    }
    instances: dict[GroundAtom, Formula] = {}
    if sigma0_ok:
        for atom in interp:
            if atom.predicate in defs_by_pred:
                instances[atom] = _definition_instance(defs_by_pred[atom.predicate], atom)
            else:
                instances[atom] = FALSE
    defs = [f for name, fs in bundle.sections if name.startswith("definition:") for f in fs]
    return _SearchSetup(bundle, m, sigma0_ok, defs + list(bundle.section("axioms")), instances)


def _layered_order_search(setup: _SearchSetup, atoms: tuple[GroundAtom, ...]) -> bool:
    """Greedy layered placement, each step justified by evaluating the
    instantiated definition under the placed-so-far order facts.

    Complete because the order atoms occur positively in the definitions: a
    placement that is justified stays justified as the relation grows, and
    any witnessing relation can be replayed layer by layer.
    """
    placed: list[list[GroundAtom]] = []
    remaining = set(atoms)
    pairs: set[tuple[GroundAtom, GroundAtom]] = set()
    flat_placed: list[GroundAtom] = []
    while remaining:
        layer = []
        for atom in sorted(remaining, key=atom_sort_key):
            candidate = pairs | {(w, atom) for w in flat_placed}
            m = setup.base.with_order_facts(order_facts_from_relation(candidate))
            if evaluate(setup.def_instances[atom], m):
                layer.append(atom)
        if not layer:
            return False
        for atom in layer:
            pairs.update((w, atom) for w in flat_placed)
        flat_placed.extend(layer)
        remaining.difference_update(layer)
        placed.append(layer)
    final = setup.base.with_order_facts(order_facts_from_relation(pairs))
    result = all(evaluate(f, final) for f in setup.order_sensitive)
    if not result:
        raise RuntimeError("layered order witness failed the full evaluation")
    return True


def order_extension_exists(
    program: Program,
    interp: Interpretation,
    domain: Domain,
    cfg: OcConfig = OcConfig(),
    search: TLiteral["layered", "total", "partial"] = "layered",
    max_atoms: int = 8,
) -> bool:
    """Decide whether some extension by order facts satisfies the ordered
    completion.

    Candidate relations range over the atoms of `interp`.  The layered mode
    justifies one derivation layer at a time by evaluating the instantiated
    definitions and is complete for any interpretation size.  The
    enumeration modes try every total order, or every irreflexive
    transitive relation, and are meant for small interpretations.
    """
    if cfg.variant != "order_predicates":
        raise ValueError("order search applies to the order-predicate variant")
    setup = _prepare_search(program, interp, domain, cfg)
    if not setup.sigma0_ok:
        return False
    atoms = tuple(sorted(interp, key=atom_sort_key))
    if search == "layered":
        return _layered_order_search(setup, atoms)
    if len(atoms) > max_atoms:
        raise ValueError(f"order enumeration limited to |I| <= {max_atoms}")

    def satisfied(pairs) -> bool:
        m = setup.base.with_order_facts(order_facts_from_relation(pairs))
        return all(evaluate(f, m) for f in setup.order_sensitive)

    ranks = _ground.well_support_ranks(program, interp, domain)
    if ranks is not None and satisfied(rank_order_pairs(ranks)):
        return True
    if search == "total":
        candidates = (total_order_pairs(perm) for perm in itertools.permutations(atoms))
    else:
        candidates = iter(_ground.strict_partial_orders(atoms))
    return any(satisfied(pairs) for pairs in candidates)


def _canonical_level_maps(atoms: tuple[GroundAtom, ...], bound: int):
    """Level assignments up to order-isomorphism, with values in 0..bound.

    Only the relative order of levels matters to the definitions, so maps
    are normalized to dense ranks before deduplication.
    """
    seen: set[tuple[int, ...]] = set()
    for raw in itertools.product(range(bound + 1), repeat=len(atoms)):
        levels = sorted(set(raw))
        normal = tuple(levels.index(v) for v in raw)
        if normal in seen:
            continue
        seen.add(normal)
        yield dict(zip(atoms, normal))


def _layered_level_search(setup: _SearchSetup, atoms: tuple[GroundAtom, ...]) -> bool:
    levels: dict[GroundAtom, int] = {}
    remaining = set(atoms)
    current = 0
    while remaining:
        layer = []
        for atom in sorted(remaining, key=atom_sort_key):
            candidate = dict(levels)
            for other in remaining:
                candidate[other] = current
            m = setup.base.with_level_map(candidate)
            if evaluate(setup.def_instances[atom], m):
                layer.append(atom)
        if not layer:
            return False
        for atom in layer:
            levels[atom] = current
        remaining.difference_update(layer)
        current += 1
    final = setup.base.with_level_map(levels)
    result = all(evaluate(f, final) for f in setup.order_sensitive)
    if not result:
        raise RuntimeError("layered level witness failed the full evaluation")
    return True


def level_extension_exists(
    program: Program,
    interp: Interpretation,
    domain: Domain,
    bound: int | None = None,
    cfg: OcConfig | None = None,
    search: TLiteral["layered", "canonical", "exhaustive"] = "layered",
    max_atoms: int = 8,
) -> bool:
    """Decide whether some level assignment with values in 0..bound
    satisfies the level-mapping ordered completion.

    The layered mode assigns levels by derivation layer; `canonical` tries
    every assignment up to order-isomorphism, `exhaustive` every raw map.
    """
    cfg = replace(cfg or OcConfig(), variant="level_mapping")
    setup = _prepare_search(program, interp, domain, cfg)
    if not setup.sigma0_ok:
        return False
    atoms = tuple(sorted(interp, key=atom_sort_key))
    if bound is None:
        bound = len(interp)
    if search == "layered":
        return _layered_level_search(setup, atoms)
    if len(atoms) > max_atoms:
        raise ValueError(f"level enumeration limited to |I| <= {max_atoms}")

    def satisfied(mapping: dict[GroundAtom, int]) -> bool:
        m = setup.base.with_level_map(mapping)
        return all(evaluate(f, m) for f in setup.order_sensitive)

    ranks = _ground.well_support_ranks(program, interp, domain)
    if ranks is not None and satisfied({a: r - 1 for a, r in ranks.items()}):
        return True
    if search == "exhaustive":
        candidates = (
            dict(zip(atoms, raw)) for raw in itertools.product(range(bound + 1), repeat=len(atoms))
        )
    else:
        candidates = _canonical_level_maps(atoms, bound)
    return any(satisfied(mapping) for mapping in candidates)
