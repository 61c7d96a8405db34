import random

import pytest
from hypothesis import given, settings, strategies as st

from ocomp.fol import (
    And,
    Bottom,
    Cmp,
    Const,
    Exists,
    FALSE,
    Forall,
    Implies,
    Not,
    Or,
    PredApp,
    Sort,
    TRUE,
    Top,
    Var,
    alpha_equal,
    count_nodes,
    evaluate,
    extend_standard,
    format_formula,
    free_vars,
    parse_spec,
)
from ocomp.ground import GroundAtom
from ocomp.ordered import OcConfig, ordered_completion
from ocomp.simplify import simplify_formula
from ocomp.syntax import Numeral, SymbolicConstant, parse_program
from ocomp.tau_star import tau_star_program


def num(n):
    return Numeral(n)


class TestGoldenSimplifications:
    def test_tau_star_of_the_arithmetic_rule(self):
        prog = parse_program("p(A) :- q(A-1).")
        (sentence,) = tau_star_program(prog)
        simplified = simplify_formula(sentence)
        expected = parse_spec("forall A$i (q(A$i - 1) -> p(A$i)).")[0]
        assert alpha_equal(simplified, expected)

    def test_truth_constant_absorption(self):
        assert simplify_formula(And((TRUE, PredApp("p")))) == PredApp("p")
        assert simplify_formula(Or((FALSE, PredApp("p")))) == PredApp("p")
        assert simplify_formula(And((FALSE, PredApp("p")))) == FALSE
        assert simplify_formula(Implies(FALSE, PredApp("p"))) == TRUE

    def test_ordered_definition_of_the_arithmetic_rule(self):
        prog = parse_program("p(A) :- q(A-1).")
        cfg = OcConfig(simplified=True, complete_undefined=False)
        definition = ordered_completion(prog, cfg).section("definition:p")[0]
        simplified = simplify_formula(definition)
        expected = parse_spec(
            "forall V1 (p(V1) -> exists A$i (V1 = A$i and q(A$i - 1) and less_q_p(A$i - 1, V1)))."
        )[0]
        assert alpha_equal(simplified, expected)

    def test_choice_rule_keeps_the_double_negation(self):
        prog = parse_program("{p(A)} :- r(A,B).")
        cfg = OcConfig(simplified=True, complete_undefined=False)
        definition = ordered_completion(prog, cfg).section("definition:p")[0]
        simplified = simplify_formula(definition)
        expected = parse_spec(
            "forall V1 (p(V1) -> exists B (r(V1, B) and less_r_p(V1, B, V1) and not not p(V1)))."
        )[0]
        assert alpha_equal(simplified, expected)

    def test_double_negation_dropped_only_on_request(self):
        f = Not(Not(PredApp("p")))
        assert simplify_formula(f) == f
        assert simplify_formula(f, drop_double_negation=True) == PredApp("p")

    def test_level_variant_of_the_transitive_closure_definition(self):
        prog = parse_program("t(X,Y) :- e(X,Y).\nt(X,Y) :- e(X,Z), t(Z,Y).")
        cfg = OcConfig(variant="level_mapping", simplified=True, complete_undefined=False)
        definition = ordered_completion(prog, cfg).section("definition:t")[0]
        simplified = simplify_formula(definition)
        expected = parse_spec(
            "forall V1 V2 (t(V1, V2) -> "
            "e(V1, V2) and lvl_e(V1, V2) < lvl_t(V1, V2) or "
            "exists Z (e(V1, Z) and lvl_e(V1, Z) < lvl_t(V1, V2) and "
            "t(Z, V2) and lvl_t(Z, V2) < lvl_t(V1, V2)))."
        )[0]
        assert alpha_equal(simplified, expected)

    def test_ground_comparison_folding(self):
        assert simplify_formula(Cmp("<", Const(num(1)), Const(num(2)))) == TRUE
        assert simplify_formula(Cmp(">", Const(num(1)), Const(SymbolicConstant("a")))) == FALSE

    def test_unused_quantifier_is_dropped(self):
        f = Forall(Var("X"), PredApp("p"))
        assert simplify_formula(f) == PredApp("p")

    def test_subsumed_conjunct_is_removed(self):
        weak, strong = parse_spec(
        "exists Z (Z = 1 and q(Z)). exists Z (Z = 1 and q(Z) and less_q_p(Z, 2))."
        )
        f = And((weak, strong))
        simplified = simplify_formula(And((PredApp("marker"), f)))
        # the weak conjunct disappears; the strong one keeps its content
        text = format_formula(simplified)
        assert text.count("q(") == 1


# random equivalence testing: formulas over a tiny vocabulary, evaluated
# against many random interpretations

_vocab = [("p", 1), ("q", 1), ("r", 0)]
_domain = (num(1), num(2), SymbolicConstant("a"))

_terms = st.one_of(
    st.sampled_from([Const(t) for t in _domain]),
    st.sampled_from([Var("X"), Var("Y")]),
)

_atoms = st.one_of(
    st.builds(lambda t: PredApp("p", (t,)), _terms),
    st.builds(lambda t: PredApp("q", (t,)), _terms),
    st.just(PredApp("r")),
    st.builds(lambda a, b: Cmp("<", a, b), _terms, _terms),
    st.builds(lambda a, b: Cmp("=", a, b), _terms, _terms),
    st.just(TRUE),
    st.just(FALSE),
)

_formulas = st.recursive(
    _atoms,
    lambda inner: st.one_of(
        st.lists(inner, min_size=1, max_size=3).map(lambda xs: And(tuple(xs))),
        st.lists(inner, min_size=1, max_size=3).map(lambda xs: Or(tuple(xs))),
        st.tuples(inner, inner).map(lambda t: Implies(*t)),
        inner.map(lambda f: Exists(Var("X"), f)),
        inner.map(lambda f: Forall(Var("Y"), f)),
    ),
    max_leaves=12,
)


def _close(f):
    out = f
    for v in sorted(free_vars(f), key=lambda v: v.name):
        out = Forall(v, out)
    return out


def _random_interp(rng):
    atoms = [GroundAtom("p", (t,)) for t in _domain] + [GroundAtom("q", (t,)) for t in _domain] + [GroundAtom("r")]
    base = frozenset(a for a in atoms if rng.random() < 0.5)
    return extend_standard(base, general_domain=frozenset(_domain), int_range=(-3, 3))


@settings(max_examples=150, deadline=None)
@given(_formulas, st.integers(0, 10_000))
def test_simplify_preserves_evaluation(f, seed):
    f = _close(f)
    simplified = simplify_formula(f)
    rng = random.Random(seed)
    for _ in range(50):
        m = _random_interp(rng)
        assert evaluate(f, m) == evaluate(simplified, m)


@settings(max_examples=150, deadline=None)
@given(_formulas)
def test_simplify_is_idempotent(f):
    f = _close(f)
    once = simplify_formula(f)
    assert simplify_formula(once) == once


@settings(max_examples=150, deadline=None)
@given(_formulas)
def test_simplify_never_grows(f):
    f = _close(f)
    assert count_nodes(simplify_formula(f)) <= count_nodes(f)
