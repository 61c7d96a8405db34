import pytest
from hypothesis import given, settings, strategies as st

from ocomp.fol import (
    AbsT,
    And,
    Arith,
    Cmp,
    Const,
    Exists,
    ExtensionError,
    FALSE,
    Forall,
    Implies,
    LvlApp,
    Not,
    Or,
    PredApp,
    SIGMA0,
    SigmaLevel,
    SigmaOrder,
    Sort,
    TRUE,
    UnboundIntRangeError,
    Var,
    alpha_equal,
    atoms_of,
    count_nodes,
    evaluate,
    evaluate_flagged,
    evaluation_universe,
    extend_standard,
    format_formula,
    free_vars,
    parse_spec,
    rename_bound,
    restrict,
    values_closed,
)
from ocomp.ground import GroundAtom, prop_holds, tau_ground_rule, instantiate
from ocomp.syntax import BinaryOp, Infimum, Numeral, SymbolicConstant, Supremum, parse_program
from ocomp.tau_star import FreshVarSource, val_formula


def num(n):
    return Numeral(n)


def ga(pred, *args):
    return GroundAtom(pred, tuple(Numeral(a) if isinstance(a, int) else a for a in args))


X = Var("X")
I = Var("I", Sort.INTEGER)


class TestEvaluate:
    def test_universal_over_singleton_domain(self):
        m = extend_standard(frozenset({ga("p", 1)}), general_domain=frozenset({num(1)}))
        assert evaluate(Forall(X, PredApp("p", (X,))), m)

    def test_mixed_sort_comparison_follows_term_order(self):
        m = extend_standard(frozenset(), general_domain=frozenset({num(1)}))
        assert evaluate(Cmp("<", Const(num(5)), Const(SymbolicConstant("a"))), m)
        assert evaluate(Cmp("<", Const(Infimum()), Const(num(-9))), m)
        assert evaluate(Cmp("<", Const(SymbolicConstant("z")), Const(Supremum())), m)

    def test_integer_witness(self):
        m = extend_standard(
            frozenset({ga("p", 1)}), general_domain=frozenset({num(1)}), int_range=(-2, 2)
        )
        f = Exists(I, And((Cmp("=", I, Const(num(1))), PredApp("p", (I,)))))
        assert evaluate(f, m)

    def test_integer_quantifier_requires_interval(self):
        m = extend_standard(frozenset(), general_domain=frozenset({num(1)}))
        with pytest.raises(UnboundIntRangeError):
            evaluate(Exists(I, Cmp("=", I, I)), m)

    def test_arithmetic_and_abs(self):
        m = extend_standard(frozenset(), general_domain=frozenset(), int_range=(-5, 5))
        f = Exists(I, And((Cmp("=", I, Const(num(-3))), Cmp("=", AbsT(I), Const(num(3))))))
        assert evaluate(f, m)

    def test_integer_term_in_general_slot(self):
        # sub-sorting: an arithmetic term can fill a predicate argument
        m = extend_standard(frozenset({ga("p", 3)}), general_domain=frozenset({num(3)}))
        assert evaluate(PredApp("p", (Arith("+", Const(num(1)), Const(num(2))),)), m)

    def test_level_terms(self):
        m = extend_standard(
            frozenset({ga("p", 1), ga("q", 1)}),
            SigmaLevel(frozenset({"p", "q"})),
            level_map={ga("p", 1): 0, ga("q", 1): 2},
            general_domain=frozenset({num(1)}),
            int_range=(-1, 3),
        )
        f = Cmp("<", LvlApp("p", (Const(num(1)),)), LvlApp("q", (Const(num(1)),)))
        assert evaluate(f, m)
        # unmapped atoms default to level 0
        assert evaluate(Cmp(">=", LvlApp("q", (Const(num(7)),)), Const(num(0))), m)

    def test_boundary_decision_is_flagged(self):
        m = extend_standard(frozenset(), general_domain=frozenset(), int_range=(0, 3))
        hit = evaluate_flagged(Exists(I, Cmp("=", I, Const(num(3)))), m)
        assert hit == (True, True)
        interior = evaluate_flagged(Exists(I, Cmp("=", I, Const(num(2)))), m)
        assert interior == (True, False)


class TestExtendRestrict:
    def test_sigma0_round_trip(self):
        interp = frozenset({ga("p", 1)})
        m = extend_standard(interp, SIGMA0)
        assert atoms_of(m) == interp
        assert restrict(m) == m

    def test_order_extension_holds_listed_facts_only(self):
        interp = frozenset({ga("p", 1), ga("q", 1)})
        fact = GroundAtom("less_q_p", (num(1), num(1)))
        m = extend_standard(
            interp,
            SigmaOrder(frozenset({("q", "p")})),
            order_facts=frozenset({fact}),
            general_domain=frozenset({num(1)}),
        )
        assert evaluate(PredApp("less_q_p", (Const(num(1)), Const(num(1)))), m)
        assert not evaluate(PredApp("less_p_q", (Const(num(1)), Const(num(1)))), m)
        assert atoms_of(m) == interp
        assert restrict(m).order_facts == frozenset()

    def test_extras_must_match_the_signature(self):
        with pytest.raises(ExtensionError):
            extend_standard(frozenset(), SIGMA0, order_facts=frozenset({ga("less_p_p")}))
        with pytest.raises(ExtensionError):
            extend_standard(frozenset(), SigmaOrder(frozenset()), level_map={ga("p"): 1})

    def test_atoms_of_empty(self):
        assert atoms_of(extend_standard(frozenset())) == frozenset()


class TestGroundAgreement:
    def test_quantifier_free_formulas_agree_with_propositional_semantics(self):
        prog = parse_program("p(1) :- q(1), not r(1).")
        domain = frozenset({num(1)})
        for interp in [
            frozenset(),
            frozenset({ga("q", 1)}),
            frozenset({ga("p", 1), ga("q", 1)}),
            frozenset({ga("q", 1), ga("r", 1)}),
        ]:
            (instance,) = instantiate(prog, domain)
            prop = tau_ground_rule(instance)
            ground_truth = prop_holds(prop, interp)
            # same rule expressed directly over the signature
            f = Implies(
                And((PredApp("q", (Const(num(1)),)), Not(PredApp("r", (Const(num(1)),))))),
                PredApp("p", (Const(num(1)),)),
            )
            m = extend_standard(interp, general_domain=frozenset({num(1)}))
            assert evaluate(f, m) == ground_truth


ground_terms = st.recursive(
    st.one_of(
        st.integers(-6, 6).map(lambda n: num(n)),
        st.sampled_from(["a", "b"]).map(SymbolicConstant),
    ),
    lambda inner: st.tuples(
        st.sampled_from(["+", "-", "*", "/", "\\", ".."]), inner, inner
    ).map(lambda t: BinaryOp(*t)),
    max_leaves=4,
)


@settings(max_examples=120, deadline=None)
@given(ground_terms)
def test_val_formula_bridges_to_term_values(term):
    """evaluate(val(t, r)) is true exactly when r is a value of t."""
    from ocomp.ground import values

    vals = values(term)
    from ocomp.fol import term_integer_witnesses

    ints = term_integer_witnesses(term)
    lo = min(ints, default=0) - 1
    hi = max(ints, default=0) + 1
    candidates = set(vals) | {num(lo), num(hi), SymbolicConstant("a"), SymbolicConstant("c")}
    for r in candidates:
        fresh = FreshVarSource()
        (v,) = fresh.head_vars(1)
        f = val_formula(term, v, fresh)
        m = extend_standard(
            frozenset(), general_domain=frozenset({r}), int_range=(lo, hi)
        )
        from ocomp.fol import substitute

        closed = substitute(f, {v: Const(r)})
        assert evaluate(closed, m) == (r in vals)


class TestSpecParsing:
    def test_plain_universal(self):
        (f,) = parse_spec("forall X p(X).")
        assert f == Forall(X, PredApp("p", (X,)))

    def test_integer_variable_suffixes(self):
        (f,) = parse_spec("forall X$ (X$ >= 1 -> p(X$)).")
        xi = Var("X", Sort.INTEGER)
        assert f == Forall(xi, Implies(Cmp(">=", xi, Const(num(1))), PredApp("p", (xi,))))
        assert parse_spec("forall X$i (X$i >= 1 -> p(X$i)).") == [f]

    def test_conjunction_sentence(self):
        (f,) = parse_spec("p and q.")
        assert f == And((PredApp("p"), PredApp("q")))

    def test_negation_and_nested_operators(self):
        (f,) = parse_spec("forall X (not p(X) and not q(X)).")
        assert f == Forall(X, And((Not(PredApp("p", (X,))), Not(PredApp("q", (X,))))))

    def test_arrows(self):
        assert parse_spec("p -> q.") == [Implies(PredApp("p"), PredApp("q"))]
        assert parse_spec("p <- q.") == [Implies(PredApp("q"), PredApp("p"))]
        (iff,) = parse_spec("p <-> q.")
        assert iff == And((Implies(PredApp("p"), PredApp("q")), Implies(PredApp("q"), PredApp("p"))))

    def test_truth_constants(self):
        assert parse_spec("#false.") == [FALSE]
        assert parse_spec("#true.") == [TRUE]

    def test_unknown_operator_is_rejected(self):
        with pytest.raises(Exception) as excinfo:
            parse_spec("p xor q.")
        assert "expected" in str(excinfo.value)

    def test_print_parse_round_trip_on_examples(self):
        texts = [
            "forall X p(X).",
            "forall X$i (X$i >= 1 -> p(X$i)).",
            "t(a1, a2) and not t(a1, b).",
            "forall V1 (q(V1) or not r(V1) -> p(V1)).",
            "exists I$i J$i (Z = I$i - J$i and I$i = 1).",
            "forall X1 not less_p_p(X1, X1).",
        ]
        for text in texts:
            (f,) = parse_spec(text)
            assert parse_spec(format_formula(f) + ".") == [f]


class TestStructuralHelpers:
    def test_free_vars_and_rename(self):
        f = Exists(X, And((PredApp("p", (X,)), PredApp("q", (Var("Y"),)))))
        assert free_vars(f) == frozenset({Var("Y")})
        renamed = rename_bound(f)
        assert free_vars(renamed) == frozenset({Var("Y")})
        assert alpha_equal(f, renamed)

    def test_rename_bound_avoids_free_names(self):
        f = Exists(X, PredApp("p", (X, Var("B1"))))
        renamed = rename_bound(f)
        assert renamed.var.name != "B1"

    def test_count_nodes(self):
        assert count_nodes(PredApp("p", (X,))) == 2
        assert count_nodes(And((TRUE, FALSE))) == 3

    def test_evaluation_universe_covers_computed_values(self):
        prog = parse_program("p(X) :- q(X - 1).")
        universe, int_range = evaluation_universe(prog, frozenset({num(1), num(2)}))
        assert {num(0), num(1), num(2)} <= universe
        assert int_range[0] <= -1 and int_range[1] >= 3
        assert values_closed(prog, universe)

    def test_values_closed_detects_escaping_heads(self):
        prog = parse_program("p(X + 1) :- q(X).")
        assert not values_closed(prog, frozenset({num(0), num(1)}))
