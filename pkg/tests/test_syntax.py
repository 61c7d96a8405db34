import pytest
from hypothesis import given, settings, strategies as st

from ocomp.syntax import (
    AbsoluteValue,
    ArityConflictError,
    Atom,
    BinaryOp,
    Comparison,
    Infimum,
    Literal,
    Numeral,
    ParseError,
    Program,
    Rule,
    Supremum,
    SymbolicConstant,
    Variable,
    format_program,
    format_rule,
    parse_precomputed,
    parse_program,
    precomputed_compare,
    relation_holds,
)


class TestParseProgram:
    def test_tight_program(self):
        prog = parse_program("p(X) :- q(X).\np(X) :- not r(X).\nr(1).\nq(1).")
        assert len(prog.rules) == 4
        assert prog.predicates() == {"p": 1, "q": 1, "r": 1}

    def test_empty_input(self):
        assert parse_program("") == Program(())

    def test_choice_rule(self):
        prog = parse_program("{p(A)} :- r(A,B).")
        (rule,) = prog.rules
        assert rule.is_choice
        assert rule.head == Atom("p", (Variable("A"),))
        assert rule.positive_body == (Literal(Atom("r", (Variable("A"), Variable("B"))), 0),)

    def test_fact_is_basic_rule_with_empty_body(self):
        (rule,) = parse_program("q(1).").rules
        assert rule.is_basic and rule.body == ()

    def test_constraint(self):
        (rule,) = parse_program(":- q(1).").rules
        assert rule.is_constraint and rule.head_literal is None

    def test_double_negation(self):
        (rule,) = parse_program("p :- not not q.").rules
        assert rule.body == (Literal(Atom("q"), 2),)
        assert rule.positive_body == ()

    def test_comparisons_and_arithmetic(self):
        (rule,) = parse_program("p(X+1) :- p(X), X > 0.").rules
        assert rule.head == Atom("p", (BinaryOp("+", Variable("X"), Numeral(1)),))
        assert rule.body[1] == Comparison(">", Variable("X"), Numeral(0))

    def test_interval_and_negative_numbers(self):
        (rule,) = parse_program("p(-1..3).").rules
        assert rule.head == Atom("p", (BinaryOp("..", Numeral(-1), Numeral(3)),))

    def test_symbolic_comparison(self):
        (rule,) = parse_program(":- 5 > a.").rules
        assert rule.body == (Comparison(">", Numeral(5), SymbolicConstant("a")),)

    def test_comparison_with_negative_right_operand(self):
        (rule,) = parse_program(":- X < -1.").rules
        assert rule.body == (Comparison("<", Variable("X"), Numeral(-1)),)

    def test_abs_and_division(self):
        (rule,) = parse_program("p(|X| / 2) :- q(X).").rules
        head_term = rule.head.args[0]
        assert head_term == BinaryOp("/", AbsoluteValue(Variable("X")), Numeral(2))

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as excinfo:
            parse_program("p(X) :- q(X)")
        assert excinfo.value.line == 1

    def test_arity_conflict_is_rejected(self):
        with pytest.raises(ArityConflictError) as excinfo:
            parse_program("p(1).\np(1,2).")
        assert "p" in str(excinfo.value)

    def test_comments_are_ignored(self):
        prog = parse_program("% intro\np. % fact\n")
        assert len(prog.rules) == 1


class TestPrecomputedCompare:
    def test_infimum_least(self):
        assert precomputed_compare(Infimum(), Numeral(5)) == -1
        assert precomputed_compare(Infimum(), SymbolicConstant("a")) == -1

    def test_numerals_ordered_as_integers(self):
        assert precomputed_compare(Numeral(3), Numeral(5)) == -1
        assert precomputed_compare(Numeral(5), Numeral(5)) == 0

    def test_numerals_before_symbolic_constants(self):
        assert precomputed_compare(Numeral(5), SymbolicConstant("a")) == -1

    def test_supremum_greatest(self):
        assert precomputed_compare(SymbolicConstant("a"), Supremum()) == -1
        assert precomputed_compare(Numeral(10**9), Supremum()) == -1

    def test_relation_holds(self):
        assert relation_holds("<", Numeral(5), SymbolicConstant("a"))
        assert relation_holds("!=", Infimum(), Supremum())
        assert not relation_holds(">=", Numeral(1), Numeral(2))


precomputed_terms = st.one_of(
    st.just(Infimum()),
    st.just(Supremum()),
    st.integers(-20, 20).map(Numeral),
    st.sampled_from("abc").map(SymbolicConstant),
)


@given(precomputed_terms, precomputed_terms)
def test_compare_is_total(a, b):
    assert precomputed_compare(a, b) == -precomputed_compare(b, a)
    assert (precomputed_compare(a, b) == 0) == (a == b)


@given(precomputed_terms, precomputed_terms, precomputed_terms)
def test_compare_is_transitive(a, b, c):
    if precomputed_compare(a, b) <= 0 and precomputed_compare(b, c) <= 0:
        assert precomputed_compare(a, c) <= 0


# round-trip property: printing a program and reparsing yields the same AST

program_terms = st.recursive(
    st.one_of(
        st.integers(-9, 9).map(Numeral),
        st.sampled_from(["a", "b"]).map(SymbolicConstant),
        st.sampled_from(["X", "Y"]).map(Variable),
        st.just(Infimum()),
        st.just(Supremum()),
    ),
    lambda inner: st.one_of(
        inner.map(AbsoluteValue),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "\\", ".."]), inner, inner).map(
            lambda t: BinaryOp(*t)
        ),
    ),
    max_leaves=6,
)

atoms = st.builds(
    Atom,
    predicate=st.sampled_from(["p", "q"]),
    args=st.lists(program_terms, max_size=2).map(tuple),
)

body_elements = st.one_of(
    st.builds(Literal, atom=atoms, negations=st.sampled_from([0, 1, 2])),
    st.builds(
        Comparison,
        rel=st.sampled_from(["=", "!=", "<", ">", "<=", ">="]),
        left=program_terms,
        right=program_terms,
    ),
)


@st.composite
def rules(draw):
    kind = draw(st.sampled_from(["basic", "choice", "constraint"]))
    body = tuple(draw(st.lists(body_elements, max_size=3)))
    if kind == "constraint":
        return Rule(None, body)
    return Rule(draw(atoms), body, choice=kind == "choice")


@settings(max_examples=150)
@given(st.lists(rules(), max_size=4))
def test_program_print_parse_round_trip(rule_list):
    try:
        program = Program(tuple(rule_list))
    except ArityConflictError:
        return
    assert parse_program(format_program(program)) == program


@given(rules())
def test_positive_body_is_exactly_the_unnegated_literals(rule):
    expected = tuple(e for e in rule.body if isinstance(e, Literal) and e.negations == 0)
    assert rule.positive_body == expected
    assert set(rule.positive_body) <= set(rule.body)


def test_parse_precomputed():
    assert parse_precomputed("a1") == SymbolicConstant("a1")
    assert parse_precomputed("-3") == Numeral(-3)
    assert parse_precomputed("#inf") == Infimum()
    with pytest.raises(ValueError):
        parse_precomputed("X")
