"""Mini-gringo abstract syntax, the program parser, and the precomputed-term order.

Terms are built from numerals, symbolic constants, program variables, the
markers #inf and #sup, absolute value, and the binary operations
+ - * / \\ and .. (interval).  Rules are basic rules, choice rules, or
constraints; a program is a sequence of rules.  All types are immutable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

IDENTIFIER_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
VARIABLE_RE = re.compile(r"[A-Z][a-zA-Z0-9_]*\Z")

OPERATIONS = ("+", "-", "*", "/", "\\", "..")
RELATIONS = ("=", "!=", "<", ">", "<=", ">=")


class ParseError(Exception):
    """Syntax error with source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ArityConflictError(ValueError):
    """A predicate name is used with two different arities."""


# --------------------------------------------------------------------------
# Terms
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Infimum:
    def __str__(self) -> str:
        return "#inf"


@dataclass(frozen=True, slots=True)
class Supremum:
    def __str__(self) -> str:
        return "#sup"


@dataclass(frozen=True, slots=True)
class Numeral:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class SymbolicConstant:
    name: str

    def __post_init__(self) -> None:
        if not IDENTIFIER_RE.match(self.name):
            raise ValueError(f"invalid symbolic constant name: {self.name!r}")

    def __str__(self) -> str:
        return self.name


PrecomputedTerm = Union[Infimum, Numeral, SymbolicConstant, Supremum]


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __post_init__(self) -> None:
        if not VARIABLE_RE.match(self.name):
            raise ValueError(f"invalid variable name: {self.name!r}")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class AbsoluteValue:
    arg: "ProgramTerm"


@dataclass(frozen=True, slots=True)
class BinaryOp:
    op: str
    left: "ProgramTerm"
    right: "ProgramTerm"

    def __post_init__(self) -> None:
        if self.op not in OPERATIONS:
            raise ValueError(f"unknown operation: {self.op!r}")


ProgramTerm = Union[PrecomputedTerm, Variable, AbsoluteValue, BinaryOp]

_PRECOMPUTED_TYPES = (Infimum, Numeral, SymbolicConstant, Supremum)


def is_precomputed(term: ProgramTerm) -> bool:
    return isinstance(term, _PRECOMPUTED_TYPES)


def is_ground(term: ProgramTerm) -> bool:
    if isinstance(term, Variable):
        return False
    if isinstance(term, AbsoluteValue):
        return is_ground(term.arg)
    if isinstance(term, BinaryOp):
        return is_ground(term.left) and is_ground(term.right)
    return True


def term_variables(term: ProgramTerm) -> Iterator[str]:
    """Variable names in `term`, in order of first occurrence."""
    if isinstance(term, Variable):
        yield term.name
    elif isinstance(term, AbsoluteValue):
        yield from term_variables(term.arg)
    elif isinstance(term, BinaryOp):
        yield from term_variables(term.left)
        yield from term_variables(term.right)


def substitute_term(term: ProgramTerm, binding: dict[str, PrecomputedTerm]) -> ProgramTerm:
    if isinstance(term, Variable):
        return binding[term.name]
    if isinstance(term, AbsoluteValue):
        return AbsoluteValue(substitute_term(term.arg, binding))
    if isinstance(term, BinaryOp):
        return BinaryOp(term.op, substitute_term(term.left, binding), substitute_term(term.right, binding))
    return term


# --------------------------------------------------------------------------
# Total order on precomputed terms
# --------------------------------------------------------------------------
#
# #inf is least and #sup is greatest; numerals are ordered as integers.  The
# relative position of numerals and symbolic constants is fixed here as
# numerals < symbolic constants (the usual grounder convention), with
# symbolic constants compared lexicographically.


def precomputed_sort_key(term: PrecomputedTerm):
    if isinstance(term, Infimum):
        return (0, 0)
    if isinstance(term, Numeral):
        return (1, term.value)
    if isinstance(term, SymbolicConstant):
        return (2, term.name)
    if isinstance(term, Supremum):
        return (3, 0)
    raise TypeError(f"not a precomputed term: {term!r}")


def precomputed_compare(a: PrecomputedTerm, b: PrecomputedTerm) -> int:
    """Strict total order; returns -1, 0, or 1."""
    ka, kb = precomputed_sort_key(a), precomputed_sort_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def relation_holds(rel: str, a: PrecomputedTerm, b: PrecomputedTerm) -> bool:
    c = precomputed_compare(a, b)
    if rel == "=":
        return c == 0
    if rel == "!=":
        return c != 0
    if rel == "<":
        return c < 0
    if rel == ">":
        return c > 0
    if rel == "<=":
        return c <= 0
    if rel == ">=":
        return c >= 0
    raise ValueError(f"unknown relation: {rel!r}")


# --------------------------------------------------------------------------
# Atoms, literals, comparisons, rules, programs
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple[ProgramTerm, ...] = ()


@dataclass(frozen=True, slots=True)
class Literal:
    atom: Atom
    negations: int = 0

    def __post_init__(self) -> None:
        if self.negations not in (0, 1, 2):
            raise ValueError("a literal carries at most two negations")


@dataclass(frozen=True, slots=True)
class Comparison:
    rel: str
    left: ProgramTerm
    right: ProgramTerm

    def __post_init__(self) -> None:
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation: {self.rel!r}")


BodyElement = Union[Literal, Comparison]


@dataclass(frozen=True, slots=True)
class Rule:
    """A rule; `head` is None for a constraint, `choice` marks a choice head."""

    head: Atom | None
    body: tuple[BodyElement, ...] = ()
    choice: bool = False

    def __post_init__(self) -> None:
        if self.head is None and self.choice:
            raise ValueError("a constraint cannot be a choice rule")

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    @property
    def is_basic(self) -> bool:
        return self.head is not None and not self.choice

    @property
    def is_choice(self) -> bool:
        return self.head is not None and self.choice

    @property
    def head_literal(self) -> Atom | None:
        """The head atom for basic and choice rules, None for constraints."""
        return self.head

    @property
    def positive_body(self) -> tuple[Literal, ...]:
        return tuple(e for e in self.body if isinstance(e, Literal) and e.negations == 0)

    def variables(self) -> tuple[str, ...]:
        """Variable names of the rule, in order of first occurrence."""
        seen: dict[str, None] = {}
        terms: list[ProgramTerm] = []
        if self.head is not None:
            terms.extend(self.head.args)
        for elem in self.body:
            if isinstance(elem, Literal):
                terms.extend(elem.atom.args)
            else:
                terms.extend((elem.left, elem.right))
        for term in terms:
            for name in term_variables(term):
                seen.setdefault(name, None)
        return tuple(seen)


@dataclass(frozen=True, slots=True)
class Program:
    rules: tuple[Rule, ...] = ()

    def __post_init__(self) -> None:
        self.predicates()

    def predicates(self) -> dict[str, int]:
        """Predicate name to arity for every predicate occurring in the program."""
        arities: dict[str, int] = {}
        for atom in self._atoms():
            old = arities.setdefault(atom.predicate, len(atom.args))
            if old != len(atom.args):
                raise ArityConflictError(
                    f"predicate {atom.predicate!r} used with arities {old} and {len(atom.args)}"
                )
        return arities

    def lang(self) -> frozenset[str]:
        return frozenset(self.predicates())

    def _atoms(self) -> Iterator[Atom]:
        for rule in self.rules:
            if rule.head is not None:
                yield rule.head
            for elem in rule.body:
                if isinstance(elem, Literal):
                    yield elem.atom


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<number>\d+)
  | (?P<name>[a-z][a-zA-Z0-9_]*)
  | (?P<var>[A-Z][a-zA-Z0-9_]*)
  | (?P<hash>\#(?:inf|sup|false|true))
  | (?P<sym>:-|\.\.|<->|->|<-|<=|>=|!=|[.,(){}+\-*/\\|=<>$])
    """,
    re.VERBOSE,
)

# Keywords only meaningful when lexing .spec formulas.
_SPEC_KEYWORDS = ("forall", "exists", "and", "or", "not")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, spec: bool = False) -> list[Token]:
    """Lex `text` into tokens; `spec` enables arrow tokens and keywords.

    In program mode `<-` and `->` are split so that comparisons against
    negative numbers (`X < -1`) lex as expected.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        value = match.group()
        column = pos - line_start + 1
        pos = match.end()
        if kind == "ws" or kind == "comment":
            line += value.count("\n")
            if "\n" in value:
                line_start = match.end() - (len(value) - value.rfind("\n") - 1)
            continue
        if kind == "name" and spec and value in _SPEC_KEYWORDS:
            kind = "keyword"
        if kind == "sym" and not spec and value in ("->", "<-", "<->"):
            # split into comparison + sign tokens
            for i, ch in enumerate(value):
                tokens.append(Token("sym", ch, line, column + i))
            continue
        tokens.append(Token(kind, value, line, column))
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, text: str) -> Token | None:
        tok = self.peek()
        if tok.kind in ("sym", "hash", "keyword") and tok.text == text:
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            got = self.peek()
            raise ParseError(f"expected {text!r}, found {got.text or 'end of input'!r}", got.line, got.column)
        return tok

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)


# --------------------------------------------------------------------------
# Term and program parsing
# --------------------------------------------------------------------------


def _parse_primary(ts: TokenStream) -> ProgramTerm:
    tok = ts.peek()
    if tok.kind == "number":
        ts.next()
        return Numeral(int(tok.text))
    if tok.kind == "name":
        ts.next()
        return SymbolicConstant(tok.text)
    if tok.kind == "var":
        ts.next()
        return Variable(tok.text)
    if tok.kind == "hash" and tok.text == "#inf":
        ts.next()
        return Infimum()
    if tok.kind == "hash" and tok.text == "#sup":
        ts.next()
        return Supremum()
    if ts.accept("("):
        term = parse_term(ts)
        ts.expect(")")
        return term
    if ts.accept("|"):
        term = parse_term(ts)
        ts.expect("|")
        return AbsoluteValue(term)
    if ts.accept("-"):
        inner = _parse_primary(ts)
        if isinstance(inner, Numeral):
            return Numeral(-inner.value)
        return BinaryOp("-", Numeral(0), inner)
    raise ts.error(f"expected a term, found {tok.text or 'end of input'!r}")


def _parse_multiplicative(ts: TokenStream) -> ProgramTerm:
    term = _parse_primary(ts)
    while True:
        tok = ts.peek()
        if tok.kind == "sym" and tok.text in ("*", "/", "\\"):
            ts.next()
            term = BinaryOp(tok.text, term, _parse_primary(ts))
        else:
            return term


def _parse_additive(ts: TokenStream) -> ProgramTerm:
    term = _parse_multiplicative(ts)
    while True:
        tok = ts.peek()
        if tok.kind == "sym" and tok.text in ("+", "-"):
            ts.next()
            term = BinaryOp(tok.text, term, _parse_multiplicative(ts))
        else:
            return term


def parse_term(ts: TokenStream) -> ProgramTerm:
    term = _parse_additive(ts)
    while ts.peek().kind == "sym" and ts.peek().text == "..":
        ts.next()
        term = BinaryOp("..", term, _parse_additive(ts))
    return term


def _parse_atom(ts: TokenStream) -> Atom:
    tok = ts.peek()
    if tok.kind != "name":
        raise ts.error(f"expected a predicate name, found {tok.text or 'end of input'!r}")
    ts.next()
    args: tuple[ProgramTerm, ...] = ()
    if ts.accept("("):
        items = [parse_term(ts)]
        while ts.accept(","):
            items.append(parse_term(ts))
        ts.expect(")")
        args = tuple(items)
    return Atom(tok.text, args)


def _peek_relation(ts: TokenStream) -> str | None:
    tok = ts.peek()
    if tok.kind == "sym" and tok.text in RELATIONS:
        return tok.text
    return None


def _parse_body_element(ts: TokenStream) -> BodyElement:
    negations = 0
    while ts.peek().kind == "name" and ts.peek().text == "not":
        ts.next()
        negations += 1
        if negations > 2:
            raise ts.error("at most two occurrences of 'not' are allowed")
    if negations > 0:
        return Literal(_parse_atom(ts), negations)
    tok = ts.peek()
    if tok.kind == "name" and ts.peek(1).kind == "sym" and ts.peek(1).text == "(":
        atom = _parse_atom(ts)
        if _peek_relation(ts) is not None:
            raise ts.error("an atom cannot appear in a comparison")
        return Literal(atom, 0)
    term = parse_term(ts)
    rel = _peek_relation(ts)
    if rel is not None:
        ts.next()
        return Comparison(rel, term, parse_term(ts))
    if isinstance(term, SymbolicConstant):
        return Literal(Atom(term.name), 0)
    raise ts.error("expected a comparison or an atom")


def _parse_rule(ts: TokenStream) -> Rule:
    head: Atom | None = None
    choice = False
    if ts.accept("{"):
        head = _parse_atom(ts)
        ts.expect("}")
        choice = True
    elif not (ts.peek().kind == "sym" and ts.peek().text == ":-"):
        head = _parse_atom(ts)
    body: list[BodyElement] = []
    if ts.accept(":-"):
        if not (ts.peek().kind == "sym" and ts.peek().text == "."):
            body.append(_parse_body_element(ts))
            while ts.accept(","):
                body.append(_parse_body_element(ts))
    ts.expect(".")
    return Rule(head, tuple(body), choice)


def parse_program(text: str) -> Program:
    """Parse a .lp source into a Program; raises ParseError or ArityConflictError."""
    ts = TokenStream(tokenize(text, spec=False))
    rules: list[Rule] = []
    while ts.peek().kind != "eof":
        rules.append(_parse_rule(ts))
    return Program(tuple(rules))


def parse_precomputed(text: str) -> PrecomputedTerm:
    """Parse a single precomputed term (used for domain specifications)."""
    ts = TokenStream(tokenize(text, spec=False))
    term = parse_term(ts)
    if ts.peek().kind != "eof":
        raise ts.error("trailing input after term")
    if not is_precomputed(term):
        if isinstance(term, BinaryOp) and term.op == "-" and term.left == Numeral(0) and isinstance(term.right, Numeral):
            return Numeral(-term.right.value)
        raise ValueError(f"not a precomputed term: {text!r}")
    return term


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

_TERM_PREC = {"..": 1, "+": 2, "-": 2, "*": 3, "/": 3, "\\": 3}


def format_term(term: ProgramTerm, parent_prec: int = 0) -> str:
    if isinstance(term, Numeral):
        return str(term.value)
    if isinstance(term, SymbolicConstant):
        return term.name
    if isinstance(term, Variable):
        return term.name
    if isinstance(term, Infimum):
        return "#inf"
    if isinstance(term, Supremum):
        return "#sup"
    if isinstance(term, AbsoluteValue):
        return f"|{format_term(term.arg)}|"
    if isinstance(term, BinaryOp):
        prec = _TERM_PREC[term.op]
        op = term.op
        # right operand gets a higher threshold: operators are left-associative
        text = f"{format_term(term.left, prec)}{op}{format_term(term.right, prec + 1)}" if op == ".." else (
            f"{format_term(term.left, prec)} {op} {format_term(term.right, prec + 1)}"
        )
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not a term: {term!r}")


def format_atom(atom: Atom) -> str:
    if not atom.args:
        return atom.predicate
    return f"{atom.predicate}({', '.join(format_term(a) for a in atom.args)})"


def format_body_element(elem: BodyElement) -> str:
    if isinstance(elem, Literal):
        return "not " * elem.negations + format_atom(elem.atom)
    return f"{format_term(elem.left, 1)} {elem.rel} {format_term(elem.right, 1)}"


def format_rule(rule: Rule) -> str:
    if rule.head is None:
        head = ""
    elif rule.choice:
        head = "{" + format_atom(rule.head) + "}"
    else:
        head = format_atom(rule.head)
    if not rule.body:
        return f"{head}." if head else ":- ."
    body = ", ".join(format_body_element(e) for e in rule.body)
    return f"{head} :- {body}." if head else f":- {body}."


def format_program(program: Program) -> str:
    return "\n".join(format_rule(r) for r in program.rules)
