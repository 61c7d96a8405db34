"""Exhaustive program corpus shared by the theorem tests.

All programs with at most three rules over two predicates, in a nullary and
a unary family.  Bodies have at most two elements drawn from the positive
and singly negated literals of the two predicates, with at most one negated
element; heads are basic atoms, one ground fact form, and one choice form.
"""

from __future__ import annotations

import itertools

from ocomp.ground import GroundAtom
from ocomp.syntax import Atom, Literal, Numeral, Program, Rule, Variable

X = Variable("X")


def _bodies(elements):
    bodies = [()]
    bodies += [(e,) for e in elements]
    for a, b in itertools.combinations(elements, 2):
        if a.negations + b.negations <= 1:
            bodies.append((a, b))
    return bodies


def _rules(heads, elements):
    out = []
    for head, choice in heads:
        for body in _bodies(elements):
            out.append(Rule(head, body, choice))
    return out


def _programs(rules, max_rules=3):
    programs = [Program(())]
    for n in range(1, max_rules + 1):
        for combo in itertools.combinations(rules, n):
            programs.append(Program(combo))
    return programs


def nullary_family():
    """Programs over p/0, q/0; the domain is irrelevant (a singleton)."""
    p, q = Atom("p"), Atom("q")
    elements = [Literal(p, 0), Literal(q, 0), Literal(p, 1), Literal(q, 1)]
    heads = [(p, False), (q, False), (p, True)]
    domain = frozenset({Numeral(1)})
    atoms = (GroundAtom("p"), GroundAtom("q"))
    return _programs(_rules(heads, elements)), domain, atoms


def unary_family():
    """Programs over p/1, q/1 with variable bodies, over the domain {1, 2}."""
    px, qx = Atom("p", (X,)), Atom("q", (X,))
    q1 = Atom("q", (Numeral(1),))
    elements = [Literal(px, 0), Literal(qx, 0), Literal(px, 1), Literal(qx, 1)]
    heads = [(px, False), (qx, False), (q1, False), (px, True)]
    domain = frozenset({Numeral(1), Numeral(2)})
    atoms = tuple(
        GroundAtom(pred, (Numeral(n),)) for pred in ("p", "q") for n in (1, 2)
    )
    return _programs(_rules(heads, elements)), domain, atoms


def interpretations(atoms):
    out = []
    for n in range(len(atoms) + 1):
        for combo in itertools.combinations(atoms, n):
            out.append(frozenset(combo))
    return out


def corpus():
    """Both families: (programs, domain, interpretations) triples."""
    out = []
    for family in (nullary_family, unary_family):
        programs, domain, atoms = family()
        out.append((programs, domain, interpretations(atoms)))
    return out
