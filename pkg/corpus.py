"""
corpus.py

Formula corpora for regression runs and property suites: axiom-schema
instances of GLP and J, the fixed non-theorem list, and a seeded random
formula generator.
"""

import itertools
import random
from typing import Iterator, List, Sequence, Tuple

from formula import And, BOTTOM, Box, Diamond, Formula, Implies, Not, Or, Var, max_modality, parse

# Schema bodies: depth <= 2, variables p and q, modalities <= 2
BODY_TEXTS = [
    "p",
    "q",
    "false",
    "~p",
    "p & q",
    "p | ~q",
    "p -> q",
    "[0]p",
    "[1]q",
    "[2]p",
    "<0>p",
    "<1>~q",
]

TAUTOLOGY_TEXTS = [
    "{a} -> {a}",
    "{a} | ~{a}",
    "({a} & {b}) -> {a}",
    "{a} -> ({b} -> {a})",
    "~~{a} -> {a}",
]

GLP_NON_THEOREM_TEXTS = [
    "[1]p -> [0]p",
    "[0]false",
    "<0>true",
    "[1]false -> [0]false",
    "p -> [0]p",
]

# Provable in GLP by axiom (iv) but not in J
J_NON_THEOREM_TEXTS = GLP_NON_THEOREM_TEXTS + [
    "[0]p -> [1]p",
]


def bodies(limit: int = 2) -> List[Formula]:
    """Schema bodies whose modalities stay within [0]..[limit]."""
    result = []
    for text in BODY_TEXTS:
        f = parse(text)
        if (max_modality(f) or 0) <= limit:
            result.append(f)
    return result


def _pairs(items: Sequence[Formula]) -> Iterator[Tuple[Formula, Formula]]:
    # every body on the left, paired with a rotating partner
    for i, left in enumerate(items):
        yield left, items[(i + 1) % len(items)]


def tautology_instances(items: Sequence[Formula]) -> List[Formula]:
    found = []
    for a, b in _pairs(items):
        for template in TAUTOLOGY_TEXTS:
            found.append(parse(template.format(a=f"({a})", b=f"({b})")))
    return found


def k_instances(items: Sequence[Formula], n: int) -> List[Formula]:
    """[n](a -> b) -> ([n]a -> [n]b)"""
    return [Implies(Box(n, Implies(a, b)), Implies(Box(n, a), Box(n, b))) for a, b in _pairs(items)]


def lob_instances(items: Sequence[Formula], n: int) -> List[Formula]:
    """[n]([n]a -> a) -> [n]a"""
    return [Implies(Box(n, Implies(Box(n, a), a)), Box(n, a)) for a in items]


def monotonicity_instances(items: Sequence[Formula], m: int, n: int) -> List[Formula]:
    """[m]a -> [n]a"""
    return [Implies(Box(m, a), Box(n, a)) for a in items]


def box_persistence_instances(items: Sequence[Formula], m: int, n: int) -> List[Formula]:
    """[m]a -> [n][m]a"""
    return [Implies(Box(m, a), Box(n, Box(m, a))) for a in items]


def diamond_persistence_instances(items: Sequence[Formula], m: int, n: int) -> List[Formula]:
    """<m>a -> [n]<m>a"""
    return [Implies(Diamond(m, a), Box(n, Diamond(m, a))) for a in items]


def box_nesting_instances(items: Sequence[Formula], m: int, n: int) -> List[Formula]:
    """[m]a -> [m][n]a"""
    return [Implies(Box(m, a), Box(m, Box(n, a))) for a in items]


def glp_axiom_instances(top: int = 2) -> List[Tuple[str, Formula]]:
    """Labelled instances of GLP schemata (i)-(v) plus J's (vi) and (vii)."""
    items = bodies(top)
    labelled: List[Tuple[str, Formula]] = [("i", f) for f in tautology_instances(items)]
    for n in range(top + 1):
        labelled += [("ii", f) for f in k_instances(items, n)]
        labelled += [("iii", f) for f in lob_instances(items, n)]
    for m, n in itertools.combinations(range(top + 1), 2):
        labelled += [("iv", f) for f in monotonicity_instances(items, m, n)]
        labelled += [("v", f) for f in diamond_persistence_instances(items, m, n)]
    for m in range(top + 1):
        for n in range(m, top + 1):
            labelled += [("vi", f) for f in box_persistence_instances(items, m, n)]
    for m, n in itertools.combinations(range(top + 1), 2):
        labelled += [("vii", f) for f in box_nesting_instances(items, m, n)]
    return labelled


def j_axiom_instances(top: int) -> List[Formula]:
    """Instances of J's axioms using only [0]..[top]."""
    items = bodies(top)[:8]
    found = tautology_instances(items[:3])
    for n in range(top + 1):
        found += k_instances(items, n) + lob_instances(items, n)
    for m in range(top + 1):
        for n in range(m, top + 1):
            found += box_persistence_instances(items, m, n)
            if n > m:
                found += diamond_persistence_instances(items, m, n)
                found += box_nesting_instances(items, m, n)
    return found


def glp_non_theorems() -> List[Formula]:
    return [parse(text) for text in GLP_NON_THEOREM_TEXTS]


def j_non_theorems() -> List[Formula]:
    return [parse(text) for text in J_NON_THEOREM_TEXTS]


def random_formula(
    rng: random.Random,
    max_nodes: int = 12,
    max_modality: int = 2,
    names: Sequence[str] = ("p", "q"),
) -> Formula:
    """A seeded random formula with at most `max_nodes` AST nodes."""
    budget = rng.randint(1, max_nodes)

    def grow(nodes: int) -> Formula:
        if nodes <= 1:
            if rng.random() < 0.1:
                return BOTTOM
            return Var(rng.choice(names))
        kind = rng.choice(["not", "box", "diamond", "and", "or", "implies"] if nodes >= 3 else ["not", "box", "diamond"])
        if kind == "not":
            return Not(grow(nodes - 1))
        if kind == "box":
            return Box(rng.randint(0, max_modality), grow(nodes - 1))
        if kind == "diamond":
            return Diamond(rng.randint(0, max_modality), grow(nodes - 1))
        left = rng.randint(1, nodes - 2)
        binary = {"and": And, "or": Or, "implies": Implies}[kind]
        return binary(grow(left), grow(nodes - 1 - left))

    return grow(budget)
