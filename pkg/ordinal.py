"""
ordinal.py

Exact ordinal arithmetic below epsilon_0 in Cantor normal form.
An Ordinal is a tuple of (exponent, coefficient) terms with strictly decreasing
exponents; exponents are Ordinals themselves, coefficients are positive ints.
"""

import os
import random
from dataclasses import dataclass
from functools import cached_property, total_ordering
from typing import Optional, Tuple

from dotenv import load_dotenv
from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput

from errors import OrdinalDomainError, OrdinalResourceError, ParseError

# Load environment variables
load_dotenv()

# Cap on the recursive term count of any arithmetic result
MAX_TERMS = int(os.environ.get("GLPWB_MAX_TERMS", "1000000"))


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: Tuple[Tuple["Ordinal", int], ...] = ()

    @cached_property
    def term_count(self) -> int:
        return sum(1 + exponent.term_count for exponent, _ in self.terms)

    def __lt__(self, other: "Ordinal") -> bool:
        if not isinstance(other, Ordinal):
            return NotImplemented
        return cmp(self, other) < 0

    def __add__(self, other: "Ordinal") -> "Ordinal":
        return add(self, other)

    def __mul__(self, other: "Ordinal") -> "Ordinal":
        return mul(self, other)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(_term_text(exponent, coefficient) for exponent, coefficient in self.terms)

    def __repr__(self) -> str:
        return f"Ordinal({str(self)!r})"


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def _term_text(exponent: Ordinal, coefficient: int) -> str:
    if exponent == ZERO:
        return str(coefficient)
    if exponent == ONE:
        base = "w"
    elif is_finite(exponent) or exponent == OMEGA:
        base = f"w^{exponent}"
    else:
        base = f"w^({exponent})"
    return base if coefficient == 1 else f"{base}*{coefficient}"


def _checked(result: Ordinal) -> Ordinal:
    if result.term_count > MAX_TERMS:
        raise OrdinalResourceError(
            f"ordinal result has {result.term_count} terms, over the cap of {MAX_TERMS} (GLPWB_MAX_TERMS)"
        )
    return result


def from_int(value: int) -> Ordinal:
    if value < 0:
        raise OrdinalDomainError(f"negative ordinal {value}")
    return Ordinal(((ZERO, value),)) if value else ZERO


def is_finite(a: Ordinal) -> bool:
    return all(exponent == ZERO for exponent, _ in a.terms)


def to_int(a: Ordinal) -> int:
    if not is_finite(a):
        raise OrdinalDomainError(f"{a} is not finite")
    return a.terms[0][1] if a.terms else 0


def cmp(a: Ordinal, b: Ordinal) -> int:
    """Three-way comparison: -1, 0 or 1. Lexicographic on CNF terms."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        order = cmp(ea, eb)
        if order:
            return order
        if ca != cb:
            return -1 if ca < cb else 1
    if len(a.terms) == len(b.terms):
        return 0
    return -1 if len(a.terms) < len(b.terms) else 1


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    if not b.terms:
        return a
    if not a.terms:
        return b
    lead, lead_coefficient = b.terms[0]
    kept = []
    for exponent, coefficient in a.terms:
        order = cmp(exponent, lead)
        if order > 0:
            kept.append((exponent, coefficient))
        elif order == 0:
            kept.append((exponent, coefficient + lead_coefficient))
            return _checked(Ordinal(tuple(kept) + b.terms[1:]))
        else:
            break
    return _checked(Ordinal(tuple(kept) + b.terms))


def mul(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal product, distributing a over the CNF terms of b."""
    if not a.terms or not b.terms:
        return ZERO
    lead, lead_coefficient = a.terms[0]
    result = ZERO
    for exponent, coefficient in b.terms:
        if exponent == ZERO:
            # a·c keeps the tail of a
            part = Ordinal(((lead, lead_coefficient * coefficient),) + a.terms[1:])
        else:
            part = Ordinal(((add(lead, exponent), coefficient),))
        result = add(result, part)
    return _checked(result)


def omega_pow(a: Ordinal) -> Ordinal:
    return _checked(Ordinal(((a, 1),)))


def omega_tower(k: int) -> Ordinal:
    """omega_0 = 1, omega_{k+1} = w^(omega_k)."""
    tower = ONE
    for _ in range(k):
        tower = omega_pow(tower)
    return tower


def r(a: Ordinal) -> Ordinal:
    """The unique b with a = c + w^b; r(0) = 0."""
    return a.terms[-1][0] if a.terms else ZERO


def r_iter(a: Ordinal, n: int) -> Ordinal:
    for _ in range(n):
        a = r(a)
    return a


def is_limit(a: Ordinal) -> bool:
    return bool(a.terms) and a.terms[-1][0] != ZERO


def is_successor(a: Ordinal) -> bool:
    return bool(a.terms) and a.terms[-1][0] == ZERO


def pred(a: Ordinal) -> Ordinal:
    if not is_successor(a):
        raise OrdinalDomainError(f"{a} has no predecessor")
    *head, (_, coefficient) = a.terms
    if coefficient > 1:
        return Ordinal(tuple(head) + ((ZERO, coefficient - 1),))
    return Ordinal(tuple(head))


def remainder_after(prefix: Ordinal, a: Ordinal) -> Ordinal:
    """
    The unique g with prefix + g = a. Requires prefix <= a.

    Used for block lookup inside sums; this is left cancellation, not a
    general subtraction.
    """
    for i, (exponent, coefficient) in enumerate(a.terms):
        if i >= len(prefix.terms):
            return Ordinal(a.terms[i:])
        p_exponent, p_coefficient = prefix.terms[i]
        order = cmp(p_exponent, exponent)
        if order < 0:
            return Ordinal(a.terms[i:])
        if order > 0 or p_coefficient > coefficient:
            break
        if p_coefficient < coefficient:
            return Ordinal(((exponent, coefficient - p_coefficient),) + a.terms[i + 1:])
    else:
        if len(prefix.terms) == len(a.terms):
            return ZERO
    raise OrdinalDomainError(f"{prefix} exceeds {a}")


def div_rem(a: Ordinal, k: Ordinal) -> Tuple[Ordinal, Ordinal]:
    """Left division: the unique (q, rem) with a = k·q + rem and rem < k."""
    if not k.terms:
        raise OrdinalDomainError("division by zero")
    if a < k:
        return ZERO, a
    k_exponent, k_coefficient = k.terms[0]
    high = []
    i = 0
    while i < len(a.terms) and cmp(a.terms[i][0], k_exponent) > 0:
        exponent, coefficient = a.terms[i]
        # k·w^x = w^(k_exponent + x) for x > 0
        high.append((remainder_after(k_exponent, exponent), coefficient))
        i += 1
    tail = Ordinal(a.terms[i:])
    if tail < k:
        return Ordinal(tuple(high)), tail
    m = tail.terms[0][1] // k_coefficient
    if mul(k, from_int(m)) > tail:
        m -= 1
    rem = remainder_after(mul(k, from_int(m)), tail)
    return Ordinal(tuple(high) + ((ZERO, m),)), rem


# ---------------------------------------------------------------------------
# Text syntax: 0, 5, w, w^w, w^(w^2)*3 + w*2 + 7
# ---------------------------------------------------------------------------

ORDINAL_GRAMMAR = r"""
?start: sum

?sum: product
    | sum "+" product       -> add

?product: power
    | product "*" power     -> mul

?power: atom
    | OMEGA "^" atom        -> omega_pow

?atom: INT                  -> number
    | OMEGA                 -> omega
    | "(" sum ")"

OMEGA: "w" | "ω"

%import common.INT
%import common.WS
%ignore WS
"""


@v_args(inline=True)
class _OrdinalBuilder(Transformer):
    def number(self, token):
        return from_int(int(token))

    def omega(self, _token):
        return OMEGA

    def omega_pow(self, _token, exponent):
        return omega_pow(exponent)

    def add(self, left, right):
        return add(left, right)

    def mul(self, left, right):
        return mul(left, right)


_parser = Lark(ORDINAL_GRAMMAR, parser="lalr", transformer=_OrdinalBuilder())


def parse_ordinal(text: str) -> Ordinal:
    try:
        return _parser.parse(text)
    except UnexpectedInput as e:
        raise ParseError.from_lark(e, text) from e


# ---------------------------------------------------------------------------
# Seeded sampling
# ---------------------------------------------------------------------------

def random_ordinal(rng: random.Random, depth: int = 2, max_terms: int = 3, max_coefficient: int = 5) -> Ordinal:
    """
    A random ordinal below w^^depth (depth 2: below w^w; depth 3: below w^(w^w)).
    """
    if depth <= 1:
        return from_int(rng.randint(0, max_coefficient))
    exponents = {random_ordinal(rng, depth - 1, max_terms, max_coefficient) for _ in range(rng.randint(0, max_terms))}
    return Ordinal(tuple((e, rng.randint(1, max_coefficient)) for e in sorted(exponents, reverse=True)))


def _random_below_power(rng: random.Random, exponent: Ordinal) -> Ordinal:
    # uniform enough sample of [0, w^exponent)
    if exponent == ZERO:
        return ZERO
    exponents = {random_below(rng, exponent) for _ in range(rng.randint(0, 2))}
    return Ordinal(tuple((e, rng.randint(1, 4)) for e in sorted(exponents, reverse=True)))


def random_below(rng: random.Random, bound: Ordinal) -> Ordinal:
    """A random ordinal in [0, bound)."""
    if not bound.terms:
        raise OrdinalDomainError("nothing lies below 0")
    head = []
    last = len(bound.terms) - 1
    for i, (exponent, coefficient) in enumerate(bound.terms):
        if i == last or rng.random() < 0.5:
            below = rng.randint(0, coefficient - 1)
            if below:
                head.append((exponent, below))
            return add(Ordinal(tuple(head)), _random_below_power(rng, exponent))
        head.append((exponent, coefficient))
    return Ordinal(tuple(head))


def max_coefficient(a: Ordinal) -> int:
    """Largest coefficient anywhere in the nested notation of a."""
    best = 0
    for exponent, coefficient in a.terms:
        best = max(best, coefficient, max_coefficient(exponent))
    return best
