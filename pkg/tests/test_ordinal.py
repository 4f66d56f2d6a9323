import random

import pytest
from hypothesis import assume, given, settings

import ordinal
from conftest import ordinals, seeds, small_ordinals
from errors import OrdinalDomainError, OrdinalResourceError, ParseError
from ordinal import (
    ONE,
    OMEGA,
    ZERO,
    add,
    cmp,
    div_rem,
    from_int,
    is_limit,
    is_successor,
    max_coefficient,
    mul,
    omega_pow,
    omega_tower,
    parse_ordinal,
    pred,
    r,
    r_iter,
    random_below,
    remainder_after,
    to_int,
)

w = parse_ordinal


class TestText:
    @pytest.mark.parametrize("text", ["0", "7", "w", "w*2", "w^2", "w^w*3 + w^2", "w^(w + 1) + w + 1"])
    def test_round_trip(self, text):
        assert str(w(text)) == text

    def test_parenthesised_exponent(self):
        assert str(omega_pow(add(OMEGA, ONE))) == "w^(w + 1)"

    def test_omega_symbol(self):
        assert w("ω^ω") == w("w^w")

    def test_arithmetic_in_text(self):
        assert w("w*(w+1)") == w("w^2 + w")

    def test_parse_error(self):
        with pytest.raises(ParseError) as info:
            w("w^")
        assert info.value.position == 2


class TestArithmetic:
    def test_addition_absorbs_on_the_left(self):
        assert add(ONE, OMEGA) == OMEGA
        assert add(OMEGA, ONE) != OMEGA
        assert add(w("w^2"), w("w*3")) == w("w^2 + w*3")
        assert add(w("w + 5"), w("w^2")) == w("w^2")

    def test_multiplication(self):
        assert mul(from_int(2), OMEGA) == OMEGA
        assert mul(OMEGA, from_int(2)) == w("w*2")
        assert mul(w("w + 1"), from_int(3)) == w("w*3 + 1")
        assert mul(w("w + 1"), OMEGA) == w("w^2")
        assert mul(w("w^w"), w("w^w")) == w("w^(w*2)")

    def test_finite(self):
        assert to_int(add(from_int(3), from_int(4))) == 7
        assert to_int(mul(from_int(3), from_int(4))) == 12
        with pytest.raises(OrdinalDomainError):
            to_int(OMEGA)
        with pytest.raises(OrdinalDomainError):
            from_int(-1)

    def test_r(self):
        assert r(w("w^w*3 + w^2")) == from_int(2)
        assert r(w("w + 5")) == ZERO
        assert r(ZERO) == ZERO
        assert r_iter(w("w^w"), 2) == ONE

    def test_limits_and_successors(self):
        assert is_limit(OMEGA) and not is_successor(OMEGA)
        assert is_successor(w("w + 1"))
        assert not is_limit(ZERO) and not is_successor(ZERO)
        assert pred(w("w + 1")) == OMEGA
        assert pred(from_int(3)) == from_int(2)
        with pytest.raises(OrdinalDomainError):
            pred(OMEGA)

    def test_remainder_after(self):
        assert remainder_after(ONE, OMEGA) == OMEGA
        assert remainder_after(OMEGA, w("w + 5")) == from_int(5)
        assert remainder_after(w("w*2"), w("w*2")) == ZERO
        with pytest.raises(OrdinalDomainError):
            remainder_after(w("w*2"), OMEGA)

    def test_div_rem(self):
        assert div_rem(w("w^2 + 3"), OMEGA) == (OMEGA, from_int(3))
        assert div_rem(from_int(7), from_int(2)) == (from_int(3), ONE)
        assert div_rem(OMEGA, ONE) == (OMEGA, ZERO)
        with pytest.raises(OrdinalDomainError):
            div_rem(OMEGA, ZERO)

    def test_omega_tower(self):
        assert omega_tower(0) == ONE
        assert omega_tower(2) == w("w^w")

    def test_max_coefficient(self):
        assert max_coefficient(w("w^(w*4)*2 + 3")) == 4

    def test_term_cap(self, monkeypatch):
        monkeypatch.setattr(ordinal, "MAX_TERMS", 3)
        with pytest.raises(OrdinalResourceError):
            add(w("w^2 + w"), from_int(1))


class TestLaws:
    @given(ordinals, ordinals, ordinals)
    @settings(max_examples=300)
    def test_associativity(self, a, b, c):
        assert add(add(a, b), c) == add(a, add(b, c))
        assert mul(mul(a, b), c) == mul(a, mul(b, c))

    @given(ordinals, ordinals, ordinals)
    @settings(max_examples=300)
    def test_left_distributivity(self, a, b, c):
        assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))

    @given(ordinals, ordinals)
    @settings(max_examples=300)
    def test_div_rem_reconstructs(self, a, k):
        assume(k != ZERO)
        q, rem = div_rem(a, k)
        assert add(mul(k, q), rem) == a
        assert rem < k

    @given(ordinals, ordinals)
    def test_remainder_after_cancels(self, a, b):
        assert remainder_after(a, add(a, b)) == b

    @given(ordinals, ordinals, ordinals)
    def test_total_order(self, a, b, c):
        assert [a < b, a == b, b < a].count(True) == 1
        assert cmp(a, b) == -cmp(b, a)
        if a <= b <= c:
            assert a <= c

    @given(small_ordinals)
    def test_r_inverts_omega_power(self, b):
        assert r(omega_pow(b)) == b
        assert r(b) <= b

    @given(seeds, ordinals)
    def test_random_below(self, seed, bound):
        assume(bound != ZERO)
        assert random_below(random.Random(seed), bound) < bound
