import pytest
from hypothesis import given, settings

from conftest import formulas
from errors import ParseError
from formula import (
    BOTTOM,
    TRUE,
    And,
    Box,
    Diamond,
    Implies,
    Not,
    Or,
    Var,
    box_subformulas,
    conjoin,
    evaluate,
    from_json,
    m_formula,
    m_plus,
    max_modality,
    parse,
    reduction_target,
    size,
    subformulas,
    to_json,
    to_text,
    variables,
)

p, q, r = Var("p"), Var("q"), Var("r")


class TestParse:
    def test_axiom_four(self):
        assert parse("[0]p -> [1]p") == Implies(Box(0, p), Box(1, p))

    def test_precedence(self):
        assert parse("p & q | r") == Or(And(p, q), r)
        assert parse("~p & q") == And(Not(p), q)
        assert parse("[0]p & q") == And(Box(0, p), q)

    def test_implication_is_right_associative(self):
        assert parse("p -> q -> r") == Implies(p, Implies(q, r))

    def test_constants(self):
        assert parse("false") == BOTTOM
        assert parse("true") == TRUE
        assert parse("<0>true") == Diamond(0, TRUE)
        assert parse("~false") == Not(BOTTOM)
        assert parse("<1>false") == Diamond(1, BOTTOM)

    def test_unicode_connectives(self):
        assert parse("¬p ∧ q → ⊥") == parse("~p & q -> false")

    def test_end_of_input_position(self):
        with pytest.raises(ParseError) as info:
            parse("p &")
        assert info.value.position == 3

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ParseError) as info:
            parse("[0](p&q")
        assert info.value.position == 7

    def test_bad_character_position(self):
        with pytest.raises(ParseError) as info:
            parse("p $ q")
        assert info.value.position == 2

    @pytest.mark.parametrize("text", ["[1.5]p", "[-1]p"])
    def test_modal_index_must_be_natural(self, text):
        with pytest.raises(ParseError):
            parse(text)

    def test_parse_error_is_a_value_error(self):
        with pytest.raises(ValueError):
            parse("[0]")


class TestPrint:
    def test_minimal_parentheses(self):
        assert to_text(And(Or(p, q), r)) == "(p | q) & r"
        assert to_text(Or(p, And(q, r))) == "p | q & r"
        assert to_text(Implies(Implies(p, q), r)) == "(p -> q) -> r"
        assert to_text(Implies(p, Implies(q, r))) == "p -> q -> r"
        assert to_text(Not(Box(0, Implies(p, q)))) == "~[0](p -> q)"

    @pytest.mark.parametrize("text", ["~false", "true", "<0>true -> ~false", "~~false"])
    def test_constants_print_as_written(self, text):
        assert to_text(parse(text)) == text

    def test_true_and_negated_false_agree(self):
        assert evaluate(TRUE, 0b11, {}, lambda n, a: 0) == evaluate(Not(BOTTOM), 0b11, {}, lambda n, a: 0) == 0b11

    def test_str_is_text(self):
        assert str(parse("<1>~q")) == "<1>~q"

    @given(formulas)
    @settings(max_examples=200)
    def test_round_trip(self, f):
        assert parse(to_text(f)) == f


class TestJson:
    def test_tagged_form(self):
        assert to_json(Box(1, p)) == {"op": "box", "n": 1, "arg": {"op": "var", "name": "p"}}
        assert from_json(to_json(TRUE)) == TRUE
        assert to_json(TRUE) == {"op": "top"}

    @given(formulas)
    @settings(max_examples=50)
    def test_round_trip(self, f):
        assert from_json(to_json(f)) == f

    @pytest.mark.parametrize("obj", [
        {"op": "box", "arg": {"op": "var", "name": "p"}},
        {"op": "var"},
        {"op": "and", "left": {"op": "bot"}},
        {"op": "xor"},
    ])
    def test_malformed_documents(self, obj):
        with pytest.raises(ParseError):
            from_json(obj)


class TestStructure:
    def test_size_and_subformulas(self):
        f = parse("[0]p -> [0]p")
        assert size(f) == 5
        assert subformulas(f) == [p, Box(0, p), f]

    def test_variables_sorted(self):
        assert variables(parse("q & [1]p | q")) == ["p", "q"]

    def test_max_modality(self):
        assert max_modality(parse("p")) is None
        assert max_modality(parse("[0]p -> <2>q")) == 2

    def test_conjoin(self):
        assert conjoin([]) == TRUE
        assert conjoin([p, q, r]) == And(And(p, q), r)


class TestReduction:
    def test_box_subformulas_outer_first(self):
        assert box_subformulas(parse("[1][0]p")) == [(1, Box(0, p)), (0, p)]

    def test_diamonds_become_boxes(self):
        assert box_subformulas(parse("<1>p")) == [(1, Not(p))]

    def test_m_of_converse_of_monotonicity(self):
        assert m_formula(parse("[1]p -> [0]p")) == Implies(Box(0, p), Box(1, p))

    def test_m_plus_without_boxes(self):
        assert m_formula(p) == TRUE
        assert m_plus(p) == And(TRUE, Box(0, TRUE))

    def test_m_plus_boxes_m_up_to_top(self):
        f = parse("[1]p -> [0]p")
        m = m_formula(f)
        assert m_plus(f) == And(And(m, Box(0, m)), Box(1, m))
        assert reduction_target(f) == Implies(m_plus(f), f)

    @given(formulas)
    @settings(max_examples=100)
    def test_m_plus_top_modality(self, f):
        top = max((m for m, _ in box_subformulas(f)), default=0)
        assert max_modality(m_plus(f)) == top


class TestSemantics:
    # world 0 sees world 1 under R_0; nothing else
    @staticmethod
    def diamond(k, target):
        return 1 if k == 0 and target & 0b10 else 0

    def test_diamond_and_box(self):
        assert evaluate(parse("<0>p"), 0b11, {"p": 0b10}, self.diamond) == 0b01
        assert evaluate(parse("[0]p"), 0b11, {"p": 0b00}, self.diamond) == 0b10
        assert evaluate(parse("[0]false"), 0b11, {}, self.diamond) == 0b10

    def test_missing_variable_is_false(self):
        assert evaluate(parse("p"), 0b11, {}, self.diamond) == 0
