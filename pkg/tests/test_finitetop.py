import random

import pytest
from hypothesis import given, settings

import finitetop
from conftest import chain, seeds, tree
from errors import ModalityRangeError, ParseError, SpaceError
from finitetop import (
    DeltaDocument,
    FiniteSpace,
    PolySpace,
    PolySpaceDocument,
    SpaceDocument,
    as_mask,
    cb_sequence,
    check_d_map,
    check_glp_space,
    d_op,
    d_product,
    discrete,
    dual_d,
    enumerate_glp_polyspaces,
    enumerate_topologies,
    enumerate_topologies_brute,
    eval_poly_space,
    extensions,
    fold_morphism,
    generate_topology,
    glp_d_product,
    indiscrete,
    is_d_map,
    is_glp_space,
    is_jn_morphism,
    is_l_extension,
    is_l_maximal_by_criterion,
    is_l_maximal_by_def,
    is_scattered,
    is_td,
    j34_hold,
    l_extensions,
    left_topology,
    lme_polyspace,
    load_delta,
    load_polyspace,
    load_space,
    magari_to_space,
    maximal_extensions,
    plus_topology,
    product_limit_ranks,
    rank,
    rank_map,
    ranks,
    scattered_topologies,
    search_plus_nonmonotonicity_witness,
    set_rank,
    sierpinski,
    space_to_delta,
    star_condition_holds,
    subspace,
    topological_sum,
    valid_on_poly_space,
)
from formula import parse


def space(size, *opens):
    return FiniteSpace(size, frozenset(as_mask(o) for o in opens) | {0, (1 << size) - 1})


@pytest.fixture
def two_isolated_below_one():
    # 0 and 1 isolated, 2 of rank 1 with the whole carrier as its only neighborhood
    return space(3, [0], [1], [0, 1])


class TestSpaces:
    def test_topology_laws_are_enforced(self):
        with pytest.raises(SpaceError):
            FiniteSpace(2, frozenset({0b01}))
        with pytest.raises(SpaceError):
            FiniteSpace(2, frozenset({0, 0b01, 0b10, 0b11 | 0b100}))
        with pytest.raises(SpaceError):
            # {0} and {1} open but their union is missing
            FiniteSpace(3, frozenset({0, 0b001, 0b010, 0b111}))

    def test_neighborhoods(self, two_isolated_below_one):
        assert two_isolated_below_one.neighborhoods == (0b001, 0b010, 0b111)
        assert left_topology(3).neighborhoods == (0b001, 0b011, 0b111)

    def test_generate_topology(self):
        assert generate_topology(2, [0b01]) == sierpinski()
        assert generate_topology(2, [0b01, 0b10]) == discrete(2)

    def test_subspace_and_sum(self):
        assert subspace(left_topology(3), 0b101) == sierpinski()
        total = topological_sum([sierpinski(), discrete(1)])
        assert total.size == 3
        assert total.neighborhoods == (0b001, 0b011, 0b100)


class TestDerivedSets:
    def test_d_of_left_topology(self):
        left = left_topology(3)
        assert d_op(left, 0b001) == 0b110
        assert d_op(left, 0b010) == 0b100
        assert d_op(left, 0b100) == 0
        assert dual_d(left, 0b110) == 0b111 & ~d_op(left, 0b001)

    def test_ranks(self, two_isolated_below_one):
        assert ranks(left_topology(4)) == [0, 1, 2, 3]
        assert rank(left_topology(4)) == 4
        assert ranks(two_isolated_below_one) == [0, 0, 1]
        assert cb_sequence(two_isolated_below_one) == [0b111, 0b100, 0]
        assert set_rank(two_isolated_below_one, 0b011) == 1
        assert set_rank(two_isolated_below_one, 0) == 0

    def test_non_scattered(self):
        assert not is_scattered(indiscrete(2))
        with pytest.raises(SpaceError):
            ranks(indiscrete(2))

    def test_derived_sets_are_closed_only_in_td_spaces(self):
        assert is_td(sierpinski())
        assert all(is_td(s) for s in scattered_topologies(3))
        assert not is_td(indiscrete(2))
        # d{0} = {1} but dd{0} = {0}
        assert d_op(indiscrete(2), d_op(indiscrete(2), 0b01)) == 0b01

    def test_rank_map_is_a_d_map(self, two_isolated_below_one):
        target, f = rank_map(two_isolated_below_one)
        assert target == left_topology(2)
        assert is_d_map(two_isolated_below_one, target, f)

    def test_d_map_failures(self):
        assert check_d_map(sierpinski(), discrete(2), [0, 1])[0].startswith("not continuous")
        assert check_d_map(indiscrete(2), discrete(1), [0, 0]) == [
            "not pointwise discrete: 0 is a limit point of the fiber over 0",
        ]
        assert is_d_map(discrete(2), discrete(1), [0, 0])


class TestEnumeration:
    @pytest.mark.parametrize("size,count", [(1, 1), (2, 4), (3, 29), (4, 355)])
    def test_counts(self, size, count):
        assert len(enumerate_topologies(size)) == count

    @pytest.mark.parametrize("size", [1, 2, 3])
    def test_brute_force_agrees(self, size):
        assert sorted(map(sorted, enumerate_topologies_brute(size))) == sorted(
            sorted(s.opens) for s in enumerate_topologies(size)
        )

    def test_cap(self, monkeypatch):
        monkeypatch.setattr(finitetop, "ENUM_CAP", 4)
        with pytest.raises(SpaceError):
            enumerate_topologies(5)

    def test_scattered_count(self):
        # scattered finite spaces are exactly the T0 ones
        assert len(scattered_topologies(3)) == 19

    @given(seeds)
    @settings(max_examples=50)
    def test_random_topology_is_scattered(self, seed):
        assert is_scattered(finitetop.random_topology(3, random.Random(seed)))


class TestExtensions:
    def test_limit_rank_point_with_room_above(self, two_isolated_below_one):
        limit = frozenset({1})
        assert not is_l_maximal_by_criterion(two_isolated_below_one, limit)
        assert not is_l_maximal_by_def(two_isolated_below_one, limit)

    def test_sierpinski_is_maximal(self):
        limit = frozenset({1})
        assert is_l_maximal_by_criterion(sierpinski(), limit)
        assert is_l_maximal_by_def(sierpinski(), limit)

    def test_without_limit_ranks_every_space_is_maximal(self, two_isolated_below_one):
        assert is_l_maximal_by_criterion(two_isolated_below_one)
        assert is_l_maximal_by_def(two_isolated_below_one)

    def test_extensions_start_with_the_space(self, two_isolated_below_one):
        found = extensions(two_isolated_below_one)
        assert found[0] == two_isolated_below_one
        assert all(ranks(e) == [0, 0, 1] for e in found)
        assert len(maximal_extensions(two_isolated_below_one)) >= 1

    @pytest.mark.parametrize("k", range(1, 7))
    def test_plus_of_left_topology_is_discrete(self, k):
        assert plus_topology(left_topology(k)) == discrete(k)

    def test_lme_polyspace_is_glp(self, two_isolated_below_one):
        poly = lme_polyspace(two_isolated_below_one, 2, frozenset({1}))
        assert poly.n == 2
        assert is_glp_space(poly)

    def test_lme_polyspace_over_the_cap(self, monkeypatch):
        monkeypatch.setattr(finitetop, "ENUM_CAP", 2)
        with pytest.raises(SpaceError):
            lme_polyspace(left_topology(3), 1)

    @pytest.mark.slow
    def test_plus_has_no_finite_nonmonotonicity_witness(self):
        assert search_plus_nonmonotonicity_witness(3) is None
        assert all(plus_topology(s) == discrete(3) for s in enumerate_topologies(3))


class TestPolySpaces:
    def test_glp_conditions(self):
        assert is_glp_space(PolySpace(2, (sierpinski(), discrete(2))))
        failures = check_glp_space(PolySpace(2, (discrete(2), sierpinski())))
        assert "tau_0 is not contained in tau_1" in failures

    def test_arity_and_carrier(self):
        with pytest.raises(SpaceError):
            PolySpace(2, ())
        with pytest.raises(SpaceError):
            PolySpace(2, (discrete(3),))

    def test_enumerate_glp_polyspaces(self):
        found = list(enumerate_glp_polyspaces(2, 1))
        assert len(found) == 3
        assert all(is_glp_space(p) for p in found)

    def test_eval(self):
        poly = PolySpace(2, (sierpinski(),))
        assert eval_poly_space(poly, {"p": 0b01}, parse("<0>p")) == 0b10
        with pytest.raises(ModalityRangeError):
            eval_poly_space(poly, {}, parse("[1]p"))

    def test_glp_axioms_hold(self):
        poly = PolySpace(3, (left_topology(3), discrete(3)))
        for text in ["[0]([0]p -> p) -> [0]p", "[0]p -> [1]p", "<0>p -> [1]<0>p"]:
            assert valid_on_poly_space(poly, parse(text), ["p"])
        assert not valid_on_poly_space(poly, parse("[1]p -> [0]p"), ["p"])


class TestMagari:
    def test_round_trip(self):
        for s in scattered_topologies(3):
            assert magari_to_space(space_to_delta(s)) == s

    def test_non_scattered_derivative_is_not_magari(self):
        with pytest.raises(SpaceError):
            magari_to_space(space_to_delta(indiscrete(2)))


class TestDProducts:
    @pytest.mark.parametrize("y,size", [(sierpinski(), 3), (discrete(2), 4), (left_topology(3), 4)])
    def test_carrier(self, y, size):
        assert d_product(sierpinski(), y).space.size == size

    def test_projections(self):
        product = d_product(sierpinski(), left_topology(3))
        assert product.iso == (0,)
        assert product.limit == (1, 2)
        assert product.pi1 == (0, 0, 1, 2)
        assert product.z1 == 0b1100
        z0 = subspace(product.space, product.z0)
        assert is_d_map(z0, sierpinski(), list(product.pi0))

    def test_product_limit_ranks(self):
        # rank(sierpinski) = 2
        assert product_limit_ranks(sierpinski(), frozenset({1, 5}), frozenset({0, 2})) == {1, 3}

    def test_product_of_l_extensions(self, two_isolated_below_one):
        limits = frozenset({1})
        z = d_product(two_isolated_below_one, sierpinski()).space
        z_limits = product_limit_ranks(two_isolated_below_one, limits, frozenset())
        finer = l_extensions(two_isolated_below_one, limits)
        assert len(finer) == 3
        for x_finer in finer:
            assert is_l_extension(z, d_product(x_finer, sierpinski()).space, z_limits)

    def test_product_of_l_maximal_spaces(self):
        y, y_limits = left_topology(3), frozenset({2})
        assert is_l_maximal_by_criterion(y, y_limits)
        z_limits = product_limit_ranks(sierpinski(), frozenset(), y_limits)
        assert z_limits == {3}
        assert is_l_maximal_by_criterion(d_product(sierpinski(), y).space, z_limits)

    def test_glp_d_product(self):
        left = PolySpace(2, (sierpinski(), discrete(2)))
        right = PolySpace(3, (left_topology(3), discrete(3)))
        assert is_glp_space(glp_d_product(left, right))
        with pytest.raises(SpaceError):
            glp_d_product(left, PolySpace(2, (sierpinski(),)))


class TestMorphisms:
    def test_fold(self):
        frame = chain(2)
        poly, f = fold_morphism(frame)
        assert poly.size == 6
        assert is_glp_space(poly)
        assert is_jn_morphism(poly, frame, f)
        assert j34_hold(poly, frame, f) == star_condition_holds(poly, frame, f)

    def test_fold_needs_r0_only(self):
        with pytest.raises(SpaceError):
            fold_morphism(tree(1, "ab", r1=[("a", "b")]))

    def test_arity_mismatch(self):
        with pytest.raises(SpaceError):
            is_jn_morphism(PolySpace(2, (sierpinski(),)), tree(1, "ab", r1=[("a", "b")]), [0, 1])


class TestDocuments:
    def test_space(self):
        document = SpaceDocument.from_space(sierpinski())
        assert document.opens == [[], [0], [0, 1]]
        assert load_space(document.model_dump()) == sierpinski()

    def test_space_errors(self):
        with pytest.raises(SpaceError):
            load_space({"size": 2, "opens": [[], [0]]})
        with pytest.raises(ParseError):
            load_space({"size": "two", "opens": []})

    def test_polyspace(self):
        poly = PolySpace(2, (sierpinski(), discrete(2)))
        assert load_polyspace(PolySpaceDocument.from_polyspace(poly).model_dump()) == poly

    def test_delta(self):
        delta = space_to_delta(sierpinski())
        document = DeltaDocument.from_delta(delta)
        assert document.table["[0]"] == [1]
        assert load_delta(document.model_dump()) == delta
        with pytest.raises(ParseError):
            load_delta({"size": 1, "table": {"0": [0]}})
