import pytest

from conftest import chain, tree
from construction import (
    DProd,
    GLIter,
    Lift,
    OrdinalModel,
    Single,
    build,
    check_local_structure,
    check_rank_height,
    check_suitability,
    eval_map,
    lambda_of,
    model_document,
    recipe_sum,
    refute,
    run_checks,
    sample_points,
    shift_down,
    witnesses,
)
from errors import FrameError, OrdinalDomainError
from formula import parse
from kripke import enumerate_jtrees
from ordinal import ONE, OMEGA, ZERO, from_int, omega_pow, parse_ordinal

w = parse_ordinal


@pytest.fixture
def forked():
    # a R_0 b, c R_0 b, a R_1 c
    return tree(1, "abc", r0=[("a", "b"), ("c", "b")], r1=[("a", "c")])


def assert_checks_pass(model, rng, count=60):
    for report in run_checks(model, sample_points(model, count, rng)):
        assert report.ok, report.failures


class TestShiftDown:
    def test_finite_and_infinite(self):
        assert shift_down(from_int(3)) == from_int(2)
        assert shift_down(OMEGA) == OMEGA


class TestBuild:
    def test_single_world(self):
        model = build(tree(0, "a"))
        assert isinstance(model.recipe, Single)
        assert lambda_of(model) == ONE
        assert eval_map(model, ONE) == "a"

    def test_one_step(self):
        model = build(tree(0, "ab", r0=[("a", "b")]))
        assert isinstance(model.recipe, GLIter)
        assert model.lam == OMEGA
        assert model.evaluate(from_int(7)) == "b"
        assert model.evaluate(OMEGA) == "a"
        assert witnesses(model) == {"a": OMEGA, "b": ONE}

    def test_higher_step_is_lifted(self):
        model = build(tree(1, "ab", r1=[("a", "b")]))
        assert isinstance(model.recipe, Lift)
        assert model.lam == w("w^w")
        assert model.evaluate(w("w^5")) == "b"
        assert model.evaluate(w("w^w")) == "a"

    @pytest.mark.parametrize("height", range(5))
    def test_chains(self, height):
        assert build(chain(height)).lam == omega_pow(from_int(height))

    def test_chain_of_three(self):
        model = build(chain(2))
        assert model.evaluate(w("w*3 + 5")) == "c2"
        assert model.evaluate(w("w*3")) == "c1"
        assert model.evaluate(w("w^2")) == "c0"

    def test_derivative_product(self, forked):
        model = build(forked)
        assert isinstance(model.recipe, DProd)
        assert model.lam == w("w^w")
        assert model.evaluate(from_int(5)) == "b"
        assert model.evaluate(OMEGA) == "c"
        assert model.evaluate(w("w^w")) == "a"

    def test_invalid_frame(self):
        with pytest.raises(FrameError):
            build(tree(0, "ab", r0=[("a", "b"), ("b", "a")]))

    def test_unrooted_frame(self):
        with pytest.raises(FrameError):
            build(tree(0, "ab"))

    def test_domain(self):
        model = build(chain(1))
        with pytest.raises(OrdinalDomainError):
            eval_map(model, ZERO)
        with pytest.raises(OrdinalDomainError):
            eval_map(model, w("w + 1"))


class TestChecks:
    def test_named_checks(self, forked, rng):
        model = build(forked)
        samples = sample_points(model, 40, rng)
        assert check_rank_height(model, samples).ok
        assert check_suitability(model, samples).ok
        report = check_local_structure(model, samples)
        assert report.ok and report.checked > 0

    def test_samples_start_with_the_ends(self, rng):
        model = build(chain(2))
        samples = sample_points(model, 30, rng)
        assert samples[:2] == [ONE, model.lam]
        assert len(samples) == 30
        assert all(ONE <= s <= model.lam for s in samples)

    @pytest.mark.parametrize("n,size", [(0, 4), (1, 4), (2, 3)])
    def test_every_small_tree(self, n, size, rng):
        for frame in enumerate_jtrees(n, size, rooted=True):
            assert_checks_pass(build(frame), rng)

    def test_rank_height_catches_a_wrong_map(self, rng):
        model = build(chain(2))
        # same recipe, claimed over a taller chain
        wrong = OrdinalModel(chain(3), model.n, model.recipe, model.lam)
        assert not check_rank_height(wrong, [model.lam]).ok


class TestRefute:
    def test_unprovable(self):
        refutation = refute(parse("[0]false"))
        assert refutation is not None
        assert refutation.ordinal_model.lam == OMEGA

    def test_converse_of_monotonicity(self, rng):
        refutation = refute(parse("[1]p -> [0]p"))
        assert refutation is not None
        assert refutation.ordinal_model.tree == refutation.model.frame
        assert_checks_pass(refutation.ordinal_model, rng)

    def test_provable(self):
        assert refute(parse("[0]p -> [1]p")) is None


class TestSums:
    def test_sum_of_models(self):
        uniform = recipe_sum([build(tree(0, "x")), build(tree(0, "ab", r0=[("a", "b")]))])
        assert uniform.lam == OMEGA
        assert uniform.evaluate(ONE) == (0, "x")
        assert uniform.evaluate(from_int(2)) == (1, "b")
        assert uniform.evaluate(OMEGA) == (1, "a")

    def test_empty_sum(self):
        with pytest.raises(OrdinalDomainError):
            recipe_sum([])


class TestDocuments:
    def test_model_document(self):
        document = model_document(build(chain(1)))
        assert document.lam == "w"
        assert document.recipe.kind == "gl-iterate"
        assert document.recipe.kappa == "1"
        assert document.witnesses == {"c0": "w", "c1": "1"}

    def test_nested_document(self, forked):
        document = model_document(build(forked))
        assert document.recipe.kind == "dprod"
        assert document.recipe.y.kind == "lift"
        assert document.recipe.y.inner.kind == "gl-iterate"
