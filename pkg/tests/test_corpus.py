import random

import pytest
from hypothesis import given

from conftest import seeds
from corpus import (
    bodies,
    glp_axiom_instances,
    glp_non_theorems,
    j_axiom_instances,
    j_non_theorems,
    random_formula,
)
from formula import Box, Diamond, Implies, max_modality, parse, size, to_text, variables
from kripke import Verdict, decide_glp, decide_j


def _first_of_each_label(instances, per_label=3):
    picked = {}
    for label, f in instances:
        picked.setdefault(label, [])
        if len(picked[label]) < per_label:
            picked[label].append(f)
    return picked


class TestInstances:
    def test_bodies_respect_the_limit(self):
        assert all((max_modality(f) or 0) == 0 for f in bodies(0))
        assert len(bodies(0)) < len(bodies(2))

    def test_labels(self):
        labels = {label for label, _ in glp_axiom_instances(top=1)}
        assert labels == {"i", "ii", "iii", "iv", "v", "vi", "vii"}

    @pytest.mark.parametrize("label,pairs,schema", [
        ("iv", [(0, 1)], lambda m, n, a: Implies(Box(m, a), Box(n, a))),
        ("v", [(0, 1)], lambda m, n, a: Implies(Diamond(m, a), Box(n, Diamond(m, a)))),
        ("vi", [(0, 0), (0, 1), (1, 1)], lambda m, n, a: Implies(Box(m, a), Box(n, Box(m, a)))),
        ("vii", [(0, 1)], lambda m, n, a: Implies(Box(m, a), Box(m, Box(n, a)))),
    ])
    def test_labels_match_their_schema(self, label, pairs, schema):
        found = [f for tag, f in glp_axiom_instances(top=1) if tag == label]
        assert found == [schema(m, n, a) for m, n in pairs for a in bodies(1)]

    def test_j_instances_include_box_nesting(self):
        instances = j_axiom_instances(1)
        assert parse("[0]p -> [0][1]p") in instances
        assert parse("[0]p -> [1]p") not in instances

    def test_modalities_stay_in_range(self):
        assert all((max_modality(f) or 0) <= 1 for _, f in glp_axiom_instances(top=1))
        assert all((max_modality(f) or 0) <= 0 for f in j_axiom_instances(0))

    def test_axiom_samples_are_glp_valid(self):
        for label, formulas in _first_of_each_label(glp_axiom_instances(top=1)).items():
            for f in formulas:
                assert decide_glp(f).valid, f"({label}) {to_text(f)}"

    @pytest.mark.slow
    def test_every_axiom_instance_is_glp_valid(self):
        for label, f in glp_axiom_instances():
            assert decide_glp(f).valid, f"({label}) {to_text(f)}"


class TestNonTheorems:
    def test_glp_non_theorems_are_refuted(self):
        for f in glp_non_theorems():
            assert decide_glp(f).verdict == Verdict.COUNTERMODEL, to_text(f)

    def test_j_non_theorems_are_refuted(self):
        for f in j_non_theorems():
            assert decide_j(f).verdict == Verdict.COUNTERMODEL, to_text(f)


class TestRandomFormula:
    @given(seeds)
    def test_shape(self, seed):
        f = random_formula(random.Random(seed), max_nodes=10, max_modality=1)
        assert size(f) <= 10
        assert (max_modality(f) or 0) <= 1
        assert set(variables(f)) <= {"p", "q"}

    def test_seeded(self):
        assert random_formula(random.Random(7)) == random_formula(random.Random(7))
