import random

import pytest
from hypothesis import strategies as st

from corpus import random_formula
from kripke import JTree
from ordinal import random_ordinal

seeds = st.integers(min_value=0, max_value=2**32 - 1)

# below w^(w^w)
ordinals = seeds.map(lambda seed: random_ordinal(random.Random(seed), depth=3))
small_ordinals = seeds.map(lambda seed: random_ordinal(random.Random(seed), depth=2))
formulas = seeds.map(lambda seed: random_formula(random.Random(seed)))


def tree(n, worlds, **rel):
    """tree(1, "ab", r1=[("a", "b")]) builds a J_1-frame."""
    return JTree.from_names(n, list(worlds), {int(k[1:]): pairs for k, pairs in rel.items()})


def chain(height):
    names = [f"c{i}" for i in range(height + 1)]
    pairs = [(names[i], names[j]) for i in range(height + 1) for j in range(i + 1, height + 1)]
    return JTree.from_names(0, names, {0: pairs})


@pytest.fixture
def rng():
    return random.Random(1234)
