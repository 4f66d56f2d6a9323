"""
invariants.py

Property suites behind `selftest`. Each suite checks the laws of one module
on exhaustive small instances plus seeded random samples, and returns a
SuiteReport instead of raising.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from opentelemetry import trace

import construction
from corpus import glp_axiom_instances, glp_non_theorems, j_non_theorems, random_formula
from errors import WorkbenchError
from finitetop import (
    FiniteSpace,
    PolySpace,
    as_mask,
    as_points,
    cb_sequence,
    check_d_map,
    check_glp_operators,
    d_op,
    d_product,
    discrete,
    enumerate_glp_polyspaces,
    enumerate_topologies,
    enumerate_topologies_brute,
    fold_morphism,
    generate_topology,
    is_d_map,
    is_glp_space,
    is_l_extension,
    is_l_maximal_by_criterion,
    is_l_maximal_by_def,
    is_magari,
    is_scattered,
    is_td,
    j34_hold,
    is_jn_morphism,
    left_topology,
    magari_to_space,
    operators_to_polyspace,
    plus_topology,
    polyspace_deltas,
    pullback_extension,
    l_extensions,
    l_maximal_extensions,
    product_limit_ranks,
    rank,
    rank_map,
    ranks,
    scattered_topologies,
    space_to_delta,
    star_condition_holds,
    subspace,
    topological_sum,
    tree_polyspace,
    valid_on_poly_space,
)
from formula import (
    And,
    Box,
    Formula,
    Implies,
    TRUE,
    box_subformulas,
    boxes_only,
    compile_formula,
    m_formula,
    m_plus,
    max_modality,
    parse,
    reduction_target,
    size,
    to_text,
    truth_sets,
    variables,
)
from kripke import (
    DEFAULT_BOUND,
    JTree,
    Verdict,
    canonical_form,
    decide_glp,
    decide_j,
    enumerate_jtrees,
    eval_model,
    frame_validates_j_axioms,
    rstar,
    sheets,
    validate_jtree,
)
from ordinal import (
    ONE,
    OMEGA,
    ZERO,
    add,
    cmp,
    div_rem,
    from_int,
    mul,
    omega_pow,
    r,
    random_below,
    random_ordinal,
)

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    samples: int = 200
    max_size: int = 3
    ordinal_triples: int = 10000
    bound: Optional[int] = None
    workers: Optional[int] = None


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def expect(self, holds: bool, message: str) -> None:
        self.checked += 1
        if not holds:
            self.failures.append(message)

    def absorb(self, failures: Iterable[str], prefix: str = "") -> None:
        self.checked += 1
        self.failures.extend(f"{prefix}{reason}" for reason in failures)


Suite = Callable[[SuiteConfig, SuiteReport], None]
SUITES: Dict[str, Suite] = {}


def suite(name: str) -> Callable[[Suite], Suite]:
    def register(fn: Suite) -> Suite:
        SUITES[name] = fn
        return fn
    return register


def run_suite(name: str, config: Optional[SuiteConfig] = None) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    config = config or SuiteConfig()
    report = SuiteReport(name)
    with tracer.start_as_current_span(f"selftest.{name}") as span:
        logger.info("🧪 Running suite %s", name)
        try:
            SUITES[name](config, report)
        except WorkbenchError as e:
            report.failures.append(f"suite aborted: {e}")
        span.set_attribute("glpwb.checked", report.checked)
        span.set_attribute("glpwb.failures", len(report.failures))
    if report.ok:
        logger.info("✅ %s: %d checks passed", name, report.checked)
    else:
        logger.warning("❌ %s: %d of %d checks failed", name, len(report.failures), report.checked)
    return report


def run_all(config: Optional[SuiteConfig] = None, names: Optional[Sequence[str]] = None) -> List[SuiteReport]:
    return [run_suite(name, config) for name in (names or list(SUITES))]


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _conjuncts(f: Formula) -> List[Formula]:
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _tree_validates(tree: JTree, f: Formula) -> bool:
    """f holds at every world under every valuation."""
    program = compile_formula(f)
    names = variables(f)
    for assignment in itertools.product(range(1 << tree.size), repeat=len(names)):
        if truth_sets(program, tree.full, dict(zip(names, assignment)), tree.diamond)[-1] != tree.full:
            return False
    return True


def _trees(n: int, max_size: int, rooted: bool = True) -> List[JTree]:
    return [t for s in range(1, max_size + 1) for t in enumerate_jtrees(n, s, rooted=rooted)]


def _maps(source_size: int, target_size: int) -> Iterable[tuple]:
    return itertools.product(range(target_size), repeat=source_size)


def _padded(sequence: List[int], length: int) -> List[int]:
    return sequence + [0] * (length - len(sequence))


# ---------------------------------------------------------------------------
# formula
# ---------------------------------------------------------------------------

@suite("formula")
def formula_suite(config: SuiteConfig, report: SuiteReport) -> None:
    rng = random.Random(config.seed)
    for _ in range(config.samples):
        f = random_formula(rng)
        report.expect(parse(to_text(f)) == f, f"print/parse changed {to_text(f)}")

        boxes = box_subformulas(f)
        top = max((m for m, _ in boxes), default=0)
        report.expect(
            max_modality(m_plus(f)) == top,
            f"M+ of {to_text(f)} has top modality {max_modality(m_plus(f))}, expected {top}",
        )

        m = m_formula(f)
        if not boxes:
            report.expect(m == TRUE, f"M of box-free {to_text(f)} is not true")
            continue
        limit = 2 * len(boxes) * max(top, 1) * (size(boxes_only(f)) + 1)
        report.expect(size(m) <= limit, f"M of {to_text(f)} has {size(m)} nodes, over {limit}")
        for part in _conjuncts(m):
            shaped = (
                isinstance(part, Implies)
                and isinstance(part.left, Box)
                and isinstance(part.right, Box)
                and part.left.arg == part.right.arg
                and part.left.n < part.right.n
            )
            if part != TRUE:
                report.expect(shaped, f"M of {to_text(f)} has a stray conjunct {to_text(part)}")


# ---------------------------------------------------------------------------
# ordinal
# ---------------------------------------------------------------------------

@suite("ordinal")
def ordinal_suite(config: SuiteConfig, report: SuiteReport) -> None:
    report.expect(add(ONE, OMEGA) == OMEGA and add(OMEGA, ONE) != OMEGA, "1 + w = w != w + 1 fails")
    two = from_int(2)
    report.expect(mul(two, OMEGA) == OMEGA and mul(OMEGA, two) != OMEGA, "2 w = w != w 2 fails")

    rng = random.Random(config.seed)
    for _ in range(config.ordinal_triples):
        a, b, c = (random_ordinal(rng, depth=3) for _ in range(3))
        report.expect(add(add(a, b), c) == add(a, add(b, c)), f"+ is not associative at {a}, {b}, {c}")
        report.expect(mul(mul(a, b), c) == mul(a, mul(b, c)), f"* is not associative at {a}, {b}, {c}")
        report.expect(mul(a, add(b, c)) == add(mul(a, b), mul(a, c)), f"left distributivity fails at {a}, {b}, {c}")
        report.expect(r(omega_pow(b)) == b, f"r(w^{b}) != {b}")
        report.expect(r(a) <= a, f"r({a}) > {a}")

        outcomes = (a < b, a == b, b < a)
        report.expect(sum(outcomes) == 1, f"trichotomy fails at {a}, {b}")
        if a < b and b < c:
            report.expect(a < c, f"< is not transitive at {a}, {b}, {c}")
        report.expect(cmp(a, b) == -cmp(b, a), f"cmp is not antisymmetric at {a}, {b}")

        if b != ZERO:
            q, rem = div_rem(a, b)
            report.expect(add(mul(b, q), rem) == a and rem < b, f"div_rem({a}, {b}) = ({q}, {rem})")


# ---------------------------------------------------------------------------
# kripke
# ---------------------------------------------------------------------------

@suite("kripke")
def kripke_suite(config: SuiteConfig, report: SuiteReport) -> None:
    rng = random.Random(config.seed)
    for n in (0, 1, 2):
        limit = config.max_size + 1 if n < 2 else config.max_size
        frames = _trees(n, limit, rooted=False)
        # canonical forms are only unique among frames of one size
        forms = [(t.size, canonical_form(t)) for t in frames]
        report.expect(len(set(forms)) == len(forms), f"J_{n} enumeration yields isomorphic frames")
        for tree in frames:
            label = f"J_{n} frame {tree.worlds}"
            report.absorb((v.message for v in validate_jtree(tree)), f"{label}: ")
            report.absorb(
                (f"{label} refutes {to_text(f)}" for f in frame_validates_j_axioms(tree, rng)),
            )
            for k in range(n):
                for sheet in sheets(tree, k + 1):
                    for x, y in itertools.permutations(sheet, 2):
                        for m in range(k + 1):
                            report.expect(
                                not tree.succ[m][tree.index[x]] >> tree.index[y] & 1,
                                f"{label}: {x} R_{m} {y} inside one {k + 1}-sheet",
                            )
            for k in range(n + 1):
                for w in tree.worlds:
                    report.expect(
                        rstar(tree, k, w) == rstar(tree, k, w, closure=True),
                        f"{label}: R*_{k}({w}) is not closed",
                    )


@suite("decide")
def decide_suite(config: SuiteConfig, report: SuiteReport) -> None:
    for label, f in glp_axiom_instances():
        decision = decide_glp(f, config.bound, workers=config.workers)
        report.expect(decision.valid, f"axiom ({label}) instance {to_text(f)} was refuted")
    for f in glp_non_theorems():
        decision = decide_glp(f, config.bound, workers=config.workers)
        report.expect(decision.verdict == Verdict.COUNTERMODEL, f"GLP non-theorem {to_text(f)} declared valid")
    for f in j_non_theorems():
        decision = decide_j(f, config.bound, workers=config.workers)
        report.expect(decision.verdict == Verdict.COUNTERMODEL, f"J non-theorem {to_text(f)} declared valid")
        if decision.countermodel is not None:
            cm = decision.countermodel
            report.expect(cm.world not in eval_model(cm.model, f), f"unverified countermodel for {to_text(f)}")


# ---------------------------------------------------------------------------
# finitetop
# ---------------------------------------------------------------------------

def _spaces(max_size: int) -> List[FiniteSpace]:
    return [s for size in range(1, max_size + 1) for s in enumerate_topologies(size)]


@suite("topology")
def topology_suite(config: SuiteConfig, report: SuiteReport) -> None:
    top = min(config.max_size + 1, 4)
    for size, expected in zip(range(1, top + 1), (1, 4, 29, 355)):
        report.expect(len(enumerate_topologies(size)) == expected, f"{size} points: expected {expected} topologies")
        if size <= 3:
            brute = set(enumerate_topologies_brute(size))
            report.expect(brute == {s.opens for s in enumerate_topologies(size)}, f"{size} points: enumerators disagree")

    for space in _spaces(top):
        subsets = range(1 << space.size)
        report.expect(d_op(space, 0) == 0, f"d(empty) != empty on {space.sorted_opens()}")
        scattered = is_scattered(space)
        td = is_td(space)
        report.expect(td or not scattered, f"scattered space {space.sorted_opens()} is not T_D")
        for a in subsets:
            da = d_op(space, a)
            if td:
                report.expect(not d_op(space, da) & ~da, f"dd{as_points(a)} is not inside d{as_points(a)}")
            if scattered:
                report.expect(d_op(space, a & ~da) == da, f"d(A - dA) != dA at {as_points(a)}")
        for a, b in itertools.combinations(subsets, 2):
            report.expect(
                d_op(space, a | b) == d_op(space, a) | d_op(space, b),
                f"d is not additive at {as_points(a)}, {as_points(b)}",
            )

    small = min(config.max_size, 3)
    scattered_spaces = [s for size in range(1, small + 1) for s in scattered_topologies(size)]
    for source, target in itertools.product(scattered_spaces, repeat=2):
        levels_x = cb_sequence(source)
        levels_y = cb_sequence(target)
        depth = max(len(levels_x), len(levels_y))
        for f in _maps(source.size, target.size):
            if not is_d_map(source, target, f):
                continue
            pulled = [as_mask(x for x in range(source.size) if level >> f[x] & 1) for level in _padded(levels_y, depth)]
            report.expect(_padded(levels_x, depth) == pulled, f"d-map {f} does not pull back derived sets")

    for space in scattered_spaces:
        for m in range(1, small + 1):
            target = left_topology(m)
            for f in _maps(space.size, m):
                if is_d_map(space, target, f):
                    report.expect(list(f) == ranks(space), f"d-map {f} onto {m} ranks differs from the rank function")
        _, levels = rank_map(space)
        report.expect(is_d_map(space, left_topology(rank(space)), levels), "rank map is not a d-map")

    for k in range(1, 7):
        report.expect(plus_topology(left_topology(k)).opens == discrete(k).opens, f"left topology on {k} points: plus is not discrete")


@suite("lmax")
def lmax_suite(config: SuiteConfig, report: SuiteReport) -> None:
    top = min(config.max_size + 1, 4)
    for size in range(1, top + 1):
        for space in scattered_topologies(size):
            for limit_ranks in (frozenset(), frozenset({1}), frozenset({2})):
                by_def = is_l_maximal_by_def(space, limit_ranks)
                by_criterion = is_l_maximal_by_criterion(space, limit_ranks)
                report.expect(
                    by_def == by_criterion,
                    f"l-maximality disagrees on {space.sorted_opens()} with limit ranks {sorted(limit_ranks)}",
                )
            plus = plus_topology(space)
            levels = cb_sequence(space)
            generated = generate_topology(space.size, list(space.opens) + levels[1:])
            report.expect(plus.opens == generated.opens, f"plus of {space.sorted_opens()} is not generated by its derived sets")
            expected = [r(from_int(k)) for k in ranks(space)]
            report.expect(
                [from_int(k) for k in ranks(plus)] == expected,
                f"plus ranks of {space.sorted_opens()} are not r of the ranks",
            )

    small = min(config.max_size, 3)
    scattered_spaces = [s for size in range(1, small + 1) for s in scattered_topologies(size)]
    for source, target in itertools.product(scattered_spaces, repeat=2):
        for f in _maps(source.size, target.size):
            if not is_d_map(source, target, f):
                continue
            report.expect(is_d_map(plus_topology(source), plus_topology(target), f), f"d-map {f} does not lift to plus")
            for finer in l_maximal_extensions(target):
                report.expect(
                    pullback_extension(f, source, finer) is not None,
                    f"no pullback of {finer.sorted_opens()} along {f}",
                )


@suite("magari")
def magari_suite(config: SuiteConfig, report: SuiteReport) -> None:
    for space in _spaces(min(config.max_size + 1, 4)):
        delta = space_to_delta(space)
        scattered = is_scattered(space)
        report.expect(scattered == is_magari(delta), f"{space.sorted_opens()}: scattered={scattered} but Magari={not scattered}")
        if scattered:
            back = magari_to_space(delta)
            report.expect(back.opens == space.opens, f"{space.sorted_opens()} does not survive delta and back")
            report.expect(space_to_delta(back).table == delta.table, f"delta table of {space.sorted_opens()} changed")


@suite("dproduct")
def dproduct_suite(config: SuiteConfig, report: SuiteReport) -> None:
    small = min(config.max_size, 3)
    spaces = [s for size in range(1, small + 1) for s in scattered_topologies(size)]
    for x, y in itertools.product(spaces, repeat=2):
        product = d_product(x, y)
        z = product.space
        label = f"{x.sorted_opens()} ⊗ {y.sorted_opens()}"
        report.expect(z.size == x.size * len(product.iso) + len(product.limit), f"{label}: wrong carrier size")

        z0 = subspace(z, product.z0)
        report.absorb(check_d_map(z0, x, product.pi0), f"{label}: pi0 ")
        report.absorb(
            (reason for reason in check_d_map(z, y, product.pi1) if reason.startswith(("not continuous", "not open"))),
            f"{label}: pi1 ",
        )

        levels_z, levels_x, levels_y = ranks(z), ranks(x), ranks(y)
        for point in range(z.size):
            if product.z0 >> point & 1:
                expected = levels_x[product.pi0[point]]
            else:
                expected = rank(x) + levels_y[product.pi1[point]] - 1
            report.expect(levels_z[point] == expected, f"{label}: rank of point {point} is {levels_z[point]}, expected {expected}")

        for a in range(1 << z.size):
            touched = as_mask(product.pi1[p] for p in as_points(a))
            derived_z, derived_y = d_op(z, a), d_op(y, touched)
            for point in as_points(product.z1):
                report.expect(
                    bool(derived_z >> point & 1) == bool(derived_y >> product.pi1[point] & 1),
                    f"{label}: derived set at limit point {point} disagrees with Y",
                )

        if product.limit:
            limit_part = subspace(y, as_mask(product.limit))
            expected_plus = topological_sum([plus_topology(x)] * len(product.iso) + [plus_topology(limit_part)])
            report.expect(plus_topology(z).opens == expected_plus.opens, f"{label}: plus of the product is not the sum")

    # l-extensions and l-maximality pass through the product
    declared = (frozenset(), frozenset({1}), frozenset({2}))
    finer = {(s.opens, limits): l_extensions(s, limits) for s in spaces for limits in declared}
    maximal = {(s.opens, limits) for s in spaces for limits in declared if is_l_maximal_by_criterion(s, limits)}
    for x, y in itertools.product(spaces, repeat=2):
        z = d_product(x, y).space
        label = f"{x.sorted_opens()} ⊗ {y.sorted_opens()}"
        for x_limits, y_limits in itertools.product(declared, repeat=2):
            z_limits = product_limit_ranks(x, x_limits, y_limits)
            for x_finer, y_finer in itertools.product(finer[x.opens, x_limits], finer[y.opens, y_limits]):
                report.expect(
                    is_l_extension(z, d_product(x_finer, y_finer).space, z_limits),
                    f"{label}: product of l-extensions is not an l-extension (limits {sorted(x_limits)}, {sorted(y_limits)})",
                )
            # rank(X) must not be declared a limit
            if 1 not in y_limits and (x.opens, x_limits) in maximal and (y.opens, y_limits) in maximal:
                report.expect(
                    is_l_maximal_by_criterion(z, z_limits),
                    f"{label}: product of l-maximal spaces is not l-maximal (limits {sorted(x_limits)}, {sorted(y_limits)})",
                )


@suite("glp-spaces")
def glp_spaces_suite(config: SuiteConfig, report: SuiteReport) -> None:
    rng = random.Random(config.seed)
    small = min(config.max_size, 3)
    axioms = [f for _, f in glp_axiom_instances(top=1)]
    sample = rng.sample(axioms, min(len(axioms), config.samples))

    # operators <-> spaces
    for size in range(1, small + 1):
        scattered_spaces = scattered_topologies(size)
        for lower, upper in itertools.product(scattered_spaces, repeat=2):
            poly = PolySpace(size, (lower, upper))
            deltas = polyspace_deltas(poly)
            glp = is_glp_space(poly)
            report.expect(glp == (not check_glp_operators(deltas)), f"{lower.sorted_opens()} under {upper.sorted_opens()}: GLP-space and operator checks disagree")
            if glp:
                back = operators_to_polyspace(deltas)
                report.expect(
                    [t.opens for t in back.topologies] == [t.opens for t in poly.topologies],
                    "operators do not give back their polyspace",
                )
        for poly in enumerate_glp_polyspaces(size, 1):
            for f in sample:
                report.expect(valid_on_poly_space(poly, f, variables(f)), f"GLP axiom {to_text(f)} fails on a GLP-space")

    # folds onto R_0-only trees
    corpus = glp_non_theorems() + [parse("[0]p -> [1]p"), parse("[0]([0]p -> p) -> [0]p")]
    for n in (0, 1):
        for tree in _trees(n, small):
            if any(tree.rel[k] for k in range(1, n + 1)):
                continue
            space, f = fold_morphism(tree)
            label = f"fold onto {tree.worlds}"
            report.expect(is_glp_space(space), f"{label} is not a GLP-space")
            report.expect(is_jn_morphism(space, tree, f), f"{label} is not a J_{n}-morphism")
            report.expect(j34_hold(space, tree, f) == star_condition_holds(space, tree, f), f"{label}: (j3)+(j4) and (*) disagree")
            for phi in corpus:
                if (max_modality(phi) or 0) > n:
                    continue
                report.expect(
                    valid_on_poly_space(space, phi, variables(phi)) == _tree_validates(tree, reduction_target(phi)),
                    f"{label}: validity of {to_text(phi)} differs from M+ validity on the frame",
                )

    # identity maps from upset spaces
    for n in (1, 2):
        for tree in _trees(n, small):
            poly = tree_polyspace(tree)
            identity = list(range(tree.size))
            report.expect(
                j34_hold(poly, tree, identity) == star_condition_holds(poly, tree, identity),
                f"identity on {tree.worlds}: (j3)+(j4) and (*) disagree",
            )

    # reduction fidelity
    bound = max(config.bound or DEFAULT_BOUND, 2 ** (small - 1))
    spaces_by_n = {n: [p for size in range(1, small + 1) for p in enumerate_glp_polyspaces(size, n)] for n in (0, 1, 2)}
    for _ in range(config.samples):
        phi = random_formula(rng)
        decision = decide_glp(phi, bound, workers=config.workers)
        report.expect(decision.target == reduction_target(phi), f"{to_text(phi)}: decision target is not M+ -> phi")
        direct = decide_j(reduction_target(phi), bound, n=max_modality(phi) or 0, workers=config.workers)
        report.expect(direct.verdict == decision.verdict, f"{to_text(phi)}: GLP and J-on-M+ verdicts differ")
        refuted = any(
            not valid_on_poly_space(p, phi, variables(phi))
            for p in spaces_by_n[max_modality(phi) or 0]
        )
        if refuted:
            report.expect(not decision.valid, f"{to_text(phi)} is refuted on a GLP-space but not on a frame")


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _chain(height: int) -> JTree:
    names = [f"c{i}" for i in range(height + 1)]
    pairs = [(names[i], names[j]) for i in range(height + 1) for j in range(i + 1, height + 1)]
    return JTree.from_names(0, names, {0: pairs})


@suite("construction")
def construction_suite(config: SuiteConfig, report: SuiteReport) -> None:
    rng = random.Random(config.seed)
    for h in range(5):
        model = construction.build(_chain(h))
        report.expect(model.lam == omega_pow(from_int(h)), f"chain of height {h} gives {model.lam}")

    limits = {0: config.max_size + 2, 1: config.max_size + 2, 2: config.max_size + 1}
    for n, limit in limits.items():
        for tree in _trees(n, limit):
            model = construction.build(tree)
            samples = construction.sample_points(model, config.samples, rng)
            for check in construction.run_checks(model, samples):
                report.absorb(check.failures, f"J_{n} frame {tree.worlds} {check.name}: ")
            _check_blocks(model, rng, report)

    refutation = construction.refute(parse("[1]p -> [0]p"), config.bound)
    report.expect(refutation is not None, "[1]p -> [0]p was not refuted")
    if refutation is not None:
        samples = construction.sample_points(refutation.ordinal_model, config.samples, rng)
        for check in construction.run_checks(refutation.ordinal_model, samples):
            report.absorb(check.failures, f"refutation model {check.name}: ")
    report.expect(construction.refute(parse("[0]p -> [1]p"), config.bound) is None, "[0]p -> [1]p was refuted")


def _check_blocks(model: construction.OrdinalModel, rng: random.Random, report: SuiteReport) -> None:
    recipe = model.recipe
    if isinstance(recipe, construction.GLIter):
        kappa = recipe.parts.lam
        for _ in range(4):
            beta = max(random_below(rng, kappa), ONE)
            q, q2 = from_int(rng.randint(0, 6)), from_int(rng.randint(0, 6))
            left = model.evaluate(add(mul(kappa, q), beta))
            right = model.evaluate(add(mul(kappa, q2), beta))
            report.expect(left == right, f"periodicity fails at {beta} for lambda {model.lam}")
    elif isinstance(recipe, construction.DProd):
        kappa = recipe.x.lam
        sheet = {recipe.root} | rstar(model.tree, 1, recipe.root)
        for q in (OMEGA, mul(OMEGA, from_int(2)), recipe.y.lam):
            if recipe.y.lam < q:
                continue
            node = model.evaluate(mul(kappa, q))
            report.expect(node in sheet, f"limit point {mul(kappa, q)} maps to {node}, outside the sheet of {recipe.root}")
