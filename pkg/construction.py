"""
construction.py

Compiles a finite rooted J_n-tree into an ordinal model: an ordinal
lambda < epsilon_0 together with an evaluable onto map f: [1, lambda] -> T
with f^-1(root) = {lambda}. The topologies on [1, lambda] are never built;
the model is the recipe that computes lambda and f, plus checks of the
properties f must have (rank-height agreement, suitability, local structure
at successor-rank points).
"""

import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

from opentelemetry import trace
from pydantic import BaseModel

from errors import FrameError, OrdinalDomainError
from formula import Formula
from kripke import (
    Decision,
    JTree,
    JTreeDocument,
    KripkeModel,
    decide_glp,
    hereditary_roots,
    r_height,
    root,
    rstar,
    sheets,
    validate_jtree,
)
from ordinal import (
    ONE,
    OMEGA,
    ZERO,
    Ordinal,
    add,
    div_rem,
    from_int,
    is_finite,
    is_successor,
    max_coefficient,
    mul,
    omega_pow,
    pred,
    r,
    r_iter,
    random_below,
    remainder_after,
)

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)


def shift_down(a: Ordinal) -> Ordinal:
    """[1, a] re-indexed from 0 ends at a-1 when a is finite and at a otherwise."""
    return pred(a) if is_finite(a) else a


# ---------------------------------------------------------------------------
# Recipes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Single:
    """One world; lambda = 1."""
    root: str

    @property
    def lam(self) -> Ordinal:
        return ONE

    def evaluate(self, alpha: Ordinal) -> str:
        return self.root


@dataclass(frozen=True)
class Sum:
    """Blocks [1, k_1], ..., [1, k_l] laid end to end; lambda = k_1 + ... + k_l."""
    parts: Tuple["Recipe", ...]

    @cached_property
    def lam(self) -> Ordinal:
        total = ZERO
        for part in self.parts:
            total = add(total, part.lam)
        return total

    def locate(self, alpha: Ordinal) -> Tuple[int, Ordinal]:
        """(block index, position inside the block) of alpha."""
        offset = ZERO
        for i, part in enumerate(self.parts):
            end = add(offset, part.lam)
            if alpha <= end:
                return i, remainder_after(offset, alpha)
            offset = end
        raise OrdinalDomainError(f"{alpha} lies beyond {self.lam}")

    def evaluate(self, alpha: Ordinal) -> str:
        i, beta = self.locate(alpha)
        return self.parts[i].evaluate(beta)


@dataclass(frozen=True)
class GLIter:
    """
    kappa * omega copies of the children's sum, with the root at the top.
    f(kappa*q + b) = g(b) for 1 <= b <= kappa and finite q; f(kappa*omega) = root.
    """
    parts: Sum
    root: str

    @cached_property
    def lam(self) -> Ordinal:
        return mul(self.parts.lam, OMEGA)

    def evaluate(self, alpha: Ordinal) -> str:
        kappa = self.parts.lam
        q, rem = div_rem(alpha, kappa)
        if rem:
            return self.parts.evaluate(rem)
        if q == OMEGA:
            return self.root
        return self.parts.evaluate(kappa)


@dataclass(frozen=True)
class Lift:
    """lambda = w^mu and f(alpha) = inner(1 + r(alpha))."""
    inner: "Recipe"
    mu: Ordinal
    root: str

    @cached_property
    def lam(self) -> Ordinal:
        return omega_pow(self.mu)

    def evaluate(self, alpha: Ordinal) -> str:
        position = add(ONE, r(alpha))
        return self.inner.evaluate(min(position, self.inner.lam))


@dataclass(frozen=True)
class DProd:
    """
    x ⊗_d y with lambda = kappa * kappa_0. Points kappa*q + b with b != 0, or
    with q a successor, fall in a copy of x; points kappa*q with q a limit
    come from the limit points of y.
    """
    x: Sum
    y: Lift
    root: str

    @cached_property
    def lam(self) -> Ordinal:
        return mul(self.x.lam, self.y.lam)

    def evaluate(self, alpha: Ordinal) -> str:
        kappa = self.x.lam
        q, rem = div_rem(alpha, kappa)
        if rem:
            return self.x.evaluate(rem)
        if is_successor(q):
            return self.x.evaluate(kappa)
        return self.y.evaluate(q)


Recipe = Union[Single, Sum, GLIter, Lift, DProd]


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

class _Compiler:
    """Double recursion on the modality level k and the R_k-height of the subtree."""

    def __init__(self, tree: JTree):
        self.tree = tree
        self.n = tree.n

    def star(self, x: int, k: int, worlds: int) -> int:
        mask = 0
        for row in self.tree.succ[k:]:
            mask |= row[x]
        return mask & worlds

    def members(self, worlds: int) -> List[int]:
        return [x for x in range(self.tree.size) if worlds >> x & 1]

    def immediate(self, x: int, k: int, worlds: int) -> List[int]:
        above = self.tree.succ[k][x] & worlds
        return [
            c for c in self.members(above)
            if not any(self.tree.succ[k][d] >> c & 1 for d in self.members(above))
        ]

    def hereditary_root(self, x: int, k: int, worlds: int) -> bool:
        return not any(self.star(y, k, worlds) >> x & 1 for y in self.members(worlds))

    def compile(self, worlds: int, a: int, k: int) -> Recipe:
        name = self.tree.worlds[a]
        if worlds == 1 << a:
            return Single(name)
        if k == self.n:
            children = self.immediate(a, k, worlds)
            parts = tuple(
                self.compile((1 << c) | (self.tree.succ[k][c] & worlds), c, k) for c in children
            )
            return GLIter(Sum(parts), name)
        if not self.tree.succ[k][a] & worlds:
            inner = self.compile(worlds, a, k + 1)
            return Lift(inner, shift_down(inner.lam), name)
        children = [
            c for c in self.immediate(a, k, worlds)
            if self.hereditary_root(c, k + 1, worlds)
        ]
        parts = tuple(self.compile((1 << c) | self.star(c, k, worlds), c, k) for c in children)
        sheet = (1 << a) | self.star(a, k + 1, worlds)
        y_inner = self.compile(sheet, a, k + 1)
        return DProd(Sum(parts), Lift(y_inner, y_inner.lam, name), name)


@dataclass(frozen=True)
class OrdinalModel:
    tree: JTree
    n: int
    recipe: Recipe
    lam: Ordinal

    def evaluate(self, alpha: Ordinal) -> str:
        return eval_map(self, alpha)


def build(tree: JTree) -> OrdinalModel:
    """The ordinal model of a valid rooted J_n-tree."""
    violations = validate_jtree(tree)
    if violations:
        raise FrameError(f"not a tree-like J_{tree.n}-frame: {violations[0].message}")
    a = tree.index[root(tree)]
    with tracer.start_as_current_span("build") as span:
        recipe = _Compiler(tree).compile(tree.full, a, 0)
        span.set_attribute("glpwb.lambda", str(recipe.lam))
    logger.info("🏗️ Built ordinal model with lambda = %s over %d worlds", recipe.lam, tree.size)
    return OrdinalModel(tree, tree.n, recipe, recipe.lam)


def lambda_of(model: OrdinalModel) -> Ordinal:
    return model.lam


def eval_map(model: OrdinalModel, alpha: Ordinal) -> str:
    if alpha < ONE or model.lam < alpha:
        raise OrdinalDomainError(f"{alpha} is outside [1, {model.lam}]")
    return model.recipe.evaluate(alpha)


# ---------------------------------------------------------------------------
# Witnesses and samples
# ---------------------------------------------------------------------------

def _witnesses(recipe: Recipe, avoid_one: bool = False) -> Dict[str, Ordinal]:
    """
    An ordinal mapped onto each world of `recipe`. With avoid_one, 1 is not
    used unless the recipe is a single world.
    """
    if isinstance(recipe, Single):
        return {recipe.root: ONE}
    if isinstance(recipe, Sum):
        found: Dict[str, Ordinal] = {}
        offset = ZERO
        for part in recipe.parts:
            for node, beta in _witnesses(part, avoid_one).items():
                found[node] = add(offset, beta)
            offset = add(offset, part.lam)
        return found
    if isinstance(recipe, GLIter):
        kappa = recipe.parts.lam
        found = {}
        for node, beta in _witnesses(recipe.parts).items():
            found[node] = add(kappa, ONE) if avoid_one and beta == ONE else beta
        found[recipe.root] = recipe.lam
        return found
    if isinstance(recipe, Lift):
        found = {}
        for node, beta in _witnesses(recipe.inner, avoid_one).items():
            alpha = omega_pow(shift_down(beta))
            found[node] = from_int(2) if avoid_one and alpha == ONE and recipe.lam > ONE else alpha
        found[recipe.root] = recipe.lam
        return found
    # DProd
    kappa = recipe.x.lam
    found = {}
    for node, beta in _witnesses(recipe.x).items():
        found[node] = add(kappa, ONE) if avoid_one and beta == ONE else beta
    for node, b in _witnesses(recipe.y.inner, avoid_one=True).items():
        if node != recipe.root:
            # a limit point of y, hence a point of the limit part of the product
            found[node] = mul(kappa, omega_pow(shift_down(b)))
    found[recipe.root] = recipe.lam
    return found


def witnesses(model: OrdinalModel) -> Dict[str, Ordinal]:
    """For every world, an ordinal in [1, lambda] that the map sends there."""
    found = _witnesses(model.recipe)
    return {w: found[w] for w in model.tree.worlds if w in found}


def _recipe_lambdas(recipe: Recipe) -> List[Ordinal]:
    if isinstance(recipe, Single):
        return [recipe.lam]
    if isinstance(recipe, Sum):
        return [recipe.lam] + [lam for part in recipe.parts for lam in _recipe_lambdas(part)]
    if isinstance(recipe, GLIter):
        return [recipe.lam] + _recipe_lambdas(recipe.parts)
    if isinstance(recipe, Lift):
        return [recipe.lam] + _recipe_lambdas(recipe.inner)
    return [recipe.lam] + _recipe_lambdas(recipe.x) + _recipe_lambdas(recipe.y)


def sample_points(model: OrdinalModel, count: int, rng: random.Random) -> List[Ordinal]:
    """1, lambda, the witnesses, then seeded random points of [1, lambda]."""
    points = [ONE, model.lam] + list(witnesses(model).values())
    while len(points) < count:
        points.append(max(random_below(rng, model.lam), ONE))
    return points


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_rank_height(model: OrdinalModel, samples: Sequence[Ordinal]) -> CheckReport:
    """r^(n+1)(alpha) must equal the R_n-height of f(alpha)."""
    report = CheckReport("rank-height")
    for alpha in samples:
        node = eval_map(model, alpha)
        expected = from_int(r_height(model.tree, model.n, node))
        got = r_iter(alpha, model.n + 1)
        report.checked += 1
        if got != expected:
            report.failures.append(f"r^{model.n + 1}({alpha}) = {got} but {node} has R_{model.n}-height {expected}")
    return report


def check_suitability(model: OrdinalModel, samples: Sequence[Ordinal]) -> CheckReport:
    """f(lambda) is the root, nothing below lambda maps there, and every world has a witness."""
    report = CheckReport("suitability")
    top = root(model.tree)
    report.checked += 1
    if eval_map(model, model.lam) != top:
        report.failures.append(f"f({model.lam}) = {eval_map(model, model.lam)}, not the root {top}")
    for alpha in samples:
        if alpha < model.lam:
            report.checked += 1
            if eval_map(model, alpha) == top:
                report.failures.append(f"f({alpha}) = {top} below lambda = {model.lam}")
    found = witnesses(model)
    for world in model.tree.worlds:
        report.checked += 1
        if world not in found:
            report.failures.append(f"no witness for {world}")
        elif eval_map(model, found[world]) != world:
            report.failures.append(f"witness {found[world]} for {world} maps to {eval_map(model, found[world])}")
    return report


def _sheet_root(model: OrdinalModel, node: str) -> str:
    if model.n == 0:
        return node
    roots = hereditary_roots(model.tree, 1)
    for sheet in sheets(model.tree, 1):
        if node in sheet:
            return next(iter(sheet & roots))
    raise FrameError(f"{node} lies in no 1-sheet")


def check_local_structure(model: OrdinalModel, samples: Sequence[Ordinal], rng: Optional[random.Random] = None) -> CheckReport:
    """
    At each sampled alpha of successor rank, points just below alpha map into
    R*_0(w), w the hereditary 1-root above f(alpha).
    """
    rng = rng or random.Random(0)
    report = CheckReport("local-structure")
    base = 2 + sum(max_coefficient(lam) for lam in _recipe_lambdas(model.recipe))
    for alpha in samples:
        e = r(alpha)
        if not is_successor(e):
            continue
        e_prev = pred(e)
        gamma = Ordinal(alpha.terms[:-1] + ((e, alpha.terms[-1][1] - 1),)) if alpha.terms[-1][1] > 1 else Ordinal(alpha.terms[:-1])
        w = _sheet_root(model, eval_map(model, alpha))
        allowed = rstar(model.tree, 0, w)
        m_base = base + max_coefficient(alpha)
        step = omega_pow(e_prev)
        tails = [ZERO, ONE, random_below(rng, step)]
        for m in (m_base, m_base + 1, 2 * m_base + 3):
            for delta in tails:
                point = add(add(gamma, mul(step, from_int(m))), delta)
                if not point < alpha:
                    continue
                report.checked += 1
                image = eval_map(model, point)
                if image not in allowed:
                    report.failures.append(
                        f"f({point}) = {image} is outside R*_0({w}) near {alpha}"
                    )
    return report


def run_checks(model: OrdinalModel, samples: Sequence[Ordinal]) -> List[CheckReport]:
    return [
        check_rank_height(model, samples),
        check_suitability(model, samples),
        check_local_structure(model, samples),
    ]


# ---------------------------------------------------------------------------
# End-to-end refutation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Refutation:
    decision: Decision
    model: KripkeModel
    ordinal_model: OrdinalModel


def refute(f: Formula, bound: Optional[int] = None, exhaustive: bool = False, workers: Optional[int] = None) -> Optional[Refutation]:
    """A Kripke countermodel to f together with its ordinal model, or None when GLP proves f."""
    return refutation_of(decide_glp(f, bound, exhaustive, workers))


def refutation_of(decision: Decision) -> Optional[Refutation]:
    """Build the ordinal model for the countermodel of a finished GLP decision."""
    if decision.countermodel is None:
        return None
    with tracer.start_as_current_span("refute"):
        model = decision.countermodel.model
        return Refutation(decision, model, build(model.frame))


# ---------------------------------------------------------------------------
# Finite sums of models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniformModel:
    """Ordinal models laid end to end over lambda = sum of their lambdas."""
    models: Tuple[OrdinalModel, ...]

    @cached_property
    def blocks(self) -> Sum:
        return Sum(tuple(m.recipe for m in self.models))

    @property
    def lam(self) -> Ordinal:
        return self.blocks.lam

    def evaluate(self, alpha: Ordinal) -> Tuple[int, str]:
        if alpha < ONE or self.lam < alpha:
            raise OrdinalDomainError(f"{alpha} is outside [1, {self.lam}]")
        i, beta = self.blocks.locate(alpha)
        return i, self.models[i].recipe.evaluate(beta)


def recipe_sum(models: Sequence[OrdinalModel]) -> UniformModel:
    if not models:
        raise OrdinalDomainError("cannot sum an empty list of models")
    return UniformModel(tuple(models))


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

class RecipeDocument(BaseModel):
    kind: str
    lam: str
    root: Optional[str] = None
    kappa: Optional[str] = None
    mu: Optional[str] = None
    parts: Optional[List["RecipeDocument"]] = None
    inner: Optional["RecipeDocument"] = None
    x: Optional["RecipeDocument"] = None
    y: Optional["RecipeDocument"] = None


def recipe_document(recipe: Recipe) -> RecipeDocument:
    lam = str(recipe.lam)
    if isinstance(recipe, Single):
        return RecipeDocument(kind="single", lam=lam, root=recipe.root)
    if isinstance(recipe, Sum):
        return RecipeDocument(kind="sum", lam=lam, parts=[recipe_document(p) for p in recipe.parts])
    if isinstance(recipe, GLIter):
        return RecipeDocument(
            kind="gl-iterate", lam=lam, root=recipe.root, kappa=str(recipe.parts.lam),
            parts=[recipe_document(p) for p in recipe.parts.parts],
        )
    if isinstance(recipe, Lift):
        return RecipeDocument(kind="lift", lam=lam, root=recipe.root, mu=str(recipe.mu), inner=recipe_document(recipe.inner))
    return RecipeDocument(
        kind="dprod", lam=lam, root=recipe.root, kappa=str(recipe.x.lam),
        x=recipe_document(recipe.x), y=recipe_document(recipe.y),
    )


class OrdinalModelDocument(BaseModel):
    n: int
    lam: str
    frame: JTreeDocument
    recipe: RecipeDocument
    witnesses: Dict[str, str]


def model_document(model: OrdinalModel) -> OrdinalModelDocument:
    return OrdinalModelDocument(
        n=model.n,
        lam=str(model.lam),
        frame=JTreeDocument.from_tree(model.tree),
        recipe=recipe_document(model.recipe),
        witnesses={w: str(alpha) for w, alpha in witnesses(model).items()},
    )
