"""
kripke.py

Finite tree-like J_n-frames and models: frame-condition validation, sheets and
hereditary roots, model checking, isomorph-free enumeration, and countermodel
search for J, GL and (through the M+ reduction) GLP.
"""

import itertools
import logging
import os
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
from dotenv import load_dotenv
from opentelemetry import trace
from pydantic import BaseModel, ValidationError, field_validator

from corpus import j_axiom_instances
from errors import FrameError, ModalityRangeError, ParseError, WorkbenchError
from formula import (
    Formula,
    Implies,
    Program,
    compile_formula,
    max_modality,
    m_plus,
    subformulas,
    to_text,
    truth_sets,
    variables,
)

# Load environment variables
load_dotenv()

DEFAULT_BOUND = int(os.environ.get("GLPWB_DEFAULT_BOUND", "3"))
BOUND_CAP = int(os.environ.get("GLPWB_BOUND_CAP", "5"))
DEFAULT_WORKERS = int(os.environ.get("GLPWB_WORKERS", "1"))

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class JTree:
    """
    A finite J_n-frame. Worlds are addressed by index internally; rel[k] holds
    the pairs (x, y) with x R_k y.
    """
    n: int
    worlds: Tuple[str, ...]
    rel: Tuple[FrozenSet[Tuple[int, int]], ...]

    @classmethod
    def from_names(cls, n: int, worlds: Sequence[str], rel: Mapping[int, Iterable[Tuple[str, str]]]) -> "JTree":
        index = {w: i for i, w in enumerate(worlds)}
        if len(index) != len(worlds):
            raise FrameError("world names must be distinct")
        relations = []
        for k in range(n + 1):
            pairs = set()
            for x, y in rel.get(k, ()):
                if x not in index or y not in index:
                    raise FrameError(f"R_{k} mentions an unknown world in ({x}, {y})")
                pairs.add((index[x], index[y]))
            relations.append(frozenset(pairs))
        unknown = [k for k in rel if not 0 <= k <= n]
        if unknown:
            raise FrameError(f"relation index {unknown[0]} outside 0..{n}")
        return cls(n, tuple(worlds), tuple(relations))

    @property
    def size(self) -> int:
        return len(self.worlds)

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    @cached_property
    def index(self) -> Dict[str, int]:
        return {w: i for i, w in enumerate(self.worlds)}

    @cached_property
    def succ(self) -> Tuple[Tuple[int, ...], ...]:
        """succ[k][x]: bitmask of R_k(x)."""
        table = []
        for pairs in self.rel:
            row = [0] * self.size
            for x, y in pairs:
                row[x] |= 1 << y
            table.append(tuple(row))
        return tuple(table)

    def names(self, mask: int) -> FrozenSet[str]:
        return frozenset(self.worlds[i] for i in _bits(mask))

    def mask(self, names: Iterable[str]) -> int:
        result = 0
        for name in names:
            if name not in self.index:
                raise FrameError(f"unknown world {name!r}")
            result |= 1 << self.index[name]
        return result

    def diamond(self, k: int, target: int) -> int:
        """delta_k(A) = {x : some y in A with x R_k y}."""
        row = self.succ[k]
        return sum(1 << x for x in range(self.size) if row[x] & target)

    def restrict(self, keep: int) -> "JTree":
        order = list(_bits(keep))
        renumber = {old: new for new, old in enumerate(order)}
        relations = tuple(
            frozenset((renumber[x], renumber[y]) for x, y in pairs if x in renumber and y in renumber)
            for pairs in self.rel
        )
        return JTree(self.n, tuple(self.worlds[i] for i in order), relations)


@dataclass(frozen=True)
class Violation:
    condition: str
    k: int
    witness: Tuple[str, ...]
    message: str


def _check_k(tree: JTree, k: int) -> None:
    if not 0 <= k <= tree.n:
        raise FrameError(f"k={k} outside 0..{tree.n}")


def _sheet_ids(tree: JTree, k: int) -> List[int]:
    """Component id of each world under R_k ∪ ... ∪ R_n (k may be n+1)."""
    graph = nx.Graph()
    graph.add_nodes_from(range(tree.size))
    for pairs in tree.rel[k:]:
        graph.add_edges_from(pairs)
    ids = [0] * tree.size
    for number, component in enumerate(sorted(nx.connected_components(graph), key=min)):
        for x in component:
            ids[x] = number
    return ids


def validate_jtree(tree: JTree) -> List[Violation]:
    """Every violated frame condition, with witnesses. Empty means valid."""
    violations: List[Violation] = []
    name = tree.worlds
    n = tree.n

    for k, pairs in enumerate(tree.rel):
        succ = tree.succ[k]
        for x, y in sorted(pairs):
            for z in _bits(succ[y]):
                if not succ[x] >> z & 1:
                    violations.append(Violation(
                        "transitivity", k, (name[x], name[y], name[z]),
                        f"{name[x]} R_{k} {name[y]} R_{k} {name[z]} but not {name[x]} R_{k} {name[z]}",
                    ))
        graph = nx.DiGraph(list(pairs))
        try:
            cycle = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            cycle = None
        if cycle:
            witness = tuple(name[x] for x, _ in cycle)
            violations.append(Violation(
                "well-foundedness", k, witness, f"R_{k} has a cycle through {', '.join(witness)}",
            ))

    for m in range(n + 1):
        for higher in range(m + 1, n + 1):
            for x, y in sorted(tree.rel[higher]):
                # condition 2: R_m(x) = R_m(y)
                diff = tree.succ[m][x] ^ tree.succ[m][y]
                for z in _bits(diff):
                    violations.append(Violation(
                        "condition-2", m, (name[x], name[y], name[z]),
                        f"{name[x]} R_{higher} {name[y]} but they disagree on {name[z]} under R_{m}",
                    ))
            for x, y in sorted(tree.rel[m]):
                # condition 3: x R_m y R_higher z implies x R_m z
                for z in _bits(tree.succ[higher][y]):
                    if not tree.succ[m][x] >> z & 1:
                        violations.append(Violation(
                            "condition-3", m, (name[x], name[y], name[z]),
                            f"{name[x]} R_{m} {name[y]} R_{higher} {name[z]} but not {name[x]} R_{m} {name[z]}",
                        ))

    for k in range(n + 1):
        violations.extend(_tree_likeness(tree, k))
    return violations


def _tree_likeness(tree: JTree, k: int) -> List[Violation]:
    name = tree.worlds
    sheet = _sheet_ids(tree, k + 1)
    members: Dict[int, List[int]] = {}
    for x, s in enumerate(sheet):
        members.setdefault(s, []).append(x)
    found: List[Violation] = []
    above: Dict[int, set] = {}
    for x, y in sorted(tree.rel[k]):
        a, b = sheet[x], sheet[y]
        if a == b:
            found.append(Violation(
                "tree-likeness", k, (name[x], name[y]),
                f"{name[x]} R_{k} {name[y]} inside one {k + 1}-sheet",
            ))
            continue
        above.setdefault(b, set()).add(a)
        for u in members[a]:
            for v in members[b]:
                if not tree.succ[k][u] >> v & 1:
                    found.append(Violation(
                        "tree-likeness", k, (name[u], name[v]),
                        f"sheets of {name[x]} and {name[y]} are R_{k}-related but not {name[u]} R_{k} {name[v]}",
                    ))
    for b, preds in sorted(above.items()):
        for a1, a2 in itertools.combinations(sorted(preds), 2):
            u, v = members[a1][0], members[a2][0]
            if not (tree.succ[k][u] >> v & 1 or tree.succ[k][v] >> u & 1):
                found.append(Violation(
                    "tree-likeness", k, (name[u], name[v], name[members[b][0]]),
                    f"{k + 1}-sheets of {name[u]} and {name[v]} both lie below {name[members[b][0]]} but are R_{k}-incomparable",
                ))
    return found


def sheets(tree: JTree, k: int) -> List[FrozenSet[str]]:
    _check_k(tree, k)
    ids = _sheet_ids(tree, k)
    groups: Dict[int, List[str]] = {}
    for x, s in enumerate(ids):
        groups.setdefault(s, []).append(tree.worlds[x])
    return [frozenset(groups[s]) for s in sorted(groups)]


def _incoming(tree: JTree, k: int) -> int:
    mask = 0
    for pairs in tree.rel[k:]:
        for _, y in pairs:
            mask |= 1 << y
    return mask


def hereditary_roots(tree: JTree, k: int) -> FrozenSet[str]:
    """Worlds with no incoming R_j for any j >= k."""
    _check_k(tree, k)
    return tree.names(tree.full & ~_incoming(tree, k))


def _rstar_mask(tree: JTree, k: int, w: int) -> int:
    mask = 0
    for row in tree.succ[k:]:
        mask |= row[w]
    return mask


def rstar(tree: JTree, k: int, w: str, closure: bool = False) -> FrozenSet[str]:
    """
    R*_k(w) as the union of R_k(w), ..., R_n(w); with closure=True, the
    transitive closure of R_k ∪ ... ∪ R_n from w instead.
    """
    _check_k(tree, k)
    if w not in tree.index:
        raise FrameError(f"unknown world {w!r}")
    x = tree.index[w]
    if not closure:
        return tree.names(_rstar_mask(tree, k, x))
    graph = nx.DiGraph()
    graph.add_nodes_from(range(tree.size))
    for pairs in tree.rel[k:]:
        graph.add_edges_from(pairs)
    return frozenset(tree.worlds[y] for y in nx.descendants(graph, x))


def r_height(tree: JTree, k: int, w: str) -> int:
    """Length of the longest R_k-chain starting at w."""
    _check_k(tree, k)
    succ = tree.succ[k]

    @lru_cache(maxsize=None)
    def height(x: int) -> int:
        return max((1 + height(y) for y in _bits(succ[x])), default=0)

    return height(tree.index[w])


def root_index(tree: JTree) -> int:
    roots = list(_bits(tree.full & ~_incoming(tree, 0)))
    if len(roots) != 1:
        raise FrameError(f"frame is not rooted: {len(roots)} hereditary 0-roots")
    x = roots[0]
    if (1 << x) | _rstar_mask(tree, 0, x) != tree.full:
        raise FrameError(f"frame is not rooted: {tree.worlds[x]} does not see every world")
    return x


def root(tree: JTree) -> str:
    """The hereditary 0-root of a rooted frame."""
    return tree.worlds[root_index(tree)]


def generated_subframe(tree: JTree, w: str) -> JTree:
    x = tree.index[w]
    return tree.restrict((1 << x) | _rstar_mask(tree, 0, x))


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KripkeModel:
    frame: JTree
    valuation: Mapping[str, FrozenSet[str]] = field(default_factory=dict)

    def masks(self) -> Dict[str, int]:
        return {var: self.frame.mask(worlds) for var, worlds in self.valuation.items()}


def _eval_masks(tree: JTree, program: Program, valuation: Mapping[str, int]) -> List[int]:
    return truth_sets(program, tree.full, valuation, tree.diamond)


def eval_model(model: KripkeModel, f: Formula) -> FrozenSet[str]:
    top = max_modality(f)
    if top is not None and top > model.frame.n:
        raise ModalityRangeError(f"formula uses [{top}] but the frame only has R_0..R_{model.frame.n}")
    values = _eval_masks(model.frame, compile_formula(f), model.masks())
    return model.frame.names(values[-1])


def frame_validates_j_axioms(tree: JTree, rng: random.Random, trials: int = 8) -> List[Formula]:
    """
    J axiom instances (Löb, K, (vi), (vii) and a few tautologies) that fail
    somewhere on `tree` under `trials` random valuations of p and q.
    """
    failures: List[Formula] = []
    for f in j_axiom_instances(tree.n):
        program = compile_formula(f)
        for _ in range(trials):
            valuation = {"p": rng.getrandbits(tree.size), "q": rng.getrandbits(tree.size)}
            if _eval_masks(tree, program, valuation)[-1] != tree.full:
                failures.append(f)
                break
    return failures


# ---------------------------------------------------------------------------
# Enumeration of tree-like frames up to isomorphism
#
# A connected frame on relations R_k..R_n is a root (k+1)-sheet (itself a
# connected frame on R_{k+1}..R_n) with a multiset of connected subframes
# hanging above it under R_k. Shapes are nested tuples generated once each.
# ---------------------------------------------------------------------------

Shape = tuple


@lru_cache(maxsize=None)
def _connected(depth: int, size: int) -> Tuple[Shape, ...]:
    if depth == 0:
        return ((),) if size == 1 else ()
    shapes = []
    for sheet_size in range(1, size + 1):
        for sheet in _connected(depth - 1, sheet_size):
            for kids in _forests(depth, size - sheet_size):
                shapes.append((sheet, kids))
    return tuple(shapes)


def _multisets(depth: int, total: int, limit: Optional[Tuple[int, int]]) -> Iterator[Tuple[Shape, ...]]:
    if total == 0:
        yield ()
        return
    top = total if limit is None else min(total, limit[0])
    for part in range(top, 0, -1):
        shapes = _connected(depth, part)
        last = len(shapes) - 1 if limit is None or part < limit[0] else limit[1]
        for i in range(last, -1, -1):
            for rest in _multisets(depth, total - part, (part, i)):
                yield (shapes[i],) + rest


@lru_cache(maxsize=None)
def _forests(depth: int, size: int) -> Tuple[Tuple[Shape, ...], ...]:
    return tuple(_multisets(depth, size, None))


def _materialize(shapes: Sequence[Shape], n: int) -> JTree:
    edges: List[set] = [set() for _ in range(n + 1)]

    def build(shape: Shape, depth: int, offset: int) -> int:
        if depth == 0:
            return 1
        sheet, kids = shape
        sheet_size = build(sheet, depth - 1, offset)
        level = n + 1 - depth
        position = offset + sheet_size
        for kid in kids:
            kid_size = build(kid, depth, position)
            edges[level].update(
                (x, y) for x in range(offset, offset + sheet_size) for y in range(position, position + kid_size)
            )
            position += kid_size
        return position - offset

    total = 0
    for shape in shapes:
        total += build(shape, n + 1, total)
    return JTree(n, tuple(f"w{i}" for i in range(total)), tuple(frozenset(e) for e in edges))


def enumerate_jtrees(n: int, size: int, rooted: bool = False) -> Iterator[JTree]:
    """Every tree-like J_n-frame on `size` worlds, one per isomorphism class."""
    if size < 1:
        raise FrameError("frames need at least one world")
    if rooted:
        for shape in _connected(n + 1, size):
            yield _materialize((shape,), n)
    else:
        for forest in _forests(n + 1, size):
            yield _materialize(forest, n)


def canonical_form(tree: JTree) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
    """Lexicographically minimal adjacency encoding over all relabelings."""
    best = None
    for perm in itertools.permutations(range(tree.size)):
        encoding = tuple(tuple(sorted((perm[x], perm[y]) for x, y in pairs)) for pairs in tree.rel)
        if best is None or encoding < best:
            best = encoding
    return best


# ---------------------------------------------------------------------------
# Countermodel search
# ---------------------------------------------------------------------------

class Verdict(str, Enum):
    VALID = "valid"
    COUNTERMODEL = "countermodel"


@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    world: str
    formula: Formula


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    formula: Formula
    target: Formula
    n: int
    bound: int
    estimate: int
    frames_checked: int
    countermodel: Optional[Countermodel] = None

    @property
    def valid(self) -> bool:
        return self.verdict == Verdict.VALID

    @property
    def bounded(self) -> bool:
        """True when validity was only established up to `bound` worlds."""
        return self.valid and self.bound < self.estimate


def filtration_estimate(f: Formula, n: int) -> int:
    return 2 ** (len(subformulas(f)) * (n + 1))


def _refute_at_root(tree: JTree, program: Program, names: Sequence[str]) -> Optional[Dict[str, int]]:
    """
    Try every valuation of `names` on the frame, in mask order.

    This is a superset of the subformula-definable valuations, so a frame is
    never wrongly reported free of countermodels. The cost is
    2^(|names|*size) evaluations, which stays small under BOUND_CAP.
    """
    r0 = root_index(tree)
    for assignment in itertools.product(range(1 << tree.size), repeat=len(names)):
        valuation = dict(zip(names, assignment))
        if not _eval_masks(tree, program, valuation)[-1] >> r0 & 1:
            return valuation
    return None


def _frames(n: int, bound: int) -> Iterator[JTree]:
    for size in range(1, bound + 1):
        yield from enumerate_jtrees(n, size, rooted=True)


def _search(n: int, bound: int, program: Program, names: Sequence[str], workers: int) -> Tuple[int, Optional[Tuple[JTree, Dict[str, int]]]]:
    if workers <= 1:
        checked = 0
        for tree in _frames(n, bound):
            checked += 1
            valuation = _refute_at_root(tree, program, names)
            if valuation is not None:
                return checked, (tree, valuation)
        return checked, None

    # partitioned search; the earliest hit in stream order wins
    frames = list(_frames(n, bound))
    best = {"index": len(frames), "hit": None}
    lock = threading.Lock()
    done = threading.Event()

    def scan(indices: range) -> None:
        for i in indices:
            if done.is_set() and i >= best["index"]:
                return
            valuation = _refute_at_root(frames[i], program, names)
            if valuation is not None:
                with lock:
                    if i < best["index"]:
                        best["index"], best["hit"] = i, (frames[i], valuation)
                done.set()
                return

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(scan, [range(w, len(frames), workers) for w in range(workers)]))
    return min(best["index"] + 1, len(frames)), best["hit"]


def _choose_bound(target: Formula, n: int, bound: Optional[int], exhaustive: bool) -> Tuple[int, int]:
    estimate = filtration_estimate(target, n)
    if bound is not None:
        return bound, estimate
    if not exhaustive:
        return DEFAULT_BOUND, estimate
    if estimate > BOUND_CAP:
        logger.warning("⚠️ Filtration estimate %d is over the cap of %d (GLPWB_BOUND_CAP)", estimate, BOUND_CAP)
    return min(estimate, BOUND_CAP), estimate


def decide_j(
    f: Formula,
    bound: Optional[int] = None,
    exhaustive: bool = False,
    n: Optional[int] = None,
    workers: Optional[int] = None,
    source: Optional[Formula] = None,
) -> Decision:
    """
    Search tree-like J_n-frames up to `bound` worlds for a refutation of f at
    the hereditary 0-root. Every returned countermodel is re-checked.
    """
    top = max_modality(f)
    n = max(top or 0, n or 0)
    bound, estimate = _choose_bound(f, n, bound, exhaustive)
    workers = workers or DEFAULT_WORKERS
    with tracer.start_as_current_span("decide_j") as span:
        span.set_attribute("glpwb.formula", to_text(source or f))
        span.set_attribute("glpwb.bound", bound)
        logger.info("🔍 Searching J_%d frames up to %d worlds for %s", n, bound, to_text(f))
        checked, hit = _search(n, bound, compile_formula(f), variables(f), workers)
        span.set_attribute("glpwb.frames_checked", checked)

    if hit is None:
        logger.info("✅ No countermodel among %d frames", checked)
        return Decision(Verdict.VALID, source or f, f, n, bound, estimate, checked)

    tree, valuation = hit
    model = KripkeModel(tree, {var: tree.names(mask) for var, mask in valuation.items()})
    world = root(tree)
    if world in eval_model(model, f):
        raise WorkbenchError(f"search produced an unverified countermodel for {to_text(f)}")
    logger.info("❌ Countermodel on %d worlds after %d frames", tree.size, checked)
    return Decision(Verdict.COUNTERMODEL, source or f, f, n, bound, estimate, checked, Countermodel(model, world, f))


def decide_glp(
    f: Formula,
    bound: Optional[int] = None,
    exhaustive: bool = False,
    workers: Optional[int] = None,
) -> Decision:
    """GLP proves f iff J proves M+(f) -> f."""
    target = Implies(m_plus(f), f)
    decision = decide_j(target, bound, exhaustive, n=max_modality(f) or 0, workers=workers, source=f)
    if decision.countermodel is not None:
        cm = decision.countermodel
        if cm.world not in eval_model(cm.model, m_plus(f)):
            raise WorkbenchError("GLP countermodel does not satisfy M+ at its root")
    return decision


def decide_gl(f: Formula, bound: Optional[int] = None, exhaustive: bool = False, workers: Optional[int] = None) -> Decision:
    """GL is J_0: only [0] and <0> may occur."""
    top = max_modality(f)
    if top is not None and top > 0:
        raise ModalityRangeError(f"GL formulas use only [0]; found [{top}]")
    return decide_j(f, bound, exhaustive, n=0, workers=workers)


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

class JTreeDocument(BaseModel):
    n: int
    worlds: List[str]
    rel: Dict[str, List[Tuple[str, str]]] = {}

    @field_validator("n")
    @classmethod
    def _nonnegative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("n must be nonnegative")
        return value

    def to_tree(self) -> JTree:
        rel = {}
        for key, pairs in self.rel.items():
            if not key.isdigit():
                raise FrameError(f"relation key {key!r} is not a modality index")
            rel[int(key)] = pairs
        return JTree.from_names(self.n, self.worlds, rel)

    @classmethod
    def from_tree(cls, tree: JTree) -> "JTreeDocument":
        rel = {
            str(k): sorted([tree.worlds[x], tree.worlds[y]] for x, y in pairs)
            for k, pairs in enumerate(tree.rel)
        }
        return cls(n=tree.n, worlds=list(tree.worlds), rel=rel)


def load_jtree(obj: dict) -> JTree:
    try:
        return JTreeDocument.model_validate(obj).to_tree()
    except ValidationError as e:
        raise ParseError(f"invalid frame document: {e.errors()[0]['msg']}") from e


class CountermodelDocument(BaseModel):
    formula: str
    target: str
    frame: JTreeDocument
    valuation: Dict[str, List[str]]
    world: str
    truth_sets: Dict[str, List[str]]


def _sorted_names(tree: JTree, names: Iterable[str]) -> List[str]:
    return sorted(names, key=tree.index.__getitem__)


def countermodel_document(decision: Decision) -> CountermodelDocument:
    cm = decision.countermodel
    if cm is None:
        raise WorkbenchError("decision has no countermodel")
    tree = cm.model.frame
    program = compile_formula(decision.target)
    values = _eval_masks(tree, program, cm.model.masks())
    return CountermodelDocument(
        formula=to_text(decision.formula),
        target=to_text(decision.target),
        frame=JTreeDocument.from_tree(tree),
        valuation={var: _sorted_names(tree, worlds) for var, worlds in sorted(cm.model.valuation.items())},
        world=cm.world,
        truth_sets={to_text(node): _sorted_names(tree, tree.names(mask)) for node, mask in zip(program.nodes, values)},
    )
