"""
finitetop.py

Finite topological laboratory. Every carrier is {0, ..., size-1} and every
subset is an int bitmask. Finite spaces are Alexandrov, so each point x has a
least open neighborhood U_x and x is a limit point of A iff U_x meets A∖{x}.

Covers derived sets, Cantor-Bendixson ranks, d-maps, rank-preserving and
l-extensions, the next topology tau+, GLP polyspaces, Magari operators,
d-products and J_n-morphisms onto tree-like frames.
"""

import itertools
import logging
import os
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from dotenv import load_dotenv
from opentelemetry import trace
from pydantic import BaseModel, ValidationError, field_validator

from errors import ModalityRangeError, ParseError, SpaceError
from formula import Formula, compile_formula, max_modality, truth_sets
from kripke import JTree, hereditary_roots, rstar

# Load environment variables
load_dotenv()

# Largest carrier enumerated exhaustively
ENUM_CAP = int(os.environ.get("GLPWB_ENUM_CAP", "4"))

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)


def as_mask(points: Iterable[int]) -> int:
    mask = 0
    for x in points:
        mask |= 1 << x
    return mask


def as_points(mask: int) -> List[int]:
    points = []
    while mask:
        low = mask & -mask
        points.append(low.bit_length() - 1)
        mask ^= low
    return points


def _unions(neighborhoods: Iterable[int]) -> FrozenSet[int]:
    opens = {0}
    for u in set(neighborhoods):
        opens |= {o | u for o in opens}
    return frozenset(opens)


@dataclass(frozen=True)
class FiniteSpace:
    """A topology on {0..size-1}, given by its full family of open sets."""
    size: int
    opens: FrozenSet[int]

    def __post_init__(self):
        full = (1 << self.size) - 1
        if 0 not in self.opens or full not in self.opens:
            raise SpaceError("a topology must contain the empty set and the carrier")
        if any(o & ~full for o in self.opens):
            raise SpaceError("open set mentions a point outside the carrier")
        if _unions(self.neighborhoods) != self.opens:
            raise SpaceError("family is not closed under unions and intersections")

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    @cached_property
    def neighborhoods(self) -> Tuple[int, ...]:
        """U_x, the least open set containing x."""
        result = []
        for x in range(self.size):
            u = self.full
            for o in self.opens:
                if o >> x & 1:
                    u &= o
            result.append(u)
        return tuple(result)

    def is_open(self, mask: int) -> bool:
        return mask in self.opens

    def sorted_opens(self) -> List[List[int]]:
        return [as_points(o) for o in sorted(self.opens, key=lambda o: (bin(o).count("1"), as_points(o)))]


def from_neighborhoods(size: int, neighborhoods: Sequence[int]) -> FiniteSpace:
    return FiniteSpace(size, _unions(neighborhoods))


def generate_topology(size: int, generators: Iterable[int]) -> FiniteSpace:
    """The least topology containing every generator."""
    full = (1 << size) - 1
    generators = [g & full for g in generators]
    neighborhoods = []
    for x in range(size):
        u = full
        for g in generators:
            if g >> x & 1:
                u &= g
        neighborhoods.append(u)
    return from_neighborhoods(size, neighborhoods)


def discrete(size: int) -> FiniteSpace:
    return from_neighborhoods(size, [1 << x for x in range(size)])


def indiscrete(size: int) -> FiniteSpace:
    full = (1 << size) - 1
    return FiniteSpace(size, frozenset({0, full}))


def left_topology(size: int) -> FiniteSpace:
    """Opens are the initial segments {0..i-1}: the finite ordinal with its left topology."""
    return FiniteSpace(size, frozenset((1 << i) - 1 for i in range(size + 1)))


def sierpinski() -> FiniteSpace:
    return left_topology(2)


def subspace(space: FiniteSpace, mask: int) -> FiniteSpace:
    """The subspace on the points of `mask`, renumbered in increasing order."""
    keep = as_points(mask)
    renumber = {old: new for new, old in enumerate(keep)}

    def pull(o: int) -> int:
        return as_mask(renumber[x] for x in as_points(o & mask))

    return FiniteSpace(len(keep), frozenset(pull(o) for o in space.opens))


def topological_sum(spaces: Sequence[FiniteSpace]) -> FiniteSpace:
    neighborhoods = []
    offset = 0
    for space in spaces:
        neighborhoods += [u << offset for u in space.neighborhoods]
        offset += space.size
    return from_neighborhoods(offset, neighborhoods)


# ---------------------------------------------------------------------------
# Derived sets and ranks
# ---------------------------------------------------------------------------

def d_op(space: FiniteSpace, mask: int) -> int:
    """Limit points of A: x with U_x ∩ (A ∖ {x}) nonempty."""
    result = 0
    for x, u in enumerate(space.neighborhoods):
        if u & mask & ~(1 << x):
            result |= 1 << x
    return result


def dual_d(space: FiniteSpace, mask: int) -> int:
    """The dual operator: X ∖ d(X ∖ A)."""
    return space.full & ~d_op(space, space.full & ~mask)


def _derivatives(space: FiniteSpace) -> List[int]:
    sequence = [space.full]
    while sequence[-1]:
        nxt = d_op(space, sequence[-1])
        if nxt == sequence[-1]:
            break
        sequence.append(nxt)
    return sequence


def is_scattered(space: FiniteSpace) -> bool:
    return _derivatives(space)[-1] == 0


def is_td(space: FiniteSpace) -> bool:
    """U_x ∖ {x} is open for every x; equivalently d(d(A)) ⊆ d(A) for every A."""
    return all(space.is_open(u & ~(1 << x)) for x, u in enumerate(space.neighborhoods))


def cb_sequence(space: FiniteSpace) -> List[int]:
    """[X, dX, ddX, ..., 0]."""
    sequence = _derivatives(space)
    if sequence[-1]:
        raise SpaceError(f"space is not scattered: {as_points(sequence[-1])} is a perfect kernel")
    return sequence


def ranks(space: FiniteSpace) -> List[int]:
    sequence = cb_sequence(space)
    return [max(i for i, level in enumerate(sequence) if level >> x & 1) for x in range(space.size)]


def rank_of(space: FiniteSpace, x: int) -> int:
    return ranks(space)[x]


def rank(space: FiniteSpace) -> int:
    """Least alpha with d^alpha X empty."""
    return len(cb_sequence(space)) - 1


def rank_map(space: FiniteSpace) -> Tuple[FiniteSpace, List[int]]:
    """The rank function as an onto d-map to the left topology on rank(X) points."""
    return left_topology(rank(space)), ranks(space)


def set_rank(space: FiniteSpace, mask: int) -> int:
    """The least ordinal above every rank in A (0 for the empty set)."""
    levels = ranks(space)
    return max((levels[x] + 1 for x in as_points(mask)), default=0)


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

def _image(f: Sequence[int], mask: int) -> int:
    return as_mask(f[x] for x in as_points(mask))


def _preimage(f: Sequence[int], mask: int) -> int:
    return as_mask(x for x, y in enumerate(f) if mask >> y & 1)


def check_d_map(source: FiniteSpace, target: FiniteSpace, f: Sequence[int]) -> List[str]:
    """Clauses of 'continuous, open and pointwise discrete' that fail, with witnesses."""
    if len(f) != source.size or any(not 0 <= y < target.size for y in f):
        return ["map is not total on the source carrier"]
    failures = []
    for u in sorted(target.opens):
        if not source.is_open(_preimage(f, u)):
            failures.append(f"not continuous: preimage of {as_points(u)} is not open")
            break
    for v in sorted(source.opens):
        if not target.is_open(_image(f, v)):
            failures.append(f"not open: image of {as_points(v)} is not open")
            break
    for y in range(target.size):
        fiber = _preimage(f, 1 << y)
        for x in as_points(fiber):
            if source.neighborhoods[x] & fiber != 1 << x:
                failures.append(f"not pointwise discrete: {x} is a limit point of the fiber over {y}")
                break
    return failures


def is_d_map(source: FiniteSpace, target: FiniteSpace, f: Sequence[int]) -> bool:
    return not check_d_map(source, target, f)


# ---------------------------------------------------------------------------
# Extensions
#
# On finite carriers every rank is a natural number, so no point has limit
# rank. `limit_ranks` lets callers declare some ranks to behave as limits so
# the limit-rank code paths of (l) and (lm) still run.
# ---------------------------------------------------------------------------

def is_rank_preserving_extension(space: FiniteSpace, finer: FiniteSpace) -> bool:
    if space.size != finer.size or not space.opens <= finer.opens:
        return False
    if not (is_scattered(space) and is_scattered(finer)):
        return False
    return ranks(space) == ranks(finer)


def is_l_extension(space: FiniteSpace, finer: FiniteSpace, limit_ranks: FrozenSet[int] = frozenset()) -> bool:
    """Rank-preserving, and the identity finer -> space is continuous at every non-limit-rank point."""
    if not is_rank_preserving_extension(space, finer):
        return False
    levels = ranks(space)
    return all(
        finer.neighborhoods[x] == space.neighborhoods[x]
        for x in range(space.size)
        if levels[x] not in limit_ranks
    )


def is_l_maximal_by_criterion(space: FiniteSpace, limit_ranks: FrozenSet[int] = frozenset()) -> bool:
    """
    Condition (lm): for each x of limit rank lam and each open V inside
    O_lam = {z : rank(z) < lam}, either V ∪ {x} is open or some
    neighborhood U of x has rank(V ∩ U) < lam.
    """
    levels = ranks(space)
    for x in range(space.size):
        lam = levels[x]
        if lam not in limit_ranks:
            continue
        below = as_mask(z for z in range(space.size) if levels[z] < lam)
        for v in space.opens:
            if v & ~below or space.is_open(v | 1 << x):
                continue
            # U_x is the smallest neighborhood, so it is the best candidate
            if set_rank(space, v & space.neighborhoods[x]) >= lam:
                return False
    return True


def is_l_maximal_by_def(space: FiniteSpace, limit_ranks: FrozenSet[int] = frozenset()) -> bool:
    """No proper l-extension among all topologies on the carrier."""
    return not any(
        candidate.opens != space.opens and is_l_extension(space, candidate, limit_ranks)
        for candidate in enumerate_topologies(space.size)
    )


def _sorted_extensions(space: FiniteSpace, keep) -> List[FiniteSpace]:
    found = [c for c in enumerate_topologies(space.size) if keep(c)]
    found.sort(key=lambda c: (c.opens != space.opens, len(c.opens), sorted(c.opens)))
    return found


def extensions(space: FiniteSpace) -> List[FiniteSpace]:
    """Every rank-preserving extension, the space itself first."""
    return _sorted_extensions(space, lambda c: is_rank_preserving_extension(space, c))


def l_extensions(space: FiniteSpace, limit_ranks: FrozenSet[int] = frozenset()) -> List[FiniteSpace]:
    return _sorted_extensions(space, lambda c: is_l_extension(space, c, limit_ranks))


def maximal_extensions(space: FiniteSpace) -> List[FiniteSpace]:
    """Rank-preserving extensions that admit no proper rank-preserving extension."""
    candidates = extensions(space)
    return [
        c for c in candidates
        if not any(o.opens > c.opens for o in candidates)
    ]


def l_maximal_extensions(space: FiniteSpace, limit_ranks: FrozenSet[int] = frozenset()) -> List[FiniteSpace]:
    return [c for c in l_extensions(space, limit_ranks) if is_l_maximal_by_def(c, limit_ranks)]


def plus_topology(space: FiniteSpace) -> FiniteSpace:
    """tau+: generated by tau and every derived set d(A)."""
    # d is additive, so derived sets of singletons generate the rest
    derived = [d_op(space, 1 << a) for a in range(space.size)]
    return generate_topology(space.size, list(space.opens) + derived)


def pullback_extension(
    f: Sequence[int],
    source: FiniteSpace,
    target_extension: FiniteSpace,
    limit_ranks: FrozenSet[int] = frozenset(),
) -> Optional[FiniteSpace]:
    """An l-maximal l-extension of `source` keeping f a d-map into `target_extension`."""
    for candidate in l_maximal_extensions(source, limit_ranks):
        if is_d_map(candidate, target_extension, f):
            return candidate
    return None


def search_plus_nonmonotonicity_witness(max_size: int = 3) -> Optional[Tuple[FiniteSpace, FiniteSpace]]:
    """
    A pair tau ⊆ sigma with tau+ ⊄ sigma+, if one exists on at most
    `max_size` points.

    On a finite carrier tau+ is always discrete: for z != x in U_x, the open
    set d({z}) contains x but not z. So the search returns None here.
    """
    for size in range(1, max_size + 1):
        spaces = enumerate_topologies(size)
        plus = {s.opens: plus_topology(s) for s in spaces}
        for coarse, fine in itertools.product(spaces, repeat=2):
            if coarse.opens <= fine.opens and not plus[coarse.opens].opens <= plus[fine.opens].opens:
                return coarse, fine
    return None


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _check_cap(size: int) -> None:
    if size > ENUM_CAP:
        raise SpaceError(f"carrier of {size} points is over the enumeration cap of {ENUM_CAP} (GLPWB_ENUM_CAP)")


def _preorder_neighborhoods(size: int, pairs: Iterable[Tuple[int, int]]) -> List[int]:
    up = [1 << x for x in range(size)]
    for x, y in pairs:
        up[x] |= 1 << y
    changed = True
    while changed:
        changed = False
        for x in range(size):
            closed = up[x]
            for y in as_points(up[x]):
                closed |= up[y]
            if closed != up[x]:
                up[x], changed = closed, True
    return up


@lru_cache(maxsize=None)
def enumerate_topologies(size: int) -> Tuple[FiniteSpace, ...]:
    """
    Every topology on `size` labeled points, via their specialization
    preorders. Sorted by open-family for a stable order.
    """
    _check_cap(size)
    with tracer.start_as_current_span("enumerate_topologies") as span:
        span.set_attribute("glpwb.size", size)
        off_diagonal = [(x, y) for x in range(size) for y in range(size) if x != y]
        seen = set()
        for chosen in itertools.product((False, True), repeat=len(off_diagonal)):
            pairs = [p for p, keep in zip(off_diagonal, chosen) if keep]
            up = _preorder_neighborhoods(size, pairs)
            # keep only relations that are already transitive
            if sum(bin(u).count("1") - 1 for u in up) != len(pairs):
                continue
            seen.add(_unions(up))
        spaces = tuple(FiniteSpace(size, opens) for opens in sorted(seen, key=sorted))
        span.set_attribute("glpwb.count", len(spaces))
    logger.info("🔢 %d topologies on %d points", len(spaces), size)
    return spaces


def enumerate_topologies_brute(size: int) -> List[FrozenSet[int]]:
    """Every set family closed under union and intersection, by brute force (size <= 3)."""
    if size > 3:
        raise SpaceError("brute-force topology enumeration is limited to 3 points")
    full = (1 << size) - 1
    middle = list(range(1, full))
    found = []
    for chosen in itertools.product((False, True), repeat=len(middle)):
        family = {0, full} | {m for m, keep in zip(middle, chosen) if keep}
        if all(a | b in family and a & b in family for a in family for b in family):
            found.append(frozenset(family))
    return found


def scattered_topologies(size: int) -> List[FiniteSpace]:
    return [s for s in enumerate_topologies(size) if is_scattered(s)]


def random_topology(size: int, rng: random.Random, scattered: bool = True) -> FiniteSpace:
    """A random topology; scattered ones come from random partial orders."""
    order = list(range(size))
    rng.shuffle(order)
    pairs = []
    for i, j in itertools.permutations(range(size), 2):
        if scattered and i > j:
            continue
        if rng.random() < 0.35:
            pairs.append((order[i], order[j]))
    return from_neighborhoods(size, _preorder_neighborhoods(size, pairs))


# ---------------------------------------------------------------------------
# Polytopological spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolySpace:
    size: int
    topologies: Tuple[FiniteSpace, ...]

    def __post_init__(self):
        if not self.topologies:
            raise SpaceError("a polyspace needs at least one topology")
        if any(t.size != self.size for t in self.topologies):
            raise SpaceError("all topologies must live on the same carrier")

    @property
    def n(self) -> int:
        return len(self.topologies) - 1

    @property
    def full(self) -> int:
        return (1 << self.size) - 1


def check_glp_space(space: PolySpace) -> List[str]:
    failures = []
    for k, tau in enumerate(space.topologies):
        if not is_scattered(tau):
            failures.append(f"tau_{k} is not scattered")
    for k in range(space.n):
        lower, upper = space.topologies[k], space.topologies[k + 1]
        if not lower.opens <= upper.opens:
            failures.append(f"tau_{k} is not contained in tau_{k + 1}")
        for a in range(1 << space.size):
            derived = d_op(lower, a)
            if not upper.is_open(derived):
                failures.append(f"d_{k}({as_points(a)}) = {as_points(derived)} is not tau_{k + 1}-open")
                break
    return failures


def is_glp_space(space: PolySpace) -> bool:
    return not check_glp_space(space)


def enumerate_glp_polyspaces(size: int, n: int) -> Iterator[PolySpace]:
    """Every GLP_n-space on `size` points."""

    def extend(chain: Tuple[FiniteSpace, ...]) -> Iterator[Tuple[FiniteSpace, ...]]:
        if len(chain) == n + 1:
            yield chain
            return
        floor = plus_topology(chain[-1]).opens
        for candidate in scattered_topologies(size):
            if floor <= candidate.opens:
                yield from extend(chain + (candidate,))

    for base in scattered_topologies(size):
        for chain in extend((base,)):
            yield PolySpace(size, chain)


def lme_polyspace(space: FiniteSpace, n: int, limit_ranks: FrozenSet[int] = frozenset()) -> PolySpace:
    """tau_0 an l-maximal l-extension of tau, tau_{k+1} one of tau_k+."""
    _check_cap(space.size)
    chain = []
    current = space
    for _ in range(n + 1):
        choice = l_maximal_extensions(current, limit_ranks)[0]
        chain.append(choice)
        current = plus_topology(choice)
    return PolySpace(space.size, tuple(chain))


def eval_poly_space(space: PolySpace, valuation: Mapping[str, int], f: Formula) -> int:
    """Truth set of f with <k> read as d_{tau_k}."""
    top = max_modality(f)
    if top is not None and top > space.n:
        raise ModalityRangeError(f"formula uses [{top}] but the space only has tau_0..tau_{space.n}")
    values = truth_sets(
        compile_formula(f), space.full, valuation,
        lambda k, a: d_op(space.topologies[k], a),
    )
    return values[-1]


def valid_on_poly_space(space: PolySpace, f: Formula, names: Sequence[str]) -> bool:
    program = compile_formula(f)

    def diamond(k: int, a: int) -> int:
        return d_op(space.topologies[k], a)

    for assignment in itertools.product(range(1 << space.size), repeat=len(names)):
        if truth_sets(program, space.full, dict(zip(names, assignment)), diamond)[-1] != space.full:
            return False
    return True


# ---------------------------------------------------------------------------
# Magari operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaOperator:
    """delta given by its full table: table[A] is delta(A) for every subset mask A."""
    size: int
    table: Tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != 1 << self.size:
            raise SpaceError(f"a delta table on {self.size} points needs {1 << self.size} entries")

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    def __call__(self, mask: int) -> int:
        return self.table[mask]

    def dual(self, mask: int) -> int:
        return self.full & ~self.table[self.full & ~mask]


def check_magari(delta: DeltaOperator) -> List[str]:
    failures = []
    if delta(0):
        failures.append("delta of the empty set is not empty")
    subsets = range(1 << delta.size)
    for a in subsets:
        if delta(a) != delta(a & ~delta(a)):
            failures.append(f"delta A != delta(A - delta A) at A={as_points(a)}")
            break
    for a, b in itertools.combinations(subsets, 2):
        if delta(a | b) != delta(a) | delta(b):
            failures.append(f"not additive at {as_points(a)}, {as_points(b)}")
            break
    return failures


def is_magari(delta: DeltaOperator) -> bool:
    return not check_magari(delta)


def magari_to_space(delta: DeltaOperator) -> FiniteSpace:
    """The topology whose closed sets are the A with delta(A) ⊆ A."""
    failures = check_magari(delta)
    if failures:
        raise SpaceError(f"operator is not Magari: {failures[0]}")
    closed = [a for a in range(1 << delta.size) if not delta(a) & ~a]
    return FiniteSpace(delta.size, frozenset(delta.full & ~a for a in closed))


def space_to_delta(space: FiniteSpace) -> DeltaOperator:
    return DeltaOperator(space.size, tuple(d_op(space, a) for a in range(1 << space.size)))


def polyspace_deltas(space: PolySpace) -> List[DeltaOperator]:
    return [space_to_delta(t) for t in space.topologies]


def check_glp_operators(deltas: Sequence[DeltaOperator]) -> List[str]:
    """Magari-ness of each delta_k plus axioms (iv) and (v) read on operators."""
    failures = []
    for k, delta in enumerate(deltas):
        failures += [f"delta_{k}: {reason}" for reason in check_magari(delta)]
    for m, n in itertools.combinations(range(len(deltas)), 2):
        lower, upper = deltas[m], deltas[n]
        for a in range(1 << lower.size):
            if lower.dual(a) & ~upper.dual(a):
                failures.append(f"(iv) fails for [{m}] -> [{n}] at {as_points(a)}")
                break
            if lower(a) & ~upper.dual(lower(a)):
                failures.append(f"(v) fails for <{m}> -> [{n}]<{m}> at {as_points(a)}")
                break
    return failures


def operators_to_polyspace(deltas: Sequence[DeltaOperator]) -> PolySpace:
    failures = check_glp_operators(deltas)
    if failures:
        raise SpaceError(f"operators do not validate GLP: {failures[0]}")
    return PolySpace(deltas[0].size, tuple(magari_to_space(d) for d in deltas))


# ---------------------------------------------------------------------------
# d-products
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DProduct:
    """
    Z = X ⊗_d Y. Points are (y, x) for y in iso(Y) in increasing order, then
    the points of dY. pi0 is defined on the first len(pi0) points (Z_0).
    """
    space: FiniteSpace
    pi0: Tuple[int, ...]
    pi1: Tuple[int, ...]
    iso: Tuple[int, ...]
    limit: Tuple[int, ...]

    @property
    def z0(self) -> int:
        return (1 << len(self.pi0)) - 1

    @property
    def z1(self) -> int:
        return self.space.full & ~self.z0


def _block(x_size: int, position: int, mask: int) -> int:
    return mask << (position * x_size)


def _product_frame(x_size: int, y: FiniteSpace) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]:
    limit_mask = d_op(y, y.full)
    iso = tuple(p for p in range(y.size) if not limit_mask >> p & 1)
    limit = tuple(as_points(limit_mask))
    pi0 = tuple(x for _ in iso for x in range(x_size))
    pi1 = tuple(p for p in iso for _ in range(x_size)) + limit
    return iso, limit, pi0, pi1


def d_product(x: FiniteSpace, y: FiniteSpace) -> DProduct:
    iso, limit, pi0, pi1 = _product_frame(x.size, y)
    size = len(pi1)
    generators = [_block(x.size, i, v) for i in range(len(iso)) for v in x.opens]
    generators += [_preimage(pi1, u) for u in y.opens]
    return DProduct(generate_topology(size, generators), pi0, pi1, iso, limit)


def product_limit_ranks(x: FiniteSpace, x_limits: FrozenSet[int], y_limits: FrozenSet[int]) -> FrozenSet[int]:
    """
    Declared limit ranks of X ⊗_d Y. Z_0 keeps the ranks of X; a limit point
    over y has rank rank(X) + rank(y) - 1, so a positive declared rank l of
    Y moves to rank(X) + l - 1.
    """
    top = rank(x)
    return frozenset(l for l in x_limits if l < top) | frozenset(top + l - 1 for l in y_limits if l > 0)


def glp_d_product(left: PolySpace, right: PolySpace) -> PolySpace:
    """theta_0 = tau_0 ⊗_d sigma_0; theta_i the sum of tau_i on each copy and sigma_i on dY."""
    if left.n != right.n:
        raise SpaceError(f"arity mismatch: GLP_{left.n} against GLP_{right.n}")
    base = d_product(left.topologies[0], right.topologies[0])
    x_size = left.size
    limit_points = as_mask(base.limit)
    thetas = [base.space]
    for tau, sigma in zip(left.topologies[1:], right.topologies[1:]):
        generators = [_block(x_size, i, v) for i in range(len(base.iso)) for v in tau.opens]
        generators += [_preimage(base.pi1, u & limit_points) & base.z1 for u in sigma.opens]
        thetas.append(generate_topology(base.space.size, generators))
    return PolySpace(base.space.size, tuple(thetas))


# ---------------------------------------------------------------------------
# J_n-morphisms
# ---------------------------------------------------------------------------

def upset_topology(tree: JTree, k: int) -> FiniteSpace:
    return from_neighborhoods(tree.size, [(1 << x) | tree.succ[k][x] for x in range(tree.size)])


def tree_polyspace(tree: JTree) -> PolySpace:
    """The frame with every R_k-upset declared sigma_k-open."""
    return PolySpace(tree.size, tuple(upset_topology(tree, k) for k in range(tree.n + 1)))


def _roots_and_stars(tree: JTree, k: int) -> Iterator[Tuple[int, int]]:
    for w in sorted(hereditary_roots(tree, k + 1), key=tree.index.__getitem__):
        yield tree.index[w], tree.mask(rstar(tree, k, w))


def check_jn_morphism(space: PolySpace, tree: JTree, f: Sequence[int]) -> List[str]:
    """Failures of conditions (j1)-(j4), with witnesses."""
    if space.n != tree.n:
        raise SpaceError(f"arity mismatch: GLP_{space.n} space against a J_{tree.n} frame")
    if len(f) != space.size or any(not 0 <= w < tree.size for w in f):
        return ["map is not total on the carrier"]
    target = tree_polyspace(tree)
    n = tree.n
    failures = [f"(j1) {reason}" for reason in check_d_map(space.topologies[n], target.topologies[n], f)]
    for k in range(n + 1):
        for v in sorted(space.topologies[k].opens):
            if not target.topologies[k].is_open(_image(f, v)):
                failures.append(f"(j2) image of tau_{k}-open {as_points(v)} is not an R_{k}-upset")
                break
    for k in range(n):
        tau = space.topologies[k]
        for w, star in _roots_and_stars(tree, k):
            for label, mask in (("R*", star), ("R* ∪ {w}", star | 1 << w)):
                pre = _preimage(f, mask)
                if not tau.is_open(pre):
                    failures.append(f"(j3) preimage of {label} for {tree.worlds[w]} is not tau_{k}-open")
            fiber = _preimage(f, 1 << w)
            for x in as_points(fiber):
                if tau.neighborhoods[x] & fiber != 1 << x:
                    failures.append(f"(j4) fiber over {tree.worlds[w]} is not tau_{k}-discrete at {x}")
                    break
    return failures


def is_jn_morphism(space: PolySpace, tree: JTree, f: Sequence[int]) -> bool:
    return not check_jn_morphism(space, tree, f)


def star_condition_holds(space: PolySpace, tree: JTree, f: Sequence[int]) -> bool:
    """f^-1(R*_k(w) ∪ {w}) ⊆ dual_d_k(f^-1(R*_k(w))) at every hereditary (k+1)-root w."""
    for k in range(tree.n):
        tau = space.topologies[k]
        for w, star in _roots_and_stars(tree, k):
            if _preimage(f, star | 1 << w) & ~dual_d(tau, _preimage(f, star)):
                return False
    return True


def j34_hold(space: PolySpace, tree: JTree, f: Sequence[int]) -> bool:
    return not any(reason.startswith(("(j3)", "(j4)")) for reason in check_jn_morphism(space, tree, f))


def fold_morphism(tree: JTree, copies: int = 2) -> Tuple[PolySpace, List[int]]:
    """
    A GLP_n-space folding onto `tree`: `copies` disjoint copies of the
    R_0-upset space for tau_0, discrete tau_k above. Only frames without
    R_1..R_n edges admit a finite GLP preimage of this kind.
    """
    if any(tree.rel[k] for k in range(1, tree.n + 1)):
        raise SpaceError("fold morphisms need a frame whose only relation is R_0")
    base = upset_topology(tree, 0)
    tau0 = topological_sum([base] * copies)
    size = tau0.size
    higher = [discrete(size)] * tree.n
    f = [x for _ in range(copies) for x in range(tree.size)]
    return PolySpace(size, (tau0, *higher)), f


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

def _parse_subset(text: str) -> List[int]:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"subset key {text!r} must look like [0,2]")
    inner = body[1:-1].strip()
    return [int(part) for part in inner.split(",")] if inner else []


class SpaceDocument(BaseModel):
    size: int
    opens: List[List[int]]

    @field_validator("size")
    @classmethod
    def _nonnegative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("size must be nonnegative")
        return value

    def to_space(self) -> FiniteSpace:
        return FiniteSpace(self.size, frozenset(as_mask(o) for o in self.opens))

    @classmethod
    def from_space(cls, space: FiniteSpace) -> "SpaceDocument":
        return cls(size=space.size, opens=space.sorted_opens())


class PolySpaceDocument(BaseModel):
    size: int
    topologies: List[List[List[int]]]

    def to_polyspace(self) -> PolySpace:
        return PolySpace(
            self.size,
            tuple(FiniteSpace(self.size, frozenset(as_mask(o) for o in opens)) for opens in self.topologies),
        )

    @classmethod
    def from_polyspace(cls, space: PolySpace) -> "PolySpaceDocument":
        return cls(size=space.size, topologies=[t.sorted_opens() for t in space.topologies])


class DeltaDocument(BaseModel):
    size: int
    table: Dict[str, List[int]]

    def to_delta(self) -> DeltaOperator:
        entries = [0] * (1 << self.size)
        for key, value in self.table.items():
            entries[as_mask(_parse_subset(key))] = as_mask(value)
        return DeltaOperator(self.size, tuple(entries))

    @classmethod
    def from_delta(cls, delta: DeltaOperator) -> "DeltaDocument":
        table = {
            "[" + ",".join(str(x) for x in as_points(a)) + "]": as_points(delta(a))
            for a in range(1 << delta.size)
        }
        return cls(size=delta.size, table=table)


def _load(model, obj: dict, what: str):
    try:
        return model.model_validate(obj)
    except ValidationError as e:
        raise ParseError(f"invalid {what} document: {e.errors()[0]['msg']}") from e


def load_space(obj: dict) -> FiniteSpace:
    return _load(SpaceDocument, obj, "space").to_space()


def load_polyspace(obj: dict) -> PolySpace:
    return _load(PolySpaceDocument, obj, "polyspace").to_polyspace()


def load_delta(obj: dict) -> DeltaOperator:
    document = _load(DeltaDocument, obj, "delta")
    try:
        return document.to_delta()
    except ValueError as e:
        raise ParseError(f"invalid delta document: {e}") from e
