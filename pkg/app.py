"""
app.py

Command-line entry point for the GLP workbench. Routes each verb to its
module pipeline: decision and reduction, countermodels, ordinal models,
the ordinal calculator, finite topology tools, end-to-end refutation and
the selftest suites.

Results go to stdout (line-delimited JSON under --json); status and errors
go to stderr.
"""

import os
import sys

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Initialize tracing FIRST at application level
ENABLE_TRACING = os.environ.get("ENABLE_TRACING")
if ENABLE_TRACING and ENABLE_TRACING.lower() == "true":
    from tracing_setup import setup_tracing
    setup_tracing()

import argparse
import json
import logging
import random
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel

# Import the workbench AFTER tracing setup
import construction
from errors import (
    FrameError,
    ModalityRangeError,
    ParseError,
    SearchInconclusive,
    SpaceError,
    UsageError,
    WorkbenchError,
)
from finitetop import (
    SpaceDocument,
    as_mask,
    as_points,
    check_glp_space,
    check_magari,
    d_product,
    enumerate_topologies,
    eval_poly_space,
    extensions,
    l_maximal_extensions,
    load_delta,
    load_polyspace,
    load_space,
    magari_to_space,
    plus_topology,
    ranks,
)
from formula import Formula, from_json, m_formula, m_plus, parse, reduction_target, to_text
from invariants import SUITES, SuiteConfig, run_all
from kripke import CountermodelDocument, Decision, countermodel_document, decide_gl, decide_glp, decide_j, load_jtree
from ordinal import add, cmp, div_rem, mul, omega_pow, parse_ordinal, r

LOG_LEVEL = os.environ.get("GLPWB_LOG_LEVEL", "WARNING")

logger = logging.getLogger(__name__)


class Verb(str, Enum):
    DECIDE = "decide"
    REDUCE = "reduce"
    COUNTERMODEL = "countermodel"
    ORDINAL_MODEL = "ordinal-model"
    ORD = "ord"
    TOPO = "topo"
    REFUTE = "refute"
    SELFTEST = "selftest"


class Logic(str, Enum):
    GLP = "glp"
    J = "j"
    GL = "gl"


DECIDERS: Dict[Logic, Callable[..., Decision]] = {
    Logic.GLP: decide_glp,
    Logic.J: decide_j,
    Logic.GL: decide_gl,
}

ORD_OPS = ("add", "mul", "pow", "r", "div", "cmp")
TOPO_OPS = ("enumerate", "extensions", "plus", "dproduct", "check-glp", "eval", "magari")


# ---------------------------------------------------------------------------
# Result records
# ---------------------------------------------------------------------------

class DecisionRecord(BaseModel):
    formula: str
    logic: str
    verdict: str
    bounded: bool
    bound: int
    estimate: int
    frames_checked: int
    countermodel: Optional[CountermodelDocument] = None


class ReductionRecord(BaseModel):
    formula: str
    m: str
    m_plus: str
    target: str


class CheckRecord(BaseModel):
    name: str
    checked: int
    failures: List[str]


class OrdinalModelRecord(BaseModel):
    model: construction.OrdinalModelDocument
    checks: List[CheckRecord]


class RefutationRecord(BaseModel):
    decision: DecisionRecord
    ordinal_model: Optional[OrdinalModelRecord] = None


class OrdinalRecord(BaseModel):
    op: str
    operands: List[str]
    result: str


class SpacesRecord(BaseModel):
    op: str
    spaces: List[SpaceDocument]


class DProductRecord(BaseModel):
    space: SpaceDocument
    pi0: List[int]
    pi1: List[int]
    iso: List[int]
    limit: List[int]


class TruthSetRecord(BaseModel):
    formula: str
    truth_set: List[int]


class MagariRecord(BaseModel):
    magari: bool
    failures: List[str]
    space: Optional[SpaceDocument] = None


class SuiteRecord(BaseModel):
    suite: str
    ok: bool
    checked: int
    failures: List[str]


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------

def read_input(value: str) -> str:
    """Inline text, or the contents of a file given as @path."""
    if not value.startswith("@"):
        return value
    path = Path(value[1:])
    try:
        return path.read_text(encoding="utf-8").strip()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e


def read_json(value: str) -> dict:
    text = read_input(value)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", text, e.pos) from e


def read_formula(value: str) -> Formula:
    text = read_input(value)
    if text.lstrip().startswith("{"):
        return from_json(read_json(text))
    return parse(text)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def emit(args: argparse.Namespace, record: BaseModel, lines: Sequence[str]) -> None:
    if args.json:
        print(record.model_dump_json())
    else:
        for line in lines:
            print(line)


def status(message: str) -> None:
    print(message, file=sys.stderr)


def decision_record(decision: Decision, logic: Logic) -> DecisionRecord:
    return DecisionRecord(
        formula=to_text(decision.formula),
        logic=logic.value,
        verdict=decision.verdict.value,
        bounded=decision.bounded,
        bound=decision.bound,
        estimate=decision.estimate,
        frames_checked=decision.frames_checked,
        countermodel=countermodel_document(decision) if decision.countermodel else None,
    )


def _decide(args: argparse.Namespace, f: Formula) -> Decision:
    decision = DECIDERS[Logic(args.logic)](f, bound=args.bound, exhaustive=args.exhaustive, workers=args.workers)
    if decision.bounded:
        status(f"⚠️ No countermodel up to {decision.bound} worlds; completeness needs {decision.estimate}")
    return decision


def verdict_line(decision: Decision) -> str:
    return "valid (bounded search)" if decision.bounded else decision.verdict.value


def require_complete(args: argparse.Namespace, decision: Decision) -> int:
    """Exit 3 when --exhaustive stopped at the cap without a countermodel."""
    if args.exhaustive and decision.bounded:
        raise SearchInconclusive(
            f"exhaustive search stopped at {decision.bound} worlds, under the estimate of {decision.estimate} (GLPWB_BOUND_CAP)",
            bound=decision.bound,
            estimate=decision.estimate,
        )
    return 0


def _frame_lines(document: CountermodelDocument) -> List[str]:
    lines = [f"worlds: {' '.join(document.frame.worlds)}"]
    for k, pairs in sorted(document.frame.rel.items(), key=lambda item: int(item[0])):
        if pairs:
            lines.append(f"R{k}: " + ", ".join(f"{a}->{b}" for a, b in pairs))
    for var, worlds in document.valuation.items():
        lines.append(f"{var}: {{{', '.join(worlds)}}}")
    lines.append(f"refuted at {document.world}")
    return lines


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------

def run_decide(args: argparse.Namespace) -> int:
    decision = _decide(args, read_formula(args.formula))
    record = decision_record(decision, Logic(args.logic))
    emit(args, record, [verdict_line(decision)])
    return require_complete(args, decision)


def run_reduce(args: argparse.Namespace) -> int:
    f = read_formula(args.formula)
    record = ReductionRecord(
        formula=to_text(f),
        m=to_text(m_formula(f)),
        m_plus=to_text(m_plus(f)),
        target=to_text(reduction_target(f)),
    )
    emit(args, record, [record.m_plus])
    return 0


def run_countermodel(args: argparse.Namespace) -> int:
    decision = _decide(args, read_formula(args.formula))
    if decision.countermodel is None:
        emit(args, decision_record(decision, Logic(args.logic)), [verdict_line(decision)])
        return require_complete(args, decision)
    document = countermodel_document(decision)
    emit(args, document, _frame_lines(document))
    return 0


def _model_record(model: construction.OrdinalModel, samples: int, seed: int) -> OrdinalModelRecord:
    points = construction.sample_points(model, samples, random.Random(seed))
    reports = construction.run_checks(model, points)
    return OrdinalModelRecord(
        model=construction.model_document(model),
        checks=[CheckRecord(name=c.name, checked=c.checked, failures=c.failures) for c in reports],
    )


def _model_lines(record: OrdinalModelRecord) -> List[str]:
    lines = [f"lambda = {record.model.lam}"]
    lines += [f"{world}: {alpha}" for world, alpha in record.model.witnesses.items()]
    for check in record.checks:
        mark = "✅" if not check.failures else "❌"
        lines.append(f"{mark} {check.name}: {check.checked} checks, {len(check.failures)} failures")
        lines += [f"   {reason}" for reason in check.failures[:5]]
    return lines


def run_ordinal_model(args: argparse.Namespace) -> int:
    tree = load_jtree(read_json(args.frame))
    record = _model_record(construction.build(tree), args.samples, args.seed)
    emit(args, record, _model_lines(record))
    return 1 if any(check.failures for check in record.checks) else 0


def run_ord(args: argparse.Namespace) -> int:
    operands = [parse_ordinal(read_input(text)) for text in args.operands]
    arity = 1 if args.op in ("pow", "r") else 2
    if len(operands) != arity:
        raise UsageError(f"ord {args.op} takes {arity} operand{'s' if arity > 1 else ''}, got {len(operands)}")
    if args.op == "add":
        result = str(add(*operands))
    elif args.op == "mul":
        result = str(mul(*operands))
    elif args.op == "pow":
        result = str(omega_pow(operands[0]))
    elif args.op == "r":
        result = str(r(operands[0]))
    elif args.op == "div":
        q, rem = div_rem(*operands)
        result = f"{q} {rem}"
    else:
        result = str(cmp(*operands))
    emit(args, OrdinalRecord(op=args.op, operands=[str(o) for o in operands], result=result), [result])
    return 0


def _expect_args(args: argparse.Namespace, count: int, usage: str) -> List[str]:
    if len(args.args) != count:
        raise UsageError(f"usage: topo {args.op} {usage}")
    return args.args


def _space_lines(spaces) -> List[str]:
    return [json.dumps(space.sorted_opens()) for space in spaces]


def run_topo(args: argparse.Namespace) -> int:
    if args.op == "enumerate":
        (size_text,) = _expect_args(args, 1, "SIZE")
        if not size_text.isdigit():
            raise UsageError(f"size must be a natural number, got {size_text!r}")
        spaces = enumerate_topologies(int(size_text))
        record = SpacesRecord(op=args.op, spaces=[SpaceDocument.from_space(s) for s in spaces])
        emit(args, record, [f"{len(spaces)} topologies"] + _space_lines(spaces))
        return 0

    if args.op in ("extensions", "plus"):
        (space_text,) = _expect_args(args, 1, "SPACE")
        space = load_space(read_json(space_text))
        if args.op == "plus":
            spaces = [plus_topology(space)]
        else:
            spaces = extensions(space)
            maximal = l_maximal_extensions(space)
            status(f"🔎 {len(spaces)} rank-preserving extensions, {len(maximal)} l-maximal; ranks {ranks(space)}")
        emit(args, SpacesRecord(op=args.op, spaces=[SpaceDocument.from_space(s) for s in spaces]), _space_lines(spaces))
        return 0

    if args.op == "dproduct":
        left, right = _expect_args(args, 2, "SPACE SPACE")
        product = d_product(load_space(read_json(left)), load_space(read_json(right)))
        record = DProductRecord(
            space=SpaceDocument.from_space(product.space),
            pi0=list(product.pi0), pi1=list(product.pi1), iso=list(product.iso), limit=list(product.limit),
        )
        emit(args, record, _space_lines([product.space]) + [f"pi0 = {record.pi0}", f"pi1 = {record.pi1}"])
        return 0

    if args.op == "check-glp":
        (poly_text,) = _expect_args(args, 1, "POLYSPACE")
        failures = check_glp_space(load_polyspace(read_json(poly_text)))
        record = CheckRecord(name="glp-space", checked=1, failures=failures)
        emit(args, record, ["glp-space" if not failures else "not a glp-space"] + failures)
        return 1 if failures else 0

    if args.op == "eval":
        poly_text, formula_text, valuation_text = _expect_args(args, 3, "POLYSPACE FORMULA VALUATION")
        space = load_polyspace(read_json(poly_text))
        f = read_formula(formula_text)
        valuation = read_json(valuation_text)
        if not isinstance(valuation, dict):
            raise ParseError("valuation must map variable names to point lists")
        truth = eval_poly_space(space, {name: as_mask(points) for name, points in valuation.items()}, f)
        record = TruthSetRecord(formula=to_text(f), truth_set=as_points(truth))
        emit(args, record, [json.dumps(record.truth_set)])
        return 0

    (delta_text,) = _expect_args(args, 1, "DELTA")
    delta = load_delta(read_json(delta_text))
    failures = check_magari(delta)
    if failures:
        emit(args, MagariRecord(magari=False, failures=failures), ["not magari"] + failures)
        return 0
    space = magari_to_space(delta)
    record = MagariRecord(magari=True, failures=[], space=SpaceDocument.from_space(space))
    emit(args, record, ["magari"] + _space_lines([space]))
    return 0


def run_refute(args: argparse.Namespace) -> int:
    f = read_formula(args.formula)
    decision = decide_glp(f, args.bound, args.exhaustive, args.workers)
    refutation = construction.refutation_of(decision)
    if refutation is None:
        emit(args, RefutationRecord(decision=decision_record(decision, Logic.GLP)), [verdict_line(decision)])
        return require_complete(args, decision)
    model_record = _model_record(refutation.ordinal_model, args.samples, args.seed)
    record = RefutationRecord(decision=decision_record(refutation.decision, Logic.GLP), ordinal_model=model_record)
    lines = _frame_lines(record.decision.countermodel) + _model_lines(model_record)
    emit(args, record, lines)
    return 1 if any(check.failures for check in model_record.checks) else 0


def run_selftest(args: argparse.Namespace) -> int:
    config = SuiteConfig(
        seed=args.seed,
        samples=args.samples,
        max_size=args.max_size or SuiteConfig.max_size,
        bound=args.bound,
        workers=args.workers,
    )
    reports = run_all(config, [args.suite] if args.suite else None)
    for report in reports:
        record = SuiteRecord(suite=report.name, ok=report.ok, checked=report.checked, failures=report.failures)
        mark = "✅" if report.ok else "❌"
        emit(args, record, [f"{mark} {report.name}: {report.checked} checks, {len(report.failures)} failures"]
             + [f"   {reason}" for reason in report.failures[:10]])
    return 0 if all(report.ok for report in reports) else 1


HANDLERS: Dict[Verb, Callable[[argparse.Namespace], int]] = {
    Verb.DECIDE: run_decide,
    Verb.REDUCE: run_reduce,
    Verb.COUNTERMODEL: run_countermodel,
    Verb.ORDINAL_MODEL: run_ordinal_model,
    Verb.ORD: run_ord,
    Verb.TOPO: run_topo,
    Verb.REFUTE: run_refute,
    Verb.SELFTEST: run_selftest,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="line-delimited JSON on stdout")
    common.add_argument("--verbose", action="store_true", help="log progress at INFO")
    common.add_argument("--bound", type=int, help="largest frame size searched")
    common.add_argument("--exhaustive", action="store_true", help="search up to the filtration estimate")
    common.add_argument("--samples", type=int, default=200, help="sample ordinals or random formulas per check")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-size", type=int, help="largest carrier enumerated")
    common.add_argument("--workers", type=int, help="threads for partitioned searches")

    parser = argparse.ArgumentParser(prog="glpwb", description="Workbench for the provability logic GLP")
    verbs = parser.add_subparsers(dest="verb", required=True)

    for verb in (Verb.DECIDE, Verb.COUNTERMODEL):
        sub = verbs.add_parser(verb.value, parents=[common])
        sub.add_argument("--logic", choices=[logic.value for logic in Logic], default=Logic.GLP.value)
        sub.add_argument("formula", help="formula text, JSON, or @path")

    for verb in (Verb.REDUCE, Verb.REFUTE):
        sub = verbs.add_parser(verb.value, parents=[common])
        sub.add_argument("formula", help="formula text, JSON, or @path")

    sub = verbs.add_parser(Verb.ORDINAL_MODEL.value, parents=[common])
    sub.add_argument("frame", help="J-tree JSON or @path")

    sub = verbs.add_parser(Verb.ORD.value, parents=[common])
    sub.add_argument("op", choices=ORD_OPS)
    sub.add_argument("operands", nargs="+")

    sub = verbs.add_parser(Verb.TOPO.value, parents=[common])
    sub.add_argument("op", choices=TOPO_OPS)
    sub.add_argument("args", nargs="*", help="inline JSON or @path")

    sub = verbs.add_parser(Verb.SELFTEST.value, parents=[common])
    sub.add_argument("--suite", choices=list(SUITES))

    return parser


def configure_logging(verbose: bool) -> None:
    level = logging.INFO if verbose else getattr(logging, LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    logger.info("🤖 Running %s", args.verb)
    try:
        return HANDLERS[Verb(args.verb)](args)
    except SearchInconclusive as e:
        status(f"❌ Inconclusive: {e}")
        return 3
    except (ParseError, FrameError, SpaceError, ModalityRangeError, UsageError) as e:
        status(f"❌ {e}")
        return 2
    except WorkbenchError as e:
        status(f"❌ {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
