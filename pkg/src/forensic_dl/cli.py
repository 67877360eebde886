"""``forensic-dl`` command line.

Exit status: 0 success, 1 usage error, 2 validation or parse failure,
3 inconsistent knowledge base, 4 derived-fact cap exceeded.  Data goes to
standard output; diagnostics and logs go to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from enum import IntEnum
from pathlib import Path

from . import __version__
from .annotations import ingest_annotations, read_records
from .errors import DanglingReference, ForensicDLError, NoHypothesis, ParseError, ResourceLimit, UnsupportedQuery
from .model import THING
from .normalize import validate_kb
from .ontology import shipped_ontology_path
from .text import SourceDocument, parse_concept, parse_gold_labels, parse_kb_lenient

log = logging.getLogger("forensic_dl")


class ExitStatus(IntEnum):
    OK = 0
    USAGE = 1
    INVALID = 2
    INCONSISTENT = 3
    RESOURCE_LIMIT = 4


class _Exit(Exception):
    def __init__(self, status: ExitStatus, message: str | None = None):
        self.status = status
        self.message = message


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ExitStatus.USAGE, f"{self.prog}: error: {message}\n")


def _err(*lines) -> None:
    for line in lines:
        print(line, file=sys.stderr)


# -- loading ------------------------------------------------------------


def _load_kb(path):
    if path is None:
        doc = SourceDocument(shipped_ontology_path().read_text(encoding="utf-8"), "forensic.fkb")
    else:
        try:
            doc = SourceDocument.from_path(path)
        except OSError as exc:
            raise _Exit(ExitStatus.USAGE, f"cannot read {path}: {exc.strerror}")
    kb, diags = parse_kb_lenient(doc)
    # the parser already reports name errors at the offending token
    seen = {(d.line, d.message) for d in diags}
    diags += [d for d in validate_kb(kb, doc.origin) if (d.line, d.message) not in seen]
    errors = [d for d in diags if d.is_error]
    return kb, diags, errors


def _kb_or_exit(path):
    kb, diags, errors = _load_kb(path)
    if errors:
        _err(*map(str, diags))
        raise _Exit(ExitStatus.INVALID)
    for d in diags:
        _err(str(d))
    return kb


def _assertions_or_exit(path):
    try:
        return ingest_annotations(read_records(path))
    except OSError as exc:
        raise _Exit(ExitStatus.USAGE, f"cannot read {path}: {exc.strerror}")
    except DanglingReference as exc:
        raise _Exit(ExitStatus.INVALID, f"{path}: {exc}")
    except ForensicDLError as exc:
        raise _Exit(ExitStatus.INVALID, str(exc))


def _gold_or_exit(path):
    try:
        return parse_gold_labels(SourceDocument.from_path(path))
    except OSError as exc:
        raise _Exit(ExitStatus.USAGE, f"cannot read {path}: {exc.strerror}")
    except ParseError as exc:
        _err(*map(str, exc.diagnostics))
        raise _Exit(ExitStatus.INVALID)


def _check_consistent(closure) -> None:
    from .reasoner import is_consistent

    ok, violations = is_consistent(closure)
    if not ok:
        _err(*(f"violation: {v}" for v in violations))
        raise _Exit(ExitStatus.INCONSISTENT, f"knowledge base is inconsistent ({len(violations)} violations)")


def _figure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands -----------------------------------------------------------


def cmd_validate(args) -> int:
    _, diags, errors = _load_kb(args.kb)
    _err(*map(str, diags))
    return ExitStatus.INVALID if errors else ExitStatus.OK


def cmd_classify(args) -> int:
    from .reasoner import all_instances, check_query, materialize_kb

    kb = _kb_or_exit(args.kb)
    query = None
    if args.query is not None:
        try:
            query = parse_concept(args.query, "--query")
            check_query(query)
        except ParseError as exc:
            _err(*map(str, exc.diagnostics))
            return ExitStatus.USAGE
        except UnsupportedQuery as exc:
            raise _Exit(ExitStatus.USAGE, str(exc))
    closure = materialize_kb(kb, _assertions_or_exit(args.annotations))
    _check_consistent(closure)
    if query is None:
        rows = [(a, c) for a, c in closure.class_assertions() if c != THING and not a.startswith("_:")]
    else:
        label = str(query)
        rows = [(a, label) for a in sorted(all_instances(closure, query)) if not a.startswith("_:")]
    if args.json:
        print(json.dumps([{"individual": a, "class": c} for a, c in rows], indent=2))
    else:
        print("individual\tclass")
        for a, c in rows:
            print(f"{a}\t{c}")
    return ExitStatus.OK


def cmd_evaluate(args) -> int:
    from .metrics import evaluate_closure, experiment_closure

    kb = _kb_or_exit(args.kb)
    assertions = _assertions_or_exit(args.annotations)
    gold = _gold_or_exit(args.gold)
    closure = experiment_closure(kb, assertions, gold)
    _check_consistent(closure)
    try:
        report = evaluate_closure(closure, gold)
    except ForensicDLError as exc:
        raise _Exit(ExitStatus.INVALID, f"unknown class in gold labels: {exc}")
    sys.stdout.write(report.dumps_json() if args.json else report.to_tsv())
    if args.figures and report.classes:
        from .plotting import plot_report

        path = plot_report(report, _figure_dir(args.figures) / "evaluation.png")
        log.info("wrote %s", path)
    return ExitStatus.OK


def cmd_learn(args) -> int:
    from .learner import LearnerConfig, learn_gci, loo_cv, make_problem
    from .model import Atomic, Gci

    kb = _kb_or_exit(args.kb)
    assertions = _assertions_or_exit(args.annotations)
    gold = _gold_or_exit(args.gold)
    if not gold.get(args.target):
        raise _Exit(ExitStatus.USAGE, f"no gold positives for target {args.target!r}")
    problem = make_problem(kb, assertions, gold, args.target)
    config = LearnerConfig()
    if args.loocv:
        if len(problem.positives) < 2:
            raise _Exit(ExitStatus.USAGE, "--loocv needs at least two positives")
        result = loo_cv(problem, config)
        if args.json:
            print(json.dumps({
                "target": result.target,
                "folds": [
                    {"fold": f.index, "held_out": f.held_out, "tp": f.tp, "fp": f.fp, "fn": f.fn,
                     "precision": f.precision, "recall": f.recall,
                     "hypothesis": str(f.hypothesis.expr) if f.hypothesis else None}
                    for f in result.folds
                ],
                "precision": result.precision,
                "recall": result.recall,
            }, indent=2))
        else:
            sys.stdout.write(result.to_tsv())
        if args.figures:
            from .plotting import plot_loo

            path = plot_loo(result, _figure_dir(args.figures) / f"loocv_{args.target}.png")
            log.info("wrote %s", path)
        return ExitStatus.OK
    try:
        hypotheses = learn_gci(problem, config)
    except NoHypothesis:
        _err(f"no hypothesis for {args.target} scores above Thing")
        return ExitStatus.OK
    if args.json:
        print(json.dumps([
            {"expr": str(h.expr), "score": h.score, "length": h.length, "accuracy": h.accuracy}
            for h in hypotheses
        ], indent=2))
    else:
        for h in hypotheses:
            print(Gci(h.expr, Atomic(args.target)))
    return ExitStatus.OK


def cmd_generate(args) -> int:
    from .datagen import LearningScenarioConfig, generate, plant_learning_scenario, table2_config, table4_config, write_scenario

    if args.profile == "learning":
        records, gold, catalog = plant_learning_scenario(LearningScenarioConfig(seed=args.seed))
    else:
        config = table4_config(args.seed) if args.profile == "table4" else table2_config(args.seed)
        records, gold, catalog = generate(config)
    paths = write_scenario(args.out, records, gold, catalog)
    for p in paths.values():
        print(p)
    return ExitStatus.OK


# -- entry point --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="forensic-dl", description="Forensic event reasoning over surveillance metadata.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse and validate a .fkb file")
    p.add_argument("kb")
    p.set_defaults(func=cmd_validate)

    def kb_args(p, gold=False):
        p.add_argument("--kb", help="knowledge base (.fkb); defaults to the shipped ontology")
        p.add_argument("--annotations", required=True, help="annotation records (.jsonl)")
        if gold:
            p.add_argument("--gold", required=True, help="gold labels (.gold)")
        p.add_argument("--json", action="store_true", help="emit JSON instead of TSV")

    p = sub.add_parser("classify", help="print inferred class memberships")
    kb_args(p)
    p.add_argument("--query", help="concept term restricting the output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="precision/recall of the KB's GCIs against gold labels")
    kb_args(p, gold=True)
    p.add_argument("--figures", metavar="DIR", help="also write a bar chart to DIR")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("learn", help="learn GCIs for a target class")
    kb_args(p, gold=True)
    p.add_argument("--target", required=True)
    p.add_argument("--loocv", action="store_true", help="leave-one-out cross-validation")
    p.add_argument("--figures", metavar="DIR", help="with --loocv, also write a per-fold plot to DIR")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("generate", help="write a synthetic scenario")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--profile", choices=("table2", "table4", "learning"), default="table2")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return int(args.func(args))
    except _Exit as exc:
        if exc.message:
            _err(f"forensic-dl: {exc.message}")
        return int(exc.status)
    except ResourceLimit as exc:
        _err(f"forensic-dl: {exc}")
        return int(ExitStatus.RESOURCE_LIMIT)
    except ParseError as exc:
        _err(*map(str, exc.diagnostics))
        return int(ExitStatus.INVALID)


if __name__ == "__main__":
    sys.exit(main())
