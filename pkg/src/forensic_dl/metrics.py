"""Contingency counts, precision/recall/F1, and the manual-GCI experiment."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .errors import UnknownClass
from .model import Atomic, ConceptAssertion, KnowledgeBase
from .normalize import normalize_kb
from .reasoner import ClosureABox, materialize

PERDURANT = "Perdurant"
TSV_HEADER = ("class", "tp", "fp", "fn", "tn", "precision", "recall", "f1")


@dataclass(frozen=True)
class ContingencyTable:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ContingencyTable") -> "ContingencyTable":
        return ContingencyTable(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def prf(table: ContingencyTable) -> tuple[float, float, float]:
    predicted = table.tp + table.fp
    actual = table.tp + table.fn
    if predicted == 0 and actual == 0:
        return 1.0, 1.0, 1.0
    p = table.tp / predicted if predicted else 0.0
    r = table.tp / actual if actual else 0.0
    return p, r, _f1(p, r)


@dataclass(frozen=True)
class ClassReport:
    name: str
    table: ContingencyTable
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_table(cls, name: str, table: ContingencyTable) -> "ClassReport":
        return cls(name, table, *prf(table))


@dataclass(frozen=True)
class AggregateReport:
    classes: tuple = ()
    micro: tuple | None = None  # (P, R, F1)
    macro: tuple | None = None
    totals: ContingencyTable | None = None

    @property
    def n(self) -> int:
        return len(self.classes)

    def by_class(self) -> dict[str, ClassReport]:
        return {c.name: c for c in self.classes}

    def to_tsv(self) -> str:
        lines = ["\t".join(TSV_HEADER)]
        for c in self.classes:
            t = c.table
            lines.append("\t".join([c.name, str(t.tp), str(t.fp), str(t.fn), str(t.tn),
                                    f"{c.precision:.6f}", f"{c.recall:.6f}", f"{c.f1:.6f}"]))
        if self.classes:
            t = self.totals
            lines.append("\t".join(["#micro", str(t.tp), str(t.fp), str(t.fn), str(t.tn)]
                                   + [f"{x:.6f}" for x in self.micro]))
            lines.append("\t".join(["#macro", "-", "-", "-", "-"] + [f"{x:.6f}" for x in self.macro]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        def row(name, t, vals):
            out = {"class": name}
            if t is not None:
                out.update(tp=t.tp, fp=t.fp, fn=t.fn, tn=t.tn)
            out.update(precision=vals[0], recall=vals[1], f1=vals[2])
            return out

        return {
            "classes": [row(c.name, c.table, (c.precision, c.recall, c.f1)) for c in self.classes],
            "micro": row("#micro", self.totals, self.micro) if self.micro else None,
            "macro": row("#macro", None, self.macro) if self.macro else None,
        }

    def dumps_json(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def aggregate(reports: Iterable[ClassReport]) -> AggregateReport:
    reports = tuple(reports)
    if not reports:
        return AggregateReport()
    totals = sum((r.table for r in reports), ContingencyTable(0, 0, 0, 0))
    mp = (totals.tp / (totals.tp + totals.fp)) if totals.tp + totals.fp else 0.0
    mr = (totals.tp / (totals.tp + totals.fn)) if totals.tp + totals.fn else 0.0
    if totals.tp + totals.fp == 0 and totals.tp + totals.fn == 0:
        mp = mr = 1.0
    n = len(reports)
    Mp = sum(r.precision for r in reports) / n
    Mr = sum(r.recall for r in reports) / n
    return AggregateReport(reports, (mp, mr, _f1(mp, mr)), (Mp, Mr, _f1(Mp, Mr)), totals)


def macro_average(precisions: Iterable[float], recalls: Iterable[float], n: int | None = None) -> tuple[float, float, float]:
    """Macro P/R/F1 from per-class scores; classes beyond the given ones count as 0."""
    ps, rs = list(precisions), list(recalls)
    n = n if n is not None else len(ps)
    if n == 0:
        raise ValueError("need at least one class")
    p, r = sum(ps) / n, sum(rs) / n
    return p, r, _f1(p, r)


def contingency(closure: ClosureABox, gold: dict, c: str, population: Iterable[str]) -> ContingencyTable:
    if c not in closure.declared_classes:
        raise UnknownClass(c)
    population = set(population)
    predicted = closure.members(c) & population
    true = set(gold.get(c, ())) & population
    tp = len(predicted & true)
    fp = len(predicted - true)
    fn = len(true - predicted)
    return ContingencyTable(tp, fp, fn, len(population) - tp - fp - fn)


def evaluation_population(closure: ClosureABox, gold: dict) -> set[str]:
    """Every individual in the event subtree, plus every gold individual."""
    pop = set(closure.members(PERDURANT))
    for members in gold.values():
        pop |= set(members)
    return pop


def drop_gold_assertions(assertions: Iterable, gold: dict) -> list:
    classes = set(gold)
    return [
        a for a in assertions
        if not (isinstance(a, ConceptAssertion) and isinstance(a.concept, Atomic) and a.concept.name in classes)
    ]


def experiment_closure(kb: KnowledgeBase, assertions: Iterable, gold: dict, *, cap: int | None = None) -> ClosureABox:
    """Materialize after dropping every explicit membership in a gold class."""
    kept = drop_gold_assertions(list(kb.assertions()) + list(assertions), gold)
    return materialize(normalize_kb(kb), kept, cap=cap)


def evaluate_closure(closure: ClosureABox, gold: dict) -> AggregateReport:
    if not gold:
        return AggregateReport()
    population = evaluation_population(closure, gold)
    return aggregate(ClassReport.from_table(c, contingency(closure, gold, c, population)) for c in gold)


def run_manual_experiment(kb: KnowledgeBase, assertions: Iterable, gold: dict, *, cap: int | None = None) -> AggregateReport:
    if not gold:
        return AggregateReport()
    return evaluate_closure(experiment_closure(kb, assertions, gold, cap=cap), gold)
