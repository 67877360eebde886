"""Top-down refinement learning of GCIs for a target class, with leave-one-out CV.

The search follows the CELOE recipe: start from Top, refine downwards,
always expand the best-scored description next.  A description's score is
its predictive accuracy over the example population minus a fixed penalty
per node.  Descriptions covering no positive example are scored but never
expanded (their refinements cannot cover one either) and are never
returned.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable

from .errors import NoHypothesis
from .model import (
    TOP,
    And,
    Atomic,
    ConceptAssertion,
    ConceptExpr,
    Exists,
    Gci,
    KnowledgeBase,
    RoleName,
    Top,
    concept_length,
    conj,
)
from .normalize import normalize_kb
from .reasoner import ClosureABox, extension, materialize


@dataclass(frozen=True)
class LearnerConfig:
    max_hypotheses: int = 10
    max_length: int = 5
    max_expansions: int = 500
    length_penalty: float = 0.02
    # restrict the refinement vocabulary; None means every name with instances
    classes: tuple | None = None
    roles: tuple | None = None


@dataclass(frozen=True)
class Hypothesis:
    expr: ConceptExpr
    score: float
    length: int
    accuracy: float
    tp: int = 0
    fp: int = 0

    def as_gci(self, target: str) -> Gci:
        return Gci(self.expr, Atomic(target), note="LEARNED")


@dataclass
class LearningProblem:
    target: str
    positives: frozenset
    background: KnowledgeBase
    population: frozenset
    closure: ClosureABox = field(repr=False, default=None)

    def __post_init__(self):
        self.positives = frozenset(self.positives)
        self.population = frozenset(self.population)
        if not self.positives <= self.population:
            raise ValueError("positives must be a subset of the population")
        if self.closure is None:
            self.closure = materialize(normalize_kb(self.background), self.background.assertions())
        self._cache: dict = {}

    def restricted(self, held_out: Iterable[str]) -> "LearningProblem":
        """Same background, with ``held_out`` removed from positives and population."""
        held = set(held_out)
        sub = LearningProblem(self.target, self.positives - held, self.background,
                              self.population - held, self.closure)
        sub._cache = self._cache
        return sub

    def extension(self, expr: ConceptExpr) -> frozenset:
        return extension(self.closure, expr, self._cache)


def make_problem(kb: KnowledgeBase, assertions: Iterable, gold: dict, target: str, population: Iterable[str] | None = None) -> LearningProblem:
    """Background = KB and assertions without the target's GCIs and explicit memberships."""
    tgt = Atomic(target)

    def about_target(ax) -> bool:
        if isinstance(ax, Gci) and ax.rhs == tgt:
            return True
        return isinstance(ax, ConceptAssertion) and ax.concept == tgt

    background = kb.with_axioms(assertions).without_axioms(about_target)
    positives = frozenset(gold.get(target, ()))
    problem = LearningProblem(target, positives, background, frozenset(positives))
    if population is None:
        population = problem.closure.members("Perdurant") | positives
    problem.population = frozenset(population) | positives
    return problem


# -- vocabulary and refinement ------------------------------------------


@dataclass(frozen=True)
class Vocabulary:
    classes: tuple
    roles: tuple
    subclasses: dict = field(default_factory=dict, compare=False)


def vocabulary(problem: LearningProblem, config: LearnerConfig) -> Vocabulary:
    closure = problem.closure
    if config.classes is not None:
        classes = tuple(sorted(config.classes))
    else:
        classes = tuple(sorted(
            c for c, inds in closure.classes.items()
            if inds and c not in (problem.target, "Thing")
        ))
    if config.roles is not None:
        roles = tuple(sorted(config.roles))
    else:
        roles = tuple(sorted(r for r, succ in closure.successors.items() if succ))
    told = problem.background.told_subclasses()
    allowed = set(classes)
    subs = {c: tuple(sorted(s for s in told.get(c, ()) if s in allowed)) for c in classes}
    return Vocabulary(classes, roles, subs)


def _members(expr: ConceptExpr) -> tuple:
    return expr.members if isinstance(expr, And) else (expr,)


def refine(expr: ConceptExpr, vocab: Vocabulary, max_length: int) -> list[ConceptExpr]:
    """Downward refinements of ``expr`` no longer than ``max_length``, in a fixed order."""
    out: list[ConceptExpr] = []
    if isinstance(expr, Top):
        out += [Atomic(c) for c in vocab.classes]
        out += [Exists(RoleName(r), TOP) for r in vocab.roles]
    else:
        if isinstance(expr, Atomic):
            out += [Atomic(s) for s in vocab.subclasses.get(expr.name, ())]
        elif isinstance(expr, Exists):
            out += [Exists(expr.role, f) for f in refine(expr.filler, vocab, max_length - 2)]
        elif isinstance(expr, And):
            members = list(expr.members)
            for i, m in enumerate(members):
                rest = members[:i] + members[i + 1:]
                # a specialization that duplicates a sibling would collapse the conjunction
                out += [conj(*rest, r) for r in refine(m, vocab, max_length) if r not in rest]
        present = set(_members(expr))
        out += [conj(expr, Atomic(c)) for c in vocab.classes if Atomic(c) not in present]
        out += [conj(expr, Exists(RoleName(r), TOP)) for r in vocab.roles
                if Exists(RoleName(r), TOP) not in present]
    seen, result = set(), []
    for r in out:
        key = str(r)
        if r != expr and key not in seen and concept_length(r) <= max_length:
            seen.add(key)
            result.append(r)
    return result


# -- scoring and search -------------------------------------------------


def score(expr: ConceptExpr, problem: LearningProblem, config: LearnerConfig = LearnerConfig()) -> Hypothesis:
    covered = problem.extension(expr) & problem.population
    tp = len(covered & problem.positives)
    fp = len(covered) - tp
    n = len(problem.population)
    tn = n - len(problem.positives) - fp
    acc = (tp + tn) / n if n else 0.0
    length = concept_length(expr)
    return Hypothesis(expr, acc - config.length_penalty * length, length, acc, tp, fp)


def learn_gci(problem: LearningProblem, config: LearnerConfig = LearnerConfig()) -> list[Hypothesis]:
    if not problem.positives:
        raise ValueError("learning needs at least one positive example")
    vocab = vocabulary(problem, config)
    top = score(TOP, problem, config)
    seen = {str(TOP)}
    found: list[tuple[int, Hypothesis]] = []
    frontier = [(-top.score, 0, TOP)]
    order = 1
    expansions = 0
    while frontier and expansions < config.max_expansions:
        _, _, expr = heapq.heappop(frontier)
        expansions += 1
        for r in refine(expr, vocab, config.max_length):
            key = str(r)
            if key in seen:
                continue
            seen.add(key)
            h = score(r, problem, config)
            if h.tp == 0:
                continue
            found.append((order, h))
            heapq.heappush(frontier, (-h.score, order, r))
            order += 1
    found.sort(key=lambda x: (-x[1].score, x[0]))
    best = [h for _, h in found[: config.max_hypotheses]]
    if not best or best[0].score <= top.score:
        raise NoHypothesis(problem.target)
    return best


# -- leave-one-out cross-validation -------------------------------------


@dataclass(frozen=True)
class FoldResult:
    index: int
    held_out: str
    hypothesis: Hypothesis | None
    trainset: frozenset
    resultset: frozenset
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float


@dataclass(frozen=True)
class LooResult:
    target: str
    folds: tuple
    precision: float
    recall: float

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 0.0 if p + r == 0 else 2 * p * r / (p + r)

    def to_tsv(self) -> str:
        lines = ["fold\ttp\tfp\tfn\tprecision\trecall"]
        for f in self.folds:
            lines.append(f"{f.index}\t{f.tp}\t{f.fp}\t{f.fn}\t{f.precision:.6f}\t{f.recall:.6f}")
        lines.append(f"#average\t-\t-\t-\t{self.precision:.6f}\t{self.recall:.6f}")
        return "\n".join(lines) + "\n"


def run_fold(problem: LearningProblem, index: int, held: str, config: LearnerConfig) -> FoldResult:
    train = problem.restricted([held])
    trainset = train.positives
    try:
        hyp = learn_gci(train, config)[0] if trainset else None
    except NoHypothesis:
        hyp = None
    if hyp is None:
        resultset = frozenset()
    else:
        resultset = frozenset((problem.extension(hyp.expr) & problem.population) - trainset)
    fp = resultset - problem.positives
    tp = resultset - fp
    fn = {held} - resultset
    pr = len(tp) / (len(tp) + len(fp)) if resultset else 1.0
    re = len(tp) / (len(tp) + len(fn)) if tp or fn else 0.0
    return FoldResult(index, held, hyp, trainset, resultset, len(tp), len(fp), len(fn), pr, re)


def loo_cv(problem: LearningProblem, config: LearnerConfig = LearnerConfig()) -> LooResult:
    if len(problem.positives) < 2:
        raise ValueError("leave-one-out needs at least two positives")
    folds = tuple(run_fold(problem, i, held, config) for i, held in enumerate(sorted(problem.positives), 1))
    k = len(folds)
    return LooResult(problem.target, folds, sum(f.precision for f in folds) / k, sum(f.recall for f in folds) / k)
