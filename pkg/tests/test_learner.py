from __future__ import annotations

import random
import re

import pytest

from forensic_dl.annotations import ingest_annotations
from forensic_dl.datagen import LearningScenarioConfig, plant_learning_scenario
from forensic_dl.errors import NoHypothesis
from forensic_dl.learner import (
    LearnerConfig,
    LearningProblem,
    Vocabulary,
    learn_gci,
    loo_cv,
    make_problem,
    refine,
    run_fold,
    score,
    vocabulary,
)
from forensic_dl.model import (
    TOP,
    And,
    Atomic,
    ConceptAssertion,
    Exists,
    KnowledgeBase,
    RoleAssertion,
    RoleName,
    concept_length,
)
from forensic_dl.normalize import normalize_kb
from forensic_dl.ontology import builtin_ontology
from forensic_dl.oracle import enumerate_concepts

IR = RoleName("immediateRelation")
DV_BODY = Exists(IR, Atomic("Vehicle"))


@pytest.fixture(scope="module")
def kb():
    return builtin_ontology(include_invented_gcis=True)


def planted(kb, **kw):
    config = LearningScenarioConfig(**kw)
    records, gold, _ = plant_learning_scenario(config, kb)
    return make_problem(kb, ingest_annotations(records), gold, config.target), config


@pytest.fixture(scope="module")
def dv_problem(kb):
    return planted(kb, seed=1)[0]


# -- refinement ----------------------------------------------------------


def test_refine_top():
    vocab = Vocabulary(("Arm", "Vehicle"), ("immediateRelation",), {})
    assert set(refine(TOP, vocab, 5)) == {Atomic("Vehicle"), Atomic("Arm"), Exists(IR, TOP)}


def test_refine_existential_reaches_vehicle():
    vocab = Vocabulary(("Arm", "Vehicle"), ("immediateRelation",), {})
    assert DV_BODY in refine(Exists(IR, TOP), vocab, 5)


def test_refine_subclass_and_conjunction():
    vocab = Vocabulary(("Kicking", "PhysicalAggression", "Structure"), ("r",),
                       {"PhysicalAggression": ("Kicking",)})
    out = refine(Atomic("PhysicalAggression"), vocab, 5)
    assert out[0] == Atomic("Kicking")
    assert And((Atomic("PhysicalAggression"), Atomic("Structure"))) in out
    assert And((Atomic("PhysicalAggression"), Exists(RoleName("r"), TOP))) in out


def test_refine_respects_max_length():
    vocab = Vocabulary(("A", "B", "C"), ("r", "s"), {})
    for expr in enumerate_concepts(vocab.classes, vocab.roles, 4):
        for r in refine(expr, vocab, 5):
            assert concept_length(r) <= 5


def _shape(expr) -> str:
    return re.sub(r"\b(?!some\b|and\b)\w+\b", "N", str(expr))


@pytest.mark.parametrize("seed", range(10))
def test_refinement_length_monotone(seed):
    rng = random.Random(seed)
    classes = ("A", "B", "C", "D")
    subs = {"A": ("B",)} if seed % 2 else {}
    vocab = Vocabulary(classes, ("r", "s"), subs)
    space = enumerate_concepts(classes, vocab.roles, 4)
    for expr in rng.sample(space, min(30, len(space))):
        n = concept_length(expr)
        for r in refine(expr, vocab, 7):
            assert concept_length(r) >= n
            # equal length only when a name or Thing was swapped for a narrower name
            if concept_length(r) == n:
                assert _shape(r) == _shape(expr), (expr, r)


def test_refine_stays_in_enumerated_space():
    vocab = Vocabulary(("A", "B"), ("r",), {})
    space = set(enumerate_concepts(vocab.classes, vocab.roles, 5))
    frontier, seen = [TOP], set()
    while frontier:
        e = frontier.pop()
        for r in refine(e, vocab, 5):
            assert r in space
            if r not in seen:
                seen.add(r)
                frontier.append(r)
    assert seen == space


# -- scoring -------------------------------------------------------------


def toy_problem(n: int = 50, k: int = 5) -> LearningProblem:
    inds = [f"x{i}" for i in range(n)]
    axioms = [ConceptAssertion(a, Atomic("Thing2")) for a in inds]
    axioms += [ConceptAssertion(a, Atomic("Mark")) for a in inds[:k]]
    axioms += [RoleAssertion(a, "y", "r") for a in inds[:k]]
    bg = KnowledgeBase(axioms=tuple(axioms), classes={"Thing2", "Mark", "Target"}, roles={"r"},
                       individuals=set(inds) | {"y"})
    return LearningProblem("Target", frozenset(inds[:k]), bg, frozenset(inds))


def test_score_examples():
    p = toy_problem()
    assert score(TOP, p).score == pytest.approx(0.1 - 0.02)
    assert score(TOP, p).accuracy == pytest.approx(0.1)
    exact = score(Atomic("Mark"), p)
    assert exact.score == pytest.approx(1.0 - 0.02)
    assert (exact.tp, exact.fp) == (5, 0)
    assert score(Exists(RoleName("r"), TOP), p).score == pytest.approx(1.0 - 0.06)


def test_lengthening_without_changing_extension_costs_score():
    p = toy_problem()
    base = score(Atomic("Mark"), p)
    longer = score(And((Atomic("Mark"), Atomic("Thing2"))), p)
    assert longer.accuracy == base.accuracy
    assert base.score - longer.score == pytest.approx(0.04)


def test_single_named_class_is_top_hypothesis():
    p = toy_problem()
    best = learn_gci(p, LearnerConfig())
    assert best[0].expr == Atomic("Mark")
    assert [h.score for h in best] == sorted((h.score for h in best), reverse=True)
    assert len(best) <= 10


def test_no_hypothesis_when_nothing_beats_top():
    p = toy_problem(n=4, k=4)  # every individual is positive, so Top is already perfect
    with pytest.raises(NoHypothesis):
        learn_gci(p)


# -- planted recovery ----------------------------------------------------


def test_background_hides_target(dv_problem):
    assert not dv_problem.closure.members("DamageVehicle")
    assert len(dv_problem.positives) == 16
    assert dv_problem.positives <= dv_problem.population


def test_planted_damage_vehicle_recovered(dv_problem):
    best = learn_gci(dv_problem)
    assert best[0].expr == DV_BODY
    assert best[0].tp == 16 and best[0].fp == 0
    assert normalize_kb(dv_problem.background.with_axioms([best[0].as_gci("DamageVehicle")])).rules


def test_damage_structure_superclass_body(kb):
    body = And((Atomic("PhysicalAggression"), Exists(IR, Atomic("Structure"))))
    problem, _ = planted(kb, target="DamageStructure", body=body, positives=9, seed=2)
    # the positives are typed with the three concrete subclasses, never with the superclass
    told = {c for p in problem.positives for c in problem.closure.types_of(p)}
    assert {"Kicking", "Beating", "BreakingWindows"} & told
    assert learn_gci(problem)[0].expr == body


def test_search_is_deterministic(dv_problem):
    a = learn_gci(dv_problem)
    b = learn_gci(dv_problem)
    assert [(str(h.expr), h.score) for h in a] == [(str(h.expr), h.score) for h in b]


def _exhaustive_best(problem, classes, roles, max_length):
    space = enumerate_concepts(classes, roles, max_length)
    config = LearnerConfig(classes=classes, roles=roles, max_length=max_length)
    scored = [score(e, problem, config) for e in space]
    scored = [h for h in scored if h.tp > 0]
    top = max(h.score for h in scored)
    return len(space), top, {h.expr for h in scored if h.score == top}, config


def test_exhaustive_oracle_on_planted_problem(dv_problem):
    classes = ("Endurant", "Event", "NaturalPerson", "Structure", "Vehicle")
    roles = ("immediateRelation", "participant")
    size, top, argmax, config = _exhaustive_best(dv_problem, classes, roles, 5)
    assert size <= 500
    best = learn_gci(dv_problem, config)[0]
    assert best.score == pytest.approx(top)
    assert argmax == {DV_BODY} and best.expr == DV_BODY


@pytest.mark.parametrize("seed", range(25))
def test_exhaustive_oracle_on_random_problems(seed):
    rng = random.Random(seed)
    classes, roles = ("A", "B", "C"), ("r", "s")
    inds = [f"i{k}" for k in range(rng.randint(6, 14))]
    axioms = [ConceptAssertion(a, Atomic(c)) for a in inds for c in classes if rng.random() < 0.4]
    axioms += [RoleAssertion(rng.choice(inds), rng.choice(inds), rng.choice(roles)) for _ in range(len(inds))]
    bg = KnowledgeBase(axioms=tuple(axioms), classes=set(classes) | {"T"}, roles=set(roles), individuals=set(inds))
    positives = frozenset(rng.sample(inds, rng.randint(1, len(inds) // 2)))
    problem = LearningProblem("T", positives, bg, frozenset(inds))
    size, top, argmax, config = _exhaustive_best(problem, classes, roles, 5)
    assert size <= 500
    try:
        best = learn_gci(problem, config)[0]
    except NoHypothesis:
        assert top <= score(TOP, problem, config).score
        return
    assert best.score == pytest.approx(top)
    assert best.expr in argmax


# -- leave-one-out -------------------------------------------------------


def test_loo_planted_is_perfect(dv_problem):
    result = loo_cv(dv_problem)
    assert len(result.folds) == 16
    assert (result.precision, result.recall) == (1.0, 1.0)
    for f in result.folds:
        assert f.trainset == dv_problem.positives - {f.held_out}
        assert f.resultset == {f.held_out}
    lines = result.to_tsv().splitlines()
    assert lines[0] == "fold\ttp\tfp\tfn\tprecision\trecall"
    assert lines[-1] == "#average\t-\t-\t-\t1.000000\t1.000000"


def test_loo_two_symmetric_positives():
    inds = ["p1", "p2", "n1", "n2", "n3"]
    axioms = [ConceptAssertion(a, Atomic("Mark")) for a in ("p1", "p2")]
    axioms += [ConceptAssertion(a, Atomic("Other")) for a in ("n1", "n2", "n3")]
    bg = KnowledgeBase(axioms=tuple(axioms), classes={"Mark", "Other", "T"}, individuals=set(inds))
    result = loo_cv(LearningProblem("T", frozenset({"p1", "p2"}), bg, frozenset(inds)))
    assert (result.precision, result.recall) == (1.0, 1.0)


def test_loo_needs_two_positives():
    with pytest.raises(ValueError):
        loo_cv(toy_problem(n=10, k=1))


def test_empty_resultset_fold_conventions():
    # the held-out positive shares nothing with the training positive
    axioms = [ConceptAssertion("p1", Atomic("Mark")), ConceptAssertion("n1", Atomic("Other"))]
    bg = KnowledgeBase(axioms=tuple(axioms), classes={"Mark", "Other", "T"}, individuals={"p1", "p2", "n1"})
    problem = LearningProblem("T", frozenset({"p1", "p2"}), bg, frozenset({"p1", "p2", "n1"}))
    fold = run_fold(problem, 1, "p2", LearnerConfig())
    assert fold.resultset == frozenset()
    assert (fold.precision, fold.recall) == (1.0, 0.0)
    assert (fold.tp, fold.fp, fold.fn) == (0, 0, 1)


def test_label_noise_lowers_loo_recall(kb):
    noisy, _ = planted(kb, seed=1, label_noise=0.25)
    result = loo_cv(noisy)
    assert result.recall < 1.0


def test_fold_order_does_not_matter(kb):
    problem, _ = planted(kb, seed=3, label_noise=0.2, distractors=30)
    config = LearnerConfig()
    base = loo_cv(problem, config)
    held = sorted(problem.positives)
    random.Random(0).shuffle(held)
    folds = [run_fold(problem, i, h, config) for i, h in enumerate(held, 1)]
    k = len(folds)
    assert sum(f.precision for f in folds) / k == pytest.approx(base.precision)
    assert sum(f.recall for f in folds) / k == pytest.approx(base.recall)


def test_vocabulary_excludes_target_and_empty_names(dv_problem):
    vocab = vocabulary(dv_problem, LearnerConfig())
    assert "DamageVehicle" not in vocab.classes and "Thing" not in vocab.classes
    assert all(dv_problem.closure.members(c) for c in vocab.classes)
    assert "immediateRelation" in vocab.roles
