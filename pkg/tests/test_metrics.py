from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from forensic_dl.errors import UnknownClass
from forensic_dl.metrics import (
    AggregateReport,
    ClassReport,
    ContingencyTable,
    aggregate,
    contingency,
    drop_gold_assertions,
    evaluate_closure,
    experiment_closure,
    macro_average,
    prf,
    run_manual_experiment,
)
from forensic_dl.model import Atomic, ConceptAssertion, KnowledgeBase
from forensic_dl.normalize import normalize_kb
from forensic_dl.reasoner import materialize

# (tp, fp, fn, tn) and printed (P, R, F1) per class of the manual-GCI results table
TABLE4 = {
    "Vandalism": ((42, 0, 15, 168), (1.00, 0.74, 0.85)),
    "DamageVehicle": ((11, 0, 5, 209), (1.00, 0.69, 0.81)),
    "DamageStructure": ((9, 0, 0, 216), (0.89, 0.89, 0.89)),
    "Crowding": ((60, 1, 4, 160), (0.98, 0.94, 0.96)),
    "Throwing": ((30, 0, 0, 195), (1.00, 1.00, 1.00)),
    "Riot": ((5, 0, 16, 204), (1.00, 0.24, 0.38)),
    "AbnormalBehavior": ((70, 22, 10, 123), (0.76, 0.88, 0.81)),
}


def table4_reports():
    return [ClassReport.from_table(c, ContingencyTable(*counts)) for c, (counts, _) in TABLE4.items()]


# -- prf -----------------------------------------------------------------


def test_prf_examples():
    assert prf(ContingencyTable(42, 0, 15, 168)) == pytest.approx((1.0, 42 / 57, 0.8484848), abs=1e-6)
    assert prf(ContingencyTable(0, 0, 0, 12)) == (1.0, 1.0, 1.0)
    assert prf(ContingencyTable(70, 22, 10, 123)) == pytest.approx((0.76087, 0.875, 0.81395), abs=1e-5)


def test_prf_degenerate_conventions():
    assert prf(ContingencyTable(0, 0, 3, 5)) == (0.0, 0.0, 0.0)
    assert prf(ContingencyTable(0, 3, 0, 5)) == (0.0, 0.0, 0.0)
    assert prf(ContingencyTable(0, 2, 2, 5)) == (0.0, 0.0, 0.0)


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        ContingencyTable(-1, 0, 0, 0)


counts = st.integers(min_value=0, max_value=500)


@given(counts, counts, counts, counts, st.integers(min_value=1, max_value=20))
def test_prf_scale_invariant(tp, fp, fn, tn, k):
    a = prf(ContingencyTable(tp, fp, fn, tn))
    b = prf(ContingencyTable(k * tp, k * fp, k * fn, k * tn))
    assert b == pytest.approx(a, abs=1e-12)


@given(counts, counts, counts, counts)
def test_prf_in_unit_interval(tp, fp, fn, tn):
    assert all(0.0 <= x <= 1.0 for x in prf(ContingencyTable(tp, fp, fn, tn)))


@given(st.integers(min_value=1, max_value=50), st.integers(min_value=0, max_value=50),
       st.lists(st.integers(min_value=0, max_value=50), min_size=1, max_size=6))
def test_micro_equals_macro_precision_for_equal_classes(tp, fp, fns):
    # equal |C| and equal per-class precision: micro-P is macro-P
    reports = [ClassReport.from_table(f"C{i}", ContingencyTable(tp, fp, fn, 10)) for i, fn in enumerate(fns)]
    agg = aggregate(reports)
    assert agg.micro[0] == pytest.approx(agg.macro[0], abs=1e-12)


@given(counts, counts, counts, counts)
def test_aggregate_of_one_is_identity(tp, fp, fn, tn):
    r = ClassReport.from_table("C", ContingencyTable(tp, fp, fn, tn))
    agg = aggregate([r])
    assert agg.micro == (r.precision, r.recall, r.f1)
    assert agg.macro[:2] == (r.precision, r.recall)
    assert agg.macro[2] == pytest.approx(r.f1, abs=1e-12)


# -- aggregate on the published rows ------------------------------------


def test_table4_rows():
    for r in table4_reports():
        printed = TABLE4[r.name][1]
        if r.name == "DamageStructure":
            # the printed 0.89 contradicts tp=9, fp=0, fn=0
            assert (r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0)
            continue
        for got, want in zip((r.precision, r.recall, r.f1), printed):
            assert abs(got - want) <= 0.005 + 1e-9, (r.name, got, want)


def test_table4_aggregate():
    agg = aggregate(table4_reports())
    assert agg.totals == ContingencyTable(227, 23, 50, 1275)
    assert agg.micro == pytest.approx((227 / 250, 227 / 277, 0.8615), abs=5e-4)
    assert agg.macro == pytest.approx((0.963, 0.782, 0.863), abs=1e-3)
    for got, want in zip(agg.micro + agg.macro, (0.91, 0.82, 0.86, 0.96, 0.78, 0.86)):
        assert abs(got - want) <= 0.005 + 1e-9


def test_macro_f1_is_harmonic_of_macro_pr():
    agg = aggregate(table4_reports())
    p, r, f = agg.macro
    assert f == pytest.approx(2 * p * r / (p + r))
    mean_f1 = sum(x.f1 for x in agg.classes) / agg.n
    assert f != pytest.approx(mean_f1, abs=1e-4)


def test_table5_macro_with_failed_classes():
    p, r, f = macro_average([0.69, 1.00, 0.96, 0.86, 0.69], [0.98, 1.00, 1.00, 0.99, 0.99], n=7)
    assert abs(p - 0.599) <= 0.002 and abs(r - 0.709) <= 0.002 and abs(f - 0.649) <= 0.002


def test_report_serializations():
    agg = aggregate(table4_reports())
    lines = agg.to_tsv().splitlines()
    assert lines[0].split("\t") == ["class", "tp", "fp", "fn", "tn", "precision", "recall", "f1"]
    assert lines[1] == "Vandalism\t42\t0\t15\t168\t1.000000\t0.736842\t0.848485"
    assert lines[-2].startswith("#micro\t227\t23\t50\t1275\t0.908000")
    assert lines[-1].startswith("#macro\t-\t-\t-\t-\t")
    data = json.loads(agg.dumps_json())
    assert [c["class"] for c in data["classes"]] == list(TABLE4)
    assert data["micro"]["tp"] == 227
    assert data["macro"]["precision"] == pytest.approx(agg.macro[0])
    assert AggregateReport().to_tsv().count("\n") == 1


# -- contingency over a closure ------------------------------------------


def _kb():
    return KnowledgeBase(classes={"Hit", "Event"})


def test_contingency_hand_enumeration():
    population = {f"e{i}" for i in range(10)}
    assertions = [ConceptAssertion(e, Atomic("Hit")) for e in ("e0", "e1", "e2")]
    closure = materialize(normalize_kb(_kb()), assertions)
    gold = {"Hit": {"e0", "e1", "e3"}}
    assert contingency(closure, gold, "Hit", population) == ContingencyTable(2, 1, 1, 6)


def test_contingency_perfect_and_unknown():
    assertions = [ConceptAssertion("e0", Atomic("Hit"))]
    closure = materialize(normalize_kb(_kb()), assertions)
    t = contingency(closure, {"Hit": {"e0"}}, "Hit", {"e0", "e1"})
    assert (t.fp, t.fn) == (0, 0)
    with pytest.raises(UnknownClass):
        contingency(closure, {"Nope": {"e0"}}, "Nope", {"e0"})


def test_table_sums_to_population():
    from forensic_dl.datagen import generate, table4_config
    from forensic_dl.annotations import ingest_annotations
    from forensic_dl.metrics import evaluation_population
    from forensic_dl.ontology import builtin_ontology

    records, gold, _ = generate(table4_config(seed=5))
    closure = experiment_closure(builtin_ontology(include_invented_gcis=True), ingest_annotations(records), gold)
    n = len(evaluation_population(closure, gold))
    report = evaluate_closure(closure, gold)
    for r in report.classes:
        assert r.table.total == n
        assert r.table.tp + r.table.fn == len(gold[r.name])


# -- experiment driver ---------------------------------------------------


def test_manual_experiment_empty_gold():
    assert run_manual_experiment(_kb(), [], {}) == AggregateReport()


def test_dropping_gold_assertions_never_raises_tp():
    from forensic_dl.annotations import ingest_annotations
    from forensic_dl.datagen import generate, table4_config
    from forensic_dl.metrics import evaluation_population
    from forensic_dl.ontology import builtin_ontology

    kb = builtin_ontology(include_invented_gcis=True)
    records, gold, _ = generate(table4_config(seed=2))
    assertions = ingest_annotations(records)
    # re-add the explicit labels, as a hand-annotated ontology would carry them
    labelled = assertions + [ConceptAssertion(a, Atomic(c)) for c, inds in gold.items() for a in sorted(inds)]
    with_labels = materialize(normalize_kb(kb), labelled)
    without = experiment_closure(kb, labelled, gold)
    population = evaluation_population(without, gold)
    assert not drop_gold_assertions(labelled, gold) == labelled
    for c in gold:
        full = contingency(with_labels, gold, c, population)
        dropped = contingency(without, gold, c, population)
        assert dropped.tp <= full.tp


def test_noise_free_scenario_has_perfect_recall():
    from forensic_dl.annotations import ingest_annotations
    from forensic_dl.datagen import generate, table2_config
    from forensic_dl.ontology import builtin_ontology

    records, gold, _ = generate(table2_config(seed=4))
    report = run_manual_experiment(builtin_ontology(include_invented_gcis=True), ingest_annotations(records), gold)
    assert all(r.recall == 1.0 and r.precision == 1.0 for r in report.classes)
