from __future__ import annotations

import pytest
from kbgen import random_horn_kb, random_kb

from forensic_dl.errors import UnsupportedConstruct
from forensic_dl.model import (
    TOP,
    And,
    Atomic,
    Chain,
    ClassAtom,
    Exists,
    Forall,
    Gci,
    Inverse,
    KnowledgeBase,
    Not,
    ObjectAtom,
    Or,
    RoleName,
    Rule,
    Var,
    concept_length,
    conj,
    inv,
)
from forensic_dl.normalize import normalize_kb, validate_kb
from forensic_dl.ontology import builtin_ontology
from forensic_dl.oracle import unsplit_closure
from forensic_dl.reasoner import materialize
from forensic_dl.text import SourceDocument, parse_kb, serialize_kb


def A(name):
    return Atomic(name)


def some(role, filler):
    return Exists(RoleName(role), filler)


def kb_of(*axioms, rules=()) -> KnowledgeBase:
    from forensic_dl.model import axiom_references, rule_references

    refs = {(k, n) for ax in axioms for k, n in axiom_references(ax)}
    refs |= {(k, n) for r in rules for k, n in rule_references(r)}
    pick = lambda kind: {n for k, n in refs if k == kind}  # noqa: E731
    return KnowledgeBase(axioms=axioms, rules=tuple(rules), classes=pick("class"), roles=pick("role"),
                         data_properties=pick("data_property"), individuals=pick("individual"))


# -- constructors --------------------------------------------------------


def test_and_flattens_and_sorts():
    e = And((A("B"), And((A("C"), A("A")))))
    assert [str(m) for m in e.members] == ["A", "B", "C"]
    assert And((A("B"), A("A"))) == And((A("A"), A("B")))


def test_nary_needs_two_distinct_members():
    with pytest.raises(ValueError):
        And((A("A"), A("A")))
    assert conj(A("A"), A("A")) == A("A")


def test_double_inverse_collapses():
    r = RoleName("r")
    assert inv(inv(r)) == r
    assert inv(Chain((r, RoleName("s")))) == Chain((Inverse(RoleName("s")), Inverse(r)))


def test_concept_length():
    assert concept_length(A("A")) == 1
    assert concept_length(some("r", TOP)) == 3
    assert concept_length(And((A("A"), some("r", A("B"))))) == 5


# -- normalization -------------------------------------------------------


def test_atomic_subsumption_compiles_to_one_rule():
    prog = normalize_kb(kb_of(Gci(A("Throwing"), A("ActivePhysicalAggression"))))
    assert len(prog.rules) == 1
    (rule,) = prog.rules
    assert rule.head.name == "ActivePhysicalAggression"
    assert [(a.kind, a.name) for a in rule.body] == [("class", "Throwing")]


def test_damage_vehicle_gci_splits_per_disjunct():
    kb = builtin_ontology()
    dv = next(g for g in kb.gcis() if g.rhs == A("DamageVehicle"))
    prog = normalize_kb(kb_of(dv))
    assert len(prog.rules) == 2
    breaking = set()
    for rule in prog.rules:
        names = {(a.kind, a.name) for a in rule.body}
        assert {("class", "Perdurant"), ("class", "Vehicle"), ("role", "participant"), ("role", "participantIn")} <= names
        breaking |= {n for k, n in names if n.startswith("Breaking")}
    assert breaking == {"BreakingDoor", "BreakingWindows"}


def test_empty_kb_gives_empty_program():
    prog = normalize_kb(KnowledgeBase())
    assert prog.rules == () and prog.check_only == ()


def test_rhs_existential_is_check_only():
    prog = normalize_kb(kb_of(Gci(A("Perdurant"), some("participant", A("Endurant")))))
    assert prog.rules == ()
    assert len(prog.check_only) == 1


def test_transitivity_and_inverse_rules():
    from forensic_dl.model import inverse_of, transitive

    prog = normalize_kb(kb_of(transitive("has"), *inverse_of("isFrom", "has")))
    assert len(prog.rules) == 3
    assert all(r.head.kind == "role" for r in prog.rules)


@pytest.mark.parametrize("axiom, construct", [
    (Gci(Forall(RoleName("r"), A("A")), A("B")), "universal"),
    (Gci(Not(A("A")), A("B")), "negation"),
    (Gci(A("A"), Or((A("B"), A("C")))), "disjunction"),
    (Gci(A("A"), Forall(RoleName("r"), A("B"))), "universal"),
])
def test_unsupported_constructs_name_the_axiom(axiom, construct):
    with pytest.raises(UnsupportedConstruct) as info:
        normalize_kb(kb_of(axiom))
    assert construct in str(info.value)
    assert str(axiom) in str(info.value)


def test_every_rule_is_range_restricted():
    for kb in [builtin_ontology(include_learned_gcis=True, include_invented_gcis=True)] + [
        random_horn_kb(s)[0] for s in range(30)
    ]:
        assert all(r.is_range_restricted() for r in normalize_kb(kb).rules)


def _rule_shape(rule):
    """Rule with variables renamed in order of first appearance."""
    names = {}

    def rename(arg):
        if isinstance(arg, Var):
            names.setdefault(arg, f"V{len(names)}")
            return names[arg]
        return arg

    head = (rule.head.kind, rule.head.name, tuple(rename(a) for a in rule.head.args))
    body = tuple((a.kind, a.name, tuple(rename(x) for x in a.args)) for a in rule.body)
    return head, body


def test_normalization_is_idempotent_through_text():
    kbs = [builtin_ontology(include_invented_gcis=True)] + [random_horn_kb(s)[0] for s in range(40)]
    for kb in kbs:
        again = parse_kb(SourceDocument(serialize_kb(kb)))
        a = sorted(map(_rule_shape, normalize_kb(kb).rules))
        b = sorted(map(_rule_shape, normalize_kb(again).rules))
        assert a == b


@pytest.mark.parametrize("seed", range(60))
def test_or_split_matches_unsplit_oracle(seed):
    kb, assertions = random_horn_kb(seed)
    split = materialize(normalize_kb(kb), assertions).facts
    assert set(split) == unsplit_closure(kb, assertions)


def test_or_split_concrete():
    gci = Gci(And((A("P"), some("r", Or((A("X"), A("Y")))))), A("Hit"))
    from forensic_dl.model import ConceptAssertion, RoleAssertion

    kb = kb_of(gci)
    facts = [ConceptAssertion("e1", A("P")), RoleAssertion("e1", "o1", "r"), ConceptAssertion("o1", A("Y")),
             ConceptAssertion("e2", A("P")), RoleAssertion("e2", "o2", "r")]
    closure = materialize(normalize_kb(kb), facts)
    assert closure.members("Hit") == {"e1"}
    assert set(closure.facts) == unsplit_closure(kb, facts)


# -- validation ----------------------------------------------------------


def test_validate_reports_undeclared_role():
    text = "Class(Vehicle)\nClass(DamageVehicle)\nSub((some immediateRelation Vehicle), DamageVehicle)\n"
    from forensic_dl.text import parse_kb_lenient

    kb, _ = parse_kb_lenient(SourceDocument(text))
    diags = validate_kb(kb)
    assert len(diags) == 1
    assert "immediateRelation" in diags[0].message


def test_validate_builtin_and_empty():
    assert validate_kb(builtin_ontology()) == []
    assert validate_kb(builtin_ontology(include_learned_gcis=True, include_invented_gcis=True)) == []
    assert validate_kb(KnowledgeBase()) == []


def test_validate_unsafe_rule_and_unsupported():
    rule = Rule((ClassAtom("A", Var("x")),), ObjectAtom("r", Var("x"), Var("y")))
    kb = kb_of(Gci(Not(A("A")), A("B")), rules=[rule])
    messages = " | ".join(d.message for d in validate_kb(kb))
    assert "unsafe" in messages
    assert "negation" in messages


def test_random_kbs_are_constructible():
    for seed in range(50):
        kb = random_kb(seed)
        assert isinstance(kb, KnowledgeBase)
