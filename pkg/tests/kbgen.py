"""Seeded random knowledge bases for property tests.

``random_kb`` covers the whole grammar (for round-trips); ``random_horn_kb``
stays inside the executable fragment (for oracle comparisons).
"""

from __future__ import annotations

import random

from forensic_dl.model import (
    BOTTOM,
    TOP,
    And,
    Atomic,
    Chain,
    ClassAtom,
    ConceptAssertion,
    DataAssertion,
    DataAtom,
    Disjoint,
    EventTraits,
    Exists,
    Forall,
    Gci,
    Ind,
    Inverse,
    KnowledgeBase,
    Lit,
    Nominal,
    Not,
    ObjectAtom,
    Or,
    RoleAssertion,
    RoleInclusion,
    RoleName,
    Rule,
    SameAsAtom,
    Var,
    inverse_of,
    symmetric,
    transitive,
)

CLASSES = tuple(f"C{i}" for i in range(6)) + ("Vehicle", "Perdurant")
ROLES = ("r", "s", "t", "part", "has")
PROPS = ("loc", "label")
STRING_CHARS = 'abcXYZ 019,()#"\\\n\t\ré→'


def _nary(cls, members):
    unique = {str(m): m for m in members}
    if len(unique) < 2:
        return members[0]
    return cls(tuple(members))


def random_role(rng: random.Random, roles=ROLES, allow_inverse: bool = True):
    r = RoleName(rng.choice(roles))
    if allow_inverse and rng.random() < 0.25:
        return Inverse(r)
    return r


def random_concept(rng: random.Random, depth: int, classes, roles, inds, full: bool):
    """A concept of bounded depth; ``full`` adds Not, Forall and Bottom."""
    leaf = rng.random() < 0.35 or depth == 0
    if leaf:
        k = rng.random()
        if k < 0.08:
            return TOP
        if full and k < 0.12:
            return BOTTOM
        return Atomic(rng.choice(classes))
    ops = ["and", "or", "some", "value"] + (["not", "all"] if full else [])
    op = rng.choice(ops)
    sub = lambda: random_concept(rng, depth - 1, classes, roles, inds, full)  # noqa: E731
    if op in ("and", "or"):
        members = [sub() for _ in range(rng.randint(2, 3))]
        return _nary(And if op == "and" else Or, members)
    if op == "some":
        return Exists(random_role(rng, roles), sub())
    if op == "value":
        return Exists(random_role(rng, roles), Nominal(rng.choice(inds)))
    if op == "not":
        return Not(sub())
    return Forall(random_role(rng, roles), sub())


def random_string(rng: random.Random) -> str:
    return "".join(rng.choice(STRING_CHARS) for _ in range(rng.randint(0, 8)))


def _term(rng, variables, inds, data: bool = False):
    if rng.random() < 0.8:
        return Var(rng.choice(variables))
    return Lit(random_string(rng)) if data else Ind(rng.choice(inds))


def random_rule(rng: random.Random, classes, roles, props, inds) -> Rule:
    variables = ["x", "y", "z", "v1", "v2"]
    body = []
    for _ in range(rng.randint(1, 4)):
        k = rng.random()
        if k < 0.35:
            body.append(ClassAtom(rng.choice(classes), _term(rng, variables, inds)))
        elif k < 0.7:
            body.append(ObjectAtom(rng.choice(roles), _term(rng, variables, inds), _term(rng, variables, inds)))
        elif k < 0.9:
            body.append(DataAtom(rng.choice(props), _term(rng, variables, inds), _term(rng, variables, inds, True)))
        else:
            body.append(SameAsAtom(_term(rng, variables, inds, True), _term(rng, variables, inds, True)))
    if rng.random() < 0.5:
        head = ClassAtom(rng.choice(classes), _term(rng, variables, inds))
    else:
        head = ObjectAtom(rng.choice(roles), _term(rng, variables, inds), _term(rng, variables, inds))
    return Rule(tuple(body), head)


def random_kb(seed: int) -> KnowledgeBase:
    """Any KB the grammar can express, with every statement kind represented over many seeds."""
    rng = random.Random(seed)
    classes = CLASSES[: rng.randint(2, len(CLASSES))]
    roles = ROLES[: rng.randint(1, len(ROLES))]
    props = PROPS[: rng.randint(1, len(PROPS))]
    inds = tuple(f"i{k}" for k in range(rng.randint(1, 6)))
    axioms = []
    for _ in range(rng.randint(0, 12)):
        k = rng.random()
        if k < 0.35:
            note = rng.choice([None, None, "INVENTED", "LEARNED"])
            lhs = random_concept(rng, 3, classes, roles, inds, True)
            rhs = random_concept(rng, 2, classes, roles, inds, True)
            axioms.append(Gci(lhs, rhs, note))
        elif k < 0.45:
            axioms.append(Disjoint(random_concept(rng, 2, classes, roles, inds, True),
                                   random_concept(rng, 2, classes, roles, inds, True)))
        elif k < 0.55:
            if rng.random() < 0.5:
                parts = tuple(random_role(rng, roles) for _ in range(rng.randint(2, 3)))
                lhs = Chain(parts)
            else:
                lhs = random_role(rng, roles)
            axioms.append(RoleInclusion(lhs, RoleName(rng.choice(roles))))
        elif k < 0.62:
            r = rng.choice(roles)
            axioms.append(rng.choice([transitive(r), symmetric(r)]))
        elif k < 0.66:
            axioms.extend(inverse_of(rng.choice(roles), rng.choice(roles)))
        elif k < 0.78:
            axioms.append(ConceptAssertion(rng.choice(inds), random_concept(rng, 2, classes, roles, inds, True)))
        elif k < 0.9:
            axioms.append(RoleAssertion(rng.choice(inds), rng.choice(inds), rng.choice(roles)))
        else:
            axioms.append(DataAssertion(rng.choice(inds), rng.choice(props), random_string(rng)))
    rules = [random_rule(rng, classes, roles, props, inds) for _ in range(rng.randint(0, 3))]
    traits = {}
    for c in classes:
        if rng.random() < 0.2:
            traits[c] = EventTraits(rng.random() < 0.5, rng.random() < 0.5,
                                    rng.choice(["cumulative", "not_cumulative", "unspecified"]))
    return KnowledgeBase(
        axioms=tuple(axioms), rules=tuple(rules), classes=classes, roles=roles,
        data_properties=props, individuals=inds, traits=traits,
    )


# -- executable fragment -------------------------------------------------


def random_horn_kb(seed: int, max_individuals: int = 12, max_axioms: int = 8) -> tuple[KnowledgeBase, list]:
    """(tbox KB, assertions) inside the Horn fragment.

    Each KB mixes class GCIs with at least one role axiom, drawing from
    transitivity, inverses and composition.
    """
    rng = random.Random(seed)
    classes = CLASSES[:5]
    roles = ROLES[:3]
    props = ("loc",)
    inds = tuple(f"a{k}" for k in range(rng.randint(2, max_individuals)))
    axioms = []
    role_axioms = [
        lambda: [transitive(rng.choice(roles))],
        lambda: list(inverse_of(*rng.sample(roles, 2))),
        lambda: [RoleInclusion(Chain((RoleName(rng.choice(roles)), RoleName(rng.choice(roles)))),
                               RoleName(rng.choice(roles)))],
        lambda: [RoleInclusion(random_role(rng, roles), RoleName(rng.choice(roles)))],
        lambda: [symmetric(rng.choice(roles))],
    ]
    budget = rng.randint(1, max_axioms)
    axioms += rng.choice(role_axioms)()
    while len(axioms) < budget:
        k = rng.random()
        if k < 0.6:
            lhs = random_concept(rng, 3, classes, roles, inds, False)
            axioms.append(Gci(lhs, Atomic(rng.choice(classes))))
        elif k < 0.7:
            axioms.append(Disjoint(Atomic(rng.choice(classes)), Atomic(rng.choice(classes))))
        else:
            axioms += rng.choice(role_axioms)()
    axioms = axioms[:max_axioms]
    rules = []
    if rng.random() < 0.4:
        rules.append(Rule(
            (ClassAtom(rng.choice(classes), Var("p")), DataAtom("loc", Var("p"), Var("l1")),
             DataAtom("loc", Var("q"), Var("l2")), SameAsAtom(Var("l1"), Var("l2"))),
            ObjectAtom(rng.choice(roles), Var("p"), Var("q")),
        ))
    assertions = []
    for _ in range(rng.randint(1, 3 * len(inds))):
        k = rng.random()
        if k < 0.4:
            assertions.append(ConceptAssertion(rng.choice(inds), Atomic(rng.choice(classes))))
        elif k < 0.85:
            assertions.append(RoleAssertion(rng.choice(inds), rng.choice(inds), rng.choice(roles)))
        else:
            assertions.append(DataAssertion(rng.choice(inds), "loc", rng.choice(["x", "y"])))
    kb = KnowledgeBase(axioms=tuple(axioms), rules=tuple(rules), classes=classes, roles=roles,
                       data_properties=props, individuals=inds)
    return kb, assertions
