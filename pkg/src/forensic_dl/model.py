"""Concepts, roles, axioms, rules and knowledge bases.

Every expression type is an immutable dataclass.  ``str()`` on any of
them yields the ``.fkb`` surface syntax, which doubles as the canonical
ordering key for the members of conjunctions and disjunctions.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

THING = "Thing"
NOTHING = "Nothing"

# ---------------------------------------------------------------- roles


@dataclass(frozen=True)
class RoleName:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Inverse:
    inner: "RoleExpr"

    def __str__(self) -> str:
        return f"(inv {self.inner})"


@dataclass(frozen=True)
class Chain:
    parts: tuple

    def __post_init__(self):
        flat = []
        for p in self.parts:
            flat.extend(p.parts if isinstance(p, Chain) else (p,))
        if len(flat) < 2:
            raise ValueError("a role chain needs at least two parts")
        object.__setattr__(self, "parts", tuple(flat))

    def __str__(self) -> str:
        return "(chain " + " ".join(map(str, self.parts)) + ")"


RoleExpr = Union[RoleName, Inverse, Chain]


def inv(role: RoleExpr) -> RoleExpr:
    """Inverse of ``role`` with double inversion collapsed."""
    if isinstance(role, Inverse):
        return role.inner
    if isinstance(role, Chain):
        return Chain(tuple(inv(p) for p in reversed(role.parts)))
    return Inverse(role)


def canonical_role(role: RoleExpr) -> RoleExpr:
    if isinstance(role, Inverse):
        return inv(canonical_role(role.inner))
    if isinstance(role, Chain):
        return Chain(tuple(canonical_role(p) for p in role.parts))
    return role


# ------------------------------------------------------------- concepts


@dataclass(frozen=True)
class Atomic:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return THING


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return NOTHING


TOP = Top()
BOTTOM = Bottom()


def _nary_members(cls, members) -> tuple:
    flat = []
    for m in members:
        flat.extend(m.members if isinstance(m, cls) else (m,))
    unique = {str(m): m for m in flat}
    if len(unique) < 2:
        raise ValueError(f"{cls.__name__} needs at least two distinct members")
    return tuple(unique[k] for k in sorted(unique))


@dataclass(frozen=True)
class And:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", _nary_members(And, self.members))

    def __str__(self) -> str:
        return "(and " + " ".join(map(str, self.members)) + ")"


@dataclass(frozen=True)
class Or:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", _nary_members(Or, self.members))

    def __str__(self) -> str:
        return "(or " + " ".join(map(str, self.members)) + ")"


@dataclass(frozen=True)
class Not:
    inner: "ConceptExpr"

    def __str__(self) -> str:
        return f"(not {self.inner})"


@dataclass(frozen=True)
class Nominal:
    individual: str

    def __str__(self) -> str:
        return "{" + self.individual + "}"


@dataclass(frozen=True)
class Exists:
    role: RoleExpr
    filler: "ConceptExpr"

    def __str__(self) -> str:
        if isinstance(self.filler, Nominal):
            return f"(value {self.role} {self.filler.individual})"
        return f"(some {self.role} {self.filler})"


@dataclass(frozen=True)
class Forall:
    role: RoleExpr
    filler: "ConceptExpr"

    def __str__(self) -> str:
        return f"(all {self.role} {self.filler})"


ConceptExpr = Union[Atomic, Top, Bottom, And, Or, Not, Exists, Forall, Nominal]


def conj(*members: ConceptExpr) -> ConceptExpr:
    """Conjunction that tolerates a single (or repeated) member."""
    if len({str(m) for m in members}) == 1:
        return members[0]
    return And(members)


def disj(*members: ConceptExpr) -> ConceptExpr:
    if len({str(m) for m in members}) == 1:
        return members[0]
    return Or(members)


def concept_length(expr: ConceptExpr) -> int:
    """Node count: names and Top count 1, ``∃r.C`` is ``|C| + 2``, ``C ⊓ D`` adds one per operator."""
    if isinstance(expr, (Atomic, Top, Bottom, Nominal)):
        return 1
    if isinstance(expr, (And, Or)):
        return sum(concept_length(m) for m in expr.members) + len(expr.members) - 1
    if isinstance(expr, Not):
        return 1 + concept_length(expr.inner)
    if isinstance(expr, (Exists, Forall)):
        return 2 + concept_length(expr.filler)
    raise TypeError(expr)


def iter_subconcepts(expr: ConceptExpr) -> Iterator[ConceptExpr]:
    yield expr
    if isinstance(expr, (And, Or)):
        for m in expr.members:
            yield from iter_subconcepts(m)
    elif isinstance(expr, Not):
        yield from iter_subconcepts(expr.inner)
    elif isinstance(expr, (Exists, Forall)):
        yield from iter_subconcepts(expr.filler)


def iter_role_names(role: RoleExpr) -> Iterator[str]:
    if isinstance(role, RoleName):
        yield role.name
    elif isinstance(role, Inverse):
        yield from iter_role_names(role.inner)
    else:
        for p in role.parts:
            yield from iter_role_names(p)


# --------------------------------------------------------------- axioms


@dataclass(frozen=True)
class Gci:
    lhs: ConceptExpr
    rhs: ConceptExpr
    note: str | None = None  # "INVENTED" / "LEARNED" provenance tag

    def __str__(self) -> str:
        return f"Sub({self.lhs}, {self.rhs})"


@dataclass(frozen=True)
class RoleInclusion:
    lhs: RoleExpr
    rhs: RoleName

    def __str__(self) -> str:
        return f"SubRole({self.lhs}, {self.rhs})"


@dataclass(frozen=True)
class Disjoint:
    a: ConceptExpr
    b: ConceptExpr

    def __str__(self) -> str:
        return f"Disjoint({self.a}, {self.b})"


@dataclass(frozen=True)
class ConceptAssertion:
    individual: str
    concept: ConceptExpr

    def __str__(self) -> str:
        return f"Member({self.concept}, {self.individual})"


@dataclass(frozen=True)
class RoleAssertion:
    subject: str
    object: str
    role: str

    def __str__(self) -> str:
        return f"Related({self.role}, {self.subject}, {self.object})"


@dataclass(frozen=True)
class DataAssertion:
    subject: str
    property: str
    value: str

    def __str__(self) -> str:
        return f"Data({self.property}, {self.subject}, {quote(self.value)})"


Axiom = Union[Gci, RoleInclusion, Disjoint, ConceptAssertion, RoleAssertion, DataAssertion]
Assertion = Union[ConceptAssertion, RoleAssertion, DataAssertion]
ASSERTION_TYPES = (ConceptAssertion, RoleAssertion, DataAssertion)


def quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r") + '"'


def transitive(role: str) -> RoleInclusion:
    return RoleInclusion(Chain((RoleName(role), RoleName(role))), RoleName(role))


def symmetric(role: str) -> RoleInclusion:
    return RoleInclusion(Inverse(RoleName(role)), RoleName(role))


def inverse_of(r: str, s: str) -> tuple[RoleInclusion, RoleInclusion]:
    """``r = s⁻`` as two inclusions with atomic right-hand sides."""
    return (
        RoleInclusion(Inverse(RoleName(s)), RoleName(r)),
        RoleInclusion(Inverse(RoleName(r)), RoleName(s)),
    )


# ---------------------------------------------------------------- rules


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


@dataclass(frozen=True)
class Ind:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Lit:
    value: str

    def __str__(self) -> str:
        return quote(self.value)


Term = Union[Var, Ind, Lit]


@dataclass(frozen=True)
class ClassAtom:
    concept: str
    term: Term

    @property
    def terms(self) -> tuple:
        return (self.term,)

    def __str__(self) -> str:
        return f"{self.concept}({self.term})"


@dataclass(frozen=True)
class ObjectAtom:
    role: str
    subject: Term
    object: Term

    @property
    def terms(self) -> tuple:
        return (self.subject, self.object)

    def __str__(self) -> str:
        return f"{self.role}({self.subject}, {self.object})"


@dataclass(frozen=True)
class DataAtom:
    property: str
    subject: Term
    value: Term

    @property
    def terms(self) -> tuple:
        return (self.subject, self.value)

    def __str__(self) -> str:
        return f"{self.property}({self.subject}, {self.value})"


@dataclass(frozen=True)
class SameAsAtom:
    left: Term
    right: Term

    @property
    def terms(self) -> tuple:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"SameAs({self.left}, {self.right})"


Atom = Union[ClassAtom, ObjectAtom, DataAtom, SameAsAtom]


@dataclass(frozen=True)
class Rule:
    body: tuple
    head: Atom

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))

    def __str__(self) -> str:
        return "Rule: " + ", ".join(map(str, self.body)) + " -> " + str(self.head)

    def is_safe(self) -> bool:
        body_vars = {t for a in self.body for t in a.terms if isinstance(t, Var)}
        return all(t in body_vars for t in self.head.terms if isinstance(t, Var))


# --------------------------------------------------------------- traits


@dataclass(frozen=True)
class EventTraits:
    telic: bool
    stage: bool
    cumulative: str = "unspecified"  # cumulative | not_cumulative | unspecified

    def __post_init__(self):
        if self.cumulative not in ("cumulative", "not_cumulative", "unspecified"):
            raise ValueError(f"bad cumulative value {self.cumulative!r}")


# ------------------------------------------------------------------ KB


def _dedupe(items: Iterable) -> tuple:
    return tuple(dict.fromkeys(items))


@dataclass(frozen=True)
class KnowledgeBase:
    axioms: tuple = ()
    rules: tuple = ()
    classes: frozenset = frozenset()
    roles: frozenset = frozenset()
    data_properties: frozenset = frozenset()
    individuals: frozenset = frozenset()
    traits: Mapping[str, EventTraits] = field(default_factory=dict)
    # source positions (axiom index -> (line, col)); filled by the parser
    spans: Mapping[int, tuple] = field(default_factory=dict, compare=False, repr=False)
    rule_spans: Mapping[int, tuple] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "axioms", _dedupe(self.axioms))
        object.__setattr__(self, "rules", _dedupe(self.rules))
        for name in ("classes", "roles", "data_properties", "individuals"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        object.__setattr__(self, "traits", dict(self.traits))

    def tbox(self) -> list:
        return [a for a in self.axioms if not isinstance(a, ASSERTION_TYPES)]

    def assertions(self) -> list:
        return [a for a in self.axioms if isinstance(a, ASSERTION_TYPES)]

    def gcis(self) -> list[Gci]:
        return [a for a in self.axioms if isinstance(a, Gci)]

    def replace(self, **changes) -> "KnowledgeBase":
        changes.setdefault("spans", {})
        changes.setdefault("rule_spans", {})
        return dataclasses.replace(self, **changes)

    def with_axioms(self, extra: Iterable) -> "KnowledgeBase":
        return self.replace(axioms=self.axioms + tuple(extra))

    def without_axioms(self, predicate) -> "KnowledgeBase":
        return self.replace(axioms=tuple(a for a in self.axioms if not predicate(a)))

    def merge(self, other: "KnowledgeBase") -> "KnowledgeBase":
        return KnowledgeBase(
            axioms=self.axioms + other.axioms,
            rules=self.rules + other.rules,
            classes=self.classes | other.classes,
            roles=self.roles | other.roles,
            data_properties=self.data_properties | other.data_properties,
            individuals=self.individuals | other.individuals,
            traits={**self.traits, **other.traits},
        )

    def declare(self, classes=(), roles=(), data_properties=(), individuals=()) -> "KnowledgeBase":
        return self.replace(
            classes=self.classes | set(classes),
            roles=self.roles | set(roles),
            data_properties=self.data_properties | set(data_properties),
            individuals=self.individuals | set(individuals),
            spans=self.spans,
            rule_spans=self.rule_spans,
        )

    def told_subclasses(self) -> dict[str, list[str]]:
        """Direct atomic subclass edges ``A ⊑ B`` stated in the KB, keyed by ``B``."""
        out: dict[str, list[str]] = {}
        for ax in self.axioms:
            if isinstance(ax, Gci) and isinstance(ax.lhs, Atomic) and isinstance(ax.rhs, Atomic):
                out.setdefault(ax.rhs.name, []).append(ax.lhs.name)
        return out


# ------------------------------------------------------ name occurrences


def concept_references(expr: ConceptExpr) -> Iterator[tuple[str, str]]:
    """Yield ``(kind, name)`` for every name used inside a concept."""
    for sub in iter_subconcepts(expr):
        if isinstance(sub, Atomic):
            yield "class", sub.name
        elif isinstance(sub, Nominal):
            yield "individual", sub.individual
        elif isinstance(sub, (Exists, Forall)):
            for r in iter_role_names(sub.role):
                yield "role", r


def axiom_references(ax: Axiom) -> Iterator[tuple[str, str]]:
    if isinstance(ax, Gci):
        yield from concept_references(ax.lhs)
        yield from concept_references(ax.rhs)
    elif isinstance(ax, Disjoint):
        yield from concept_references(ax.a)
        yield from concept_references(ax.b)
    elif isinstance(ax, RoleInclusion):
        for r in iter_role_names(ax.lhs):
            yield "role", r
        yield "role", ax.rhs.name
    elif isinstance(ax, ConceptAssertion):
        yield "individual", ax.individual
        yield from concept_references(ax.concept)
    elif isinstance(ax, RoleAssertion):
        yield "individual", ax.subject
        yield "individual", ax.object
        yield "role", ax.role
    elif isinstance(ax, DataAssertion):
        yield "individual", ax.subject
        yield "data_property", ax.property


def rule_references(rule: Rule) -> Iterator[tuple[str, str]]:
    for atom in rule.body + (rule.head,):
        if isinstance(atom, ClassAtom):
            yield "class", atom.concept
        elif isinstance(atom, ObjectAtom):
            yield "role", atom.role
        elif isinstance(atom, DataAtom):
            yield "data_property", atom.property
        for t in atom.terms:
            if isinstance(t, Ind):
                yield "individual", t.name
