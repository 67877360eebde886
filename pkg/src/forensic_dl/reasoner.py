"""Semi-naive materialization and the queries answered over its result."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable

from .errors import NotDerived, ResourceLimit, UnsupportedConstruct, UnsupportedQuery
from .model import (
    NOTHING,
    THING,
    And,
    Atomic,
    Bottom,
    ConceptAssertion,
    ConceptExpr,
    DataAssertion,
    Exists,
    Forall,
    Inverse,
    KnowledgeBase,
    Nominal,
    Not,
    Or,
    RoleAssertion,
    RoleName,
    Top,
    Var,
    canonical_role,
)
from .normalize import CLASS, DATA, ROLE, VIOLATION, NormalizedProgram, ProgramRule, normalize_kb

DEFAULT_FACT_CAP = 10**7
FACT_CAP_ENV = "FORENSIC_DL_FACT_CAP"


def default_fact_cap() -> int:
    value = os.environ.get(FACT_CAP_ENV)
    return int(value) if value else DEFAULT_FACT_CAP


# ------------------------------------------------------------ assertions


def class_fact(individual: str, concept: str) -> tuple:
    return (CLASS, concept, individual)


def role_fact(subject: str, role: str, obj: str) -> tuple:
    return (ROLE, role, subject, obj)


def data_fact(subject: str, prop: str, value: str) -> tuple:
    return (DATA, prop, subject, value)


def assertion_facts(assertions: Iterable, prefix: str = "_:b") -> list[tuple]:
    """Ground facts for ABox axioms; complex concept assertions get anonymous witnesses."""
    facts: list[tuple] = []
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    def assert_concept(ind: str, c: ConceptExpr, ax) -> None:
        if isinstance(c, Atomic):
            if c.name != NOTHING:
                facts.append(class_fact(ind, c.name))
            else:
                facts.append((VIOLATION, "asserted-bottom", ind))
        elif isinstance(c, Top):
            facts.append(class_fact(ind, THING))
        elif isinstance(c, Bottom):
            facts.append((VIOLATION, "asserted-bottom", ind))
        elif isinstance(c, And):
            for m in c.members:
                assert_concept(ind, m, ax)
        elif isinstance(c, Exists):
            role = canonical_role(c.role)
            if isinstance(c.filler, Nominal):
                other = c.filler.individual
            else:
                other = fresh()
                assert_concept(other, c.filler, ax)
            if isinstance(role, RoleName):
                facts.append(role_fact(ind, role.name, other))
            elif isinstance(role, Inverse) and isinstance(role.inner, RoleName):
                facts.append(role_fact(other, role.inner.name, ind))
            else:
                raise UnsupportedConstruct("role chain in an assertion", ax)
        else:
            raise UnsupportedConstruct(f"{type(c).__name__} in a concept assertion", ax)

    for ax in assertions:
        if isinstance(ax, ConceptAssertion):
            assert_concept(ax.individual, ax.concept, ax)
        elif isinstance(ax, RoleAssertion):
            facts.append(role_fact(ax.subject, ax.role, ax.object))
        elif isinstance(ax, DataAssertion):
            facts.append(data_fact(ax.subject, ax.property, ax.value))
        else:
            raise TypeError(f"not an assertion: {ax!r}")
    return facts


def fact_individuals(fact: tuple) -> tuple:
    kind = fact[0]
    if kind == DATA:
        return (fact[2],)
    return fact[2:]


def domain_facts(program: NormalizedProgram, facts: Iterable[tuple]) -> list[tuple]:
    """``Thing`` facts for every individual, needed only when a rule body tests ``Thing``."""
    if not program.uses_thing:
        return []
    inds = {}
    for f in facts:
        for a in fact_individuals(f):
            inds[a] = None
    for r in program.rules:
        if r.head.kind in (CLASS, ROLE):
            for a in r.head.args:
                if not isinstance(a, Var):
                    inds[a] = None
    return [class_fact(a, THING) for a in inds]


# ------------------------------------------------------------- storage


class _Relation:
    __slots__ = ("rows", "by0", "by1")

    def __init__(self):
        self.rows: dict = {}
        self.by0: dict = {}
        self.by1: dict = {}

    def add(self, args: tuple) -> None:
        self.rows[args] = None
        self.by0.setdefault(args[0], []).append(args)
        if len(args) > 1:
            self.by1.setdefault(args[1], []).append(args)

    def lookup(self, pattern: list) -> Iterable[tuple]:
        """``pattern`` holds a value or None per position."""
        if all(p is not None for p in pattern):
            key = tuple(pattern)
            return (key,) if key in self.rows else ()
        if pattern[0] is not None:
            return self.by0.get(pattern[0], ())
        if len(pattern) > 1 and pattern[1] is not None:
            return self.by1.get(pattern[1], ())
        return list(self.rows)


_EMPTY = _Relation()


def _unify(atom_args: tuple, row: tuple, binding: dict) -> dict | None:
    out = binding
    for a, v in zip(atom_args, row):
        if isinstance(a, Var):
            bound = out.get(a)
            if bound is None:
                if out is binding:
                    out = dict(binding)
                out[a] = v
            elif bound != v:
                return None
        elif a != v:
            return None
    return out


def _plan(rule: ProgramRule, first: int) -> list[int]:
    bound = {a for a in rule.body[first].args if isinstance(a, Var)}
    rest = [j for j in range(len(rule.body)) if j != first]
    order = []
    while rest:
        def score(j):
            args = rule.body[j].args
            return (sum(1 for a in args if not isinstance(a, Var) or a in bound), -len(args))
        best = max(rest, key=score)
        rest.remove(best)
        order.append(best)
        bound |= {a for a in rule.body[best].args if isinstance(a, Var)}
    return order


def _ground(atom, binding) -> tuple:
    return (atom.kind, atom.name) + tuple(binding[a] if isinstance(a, Var) else a for a in atom.args)


# ------------------------------------------------------------- closure


@dataclass(frozen=True)
class Violation:
    individual: str
    axiom: str  # label such as "ax12"
    description: str

    def __str__(self) -> str:
        return f"{self.individual} violates {self.axiom}: {self.description}"


class ClosureABox:
    """The materialized assertion set; read-only once built."""

    def __init__(self, facts: dict, derivations: dict, program: NormalizedProgram):
        self._facts = facts
        self.derivations = derivations
        self.program = program
        self.classes: dict[str, set] = {}
        self.successors: dict[str, dict[str, set]] = {}
        self.predecessors: dict[str, dict[str, set]] = {}
        self.data: dict[str, dict[str, set]] = {}
        self.violation_facts: list[tuple] = []
        self.individuals: set[str] = set()
        for f in facts:
            kind = f[0]
            if kind == CLASS:
                self.classes.setdefault(f[1], set()).add(f[2])
                self.individuals.add(f[2])
            elif kind == ROLE:
                self.successors.setdefault(f[1], {}).setdefault(f[2], set()).add(f[3])
                self.predecessors.setdefault(f[1], {}).setdefault(f[3], set()).add(f[2])
                self.individuals.update(f[2:])
            elif kind == DATA:
                self.data.setdefault(f[1], {}).setdefault(f[2], set()).add(f[3])
                self.individuals.add(f[2])
            elif kind == VIOLATION:
                self.violation_facts.append(f)
                self.individuals.add(f[2])

    @property
    def facts(self) -> frozenset:
        return frozenset(self._facts)

    def __contains__(self, fact) -> bool:
        return fact in self._facts

    def __len__(self) -> int:
        return len(self._facts)

    @property
    def declared_classes(self) -> frozenset:
        return self.program.classes

    def members(self, concept: str) -> set:
        return self.classes.get(concept, set())

    def types_of(self, individual: str) -> list[str]:
        return sorted(c for c, inds in self.classes.items() if individual in inds)

    def class_assertions(self) -> list[tuple[str, str]]:
        return sorted((a, c) for c, inds in self.classes.items() for a in inds)

    def is_derived(self, fact) -> bool:
        return fact in self.derivations

    def violations(self) -> list[Violation]:
        out = []
        for _, label, ind in self.violation_facts:
            src = self.program.sources.get(label)
            out.append(Violation(ind, label, str(src) if src is not None else label))
        return sorted(out, key=lambda v: (v.individual, v.axiom))


def materialize(
    program: NormalizedProgram,
    assertions: Iterable = (),
    *,
    cap: int | None = None,
    extra_facts: Iterable[tuple] = (),
) -> ClosureABox:
    """Least fixpoint of ``program`` over ``assertions`` by semi-naive evaluation."""
    cap = default_fact_cap() if cap is None else cap
    initial = assertion_facts(assertions) + list(extra_facts)
    initial += domain_facts(program, initial)

    relations: dict[tuple, _Relation] = {}
    facts: dict[tuple, None] = {}
    derivations: dict[tuple, tuple] = {}

    def insert(fact: tuple) -> None:
        facts[fact] = None
        key = fact[:2]
        rel = relations.get(key)
        if rel is None:
            rel = relations[key] = _Relation()
        rel.add(fact[2:])

    delta: dict[tuple, list] = {}
    for f in initial:
        if f not in facts:
            insert(f)
            delta.setdefault(f[:2], []).append(f[2:])
    if len(facts) > cap:
        raise ResourceLimit(cap)

    plans = {
        (ri, i): _plan(rule, i)
        for ri, rule in enumerate(program.rules)
        for i in range(len(rule.body))
    }

    while delta:
        new: dict[tuple, tuple] = {}
        for ri, rule in enumerate(program.rules):
            for i, atom in enumerate(rule.body):
                rows = delta.get((atom.kind, atom.name))
                if not rows:
                    continue
                order = plans[(ri, i)]
                for row in rows:
                    b = _unify(atom.args, row, {})
                    if b is None:
                        continue
                    _join(rule, order, 0, b, relations, [(i, row)], facts, new, ri)
                    if len(facts) + len(new) > cap:
                        raise ResourceLimit(cap)
        delta = {}
        for f, why in new.items():
            insert(f)
            derivations[f] = why
            delta.setdefault(f[:2], []).append(f[2:])
    return ClosureABox(facts, derivations, program)


def _join(rule, order, k, binding, relations, used, facts, new, ri) -> None:
    if k == len(order):
        head = _ground(rule.head, binding)
        if head not in facts and head not in new:
            body = [None] * len(rule.body)
            for j, row in used:
                body[j] = (rule.body[j].kind, rule.body[j].name) + row
            new[head] = (rule, tuple(body))
        return
    j = order[k]
    atom = rule.body[j]
    rel = relations.get((atom.kind, atom.name), _EMPTY)
    pattern = [binding.get(a) if isinstance(a, Var) else a for a in atom.args]
    for row in rel.lookup(pattern):
        b = _unify(atom.args, row, binding)
        if b is not None:
            used.append((j, row))
            _join(rule, order, k + 1, b, relations, used, facts, new, ri)
            used.pop()


def materialize_kb(kb: KnowledgeBase, assertions: Iterable = (), **kwargs) -> ClosureABox:
    """Materialize the KB's own ABox plus ``assertions``."""
    return materialize(normalize_kb(kb), list(kb.assertions()) + list(assertions), **kwargs)


# ----------------------------------------------------------- consistency


def is_consistent(closure: ClosureABox) -> tuple[bool, list[Violation]]:
    violations = closure.violations()
    return not violations, violations


def check_existentials(closure: ClosureABox) -> list[tuple[str, str]]:
    """Individuals matching a check-only axiom's left side but lacking its existential witness."""
    out = []
    for label, ax in closure.program.check_only:
        wanted = [m for m in (ax.rhs.members if isinstance(ax.rhs, And) else (ax.rhs,)) if isinstance(m, Exists)]
        lhs_ext = all_instances(closure, ax.lhs)
        for m in wanted:
            missing = lhs_ext - all_instances(closure, m)
            out += [(a, label) for a in missing]
    return sorted(set(out))


# --------------------------------------------------------------- queries


def check_query(q: ConceptExpr, top_level: bool = True) -> None:
    if isinstance(q, (Atomic, Top)):
        return
    if isinstance(q, Nominal):
        return
    if isinstance(q, (And, Or)):
        for m in q.members:
            check_query(m, False)
        return
    if isinstance(q, Exists):
        role = canonical_role(q.role)
        if not isinstance(role, RoleName) and not (
            isinstance(role, Inverse) and isinstance(role.inner, RoleName)
        ):
            raise UnsupportedQuery(f"role chain in query {q}")
        check_query(q.filler, False)
        return
    if isinstance(q, (Not, Forall, Bottom)):
        raise UnsupportedQuery(f"{type(q).__name__} is not allowed in a query concept: {q}")
    raise UnsupportedQuery(f"unknown construct {q!r}")


def _role_edges(closure: ClosureABox, role) -> tuple[dict, dict]:
    """(forward, backward) adjacency for an atomic or inverted role."""
    role = canonical_role(role)
    if isinstance(role, Inverse):
        name = role.inner.name
        return closure.predecessors.get(name, {}), closure.successors.get(name, {})
    return closure.successors.get(role.name, {}), closure.predecessors.get(role.name, {})


def _instance(closure: ClosureABox, a: str, q: ConceptExpr) -> bool:
    if isinstance(q, Atomic):
        if q.name == THING:
            return a in closure.individuals
        return a in closure.classes.get(q.name, ())
    if isinstance(q, Top):
        return True
    if isinstance(q, And):
        return all(_instance(closure, a, m) for m in q.members)
    if isinstance(q, Or):
        return any(_instance(closure, a, m) for m in q.members)
    if isinstance(q, Nominal):
        return a == q.individual
    if isinstance(q, Exists):
        forward, _ = _role_edges(closure, q.role)
        return any(_instance(closure, b, q.filler) for b in forward.get(a, ()))
    raise UnsupportedQuery(str(q))


def instance_of(closure: ClosureABox, a: str, q: ConceptExpr) -> bool:
    """Whether ``a`` matches the positive existential query ``q`` in the closure."""
    check_query(q)
    return _instance(closure, a, q)


def extension(closure: ClosureABox, q: ConceptExpr, cache: dict | None = None) -> frozenset:
    """All individuals matching ``q``, computed bottom-up with set operations."""
    if cache is not None and q in cache:
        return cache[q]
    if isinstance(q, Atomic):
        if q.name == THING:
            out = frozenset(closure.individuals)
        else:
            out = frozenset(closure.classes.get(q.name, ()))
    elif isinstance(q, Top):
        out = frozenset(closure.individuals)
    elif isinstance(q, And):
        parts = sorted((extension(closure, m, cache) for m in q.members), key=len)
        out = parts[0].intersection(*parts[1:])
    elif isinstance(q, Or):
        out = frozenset().union(*(extension(closure, m, cache) for m in q.members))
    elif isinstance(q, Nominal):
        out = frozenset({q.individual}) & frozenset(closure.individuals)
    elif isinstance(q, Exists):
        _, backward = _role_edges(closure, q.role)
        acc = set()
        for b in extension(closure, q.filler, cache):
            acc.update(backward.get(b, ()))
        out = frozenset(acc)
    else:
        raise UnsupportedQuery(str(q))
    if cache is not None:
        cache[q] = out
    return out


def all_instances(closure: ClosureABox, q: ConceptExpr) -> set[str]:
    check_query(q)
    return set(extension(closure, q))


# ------------------------------------------------------------ subsumption


def dnf(expr: ConceptExpr) -> list[ConceptExpr]:
    """Or-free disjuncts of a positive existential concept."""
    if isinstance(expr, Or):
        return [d for m in expr.members for d in dnf(m)]
    if isinstance(expr, And):
        combos: list[list] = [[]]
        for m in expr.members:
            combos = [c + [d] for c in combos for d in dnf(m)]
        out = []
        for c in combos:
            try:
                out.append(And(tuple(c)))
            except ValueError:
                out.append(c[0])
        return out
    if isinstance(expr, Exists):
        if isinstance(expr.filler, Nominal):
            return [expr]
        return [Exists(expr.role, d) for d in dnf(expr.filler)]
    if isinstance(expr, Bottom) or isinstance(expr, Atomic) and expr.name == NOTHING:
        return []
    if isinstance(expr, (Not, Forall)):
        raise UnsupportedConstruct(type(expr).__name__, expr)
    return [expr]


def is_subsumed(kb: KnowledgeBase, c: ConceptExpr, d: ConceptExpr, program: NormalizedProgram | None = None) -> bool:
    """Decide ``kb ⊨ c ⊑ d`` for a Horn left-hand side ``c`` and atomic ``d``."""
    if isinstance(d, Top) or isinstance(d, Atomic) and d.name == THING:
        return True
    if not isinstance(d, Atomic):
        raise ValueError(f"subsumer must be atomic, got {d}")
    program = program or normalize_kb(kb)
    background = list(kb.assertions())
    for i, disjunct in enumerate(dnf(c)):
        probe = f"_:probe{i}"
        extra = assertion_facts([ConceptAssertion(probe, disjunct)], prefix=f"_:probe{i}_")
        closure = materialize(program, background, extra_facts=extra)
        if probe not in closure.members(d.name):
            return False
    return True


# ------------------------------------------------------------ explanation


@dataclass(frozen=True)
class Derivation:
    fact: tuple
    label: str  # rule label, or "asserted"
    rule: str = ""
    children: tuple = field(default=())

    def leaves(self) -> list[tuple]:
        if not self.children:
            return [self.fact]
        return [f for c in self.children for f in c.leaves()]

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        line = f"{pad}{format_fact(self.fact)}  [{self.label}{': ' + self.rule if self.rule else ''}]"
        return "\n".join([line] + [c.render(indent + 1) for c in self.children])


def format_fact(fact: tuple) -> str:
    kind = fact[0]
    if kind == CLASS:
        return f"{fact[2]} : {fact[1]}"
    if kind == ROLE:
        return f"({fact[2]}, {fact[3]}) : {fact[1]}"
    if kind == DATA:
        return f"{fact[1]}({fact[2]}, {fact[3]!r})"
    return f"{fact[2]} violates {fact[1]}"


def explain(closure: ClosureABox, fact: tuple) -> Derivation:
    """Derivation tree whose leaves are input assertions."""
    if fact not in closure:
        raise NotDerived(f"{format_fact(fact)} is not in the closure")
    why = closure.derivations.get(fact)
    if why is None:
        return Derivation(fact, "asserted")
    rule, body = why
    src = closure.program.sources.get(rule.label)
    return Derivation(
        fact,
        rule.label,
        str(src) if src is not None else str(rule),
        tuple(explain(closure, b) for b in body),
    )
