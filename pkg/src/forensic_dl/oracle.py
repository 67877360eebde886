"""Naive full-fixpoint evaluation, kept as an independent reference.

Every round re-applies every rule to the complete fact set by scanning
all facts for each body atom.  Slow, but with no indexes, deltas or join
planning there is little that can go wrong.
"""

from __future__ import annotations

from typing import Iterable

from .model import ASSERTION_TYPES, Var
from .normalize import NormalizedProgram
from .reasoner import assertion_facts, domain_facts, fact_individuals


def _matches(atom, fact, binding):
    if fact[0] != atom.kind or fact[1] != atom.name or len(fact) - 2 != len(atom.args):
        return None
    out = dict(binding)
    for a, v in zip(atom.args, fact[2:]):
        if isinstance(a, Var):
            if a in out and out[a] != v:
                return None
            out[a] = v
        elif a != v:
            return None
    return out


def _substitutions(body, facts, binding):
    if not body:
        yield binding
        return
    for fact in facts:
        b = _matches(body[0], fact, binding)
        if b is not None:
            yield from _substitutions(body[1:], facts, b)


def naive_closure(program: NormalizedProgram, assertions: Iterable = ()) -> set[tuple]:
    facts = set(assertion_facts(assertions))
    facts |= set(domain_facts(program, facts))
    while True:
        snapshot = list(facts)
        derived = set()
        for rule in program.rules:
            for b in _substitutions(rule.body, snapshot, {}):
                head = (rule.head.kind, rule.head.name) + tuple(
                    b[a] if isinstance(a, Var) else a for a in rule.head.args
                )
                derived.add(head)
        if derived <= facts:
            return facts
        facts |= derived


# -- un-split concept oracle ---------------------------------------------


def _holds(facts: set, individual: str, expr) -> bool:
    """Structural membership test straight off a fact set."""
    from .model import And, Atomic, Exists, Inverse, Nominal, Or, RoleName, Top

    if isinstance(expr, Top):
        return True
    if isinstance(expr, Atomic):
        return ("class", expr.name, individual) in facts
    if isinstance(expr, And):
        return all(_holds(facts, individual, m) for m in expr.members)
    if isinstance(expr, Or):
        return any(_holds(facts, individual, m) for m in expr.members)
    if isinstance(expr, Nominal):
        return individual == expr.individual
    if isinstance(expr, Exists):
        role = expr.role
        if isinstance(role, RoleName):
            succ = [f[3] for f in facts if f[0] == "role" and f[1] == role.name and f[2] == individual]
        elif isinstance(role, Inverse) and isinstance(role.inner, RoleName):
            succ = [f[2] for f in facts if f[0] == "role" and f[1] == role.inner.name and f[3] == individual]
        else:
            raise ValueError(f"unsupported role {role}")
        return any(_holds(facts, b, expr.filler) for b in succ)
    raise ValueError(f"unsupported concept {expr}")


def unsplit_closure(kb, assertions: Iterable = ()) -> set[tuple]:
    """Fixpoint that applies each atomic-headed GCI by testing its whole LHS per individual.

    Role inclusions, integrity axioms and rules still go through their
    compiled rules, evaluated naively; GCIs are never split.
    """
    from .model import Atomic, Gci
    from .normalize import _compile_rule, compile_axiom, normalize_kb

    gcis, rules = [], []
    for i, ax in enumerate(kb.axioms):
        if isinstance(ax, Gci) and isinstance(ax.rhs, Atomic) and not isinstance(ax.lhs, Atomic):
            gcis.append(ax)
        elif not isinstance(ax, ASSERTION_TYPES):
            rules += compile_axiom(ax, f"ax{i}")[0]
    for i, rule in enumerate(kb.rules):
        rules += _compile_rule(rule, f"rule{i}")

    facts = set(assertion_facts(assertions))
    facts |= set(domain_facts(normalize_kb(kb), facts))
    while True:
        before = len(facts)
        snapshot = list(facts)
        for rule in rules:
            for b in _substitutions(rule.body, snapshot, {}):
                facts.add((rule.head.kind, rule.head.name) + tuple(
                    b[a] if isinstance(a, Var) else a for a in rule.head.args
                ))
        inds = {x for f in facts for x in fact_individuals(f)}
        for g in gcis:
            for a in sorted(inds):
                if _holds(facts, a, g.lhs):
                    facts.add(("class", g.rhs.name, a))
        if len(facts) == before:
            return facts


# -- exhaustive hypothesis space -----------------------------------------


def enumerate_concepts(classes, roles, max_length: int) -> list:
    """Every concept over the vocabulary (Top excluded) up to ``max_length``.

    The grammar is the learner's: names, ``∃r.C`` with C a concept or Top,
    and conjunctions of two or more distinct non-conjunction members.
    Returned in canonical-string order.
    """
    from itertools import combinations

    from .model import TOP, And, Atomic, Exists, RoleName, concept_length

    exact: dict[int, list] = {}
    for n in range(1, max_length + 1):
        level = [Atomic(c) for c in classes] if n == 1 else []
        fillers = list(exact.get(n - 2, [])) + ([TOP] if n == 3 else [])
        level += [Exists(RoleName(r), f) for r in roles for f in fillers]
        singles = [e for m in range(1, n) for e in exact[m] if not isinstance(e, And)]
        singles += [e for e in level if not isinstance(e, And)]
        for k in range(2, (n + 1) // 2 + 1):
            for combo in combinations(singles, k):
                if sum(concept_length(m) for m in combo) + k - 1 == n:
                    level.append(And(combo))
        exact[n] = level
    return sorted({e for level in exact.values() for e in level}, key=str)
