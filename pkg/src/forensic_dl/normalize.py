"""Compile the Horn fragment of a knowledge base into datalog rules.

Predicates come in four kinds: class membership (unary), role edges and
data values (binary), and violation markers (unary, one predicate per
integrity axiom).  A ground fact is the tuple ``(kind, name, *args)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .diagnostics import Diagnostic
from .errors import UnsupportedConstruct
from .model import (
    NOTHING,
    THING,
    And,
    Atomic,
    Bottom,
    Chain,
    ClassAtom,
    ConceptAssertion,
    ConceptExpr,
    DataAssertion,
    DataAtom,
    Disjoint,
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
    Top,
    Var,
    axiom_references,
    canonical_role,
    rule_references,
)

CLASS = "class"
ROLE = "role"
DATA = "data"
VIOLATION = "violation"


@dataclass(frozen=True)
class PAtom:
    kind: str
    name: str
    args: tuple  # Var or constant string

    def __str__(self) -> str:
        return f"{self.kind}:{self.name}(" + ", ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class ProgramRule:
    head: PAtom
    body: tuple
    label: str  # "ax<i>" or "rule<i>"
    origin: object = field(compare=True, repr=False)

    def __str__(self) -> str:
        return f"{self.head} <- " + ", ".join(map(str, self.body))

    def is_range_restricted(self) -> bool:
        body_vars = {a for atom in self.body for a in atom.args if isinstance(a, Var)}
        return all(a in body_vars for a in self.head.args if isinstance(a, Var))


@dataclass(frozen=True)
class NormalizedProgram:
    rules: tuple = ()
    # Gci axioms whose existential right-hand side is kept for reporting only
    check_only: tuple = ()
    classes: frozenset = frozenset()
    # axiom label -> source axiom, used for violation messages
    sources: dict = field(default_factory=dict, compare=False)

    @property
    def uses_thing(self) -> bool:
        return any(
            a.kind == CLASS and a.name == THING for r in self.rules for a in r.body
        )

    def head_constants(self) -> set:
        return {
            a for r in self.rules for a in r.head.args if not isinstance(a, Var)
        }


# ------------------------------------------------------------- helpers


class _Fresh:
    def __init__(self):
        self.n = 0

    def __call__(self) -> Var:
        self.n += 1
        return Var(f"v{self.n}")


def _role_atoms(role, subj, obj, axiom) -> list[PAtom]:
    role = canonical_role(role)
    if isinstance(role, RoleName):
        return [PAtom(ROLE, role.name, (subj, obj))]
    if isinstance(role, Inverse) and isinstance(role.inner, RoleName):
        return [PAtom(ROLE, role.inner.name, (obj, subj))]
    raise UnsupportedConstruct("role chain inside a concept", axiom)


def concept_bodies(expr: ConceptExpr, var, fresh, axiom=None) -> list[list[PAtom]]:
    """Disjunctive normal form of a positive existential concept as rule bodies."""
    if isinstance(expr, Atomic):
        if expr.name == THING:
            return [[]]
        if expr.name == NOTHING:
            return []
        return [[PAtom(CLASS, expr.name, (var,))]]
    if isinstance(expr, Top):
        return [[]]
    if isinstance(expr, Bottom):
        return []
    if isinstance(expr, And):
        parts = [concept_bodies(m, var, fresh, axiom) for m in expr.members]
        return [sum(combo, []) for combo in itertools.product(*parts)]
    if isinstance(expr, Or):
        return [b for m in expr.members for b in concept_bodies(m, var, fresh, axiom)]
    if isinstance(expr, Exists):
        if isinstance(expr.filler, Nominal):
            return [_role_atoms(expr.role, var, expr.filler.individual, axiom)]
        succ = fresh()
        edge = _role_atoms(expr.role, var, succ, axiom)
        return [edge + b for b in concept_bodies(expr.filler, succ, fresh, axiom)]
    if isinstance(expr, Nominal):
        raise UnsupportedConstruct("nominal outside an existential filler", axiom)
    if isinstance(expr, Not):
        raise UnsupportedConstruct("negation on the left-hand side", axiom)
    if isinstance(expr, Forall):
        raise UnsupportedConstruct("universal restriction on the left-hand side", axiom)
    raise TypeError(expr)


def _ground_root(body: list[PAtom], var) -> list[PAtom]:
    if any(var in a.args for a in body):
        return body
    return [PAtom(CLASS, THING, (var,))] + body


def _rename(head: PAtom, body) -> tuple[PAtom, tuple]:
    mapping: dict = {}

    def sub(atom: PAtom) -> PAtom:
        args = []
        for a in atom.args:
            if isinstance(a, Var):
                a = mapping.setdefault(a, Var(f"x{len(mapping)}"))
            args.append(a)
        return PAtom(atom.kind, atom.name, tuple(args))

    head = sub(head)
    return head, tuple(sub(a) for a in body)


def _rule(head, body, label, origin) -> ProgramRule:
    h, b = _rename(head, body)
    return ProgramRule(h, b, label, origin)


# ----------------------------------------------------------- compilers


def _compile_integrity(lhs, rhs, label, axiom) -> list[ProgramRule]:
    fresh = _Fresh()
    x = Var("root")
    out = []
    for b1 in concept_bodies(lhs, x, fresh, axiom):
        for b2 in concept_bodies(rhs, x, fresh, axiom):
            body = _ground_root(b1 + b2, x)
            out.append(_rule(PAtom(VIOLATION, label, (x,)), body, label, axiom))
    return out


def _compile_gci(ax: Gci, label: str) -> tuple[list[ProgramRule], bool]:
    """Return the rules for ``ax`` and whether it carries a check-only part."""
    fresh = _Fresh()
    x = Var("root")
    bodies = [_ground_root(b, x) for b in concept_bodies(ax.lhs, x, fresh, ax)]
    rules: list[ProgramRule] = []
    check_only = False
    members = ax.rhs.members if isinstance(ax.rhs, And) else (ax.rhs,)
    for m in members:
        if isinstance(m, Atomic) and m.name == NOTHING or isinstance(m, Bottom):
            rules += [_rule(PAtom(VIOLATION, label, (x,)), b, label, ax) for b in bodies]
        elif isinstance(m, Atomic):
            if m.name != THING:
                rules += [_rule(PAtom(CLASS, m.name, (x,)), b, label, ax) for b in bodies]
        elif isinstance(m, Top):
            pass
        elif isinstance(m, Exists):
            _check_rhs_filler(m, ax)
            check_only = True
        elif isinstance(m, Not):
            rules += _compile_integrity(ax.lhs, m.inner, label, ax)
        elif isinstance(m, Or):
            raise UnsupportedConstruct("disjunction on the right-hand side", ax)
        elif isinstance(m, Forall):
            raise UnsupportedConstruct("universal restriction on the right-hand side", ax)
        else:
            raise UnsupportedConstruct(f"{type(m).__name__} on the right-hand side", ax)
    return rules, check_only


def _check_rhs_filler(expr: Exists, ax) -> None:
    # only validated, never executed
    concept_bodies(expr, Var("root"), _Fresh(), ax)


def _compile_role_inclusion(ax: RoleInclusion, label: str) -> list[ProgramRule]:
    if not isinstance(ax.rhs, RoleName):
        raise UnsupportedConstruct("complex role on the right-hand side", ax)
    lhs = canonical_role(ax.lhs)
    parts = lhs.parts if isinstance(lhs, Chain) else (lhs,)
    xs = [Var(f"c{i}") for i in range(len(parts) + 1)]
    body = []
    for i, p in enumerate(parts):
        if isinstance(p, Chain):
            raise UnsupportedConstruct("nested chain", ax)
        body += _role_atoms(p, xs[i], xs[i + 1], ax)
    head = PAtom(ROLE, ax.rhs.name, (xs[0], xs[-1]))
    return [_rule(head, body, label, ax)]


def _term(t):
    if isinstance(t, Var):
        return t
    if isinstance(t, Ind):
        return t.name
    if isinstance(t, Lit):
        return t.value
    raise TypeError(t)


def _compile_rule(rule: Rule, label: str) -> list[ProgramRule]:
    if not rule.is_safe():
        raise UnsupportedConstruct("unsafe rule (head variable missing from body)", rule)
    subst: dict = {}

    def resolve(t):
        t = _term(t)
        while isinstance(t, Var) and t in subst:
            t = subst[t]
        return t

    for atom in rule.body:
        if isinstance(atom, SameAsAtom):
            left, right = resolve(atom.left), resolve(atom.right)
            if left == right:
                continue
            if isinstance(right, Var):
                subst[right] = left
            elif isinstance(left, Var):
                subst[left] = right
            else:
                return []  # two distinct constants: the rule can never fire

    def convert(atom) -> PAtom:
        if isinstance(atom, ClassAtom):
            return PAtom(CLASS, atom.concept, (resolve(atom.term),))
        if isinstance(atom, ObjectAtom):
            return PAtom(ROLE, atom.role, (resolve(atom.subject), resolve(atom.object)))
        if isinstance(atom, DataAtom):
            return PAtom(DATA, atom.property, (resolve(atom.subject), resolve(atom.value)))
        raise UnsupportedConstruct(type(atom).__name__, rule)

    if not isinstance(rule.head, (ClassAtom, ObjectAtom)):
        raise UnsupportedConstruct("rule head must be a class or object atom", rule)
    body = [convert(a) for a in rule.body if not isinstance(a, SameAsAtom)]
    return [_rule(convert(rule.head), body, label, rule)]


def compile_axiom(ax, label: str) -> tuple[list[ProgramRule], bool]:
    if isinstance(ax, Gci):
        return _compile_gci(ax, label)
    if isinstance(ax, RoleInclusion):
        return _compile_role_inclusion(ax, label), False
    if isinstance(ax, Disjoint):
        return _compile_integrity(ax.a, ax.b, label, ax), False
    if isinstance(ax, (ConceptAssertion, RoleAssertion, DataAssertion)):
        return [], False
    raise TypeError(ax)


def normalize_kb(kb: KnowledgeBase) -> NormalizedProgram:
    """Compile every TBox/RBox axiom and rule of ``kb`` into datalog rules.

    Raises UnsupportedConstruct naming the first offending axiom.
    """
    rules: list[ProgramRule] = []
    check_only = []
    sources = {}
    for i, ax in enumerate(kb.axioms):
        label = f"ax{i}"
        compiled, has_check = compile_axiom(ax, label)
        if compiled or has_check:
            sources[label] = ax
        rules += compiled
        if has_check:
            check_only.append((label, ax))
    for i, rule in enumerate(kb.rules):
        label = f"rule{i}"
        sources[label] = rule
        rules += _compile_rule(rule, label)
    return NormalizedProgram(
        rules=tuple(dict.fromkeys(rules)),
        check_only=tuple(check_only),
        classes=kb.classes,
        sources=sources,
    )


# ------------------------------------------------------------ validate

_KIND_WORDS = {
    "class": "class",
    "role": "role",
    "data_property": "data property",
    "individual": "individual",
}


def _declared(kb: KnowledgeBase, kind: str, name: str) -> bool:
    if kind == "class":
        return name in kb.classes or name in (THING, NOTHING)
    if kind == "role":
        return name in kb.roles
    if kind == "data_property":
        return name in kb.data_properties
    return name in kb.individuals


def undeclared_references(kb: KnowledgeBase):
    """Yield ``(where, index, kind, name)`` for each undeclared reference."""
    for i, ax in enumerate(kb.axioms):
        for kind, name in dict.fromkeys(axiom_references(ax)):
            if not _declared(kb, kind, name):
                yield "axiom", i, kind, name
    for i, rule in enumerate(kb.rules):
        for kind, name in dict.fromkeys(rule_references(rule)):
            if not _declared(kb, kind, name):
                yield "rule", i, kind, name


def validate_kb(kb: KnowledgeBase, origin: str = "<kb>") -> list[Diagnostic]:
    """Undeclared-name, unsafe-rule and unsupported-construct diagnostics."""
    diags: list[Diagnostic] = []

    def where(kind: str, i: int) -> tuple:
        spans = kb.spans if kind == "axiom" else kb.rule_spans
        return spans.get(i, (None, None))

    for kind, i, ref_kind, name in undeclared_references(kb):
        line, col = where(kind, i)
        diags.append(
            Diagnostic(
                f"undeclared {_KIND_WORDS[ref_kind]} '{name}'",
                line=line, column=col, code="undeclared-name", origin=origin,
            )
        )
    for i, ax in enumerate(kb.axioms):
        try:
            compile_axiom(ax, f"ax{i}")
        except UnsupportedConstruct as exc:
            line, col = where("axiom", i)
            diags.append(
                Diagnostic(str(exc), line=line, column=col, code="unsupported-construct", origin=origin)
            )
    for i, rule in enumerate(kb.rules):
        line, col = where("rule", i)
        if not rule.is_safe():
            diags.append(
                Diagnostic(f"unsafe rule: {rule}", line=line, column=col, code="unsafe-rule", origin=origin)
            )
            continue
        try:
            _compile_rule(rule, f"rule{i}")
        except UnsupportedConstruct as exc:
            diags.append(
                Diagnostic(str(exc), line=line, column=col, code="unsupported-construct", origin=origin)
            )
    return diags
