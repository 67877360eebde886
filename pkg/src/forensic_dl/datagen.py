"""Deterministic synthetic surveillance scenarios.

A scenario is built as a small graph of events and endurants.  A gold
positive of class C that should be found by the reasoner gets a fact
pattern realizing one of C's classification GCI bodies (cycling through
them).  Inside a body, a gold class such as ``Crowding`` is never asserted
directly, since the experiment drops those assertions; it is realized
through one of its own bodies instead, and the individual is counted as a
gold instance of that class.  Sub-events that bodies need (``part`` and
``locatedSameAs`` fillers) are drawn from small shared pools so that they
do not inflate the per-class counts.

Positives that should be missed get an incomplete pattern: the root types
of a body with its edges pointing at untyped individuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .annotations import (
    AnnotationRecord,
    CameraCatalog,
    CameraEntry,
    dump_records,
    source_record,
)
from .errors import NoGciForClass
from .model import (
    And,
    Atomic,
    ConceptExpr,
    Exists,
    Gci,
    Inverse,
    KnowledgeBase,
    Nominal,
    Or,
    RoleInclusion,
    RoleName,
    Top,
)
from .ontology import TABLE2, builtin_ontology
from .prng import XorShift64Star
from .text import serialize_gold

LONDON_STREETS = (
    "Tottenham High Road",
    "Mare Street",
    "Clapham High Street",
    "Brixton Road",
    "Peckham High Street",
    "Ealing Broadway",
    "Croydon High Street",
    "Enfield Town",
    "Lewisham High Street",
    "Camden High Street",
    "Hackney Road",
    "Oxford Street",
)

# central London bounding box
LAT_RANGE = (51.48, 51.54)
LON_RANGE = (-0.16, -0.06)

TABLE4_MATCHED = {
    "Vandalism": 42,
    "DamageVehicle": 11,
    "DamageStructure": 9,
    "Crowding": 60,
    "Throwing": 30,
    "Riot": 5,
    "AbnormalBehavior": 70,
}

# event classes that match no classification body, used for distractors
DISTRACTOR_TYPES = ("Dancing", "Greeting", "Hugging", "Seeing", "Saying", "Blaming", "Believing", "Liking")

ENDURANT_ROLES = frozenset({"participant", "immediateRelation", "hasCameraId", "hasVideoId"})
LOCATION_ROLE = "locatedSameAs"
LOCATION_PROP = "hasLocationName"


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 1
    counts: Mapping[str, int] = field(default_factory=lambda: {c: n for c, (_, n) in TABLE2.items()})
    match_fraction: Mapping[str, float] = field(default_factory=dict)  # missing classes -> 1.0
    cameras: int = 35
    resources: int = 140
    distractors: int = 20
    location_pool: tuple = LONDON_STREETS
    false_positives: Mapping[str, int] = field(default_factory=dict)
    pool_size: int = 2

    def __post_init__(self):
        object.__setattr__(self, "counts", dict(self.counts))
        object.__setattr__(self, "match_fraction", dict(self.match_fraction))
        object.__setattr__(self, "false_positives", dict(self.false_positives))
        object.__setattr__(self, "location_pool", tuple(self.location_pool))
        if any(n < 0 for n in self.counts.values()) or any(n < 0 for n in self.false_positives.values()):
            raise ValueError("counts must be non-negative")
        if any(not 0.0 <= f <= 1.0 for f in self.match_fraction.values()):
            raise ValueError("match fractions must lie in [0, 1]")
        if min(self.cameras, self.resources, self.distractors) < 0 or self.pool_size < 1:
            raise ValueError("sizes must be non-negative and pool_size positive")
        if not self.location_pool:
            raise ValueError("location pool must not be empty")

    def matched(self, cls: str) -> int:
        return round(self.counts.get(cls, 0) * self.match_fraction.get(cls, 1.0))


def table2_config(seed: int = 1, **kw) -> ScenarioConfig:
    return ScenarioConfig(seed=seed, **kw)


def table4_config(seed: int = 1, **kw) -> ScenarioConfig:
    counts = {c: n for c, (_, n) in TABLE2.items()}
    fractions = {c: TABLE4_MATCHED[c] / counts[c] for c in counts}
    return ScenarioConfig(seed=seed, counts=counts, match_fraction=fractions, **kw)


# -- scenario graph -------------------------------------------------------


@dataclass
class _Node:
    id: str
    kind: str  # "event" or "endurant"
    types: list = field(default_factory=list)
    links: list = field(default_factory=list)
    data: list = field(default_factory=list)


class _Infeasible(Exception):
    pass


def _gold_atoms(expr: ConceptExpr, gold: set) -> set:
    if isinstance(expr, Atomic):
        return {expr.name} & gold
    if isinstance(expr, (And, Or)):
        out = set()
        for m in expr.members:
            out |= _gold_atoms(m, gold)
        return out
    if isinstance(expr, Exists):
        return _gold_atoms(expr.filler, gold)
    return set()


def classification_bodies(kb: KnowledgeBase) -> dict[str, list]:
    out: dict[str, list] = {}
    for ax in kb.axioms:
        if isinstance(ax, Gci) and isinstance(ax.rhs, Atomic) and not isinstance(ax.lhs, (Atomic, Top)):
            out.setdefault(ax.rhs.name, []).append(ax.lhs)
    return out


def _implied_inverses(kb: KnowledgeBase) -> dict[str, set]:
    """role r -> roles s such that r(x, y) entails s(y, x)."""
    out: dict[str, set] = {}
    for ax in kb.axioms:
        if isinstance(ax, RoleInclusion) and isinstance(ax.lhs, Inverse) and isinstance(ax.lhs.inner, RoleName):
            out.setdefault(ax.lhs.inner.name, set()).add(ax.rhs.name)
    return out


def _ancestors(kb: KnowledgeBase) -> dict[str, set]:
    parents: dict[str, set] = {}
    for sup, subs in kb.told_subclasses().items():
        for s in subs:
            parents.setdefault(s, set()).add(sup)
    memo: dict[str, set] = {}

    def up(c: str) -> set:
        if c not in memo:
            memo[c] = set()
            acc = set()
            for p in parents.get(c, ()):
                acc |= {p} | up(p)
            memo[c] = acc
        return memo[c]

    return {c: up(c) for c in set(parents) | set(kb.classes)}


class _Builder:
    def __init__(self, kb: KnowledgeBase, rng: XorShift64Star, gold_classes, quotas, pool_size, streets, specialize=False):
        self.kb = kb
        self.rng = rng
        self.gold_classes = set(gold_classes)
        self.quota = dict(quotas)
        self.pool_size = pool_size
        self.streets = streets
        self.specialize = specialize
        self.bodies = classification_bodies(kb)
        self.back = _implied_inverses(kb)
        self.ancestors = _ancestors(kb)
        self.children = kb.told_subclasses()
        self.nodes: dict[str, _Node] = {}
        self.gold: dict[str, list] = {c: [] for c in gold_classes}
        self.pools: dict[str, list] = {}
        self.counters: dict[str, int] = {}
        self._next = {"event": 0, "endurant": 0}

    # ids and bookkeeping
    def tick(self, key: str) -> int:
        n = self.counters.get(key, 0)
        self.counters[key] = n + 1
        return n

    def new_node(self, kind: str) -> _Node:
        self._next[kind] += 1
        prefix = "ev" if kind == "event" else "en"
        node = _Node(f"{prefix}{self._next[kind]:04d}", kind)
        self.nodes[node.id] = node
        return node

    def is_endurant_class(self, name: str) -> bool:
        return name == "Endurant" or "Endurant" in self.ancestors.get(name, ())

    def add_type(self, node: _Node, name: str) -> None:
        if self.specialize:
            name = self._leaf(name)
        if name not in node.types:
            node.types.append(name)

    def _leaf(self, name: str) -> str:
        while self.children.get(name):
            kids = self.children[name]
            name = kids[self.tick("leaf:" + name) % len(kids)]
        return name

    def add_link(self, node: _Node, role: str, target: _Node) -> None:
        if (role, target.id) not in node.links:
            node.links.append((role, target.id))

    def add_data(self, node: _Node, prop: str, value: str) -> None:
        if (prop, value) not in node.data:
            node.data.append((prop, value))

    def register(self, node: _Node, cls: str) -> None:
        if node.id in self.gold[cls]:
            return
        if self.quota[cls] <= 0:
            raise AssertionError(f"quota for {cls} exhausted")
        self.quota[cls] -= 1
        self.gold[cls].append(node.id)

    # feasibility mirrors realize(); it is conservative about pools
    def feasible(self, expr: ConceptExpr) -> bool:
        if isinstance(expr, Atomic):
            if expr.name not in self.gold_classes:
                return True
            return self.quota[expr.name] > 0 and any(self.feasible(b) for b in self.bodies.get(expr.name, ()))
        if isinstance(expr, And):
            return all(self.feasible(m) for m in expr.members)
        if isinstance(expr, Or):
            return any(self.feasible(m) for m in expr.members)
        if isinstance(expr, Exists):
            if _gold_atoms(expr.filler, self.gold_classes) and self.pools.get(str(expr.filler)):
                return True
            return self.feasible(expr.filler)
        return True

    # realization
    def realize(self, node: _Node, expr: ConceptExpr, via: tuple | None = None) -> None:
        if isinstance(expr, Top):
            return
        if isinstance(expr, Atomic):
            if expr.name in self.gold_classes:
                self.realize_gold(node, expr.name, via)
            else:
                self.add_type(node, expr.name)
        elif isinstance(expr, And):
            for m in expr.members:
                self.realize(node, m, via)
        elif isinstance(expr, Or):
            options = [m for m in expr.members if self.feasible(m)] or list(expr.members)
            self.realize(node, options[self.tick(str(expr)) % len(options)], via)
        elif isinstance(expr, Exists):
            self.realize_exists(node, expr, via)
        else:
            raise ValueError(f"cannot realize {expr}")

    def realize_exists(self, node: _Node, expr: Exists, via) -> None:
        role, filler = expr.role, expr.filler
        if isinstance(role, Inverse):
            y = self.filler(filler, role.inner.name, node, inverse=True)
            self.add_link(y, role.inner.name, node)
            return
        name = role.name
        if via is not None and name in self.back.get(via[1], ()):
            # r(x, y) already entails name(y, x): satisfy the filler at x
            self.realize(via[0], filler)
            return
        if isinstance(filler, Nominal):
            target = self.nodes.get(filler.individual) or _Node(filler.individual, "endurant")
            self.add_link(node, name, target)
            return
        y = self.filler(filler, name, node)
        if name == LOCATION_ROLE:
            street = self.rng.choice(self.streets)
            self.add_data(node, LOCATION_PROP, street)
            self.add_data(y, LOCATION_PROP, street)
        else:
            self.add_link(node, name, y)

    def filler(self, expr: ConceptExpr, role: str, parent: _Node, inverse: bool = False) -> _Node:
        if _gold_atoms(expr, self.gold_classes):
            return self.pooled(expr, role)
        y = self.new_node(self.kind_for(expr, role))
        self.realize(y, expr, None if inverse else (parent, role))
        return y

    def pooled(self, expr: ConceptExpr, role: str) -> _Node:
        key = str(expr)
        entries = self.pools.setdefault(key, [])
        if len(entries) < self.pool_size and self.feasible(expr):
            y = self.new_node(self.kind_for(expr, role))
            self.realize(y, expr)
            entries.append(y)
        if not entries:
            raise _Infeasible(key)
        return entries[self.tick("pool:" + key) % len(entries)]

    def kind_for(self, expr: ConceptExpr, role: str) -> str:
        names = [a.name for a in _root_atoms(expr)]
        if any(self.is_endurant_class(n) for n in names):
            return "endurant"
        if names:
            return "event"
        return "endurant" if role in ENDURANT_ROLES else "event"

    def realize_gold(self, node: _Node, cls: str, via=None) -> None:
        if node.id in self.gold[cls]:
            return
        bodies = self.bodies.get(cls)
        if not bodies:
            raise NoGciForClass(cls)
        start = self.tick("body:" + cls)
        for k in range(len(bodies)):
            body = bodies[(start + k) % len(bodies)]
            if self.feasible(body):
                self.register(node, cls)
                self.realize(node, body, via)
                return
        raise _Infeasible(cls)

    def realize_incomplete(self, node: _Node, body: ConceptExpr) -> None:
        for a in _root_atoms(body):
            if a.name not in self.gold_classes:
                self.add_type(node, a.name)
        for e in _root_exists(body):
            role = e.role.inner.name if isinstance(e.role, Inverse) else e.role.name
            if role == LOCATION_ROLE:
                continue
            y = self.new_node("endurant" if role in ENDURANT_ROLES else "event")
            if isinstance(e.role, Inverse):
                self.add_link(y, role, node)
            else:
                self.add_link(node, role, y)

    # output
    def prune_types(self) -> None:
        for node in self.nodes.values():
            keep = [t for t in node.types
                    if not any(t != o and t in self.ancestors.get(o, ()) for o in node.types)]
            node.types = keep


def _root_atoms(expr: ConceptExpr) -> list:
    if isinstance(expr, Atomic):
        return [expr]
    if isinstance(expr, And):
        return [m for m in expr.members if isinstance(m, Atomic)]
    return []


def _root_exists(expr: ConceptExpr) -> list:
    if isinstance(expr, Exists):
        return [expr]
    if isinstance(expr, And):
        return [m for m in expr.members if isinstance(m, Exists)]
    return []


def _dependency_order(classes: list, bodies: dict) -> list:
    """Classes whose bodies mention other gold classes come first."""
    gold = set(classes)
    deps = {c: set().union(*(_gold_atoms(b, gold) for b in bodies.get(c, ()))) - {c} if bodies.get(c) else set()
            for c in classes}
    out, seen = [], set()

    def visit(c):
        if c in seen:
            return
        seen.add(c)
        for other in classes:
            if c in deps[other]:
                visit(other)
        out.append(c)

    for c in classes:
        visit(c)
    return out


def _event_order(builder: _Builder) -> list:
    seen, out = set(), []

    def visit(nid):
        if nid in seen:
            return
        seen.add(nid)
        for _, target in builder.nodes[nid].links:
            if target in builder.nodes and builder.nodes[target].kind == "event":
                visit(target)
        out.append(nid)

    for nid, node in builder.nodes.items():
        if node.kind == "event":
            visit(nid)
    return out


def _timestamp(rng: XorShift64Star) -> tuple[str, str]:
    day = 6 + rng.below(5)
    start = rng.below(24 * 60 - 90)
    end = start + 30 + rng.below(60)
    fmt = "2011-08-{:02d}T{:02d}:{:02d}:00"
    return fmt.format(day, start // 60, start % 60), fmt.format(day, end // 60, end % 60)


def make_catalog(rng: XorShift64Star, n: int, streets: tuple) -> CameraCatalog:
    entries = []
    for i in range(1, n + 1):
        lat = rng.uniform(*LAT_RANGE)
        lon = rng.uniform(*LON_RANGE)
        start, end = _timestamp(rng)
        entries.append(CameraEntry(f"C{i:03d}", f"{lat:.6f}", f"{lon:.6f}", rng.choice(streets), start, end))
    return CameraCatalog(tuple(entries))


def _emit(builder: _Builder, rng: XorShift64Star, config_resources: int, cameras: int, streets) -> tuple[list, CameraCatalog]:
    builder.prune_types()
    events = _event_order(builder)
    if not events:
        return [], CameraCatalog(())
    catalog = make_catalog(rng, cameras, streets)
    n_res = max(1, config_resources)
    used: dict[int, list] = {}
    event_resource = {}
    for nid in events:
        j = rng.below(n_res)
        event_resource[nid] = j
        used.setdefault(j, []).append(nid)

    records: list[AnnotationRecord] = []
    extra: list[AnnotationRecord] = []
    for j in sorted(used):
        records.append(AnnotationRecord("resource", f"res{j + 1:03d}", "Resource", (("hasVideoId", f"video{j + 1:03d}"),)))

    def node_record(node: _Node, links) -> AnnotationRecord:
        typ = node.types[0] if node.types else None
        for t in node.types[1:]:
            extra.append(AnnotationRecord("role-link", node.id, t))
        return AnnotationRecord(node.kind, node.id, typ, tuple(links), tuple(node.data))

    for node in builder.nodes.values():
        if node.kind == "endurant":
            # links out of endurants point at events, so they come later
            records.append(node_record(node, ()))
            if node.links:
                extra.append(AnnotationRecord("role-link", node.id, None, tuple(node.links)))
    for nid in events:
        node = builder.nodes[nid]
        links = list(node.links) + [("isFrom", f"res{event_resource[nid] + 1:03d}")]
        records.append(node_record(node, links))
    for i, entry in enumerate(catalog.entries):
        mine = [f"res{j + 1:03d}" for j in sorted(used) if cameras and j % cameras == i]
        records.append(source_record(entry, f"src{i + 1:02d}", mine))
    return records + extra, catalog


def generate(config: ScenarioConfig, kb: KnowledgeBase | None = None):
    """Returns ``(records, gold, catalog)``; identical configs give identical output."""
    kb = kb if kb is not None else builtin_ontology(include_invented_gcis=True)
    rng = XorShift64Star(config.seed)
    classes = [c for c, n in config.counts.items() if n > 0]
    bodies = classification_bodies(kb)
    for c in classes:
        if config.matched(c) > 0 and not bodies.get(c):
            raise NoGciForClass(c)
    quotas = {c: config.matched(c) for c in classes}
    b = _Builder(kb, rng, classes, quotas, config.pool_size, config.location_pool)

    for c in _dependency_order(classes, bodies):
        while len(b.gold[c]) < config.matched(c):
            root = b.new_node("event")
            try:
                b.realize_gold(root, c)
            except _Infeasible as exc:
                raise NoGciForClass(f"{c} (no realizable body: {exc})") from None

    missed: dict[str, list] = {}
    for c in classes:
        cb = bodies.get(c) or [Atomic("Perdurant")]
        for i in range(config.counts[c] - config.matched(c)):
            root = b.new_node("event")
            b.realize_incomplete(root, cb[i % len(cb)])
            missed.setdefault(c, []).append(root.id)

    for c, k in config.false_positives.items():
        cb = bodies.get(c)
        if k and not cb:
            raise NoGciForClass(c)
        for i in range(k):
            root = b.new_node("event")
            b.realize(root, cb[i % len(cb)])

    for i in range(config.distractors):
        ev = b.new_node("event")
        b.add_type(ev, DISTRACTOR_TYPES[i % len(DISTRACTOR_TYPES)])
        person = b.new_node("endurant")
        b.add_type(person, "NaturalPerson")
        b.add_link(ev, "participant", person)

    records, catalog = _emit(b, rng, config.resources, config.cameras, config.location_pool)
    gold = {c: set(b.gold[c]) | set(missed.get(c, ())) for c in classes}
    return records, gold, catalog


def write_scenario(out_dir, records: Iterable[AnnotationRecord], gold: dict, catalog: CameraCatalog) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "annotations": out / "annotations.jsonl",
        "gold": out / "labels.gold",
        "cameras": out / "cameras.tsv",
    }
    paths["annotations"].write_text(dump_records(records), encoding="utf-8")
    paths["gold"].write_text(serialize_gold(gold), encoding="utf-8")
    paths["cameras"].write_text(catalog.to_tsv(), encoding="utf-8")
    return paths


# -- planted learning problems ------------------------------------------


@dataclass(frozen=True)
class LearningScenarioConfig:
    target: str = "DamageVehicle"
    body: ConceptExpr = Exists(RoleName("immediateRelation"), Atomic("Vehicle"))
    positives: int = 16
    distractors: int = 50
    label_noise: float = 0.0
    seed: int = 1
    root_class: str = "Event"  # typed on roots whose body has no atomic conjunct
    specialize: bool = True  # realize named classes through told subclasses
    resources: int = 140
    cameras: int = 35
    max_attempts: int = 200

    def __post_init__(self):
        if self.positives < 0 or self.distractors < 0:
            raise ValueError("counts must be non-negative")
        if not 0.0 <= self.label_noise <= 1.0:
            raise ValueError("label_noise must lie in [0, 1]")


def _mutations(expr: ConceptExpr, kb: KnowledgeBase, ancestors: dict, rng: XorShift64Star) -> ConceptExpr:
    """One random structural change: wrong class, wrong filler, or a missing edge."""
    from .model import conj

    if isinstance(expr, Atomic):
        top = "Endurant" if "Endurant" in ancestors.get(expr.name, ()) else "Perdurant"
        pool = sorted(
            c for c in kb.classes
            if c != expr.name and top in ancestors.get(c, ())
            and expr.name not in ancestors.get(c, ()) and c not in ancestors.get(expr.name, ())
        )
        return Atomic(rng.choice(pool)) if pool else Top()
    if isinstance(expr, Exists):
        if rng.chance(0.5):
            return Top()
        return Exists(expr.role, _mutations(expr.filler, kb, ancestors, rng))
    if isinstance(expr, And):
        members = list(expr.members)
        i = rng.below(len(members))
        members[i] = _mutations(members[i], kb, ancestors, rng)
        kept = [m for m in members if not isinstance(m, Top)]
        return conj(*kept) if kept else Top()
    if isinstance(expr, Or):
        return Or(tuple(_mutations(m, kb, ancestors, rng) for m in expr.members)) if len(expr.members) > 1 else Top()
    return Top()


def plant_learning_scenario(config: LearningScenarioConfig, kb: KnowledgeBase | None = None):
    """Returns ``(records, gold, catalog)``; gold maps the target to its positives.

    Positives realize ``config.body``; distractors realize a mutated body
    and are kept only if the reasoner confirms they do not satisfy it.
    With label noise, that fraction of the gold positives is realized as a
    distractor instead.
    """
    from .annotations import ingest_annotations
    from .normalize import normalize_kb
    from .reasoner import instance_of, materialize

    kb = kb if kb is not None else builtin_ontology(include_invented_gcis=True)
    bg = kb.without_axioms(lambda ax: isinstance(ax, Gci) and ax.rhs == Atomic(config.target))
    program = normalize_kb(bg)
    rng = XorShift64Star(config.seed)
    b = _Builder(bg, rng, [], {}, 1, LONDON_STREETS, specialize=config.specialize)
    b.bodies = {}

    def plant(expr: ConceptExpr) -> _Node:
        root = b.new_node("event")
        if not _root_atoms(expr) and config.root_class:
            root.types.append(config.root_class)  # as given, never specialized
        b.realize(root, expr)
        return root

    def local_records(root: _Node) -> list:
        # the root plus everything reachable from it, in a declarable order
        seen, order = set(), []

        def visit(nid):
            if nid in seen or nid not in b.nodes:
                return
            seen.add(nid)
            for _, t in b.nodes[nid].links:
                visit(t)
            order.append(nid)

        visit(root.id)
        out = []
        for nid in order:
            n = b.nodes[nid]
            out.append(AnnotationRecord(n.kind, n.id, n.types[0] if n.types else None, tuple(n.links)))
            out += [AnnotationRecord("role-link", n.id, t) for t in n.types[1:]]
        return out

    def satisfies(root: _Node) -> bool:
        closure = materialize(program, ingest_annotations(local_records(root)))
        return instance_of(closure, root.id, config.body)

    def distractor() -> _Node:
        for _ in range(config.max_attempts):
            before = dict(b.nodes)
            root = plant(_mutations(config.body, bg, b.ancestors, rng))
            if not satisfies(root):
                return root
            b.nodes = before
        raise RuntimeError("could not sample a distractor that violates the body")

    noisy = round(config.positives * config.label_noise)
    noisy_idx = set()
    if noisy:
        order = list(range(config.positives))
        rng.shuffle(order)
        noisy_idx = set(order[:noisy])

    positives = []
    for i in range(config.positives):
        positives.append(distractor() if i in noisy_idx else plant(config.body))
    for _ in range(config.distractors):
        distractor()

    records, catalog = _emit(b, rng, config.resources, config.cameras, LONDON_STREETS)
    return records, {config.target: {p.id for p in positives}}, catalog


def learning_config(seed: int = 1, **kw) -> LearningScenarioConfig:
    return LearningScenarioConfig(seed=seed, **kw)
