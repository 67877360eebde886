"""The forensic event ontology shipped with the toolkit.

Only the part of the ontology that is spelled out in prose is encoded:
the Perdurant/Endurant taxonomy, the Source/Resource annotation model,
the classification GCIs for the crime events, and the same-street rule.
Placeholder GCIs for classes whose definitions were never published are
tagged ``INVENTED``; GCIs produced by concept learning are tagged
``LEARNED``.
"""

from __future__ import annotations

from importlib import resources

from .model import KnowledgeBase
from .text import SourceDocument, parse_kb, serialize_kb

CRIME_CLASSES = (
    "Vandalism",
    "DamageVehicle",
    "DamageStructure",
    "Crowding",
    "Throwing",
    "Riot",
    "AbnormalBehavior",
)

# (GCI count, instance count) per crime class
TABLE2 = {
    "Vandalism": (13, 57),
    "Riot": (4, 21),
    "AbnormalBehavior": (2, 80),
    "Crowding": (1, 64),
    "DamageStructure": (3, 9),
    "DamageVehicle": (3, 16),
    "Throwing": (1, 30),
}

_CORE = """
# foundational split
Class(SpatioTemporalParticular)
Class(Perdurant)
Class(Endurant)
Class(Event)
Class(Stative)
Class(State)
Class(Process)
Class(Achievement)
Class(Accomplishment)
Class(MetaLevelEvent)
Class(Accusing)
Class(Believing)
Class(Liking)
Class(PsychologicalAggression)
Class(Blaming)
Class(Bullying)
Class(Decrying)
Class(Harassing)
Class(Action)
Class(Gesture)
Class(PhysicalAggression)
Class(ActivePhysicalAggression)
Class(Dancing)
Class(Greeting)
Class(Hugging)
Class(CriminalEvent)
Class(EventCategory)
Class(CrimeCategory)
Class(Saying)
Class(Seeing)
Class(CrimeAgainstProperty)
Class(Vandalism)
Class(CyberCrime)
Class(DamageVehicle)
Class(DamageStructure)
Class(Crowding)
Class(Throwing)
Class(Riot)
Class(AbnormalBehavior)
Class(Fighting)
Class(Kicking)
Class(Beating)
Class(BreakingDoor)
Class(BreakingWindows)
Class(Explosion)
Class(NonPhysicalEndurant)
Class(PhysicalEndurant)
Class(ArbitrarySum)
Class(Source)
Class(Resource)
Class(Vehicle)
Class(Structure)
Class(GroupOfPeople)
Class(Group)
Class(Arm)
Class(NaturalPerson)
Role(participant)
Role(participantIn)
Role(participateIn)
Role(has)
Role(isFrom)
Role(hasPart)
Role(part)
Role(locatedSameAs)
Role(immediateRelation)
Role(hasCameraId)
Role(hasVideoId)
Role(isAbout)
DataProp(hasLocationName)
DataProp(hasLatitude)
DataProp(hasLongitude)
DataProp(hasStartTime)
DataProp(hasEndTime)

Traits(State, -, -, cumulative)
Traits(Process, -, +, unspecified)
Traits(Achievement, +, -, not_cumulative)
Traits(Accomplishment, +, +, not_cumulative)

# perdurant axioms
Sub(Perdurant, SpatioTemporalParticular)
Sub(Perdurant, (some participant Endurant))
Sub(Fighting, (some participant GroupOfPeople))
Sub(Perdurant, (not Endurant))
Sub(Kicking, (not Vehicle))
Sub(Event, Perdurant)
Sub(Stative, Perdurant)
Sub(State, Stative)
Sub(MetaLevelEvent, State)
Sub(Accusing, MetaLevelEvent)
Sub(Believing, MetaLevelEvent)
Sub(Liking, MetaLevelEvent)
Sub(PsychologicalAggression, State)
Sub(Blaming, PsychologicalAggression)
Sub(Bullying, PsychologicalAggression)
Sub(Decrying, PsychologicalAggression)
Sub(Harassing, PsychologicalAggression)
Sub(Process, Stative)
Sub(Action, Process)
Sub(Gesture, Process)
Sub(PhysicalAggression, Process)
Sub(ActivePhysicalAggression, PhysicalAggression)
Sub(Dancing, Action)
Sub(Greeting, Action)
Sub(Hugging, Action)
Sub(Accomplishment, Event)
Sub(CriminalEvent, Accomplishment)
Sub(EventCategory, Accomplishment)
Sub(CrimeCategory, Stative)
Sub(Achievement, Event)
Sub(Saying, Achievement)
Sub(Seeing, Achievement)
Sub(Throwing, ActivePhysicalAggression)
Sub(CrimeAgainstProperty, CriminalEvent)
Sub(Vandalism, CrimeAgainstProperty)
Sub(CyberCrime, CriminalEvent)
Sub(DamageVehicle, CrimeAgainstProperty)
Sub(DamageStructure, CrimeAgainstProperty)
Sub(Riot, CriminalEvent)
Sub(Crowding, Process)
Sub(AbnormalBehavior, Event)
Sub(Fighting, PhysicalAggression)
Sub(Kicking, PhysicalAggression)
Sub(Beating, PhysicalAggression)
Sub(BreakingDoor, PhysicalAggression)
Sub(BreakingWindows, PhysicalAggression)
Sub(Explosion, Achievement)

# endurant axioms
Sub(Endurant, SpatioTemporalParticular)
Sub(Endurant, (some participantIn Perdurant))
InverseOf(participantIn, participant)
Sub(NonPhysicalEndurant, Endurant)
Sub(PhysicalEndurant, Endurant)
Sub(ArbitrarySum, Endurant)
Sub(Vehicle, PhysicalEndurant)
Sub(Structure, PhysicalEndurant)
Sub(Arm, PhysicalEndurant)
Sub(NaturalPerson, PhysicalEndurant)
Sub(GroupOfPeople, ArbitrarySum)
Sub(Group, ArbitrarySum)

# media annotation model
Sub(Source, (and Endurant (some has Resource) (some hasCameraId Thing)))
Sub(Resource, (and Endurant (some has Perdurant)))
InverseOf(has, isFrom)
Trans(has)
Trans(hasPart)

# classification GCIs
Sub((and Perdurant (some participant (and Vehicle (some participantIn (or BreakingDoor BreakingWindows))))), DamageVehicle)
Sub((and Perdurant (some participant (and Structure (some participantIn Kicking)))), DamageStructure)
Sub((and Perdurant (some participant (and Structure (some participantIn Beating)))), DamageStructure)
Sub((and Perdurant (some participant (and Structure (some participantIn BreakingWindows)))), DamageStructure)
Sub((and Perdurant (some part (and Crowding DamageStructure))), Vandalism)
Sub((and Perdurant (some part (and Crowding DamageVehicle))), Vandalism)
Sub((and Perdurant (some part (and Explosion Throwing))), Vandalism)
Sub((and Perdurant (some part (and Crowding (some locatedSameAs Explosion)))), Vandalism)
Sub((and Perdurant (some part (and Crowding (some locatedSameAs DamageStructure)))), Vandalism)
Sub((and Perdurant (some part (and Crowding (some locatedSameAs Throwing)))), Vandalism)
Sub((and Perdurant (some part (and DamageStructure (some locatedSameAs Throwing)))), Vandalism)

# two perdurants on the same street are located in the same place
Rule: Perdurant(?p1), Perdurant(?p2), hasLocationName(?p1, ?l1), hasLocationName(?p2, ?l2), SameAs(?l1, ?l2) -> locatedSameAs(?p1, ?p2)
"""

_INVENTED = """
Class(Projectile)
Class(Weapon)
Class(Looting)
Class(Arson)
Sub(Projectile, PhysicalEndurant)
Sub(Weapon, PhysicalEndurant)
Sub(Looting, CrimeAgainstProperty)
Sub(Arson, CrimeAgainstProperty)
Sub((and Perdurant (some participant GroupOfPeople)), Crowding)  # INVENTED
Sub((and Perdurant (some participant Projectile)), Throwing)  # INVENTED
Sub((and Perdurant (some part Fighting) (some part Looting)), Riot)  # INVENTED
Sub((and Perdurant (some part Fighting) (some part Arson)), Riot)  # INVENTED
Sub((and Perdurant (some participant (and Vehicle (some participantIn Arson)))), Riot)  # INVENTED
Sub((and Perdurant (some part Arson) (some part Looting)), Riot)  # INVENTED
Sub((and Gesture (some participant NaturalPerson)), AbnormalBehavior)  # INVENTED
Sub((and Perdurant (some participant Weapon)), AbnormalBehavior)  # INVENTED
"""

_LEARNED = """
Sub((and PhysicalAggression (some immediateRelation Structure)), DamageStructure)  # LEARNED
Sub((some immediateRelation Vehicle), DamageVehicle)  # LEARNED
Sub((some immediateRelation Vandalism), AbnormalBehavior)  # LEARNED
Sub((some immediateRelation Arm), Throwing)  # LEARNED
Sub((some immediateRelation Group), Crowding)  # LEARNED
"""

# The invented block declares names it uses, so the learned block only
# needs the core declarations in scope.
_CORE_DECLS = "\n".join(
    line for line in _CORE.splitlines() if line.startswith(("Class(", "Role(", "DataProp("))
)


def _parse(text: str, origin: str) -> KnowledgeBase:
    return parse_kb(SourceDocument(text, origin))


def builtin_ontology(include_learned_gcis: bool = False, include_invented_gcis: bool = False) -> KnowledgeBase:
    kb = _parse(_CORE, "<forensic-core>")
    if include_invented_gcis:
        kb = kb.merge(_parse(_CORE_DECLS + _INVENTED, "<forensic-invented>"))
    if include_learned_gcis:
        kb = kb.merge(_parse(_CORE_DECLS + _LEARNED, "<forensic-learned>"))
    return kb


def classification_gcis(kb: KnowledgeBase, classes=CRIME_CLASSES) -> list:
    """GCIs with a complex left-hand side and a crime class on the right."""
    from .model import Atomic, Gci

    return [
        ax for ax in kb.axioms
        if isinstance(ax, Gci) and isinstance(ax.rhs, Atomic) and ax.rhs.name in classes
        and not isinstance(ax.lhs, Atomic)
    ]


def shipped_ontology_text() -> str:
    return resources.files("forensic_dl").joinpath("data/forensic.fkb").read_text(encoding="utf-8")


def shipped_ontology_path():
    return resources.files("forensic_dl").joinpath("data/forensic.fkb")


def render_shipped_ontology() -> str:
    """Text of the packaged ``forensic.fkb``: the published axioms plus invented placeholders."""
    return serialize_kb(builtin_ontology(include_invented_gcis=True))
