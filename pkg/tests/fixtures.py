"""Hand-built annotation fixtures taken from the worked examples."""

from __future__ import annotations

from forensic_dl.annotations import AnnotationRecord
from forensic_dl.model import And, Atomic, Exists, Nominal, RoleName

# Worked example: a throwing event on video6, registered by camera C004.
EXAMPLE1_RECORDS = [
    AnnotationRecord("resource", "endurant6", "Resource", links=(("hasVideoId", "video6"),)),
    AnnotationRecord("source", "endurant7", "Source", links=(("hasCameraId", "cameraC004"), ("has", "endurant6"))),
    AnnotationRecord("event", "throwing5", "Throwing", links=(("isFrom", "endurant6"),)),
    AnnotationRecord("endurant", "personA", "NaturalPerson", links=(("participateIn", "throwing5"),)),
]

# The inferred concept: took part in a physical aggression registered by camera C004.
EXAMPLE1_QUERY = Exists(
    RoleName("participateIn"),
    And((
        Atomic("PhysicalAggression"),
        Exists(RoleName("isFrom"), And((
            Atomic("Source"),
            Exists(RoleName("hasCameraId"), Nominal("cameraC004")),
        ))),
    )),
)

# Worked example: a vehicle taking part in a breaking-windows event.
EXAMPLE2_RECORDS = [
    AnnotationRecord("endurant", "Endurant1", "Vehicle"),
    AnnotationRecord("event", "Perdurant2", "BreakingWindows", links=(("participant", "Endurant1"),)),
]

# A crowd and an explosion on the same street, both parts of one event.
SAME_STREET_RECORDS = [
    AnnotationRecord("event", "crowd1", "Crowding", data=(("hasLocationName", "Oxford Street"),)),
    AnnotationRecord("event", "blast1", "Explosion", data=(("hasLocationName", "Oxford Street"),)),
    AnnotationRecord("event", "blast2", "Explosion", data=(("hasLocationName", "Regent Street"),)),
    AnnotationRecord("event", "riot1", "Event", links=(("part", "crowd1"),)),
]


def jsonl(records) -> str:
    from forensic_dl.annotations import dump_records

    return dump_records(records)
