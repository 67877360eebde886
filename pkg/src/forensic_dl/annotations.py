"""Surveillance metadata records and their translation into ABox assertions."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import DanglingReference, ForensicDLError, MalformedCoordinate
from .model import Atomic, ConceptAssertion, DataAssertion, RoleAssertion

RECORD_KINDS = ("event", "endurant", "resource", "source", "role-link", "data-value")
DECLARING_KINDS = ("event", "endurant", "resource", "source")
DEFAULT_TYPES = {"resource": "Resource", "source": "Source"}

# Roles whose targets are opaque identifiers (camera and video ids) rather
# than annotated entities; their targets need no declaring record.
IDENTIFIER_ROLES = frozenset({"hasCameraId", "hasVideoId"})

EARTH_RADIUS_M = 6371008.8


@dataclass(frozen=True)
class AnnotationRecord:
    kind: str
    id: str
    type: str | None = None
    links: tuple = ()  # (role, target) pairs
    data: tuple = ()  # (property, value) pairs

    def __post_init__(self):
        if self.kind not in RECORD_KINDS:
            raise ValueError(f"unknown record kind {self.kind!r}")
        object.__setattr__(self, "links", tuple(tuple(x) for x in self.links))
        object.__setattr__(self, "data", tuple(tuple(x) for x in self.data))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "id": self.id,
            "type": self.type,
            "links": [{"role": r, "target": t} for r, t in self.links],
            "data": [{"prop": p, "value": v} for p, v in self.data],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AnnotationRecord":
        try:
            return cls(
                kind=obj["kind"],
                id=obj["id"],
                type=obj.get("type"),
                links=tuple((x["role"], x["target"]) for x in obj.get("links", ())),
                data=tuple((x["prop"], str(x["value"])) for x in obj.get("data", ())),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed annotation record: {obj!r}") from exc


def dump_records(records: Iterable[AnnotationRecord]) -> str:
    return "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records)


def load_records(text: str, origin: str = "<annotations>") -> list[AnnotationRecord]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(AnnotationRecord.from_json(json.loads(line)))
        except ValueError as exc:
            raise ForensicDLError(f"{origin}:{lineno}: {exc}") from exc
    return out


def read_records(path) -> list[AnnotationRecord]:
    path = Path(path)
    return load_records(path.read_text(encoding="utf-8"), str(path))


def ingest_annotations(records: Iterable[AnnotationRecord]) -> list:
    """Translate records into assertions, enforcing declare-before-use."""
    declared: set[str] = set()
    out: list = []
    for rec in records:
        if rec.kind in DECLARING_KINDS:
            declared.add(rec.id)
            typ = rec.type or DEFAULT_TYPES.get(rec.kind)
            if typ:
                out.append(ConceptAssertion(rec.id, Atomic(typ)))
        elif rec.id not in declared:
            raise DanglingReference(rec.id, rec.id)
        elif rec.type:
            out.append(ConceptAssertion(rec.id, Atomic(rec.type)))
        for role, target in rec.links:
            if role not in IDENTIFIER_ROLES and target not in declared:
                raise DanglingReference(rec.id, target)
            out.append(RoleAssertion(rec.id, target, role))
        for prop, value in rec.data:
            out.append(DataAssertion(rec.id, prop, value))
    return out


# -- camera catalog -------------------------------------------------------

CAMERA_COLUMNS = ("id", "lat", "lon", "street", "start", "end")


@dataclass(frozen=True)
class CameraEntry:
    camera_id: str
    latitude: str
    longitude: str
    location_name: str
    start_time: str = ""
    end_time: str = ""


def _degrees(value: str, low: float, high: float, what: str, camera: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise MalformedCoordinate(f"camera {camera}: {what} {value!r} is not a decimal number") from None
    if not math.isfinite(x) or not low <= x <= high:
        raise MalformedCoordinate(f"camera {camera}: {what} {value!r} out of range")
    return x


def haversine(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


@dataclass(frozen=True)
class CameraCatalog:
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [e.camera_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("camera ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def distances(self) -> list[list[float]]:
        return camera_distances(self)

    def to_tsv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter="\t", lineterminator="\n")
        w.writerow(CAMERA_COLUMNS)
        for e in self.entries:
            w.writerow((e.camera_id, e.latitude, e.longitude, e.location_name, e.start_time, e.end_time))
        return buf.getvalue()

    @classmethod
    def from_tsv(cls, text: str) -> "CameraCatalog":
        rows = list(csv.reader(io.StringIO(text), delimiter="\t"))
        if not rows:
            return cls(())
        if tuple(rows[0]) != CAMERA_COLUMNS:
            raise ValueError(f"expected header {CAMERA_COLUMNS}, got {rows[0]}")
        return cls(tuple(CameraEntry(*r) for r in rows[1:] if r))


def camera_distances(catalog: CameraCatalog) -> list[list[float]]:
    """Pairwise great-circle distances in meters."""
    coords = [
        (_degrees(e.latitude, -90, 90, "latitude", e.camera_id),
         _degrees(e.longitude, -180, 180, "longitude", e.camera_id))
        for e in catalog.entries
    ]
    n = len(coords)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = haversine(*coords[i], *coords[j])
            out[i][j] = out[j][i] = d
    return out


def camera_id_individual(camera_id: str) -> str:
    return f"camera{camera_id}"


def source_record(entry: CameraEntry, source_id: str, resources: Iterable[str] = ()) -> AnnotationRecord:
    """A Source record carrying the camera metadata, linked to its resources."""
    links = [("hasCameraId", camera_id_individual(entry.camera_id))]
    links += [("has", r) for r in resources]
    data = [
        ("hasLatitude", entry.latitude),
        ("hasLongitude", entry.longitude),
        ("hasLocationName", entry.location_name),
    ]
    if entry.start_time:
        data.append(("hasStartTime", entry.start_time))
    if entry.end_time:
        data.append(("hasEndTime", entry.end_time))
    return AnnotationRecord("source", source_id, "Source", tuple(links), tuple(data))
