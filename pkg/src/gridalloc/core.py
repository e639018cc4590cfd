"""Domain types, instance documents and derived bounds.

All rates, times and costs are held as :class:`fractions.Fraction` so that
feasibility checks on integer/decimal data are exact. Index order is file
order everywhere.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any, Iterable, Sequence


class InstanceParseError(ValueError):
    """Malformed instance or allocation document."""


class InstanceDefectError(ValueError):
    """Raised by :func:`parse_instance` when type invariants are violated."""

    def __init__(self, defects: Sequence["InstanceDefect"]):
        self.defects = list(defects)
        lines = "; ".join(f"{d.kind.value} at {d.location}: {d.message}" for d in self.defects)
        super().__init__(f"invalid instance: {lines}")


class DefectKind(str, enum.Enum):
    NO_PROCESSORS = "NoProcessors"
    NO_SOURCES = "NoSources"
    EMPTY_ID = "EmptyId"
    DUPLICATE_ID = "DuplicateId"
    NON_POSITIVE_TIME = "NonPositiveTime"
    NEGATIVE_COST = "NegativeCost"
    NEGATIVE_TRANSFER = "NegativeTransfer"
    NEGATIVE_AVAILABILITY = "NegativeAvailability"
    NON_POSITIVE_WORKLOAD = "NonPositiveWorkload"
    NON_INTEGRAL_WORKLOAD = "NonIntegralWorkload"
    NEGATIVE_BUDGET = "NegativeBudget"
    NEGATIVE_DEADLINE = "NegativeDeadline"


@dataclass(frozen=True)
class InstanceDefect:
    kind: DefectKind
    location: str
    message: str


@dataclass(frozen=True)
class ProcessorSpec:
    id: str
    time_per_unit: Fraction
    cost_per_unit: Fraction
    transfer_per_unit: Fraction = Fraction(0)
    available_time: Fraction = Fraction(0)

    @property
    def unit_time(self) -> Fraction:
        """Transfer plus processing minutes for one workload unit."""
        return self.transfer_per_unit + self.time_per_unit


@dataclass(frozen=True)
class SourceSpec:
    id: str
    workload: Fraction
    budget: Fraction
    deadline: Fraction


@dataclass(frozen=True)
class ProblemInstance:
    processors: tuple[ProcessorSpec, ...]
    sources: tuple[SourceSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "processors", tuple(self.processors))
        object.__setattr__(self, "sources", tuple(self.sources))

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def n_processors(self) -> int:
        return len(self.processors)

    def source_index(self, source_id: str) -> int:
        for i, s in enumerate(self.sources):
            if s.id == source_id:
                return i
        raise KeyError(source_id)

    def processor_index(self, processor_id: str) -> int:
        for j, p in enumerate(self.processors):
            if p.id == processor_id:
                return j
        raise KeyError(processor_id)


@dataclass(frozen=True)
class Allocation:
    """Workload units of source ``i`` placed on processor ``j`` (rows are sources)."""

    amounts: tuple[tuple[Fraction, ...], ...] = field(default=())

    def __post_init__(self):
        rows = tuple(tuple(Fraction(v) for v in row) for row in self.amounts)
        object.__setattr__(self, "amounts", rows)

    @classmethod
    def zeros(cls, n_sources: int, n_processors: int) -> "Allocation":
        return cls(tuple((Fraction(0),) * n_processors for _ in range(n_sources)))

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.amounts), len(self.amounts[0]) if self.amounts else 0)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.amounts[i][j]

    def replace(self, i: int, j: int, value) -> "Allocation":
        rows = [list(r) for r in self.amounts]
        rows[i][j] = Fraction(value)
        return Allocation(tuple(tuple(r) for r in rows))

    def used(self, i: int, j: int) -> bool:
        return self.amounts[i][j] > 0

    def matches(self, inst: ProblemInstance) -> bool:
        return len(self.amounts) == inst.n_sources and all(
            len(r) == inst.n_processors for r in self.amounts
        )


# ---------------------------------------------------------------------------
# numbers

def to_fraction(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Decimal, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    raise TypeError(f"not a number: {value!r}")


def json_number(value) -> int | float:
    """Integer when integral, otherwise the shortest round-trip decimal."""
    value = to_fraction(value) if not isinstance(value, Fraction) else value
    if value.denominator == 1:
        return int(value)
    return float(value)


# ---------------------------------------------------------------------------
# validation

def validate_instance(inst: ProblemInstance) -> list[InstanceDefect]:
    """Every violated type invariant, not just the first one."""
    defects: list[InstanceDefect] = []

    def add(kind, loc, msg):
        defects.append(InstanceDefect(kind, loc, msg))

    if not inst.processors:
        add(DefectKind.NO_PROCESSORS, "processors", "at least one processor is required")
    if not inst.sources:
        add(DefectKind.NO_SOURCES, "sources", "at least one source is required")

    for group, items in (("processors", inst.processors), ("sources", inst.sources)):
        seen: set[str] = set()
        for k, item in enumerate(items):
            loc = f"{group}[{k}].id"
            if not item.id:
                add(DefectKind.EMPTY_ID, loc, "id must be a non-empty string")
            elif item.id in seen:
                add(DefectKind.DUPLICATE_ID, loc, f"duplicate id {item.id!r}")
            seen.add(item.id)

    for k, p in enumerate(inst.processors):
        loc = f"processors[{k}]"
        if p.time_per_unit <= 0:
            add(DefectKind.NON_POSITIVE_TIME, f"{loc}.time_per_unit", f"{p.id}: must be > 0")
        if p.cost_per_unit < 0:
            add(DefectKind.NEGATIVE_COST, f"{loc}.cost_per_unit", f"{p.id}: must be >= 0")
        if p.transfer_per_unit < 0:
            add(DefectKind.NEGATIVE_TRANSFER, f"{loc}.transfer_per_unit", f"{p.id}: must be >= 0")
        if p.available_time < 0:
            add(DefectKind.NEGATIVE_AVAILABILITY, f"{loc}.available_time", f"{p.id}: must be >= 0")

    for k, s in enumerate(inst.sources):
        loc = f"sources[{k}]"
        if s.workload.denominator != 1:
            add(DefectKind.NON_INTEGRAL_WORKLOAD, f"{loc}.workload", f"{s.id}: must be a whole number")
        if s.workload < 1:
            add(DefectKind.NON_POSITIVE_WORKLOAD, f"{loc}.workload", f"{s.id}: must be >= 1")
        if s.budget < 0:
            add(DefectKind.NEGATIVE_BUDGET, f"{loc}.budget", f"{s.id}: must be >= 0")
        if s.deadline < 0:
            add(DefectKind.NEGATIVE_DEADLINE, f"{loc}.deadline", f"{s.id}: must be >= 0")
    return defects


def capacity_units(p: ProcessorSpec) -> int:
    """Whole workload units that fit in the processor's available time."""
    return math.floor(p.available_time / p.unit_time)


def big_m(inst: ProblemInstance, i: int, j: int) -> int:
    """Upper bound on units of source ``i`` that processor ``j`` can take."""
    return min(int(inst.sources[i].workload), capacity_units(inst.processors[j]))


# ---------------------------------------------------------------------------
# documents

_PROCESSOR_FIELDS = ("id", "time_per_unit", "cost_per_unit", "transfer_per_unit", "available_time")
_PROCESSOR_REQUIRED = ("id", "time_per_unit", "cost_per_unit", "available_time")
_SOURCE_FIELDS = ("id", "workload", "budget", "deadline")


def load_json(text: str) -> Any:
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _number(obj: dict, key: str, where: str) -> Fraction:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise InstanceParseError(f"{where}.{key}: expected a number, got {value!r}")
    return Fraction(value)


def _record(obj: Any, where: str, allowed: Iterable[str], required: Iterable[str]) -> dict:
    if not isinstance(obj, dict):
        raise InstanceParseError(f"{where}: expected an object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise InstanceParseError(f"{where}: unknown field(s) {', '.join(unknown)}")
    for key in required:
        if key not in obj:
            raise InstanceParseError(f"{where}: missing field {key!r}")
    if not isinstance(obj["id"], str):
        raise InstanceParseError(f"{where}.id: expected a string")
    return obj


def instance_from_data(data: Any) -> ProblemInstance:
    """Build an instance from decoded JSON without checking invariants."""
    if not isinstance(data, dict):
        raise InstanceParseError("top level: expected an object")
    unknown = sorted(set(data) - {"processors", "sources"})
    if unknown:
        raise InstanceParseError(f"top level: unknown field(s) {', '.join(unknown)}")
    for key in ("processors", "sources"):
        if not isinstance(data.get(key), list):
            raise InstanceParseError(f"{key}: expected a list")

    processors = []
    for k, raw in enumerate(data["processors"]):
        where = f"processors[{k}]"
        obj = _record(raw, where, _PROCESSOR_FIELDS, _PROCESSOR_REQUIRED)
        processors.append(ProcessorSpec(
            id=obj["id"],
            time_per_unit=_number(obj, "time_per_unit", where),
            cost_per_unit=_number(obj, "cost_per_unit", where),
            transfer_per_unit=_number(obj, "transfer_per_unit", where) if "transfer_per_unit" in obj else Fraction(0),
            available_time=_number(obj, "available_time", where),
        ))
    sources = []
    for k, raw in enumerate(data["sources"]):
        where = f"sources[{k}]"
        obj = _record(raw, where, _SOURCE_FIELDS, _SOURCE_FIELDS)
        sources.append(SourceSpec(
            id=obj["id"],
            workload=_number(obj, "workload", where),
            budget=_number(obj, "budget", where),
            deadline=_number(obj, "deadline", where),
        ))
    return ProblemInstance(tuple(processors), tuple(sources))


def parse_instance(text: str) -> ProblemInstance:
    """Parse an instance document; raises on malformed text or violated invariants."""
    inst = instance_from_data(load_json(text))
    defects = validate_instance(inst)
    if defects:
        raise InstanceDefectError(defects)
    return inst


def instance_to_data(inst: ProblemInstance) -> dict:
    return {
        "processors": [
            {
                "id": p.id,
                "time_per_unit": json_number(p.time_per_unit),
                "cost_per_unit": json_number(p.cost_per_unit),
                "transfer_per_unit": json_number(p.transfer_per_unit),
                "available_time": json_number(p.available_time),
            }
            for p in inst.processors
        ],
        "sources": [
            {
                "id": s.id,
                "workload": json_number(s.workload),
                "budget": json_number(s.budget),
                "deadline": json_number(s.deadline),
            }
            for s in inst.sources
        ],
    }


def serialize_instance(inst: ProblemInstance) -> str:
    return json.dumps(instance_to_data(inst), indent=2) + "\n"


def load_instance(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def allocation_from_data(data: Any, inst: ProblemInstance) -> Allocation:
    """Decode an allocation document against ``inst``.

    Only the top-level ``allocation`` key is read, so a solve report can be
    fed back in unchanged. Omitted (source, processor) pairs are zero.
    """
    if not isinstance(data, dict) or not isinstance(data.get("allocation"), list):
        raise InstanceParseError("allocation: expected an object with an 'allocation' list")
    rows = [[Fraction(0)] * inst.n_processors for _ in range(inst.n_sources)]
    seen_sources: set[str] = set()
    for k, entry in enumerate(data["allocation"]):
        where = f"allocation[{k}]"
        if not isinstance(entry, dict) or set(entry) - {"source", "assignments"}:
            raise InstanceParseError(f"{where}: expected {{source, assignments}}")
        sid = entry.get("source")
        try:
            i = inst.source_index(sid)
        except KeyError:
            raise InstanceParseError(f"{where}.source: unknown source id {sid!r}") from None
        if sid in seen_sources:
            raise InstanceParseError(f"{where}.source: {sid!r} listed twice")
        seen_sources.add(sid)
        assignments = entry.get("assignments", [])
        if not isinstance(assignments, list):
            raise InstanceParseError(f"{where}.assignments: expected a list")
        seen_procs: set[str] = set()
        for q, a in enumerate(assignments):
            awhere = f"{where}.assignments[{q}]"
            if not isinstance(a, dict) or set(a) != {"processor", "units"}:
                raise InstanceParseError(f"{awhere}: expected {{processor, units}}")
            pid = a["processor"]
            try:
                j = inst.processor_index(pid)
            except KeyError:
                raise InstanceParseError(f"{awhere}.processor: unknown processor id {pid!r}") from None
            if pid in seen_procs:
                raise InstanceParseError(f"{awhere}.processor: {pid!r} listed twice")
            seen_procs.add(pid)
            rows[i][j] = _number(a, "units", awhere)
    return Allocation(tuple(tuple(r) for r in rows))


def parse_allocation(text: str, inst: ProblemInstance) -> Allocation:
    return allocation_from_data(load_json(text), inst)


def allocation_to_data(alloc: Allocation, inst: ProblemInstance) -> list:
    """Allocation list in document form; zero entries are omitted."""
    out = []
    for i, s in enumerate(inst.sources):
        out.append({
            "source": s.id,
            "assignments": [
                {"processor": p.id, "units": json_number(alloc[i, j])}
                for j, p in enumerate(inst.processors)
                if alloc[i, j] != 0
            ],
        })
    return out
