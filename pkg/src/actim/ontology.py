"""Vehicle security-safety (VSS) ontology: entity classes, relation types and
the admissible triple patterns used to validate every extracted fact.

The schema is a fixed conceptual model: 10 entity classes, 10 relation types
(object properties) and 18 admissible (head class, relation, tail class)
patterns. Everything downstream (corpus validation, triple matching, the
knowledge graph) checks against this one schema.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import AbbrevLookupError, SchemaViolationError


class EntityClass(str, Enum):
    """The 10 entity classes of the VSS ontology."""

    VEHICLE = "Vehicle"
    IDENTITY = "Identity"
    COMPONENT = "Component"
    ATTACK_VECTOR = "AttackVector"
    ATTACK_PATTERN = "AttackPattern"
    TOOL = "Tool"
    VULNERABILITY = "Vulnerability"
    CONSEQUENCE = "Consequence"
    LOCATION = "Location"
    COURSE_OF_ACTION = "CourseOfAction"

    @property
    def tag_abbrev(self) -> str:
        """Short uppercase-ish token used inside joint labels (e.g. "AP")."""
        return _CLASS_ABBREV[self]

    @property
    def description(self) -> str:
        return _CLASS_INFO[self][0]

    @property
    def example_instance(self) -> str:
        return _CLASS_INFO[self][1]


class RelationType(str, Enum):
    """The 10 relation types (object properties) of the VSS ontology."""

    HAS_VULNERABILITY = "hasVulnerability"
    HAS_INTERFACE = "hasInterface"
    HAS_IMPACT = "hasImpact"
    TARGETS = "targets"
    USES = "uses"
    MITIGATES = "mitigates"
    RELATED_TO = "related-to"
    LOCATED_AT = "located-at"
    BASED_ON = "based-on"
    CONSISTS_OF = "consists-of"

    @property
    def description(self) -> str:
        return _RELATION_INFO[self]


# Abbreviations are the label-internal class tokens. "AP" and "Com" are fixed
# by the tag format; the rest are chosen to be short and collision-free.
_CLASS_ABBREV = {
    EntityClass.VEHICLE: "Veh",
    EntityClass.IDENTITY: "Id",
    EntityClass.COMPONENT: "Com",
    EntityClass.ATTACK_VECTOR: "AV",
    EntityClass.ATTACK_PATTERN: "AP",
    EntityClass.TOOL: "Tool",
    EntityClass.VULNERABILITY: "Vul",
    EntityClass.CONSEQUENCE: "Cons",
    EntityClass.LOCATION: "Loc",
    EntityClass.COURSE_OF_ACTION: "CoA",
}

_CLASS_INFO = {
    EntityClass.VEHICLE: (
        "A vehicle model or product line.",
        "Tesla Model S",
    ),
    EntityClass.IDENTITY: (
        "A company, organization or group.",
        "BMW",
    ),
    EntityClass.COMPONENT: (
        "Any element of the vehicle system or network: software, hardware, "
        "service, firmware or data.",
        "CAN bus gateway",
    ),
    EntityClass.ATTACK_VECTOR: (
        "An interface or surface through which an attack can reach the "
        "vehicle (cellular, Wi-Fi, Bluetooth, keyless entry, ...).",
        "Wi-Fi hotspot",
    ),
    EntityClass.ATTACK_PATTERN: (
        "A sequence of steps an attacker performs to compromise an asset "
        "(replay, eavesdropping, tampering, ...).",
        "replay attack",
    ),
    EntityClass.TOOL: (
        "Software or hardware equipment usable to carry out an attack.",
        "signal jamming equipment",
    ),
    EntityClass.VULNERABILITY: (
        "A logical or technical flaw exploitable to launch an attack.",
        "buffer overflow in the telematics unit",
    ),
    EntityClass.CONSEQUENCE: (
        "The potential impact of a security event on finances, privacy, "
        "operation or physical safety.",
        "vehicle theft",
    ),
    EntityClass.LOCATION: (
        "The region where an attack occurred or where an organization is "
        "based.",
        "South African",
    ),
    EntityClass.COURSE_OF_ACTION: (
        "An action taken to protect against attacks (intrusion detection, "
        "access control, encryption, ...).",
        "disable their systems",
    ),
}

_RELATION_INFO = {
    RelationType.HAS_VULNERABILITY: "A component has a vulnerability instance.",
    RelationType.HAS_INTERFACE: "A component exposes an attack vector.",
    RelationType.HAS_IMPACT: "An attack pattern or vulnerability causes an impact.",
    RelationType.TARGETS: "An attack pattern or tool targets a component or vulnerability.",
    RelationType.USES: "An attack pattern employs a tool.",
    RelationType.MITIGATES: "A course of action mitigates an attack pattern or vulnerability.",
    RelationType.RELATED_TO: "Two entities are associated with each other.",
    RelationType.LOCATED_AT: "An identity or attack pattern is situated in a location.",
    RelationType.BASED_ON: "An attack pattern is carried out through an attack vector.",
    RelationType.CONSISTS_OF: "A component is contained in a vehicle or another component.",
}


class TriplePattern(NamedTuple):
    """An admissible (head class, relation, tail class) combination."""

    head_class: EntityClass
    relation: RelationType
    tail_class: EntityClass


_C = EntityClass
_R = RelationType

# The 18 admissible patterns.
_PATTERNS = (
    TriplePattern(_C.COMPONENT, _R.HAS_VULNERABILITY, _C.VULNERABILITY),
    TriplePattern(_C.COMPONENT, _R.HAS_INTERFACE, _C.ATTACK_VECTOR),
    TriplePattern(_C.ATTACK_PATTERN, _R.HAS_IMPACT, _C.CONSEQUENCE),
    TriplePattern(_C.VULNERABILITY, _R.HAS_IMPACT, _C.CONSEQUENCE),
    TriplePattern(_C.ATTACK_PATTERN, _R.TARGETS, _C.COMPONENT),
    TriplePattern(_C.ATTACK_PATTERN, _R.TARGETS, _C.VULNERABILITY),
    TriplePattern(_C.TOOL, _R.TARGETS, _C.VULNERABILITY),
    TriplePattern(_C.ATTACK_PATTERN, _R.USES, _C.TOOL),
    TriplePattern(_C.COURSE_OF_ACTION, _R.MITIGATES, _C.ATTACK_PATTERN),
    TriplePattern(_C.COURSE_OF_ACTION, _R.MITIGATES, _C.VULNERABILITY),
    TriplePattern(_C.COMPONENT, _R.RELATED_TO, _C.IDENTITY),
    TriplePattern(_C.VEHICLE, _R.RELATED_TO, _C.IDENTITY),
    TriplePattern(_C.VULNERABILITY, _R.RELATED_TO, _C.IDENTITY),
    TriplePattern(_C.IDENTITY, _R.LOCATED_AT, _C.LOCATION),
    TriplePattern(_C.ATTACK_PATTERN, _R.LOCATED_AT, _C.LOCATION),
    TriplePattern(_C.ATTACK_PATTERN, _R.BASED_ON, _C.ATTACK_VECTOR),
    TriplePattern(_C.COMPONENT, _R.CONSISTS_OF, _C.VEHICLE),
    TriplePattern(_C.COMPONENT, _R.CONSISTS_OF, _C.COMPONENT),
)


@dataclass(frozen=True)
class OntologySchema:
    """Immutable ontology: classes, relations and the admissible patterns.

    Safe for unrestricted concurrent reads.
    """

    classes: tuple[EntityClass, ...]
    relations: tuple[RelationType, ...]
    patterns: frozenset[TriplePattern]

    def __post_init__(self):
        class_set = set(self.classes)
        relation_set = set(self.relations)
        for p in self.patterns:
            if p.head_class not in class_set or p.tail_class not in class_set:
                raise SchemaViolationError(f"pattern {p} references an unregistered class")
            if p.relation not in relation_set:
                raise SchemaViolationError(f"pattern {p} references an unregistered relation")
        abbrevs = [c.tag_abbrev for c in self.classes]
        if len(set(abbrevs)) != len(abbrevs) or any(not a for a in abbrevs):
            raise SchemaViolationError("class abbreviations must be unique and non-empty")

    def validate_triple(
        self,
        head_class: EntityClass,
        relation: RelationType,
        tail_class: EntityClass,
    ) -> bool:
        """True iff (head_class, relation, tail_class) is an admissible pattern."""
        if head_class not in self._class_set or tail_class not in self._class_set:
            raise SchemaViolationError(
                f"unregistered entity class: {head_class!r} / {tail_class!r}"
            )
        if relation not in self._relation_set:
            raise SchemaViolationError(f"unregistered relation type: {relation!r}")
        return TriplePattern(head_class, relation, tail_class) in self.patterns

    def class_by_abbrev(self, abbrev: str) -> EntityClass:
        """Resolve a label-internal abbreviation such as "AP" to its class."""
        try:
            return self._abbrev_index[abbrev]
        except KeyError:
            raise AbbrevLookupError(f"unknown entity-class abbreviation: {abbrev!r}") from None

    @property
    def _class_set(self) -> frozenset[EntityClass]:
        return frozenset(self.classes)

    @property
    def _relation_set(self) -> frozenset[RelationType]:
        return frozenset(self.relations)

    @property
    def _abbrev_index(self) -> dict[str, EntityClass]:
        return {c.tag_abbrev: c for c in self.classes}

    def describe(self) -> str:
        """Deterministic human-readable schema document.

        Field ordering is stable so the CLI output and docs never drift from
        the code.
        """
        lines = ["# VSS ontology", "", "## Entity classes (10)", ""]
        for c in self.classes:
            lines.append(f"- {c.value} [{c.tag_abbrev}]: {c.description}")
            lines.append(f"  example: {c.example_instance}")
        lines += ["", "## Relation types (10)", ""]
        for r in self.relations:
            lines.append(f"- {r.value}: {r.description}")
        lines += ["", "## Admissible triple patterns (18)", ""]
        for p in sorted(self.patterns, key=_pattern_sort_key):
            lines.append(f"- {p.relation.value}({p.head_class.value}, {p.tail_class.value})")
        return "\n".join(lines) + "\n"


def _pattern_sort_key(p: TriplePattern):
    return (p.relation.value, p.head_class.value, p.tail_class.value)


_BUILTIN = OntologySchema(
    classes=tuple(EntityClass),
    relations=tuple(RelationType),
    patterns=frozenset(_PATTERNS),
)
assert len(_BUILTIN.patterns) == 18 and len(_BUILTIN.classes) == 10


def builtin_schema() -> OntologySchema:
    """The fixed VSS schema."""
    return _BUILTIN


def validate_triple(
    schema: OntologySchema,
    head_class: EntityClass,
    relation: RelationType,
    tail_class: EntityClass,
) -> bool:
    return schema.validate_triple(head_class, relation, tail_class)


def class_by_abbrev(schema: OntologySchema, abbrev: str) -> EntityClass:
    return schema.class_by_abbrev(abbrev)
