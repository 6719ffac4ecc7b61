"""Use-case/domain term inventory that grounds all functional scenarios.

A vocabulary declares entities, relation phrases, and categorical attributes.
Term names are case-sensitive identifiers; declared names are normalized to
lowercase-with-hyphens before validation, so ``Two Lane Motorway`` and
``two-lane-motorway`` denote the same term.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .canonical import dumps_canonical
from .errors import DanglingReference, DuplicateTerm, ScenarioSyntaxError, SchemaViolation

KINDS = ("entity", "relation", "attribute")

_NAME_RE = re.compile(r"[a-z][a-z0-9_-]*$")


def normalize_name(raw: str) -> str:
    name = raw.strip().lower().replace(" ", "-")
    if not _NAME_RE.match(name):
        raise ScenarioSyntaxError(f"invalid term name: {raw!r}")
    return name


@dataclass(frozen=True)
class Term:
    name: str
    kind: str
    arity: int | None = None  # relations only
    allowed_values: tuple[str, ...] = ()  # attributes only
    applies_to: tuple[str, ...] = ()  # attributes and relations
    required: bool = False  # attributes: missing assignment is a finding
    description: str = ""


@dataclass(frozen=True)
class Exclusion:
    """Two relation-phrase patterns that may not co-occur in one scenario.

    Each pattern is ``(relation name, argument variables)``; shared variables
    must bind to the same entity instance for the exclusion to fire.
    """

    first: tuple[str, tuple[str, ...]]
    second: tuple[str, tuple[str, ...]]


@dataclass(frozen=True)
class Vocabulary:
    domain_name: str
    version: str
    terms: tuple[Term, ...] = ()  # sorted by name
    exclusions: tuple[Exclusion, ...] = ()
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {t.name: t for t in self.terms})

    def lookup(self, name: str) -> Term | None:
        """Exact, case-sensitive lookup; absence is a normal return."""
        return self._index.get(name)

    @property
    def ref(self) -> dict:
        return {"domain_name": self.domain_name, "version": self.version}

    def names(self) -> list[str]:
        return [t.name for t in self.terms]


def _require(document: dict, key: str, types, where: str):
    if key not in document:
        raise SchemaViolation(f"{where}: missing field {key!r}")
    value = document[key]
    if not isinstance(value, types):
        raise SchemaViolation(f"{where}: field {key!r} has wrong type")
    return value


def _term_from_dict(record: dict) -> Term:
    if not isinstance(record, dict):
        raise SchemaViolation("term record must be an object")
    name = normalize_name(_require(record, "name", str, "term"))
    kind = _require(record, "kind", str, f"term {name!r}")
    if kind not in KINDS:
        raise SchemaViolation(f"term {name!r}: unknown kind {kind!r}")
    arity = None
    allowed_values: tuple[str, ...] = ()
    applies_to: tuple[str, ...] = ()
    required = False
    if kind == "relation":
        arity = _require(record, "arity", int, f"term {name!r}")
        if arity < 1:
            raise SchemaViolation(f"relation {name!r}: arity must be >= 1")
        applies_to = tuple(normalize_name(n) for n in record.get("applies_to", []))
    elif kind == "attribute":
        values = _require(record, "allowed_values", list, f"term {name!r}")
        if not values:
            raise SchemaViolation(f"attribute {name!r}: needs at least one allowed value")
        allowed_values = tuple(normalize_name(v) for v in values)
        if len(set(allowed_values)) != len(allowed_values):
            raise SchemaViolation(f"attribute {name!r}: duplicate allowed values")
        applies_to = tuple(normalize_name(n) for n in record.get("applies_to", []))
        required = bool(record.get("required", False))
    return Term(
        name=name,
        kind=kind,
        arity=arity,
        allowed_values=allowed_values,
        applies_to=applies_to,
        required=required,
        description=record.get("description", ""),
    )


def _exclusion_from_dict(record: dict) -> Exclusion:
    def pattern(side):
        side_record = _require(record, side, dict, "exclusion")
        relation = normalize_name(_require(side_record, "relation", str, "exclusion"))
        args = tuple(_require(side_record, "args", list, "exclusion"))
        return relation, args

    return Exclusion(first=pattern("first"), second=pattern("second"))


def vocabulary_from_dict(document: dict) -> Vocabulary:
    if not isinstance(document, dict):
        raise SchemaViolation("vocabulary document must be an object")
    domain_name = normalize_name(_require(document, "domain_name", str, "vocabulary"))
    version = _require(document, "version", str, "vocabulary")
    term_records = _require(document, "terms", list, "vocabulary")
    terms = [_term_from_dict(r) for r in term_records]

    seen: set[str] = set()
    for term in terms:
        if term.name in seen:
            raise DuplicateTerm(term.name)
        seen.add(term.name)

    by_name = {t.name: t for t in terms}
    for term in terms:
        for target in term.applies_to:
            resolved = by_name.get(target)
            if resolved is None or resolved.kind != "entity":
                raise DanglingReference(term.name, target)

    exclusions = tuple(_exclusion_from_dict(r) for r in document.get("exclusions", []))
    for exclusion in exclusions:
        for relation, args in (exclusion.first, exclusion.second):
            resolved = by_name.get(relation)
            if resolved is None or resolved.kind != "relation":
                raise DanglingReference("exclusion", relation)
            if len(args) != resolved.arity:
                raise SchemaViolation(f"exclusion on {relation!r}: wrong argument count")

    # Sorted storage makes loading order-independent and serialization canonical.
    return Vocabulary(
        domain_name=domain_name,
        version=version,
        terms=tuple(sorted(terms, key=lambda t: t.name)),
        exclusions=exclusions,
    )


def load_vocabulary(source: str) -> Vocabulary:
    try:
        document = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return vocabulary_from_dict(document)


def _term_to_dict(term: Term) -> dict:
    record: dict = {"name": term.name, "kind": term.kind}
    if term.kind == "relation":
        record["arity"] = term.arity
        record["applies_to"] = list(term.applies_to)
    elif term.kind == "attribute":
        record["allowed_values"] = list(term.allowed_values)
        record["applies_to"] = list(term.applies_to)
        if term.required:
            record["required"] = True
    if term.description:
        record["description"] = term.description
    return record


def vocabulary_to_dict(vocabulary: Vocabulary) -> dict:
    document = {
        "domain_name": vocabulary.domain_name,
        "version": vocabulary.version,
        "terms": [_term_to_dict(t) for t in vocabulary.terms],
    }
    if vocabulary.exclusions:
        document["exclusions"] = [
            {
                "first": {"relation": e.first[0], "args": list(e.first[1])},
                "second": {"relation": e.second[0], "args": list(e.second[1])},
            }
            for e in vocabulary.exclusions
        ]
    return document


def serialize_vocabulary(vocabulary: Vocabulary) -> str:
    return dumps_canonical(vocabulary_to_dict(vocabulary))
