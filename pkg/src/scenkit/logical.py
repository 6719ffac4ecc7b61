"""State-space intermediate representation: parameters, ranges, constraints.

A LogicalScenario is the machine-facing contract between the linguistic
front end and the concretization back end: named parameters with closed
ranges and optional distributions, plus inequality and correlation
constraints over those parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import expressions
from .canonical import content_hash, dumps_canonical
from .errors import ScenarioSyntaxError, SchemaViolation

DISTRIBUTION_TYPES = ("uniform", "truncated-gaussian")


@dataclass(frozen=True)
class Distribution:
    type: str
    mean: float | None = None
    stddev: float | None = None


@dataclass(frozen=True)
class Parameter:
    name: str  # qualified: <instance_id>.<local_name>
    unit: str
    lo: float
    hi: float
    distribution: Distribution | None = None
    kind: str = "scalar-static"  # scalar-static | scalar-initial
    provenance: tuple[tuple[str, str], ...] = ()

    @property
    def range(self) -> tuple[float, float]:
        return self.lo, self.hi


@dataclass(frozen=True)
class Inequality:
    id: str
    lhs: str
    op: str
    rhs: str
    provenance: tuple[tuple[str, str], ...] = ()

    def variables(self) -> set[str]:
        return (expressions.expr_variables(expressions.parse_expression(self.lhs))
                | expressions.expr_variables(expressions.parse_expression(self.rhs)))

    def holds(self, env: dict[str, float]) -> bool:
        lhs = expressions.eval_expr(expressions.parse_expression(self.lhs), env)
        rhs = expressions.eval_expr(expressions.parse_expression(self.rhs), env)
        return expressions.comparison_holds(lhs, self.op, rhs)

    def describe(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Correlation:
    """target within slope*source + intercept, plus/minus tolerance (inclusive)."""

    id: str
    target: str
    source: str
    slope: float
    intercept: float
    tolerance: float
    provenance: tuple[tuple[str, str], ...] = ()

    def variables(self) -> set[str]:
        return {self.target, self.source}

    def holds(self, env: dict[str, float]) -> bool:
        center = self.slope * env[self.source] + self.intercept
        return abs(env[self.target] - center) <= self.tolerance

    def describe(self) -> str:
        return (f"{self.target} = {self.slope!r}*{self.source} + {self.intercept!r} "
                f"+- {self.tolerance!r}")


Constraint = Inequality | Correlation


@dataclass(frozen=True)
class LogicalScenario:
    scenario_id: str
    source_ref: dict = field(default_factory=dict)
    parameters: tuple[Parameter, ...] = ()
    constraints: tuple[Constraint, ...] = ()

    def parameter(self, name: str) -> Parameter | None:
        for parameter in self.parameters:
            if parameter.name == name:
                return parameter
        return None


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    elements: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings


def _distribution_findings(parameter: Parameter) -> list[Finding]:
    findings = []
    distribution = parameter.distribution
    if distribution is None:
        return findings
    if distribution.type not in DISTRIBUTION_TYPES:
        findings.append(Finding("BAD_DISTRIBUTION",
                                f"{parameter.name}: unknown distribution {distribution.type!r}",
                                (parameter.name,)))
    elif distribution.type == "truncated-gaussian":
        if distribution.stddev is None or distribution.stddev <= 0:
            findings.append(Finding("BAD_DISTRIBUTION",
                                    f"{parameter.name}: stddev must be > 0", (parameter.name,)))
        if distribution.mean is None or not parameter.lo <= distribution.mean <= parameter.hi:
            findings.append(Finding("BAD_DISTRIBUTION",
                                    f"{parameter.name}: mean outside range", (parameter.name,)))
    return findings


def validate_logical(scenario: LogicalScenario) -> ValidationReport:
    """Invariant checks plus a sound-but-incomplete interval feasibility check."""
    findings: list[Finding] = []

    seen: set[str] = set()
    for parameter in scenario.parameters:
        if parameter.name in seen:
            findings.append(Finding("DUPLICATE_PARAMETER",
                                    f"parameter {parameter.name!r} declared twice",
                                    (parameter.name,)))
        seen.add(parameter.name)
        if parameter.lo > parameter.hi:
            findings.append(Finding("EMPTY_RANGE",
                                    f"{parameter.name}: range [{parameter.lo}, {parameter.hi}] "
                                    "is empty", (parameter.name,)))
        findings.extend(_distribution_findings(parameter))

    env = {p.name: (p.lo, p.hi) for p in scenario.parameters}
    for constraint in scenario.constraints:
        unknown = constraint.variables() - set(env)
        if unknown:
            findings.append(Finding("UNKNOWN_PARAMETER",
                                    f"constraint {constraint.id} references undeclared "
                                    f"parameters: {sorted(unknown)}", (constraint.id,)))
            continue
        if isinstance(constraint, Inequality):
            lhs = expressions.interval_expr(expressions.parse_expression(constraint.lhs), env)
            rhs = expressions.interval_expr(expressions.parse_expression(constraint.rhs), env)
            possible = expressions.comparison_possible(lhs, constraint.op, rhs)
        else:
            source_lo, source_hi = env[constraint.source]
            center = sorted((constraint.slope * source_lo + constraint.intercept,
                             constraint.slope * source_hi + constraint.intercept))
            band = (center[0] - constraint.tolerance, center[1] + constraint.tolerance)
            target = env[constraint.target]
            possible = band[0] <= target[1] and target[0] <= band[1]
        if not possible:
            findings.append(Finding("INTERVAL_INFEASIBLE",
                                    f"constraint {constraint.id} ({constraint.describe()}) "
                                    "cannot be satisfied within the declared ranges",
                                    (constraint.id,)))

    return ValidationReport(findings=tuple(findings))


def distribution_to_dict(distribution: Distribution | None):
    if distribution is None:
        return None
    record: dict = {"type": distribution.type}
    if distribution.type == "truncated-gaussian":
        record["mean"] = distribution.mean
        record["stddev"] = distribution.stddev
    return record


def distribution_from_dict(record) -> Distribution | None:
    if record is None:
        return None
    if not isinstance(record, dict) or "type" not in record:
        raise SchemaViolation("distribution must be null or an object with a 'type'")
    kind = record["type"]
    if kind == "uniform":
        return Distribution(type="uniform")
    if kind == "truncated-gaussian":
        return Distribution(type="truncated-gaussian",
                            mean=float(record["mean"]), stddev=float(record["stddev"]))
    raise SchemaViolation(f"unknown distribution type {kind!r}")


def _parameter_to_dict(parameter: Parameter) -> dict:
    return {
        "name": parameter.name,
        "unit": parameter.unit,
        "range": [parameter.lo, parameter.hi],
        "distribution": distribution_to_dict(parameter.distribution),
        "kind": parameter.kind,
        "provenance": dict(parameter.provenance),
    }


def _constraint_to_dict(constraint: Constraint) -> dict:
    if isinstance(constraint, Inequality):
        return {
            "id": constraint.id,
            "kind": "inequality",
            "lhs": constraint.lhs,
            "op": constraint.op,
            "rhs": constraint.rhs,
            "provenance": dict(constraint.provenance),
        }
    return {
        "id": constraint.id,
        "kind": "correlation",
        "target": constraint.target,
        "source": constraint.source,
        "slope": constraint.slope,
        "intercept": constraint.intercept,
        "tolerance": constraint.tolerance,
        "provenance": dict(constraint.provenance),
    }


def logical_to_dict(scenario: LogicalScenario) -> dict:
    return {
        "format": "logical/1",
        "scenario_id": scenario.scenario_id,
        "source_ref": dict(scenario.source_ref),
        "parameters": [_parameter_to_dict(p) for p in scenario.parameters],
        "constraints": [_constraint_to_dict(c) for c in scenario.constraints],
    }


def _provenance_from_dict(record) -> tuple[tuple[str, str], ...]:
    if not isinstance(record, dict):
        raise SchemaViolation("provenance must be an object")
    return tuple(sorted(record.items()))


def _parameter_from_dict(record: dict) -> Parameter:
    try:
        lo, hi = record["range"]
        return Parameter(
            name=record["name"],
            unit=record["unit"],
            lo=float(lo),
            hi=float(hi),
            distribution=distribution_from_dict(record.get("distribution")),
            kind=record.get("kind", "scalar-static"),
            provenance=_provenance_from_dict(record.get("provenance", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"bad parameter record: {exc}") from exc


def _constraint_from_dict(record: dict) -> Constraint:
    try:
        kind = record["kind"]
        provenance = _provenance_from_dict(record.get("provenance", {}))
        if kind == "inequality":
            if record["op"] not in ("<", "<=", ">", ">=", "="):
                raise SchemaViolation(f"bad comparator {record['op']!r}")
            expressions.parse_expression(record["lhs"])
            expressions.parse_expression(record["rhs"])
            return Inequality(id=record["id"], lhs=record["lhs"], op=record["op"],
                              rhs=record["rhs"], provenance=provenance)
        if kind == "correlation":
            tolerance = float(record["tolerance"])
            if tolerance < 0:
                raise SchemaViolation("correlation tolerance must be >= 0")
            return Correlation(id=record["id"], target=record["target"], source=record["source"],
                               slope=float(record["slope"]), intercept=float(record["intercept"]),
                               tolerance=tolerance, provenance=provenance)
        raise SchemaViolation(f"unknown constraint kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"bad constraint record: {exc}") from exc


def logical_from_dict(document: dict) -> LogicalScenario:
    if not isinstance(document, dict):
        raise SchemaViolation("logical scenario document must be an object")
    if document.get("format") != "logical/1":
        raise SchemaViolation("expected format 'logical/1'")
    for key in ("scenario_id", "source_ref", "parameters", "constraints"):
        if key not in document:
            raise SchemaViolation(f"logical scenario: missing field {key!r}")
    if not isinstance(document["parameters"], list) or not isinstance(document["constraints"], list):
        raise SchemaViolation("'parameters' and 'constraints' must be arrays")
    return LogicalScenario(
        scenario_id=document["scenario_id"],
        source_ref=dict(document["source_ref"]),
        parameters=tuple(_parameter_from_dict(p) for p in document["parameters"]),
        constraints=tuple(_constraint_from_dict(c) for c in document["constraints"]),
    )


def serialize_logical(scenario: LogicalScenario) -> str:
    return dumps_canonical(logical_to_dict(scenario))


def deserialize_logical(source: str) -> LogicalScenario:
    try:
        document = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return logical_from_dict(document)


def logical_hash(scenario: LogicalScenario) -> str:
    return content_hash(logical_to_dict(scenario))
