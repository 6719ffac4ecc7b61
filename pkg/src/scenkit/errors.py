"""Error types shared across the pipeline.

Exit codes follow the CLI contract: 0 ok, 1 findings, 2 I/O, 3 syntax/content,
4 infeasible, 5 internal.
"""

from __future__ import annotations


class ScenarioError(Exception):
    """Base class for all scenkit errors."""

    exit_code = 5


class ScenarioSyntaxError(ScenarioError):
    """Malformed input document or DSL text."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaViolation(ScenarioError):
    """Structurally valid JSON that does not match the expected schema."""

    exit_code = 3


# vocabulary
class DuplicateTerm(ScenarioError):
    exit_code = 3

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"duplicate term name: {name!r}")


class DanglingReference(ScenarioError):
    exit_code = 3

    def __init__(self, source: str, target: str):
        self.source = source
        self.target = target
        super().__init__(f"term {source!r} refers to unknown entity {target!r}")


# functional DSL
class UnknownTerm(ScenarioError):
    exit_code = 3

    def __init__(self, word: str, line: int | None = None, hint: str | None = None):
        self.word = word
        self.line = line
        self.hint = hint
        message = f"unknown term {word!r}"
        if line is not None:
            message = f"line {line}: {message}"
        if hint is not None:
            message += f" (did you mean {hint!r}?)"
        super().__init__(message)


class ArityMismatch(ScenarioError):
    exit_code = 3


class IllegalAttributeValue(ScenarioError):
    exit_code = 3


class IllegalApplication(ScenarioError):
    exit_code = 3


class DuplicateInstance(ScenarioError):
    exit_code = 3


class UnknownVariationTarget(ScenarioError):
    exit_code = 3


# parameter catalog / lowering
class BadRange(ScenarioError):
    exit_code = 3


class BadDistribution(ScenarioError):
    exit_code = 3


class UnboundConstraintParameter(ScenarioError):
    exit_code = 3


class MissingTemplate(ScenarioError):
    exit_code = 3


class VocabularyMismatch(ScenarioError):
    exit_code = 3


class ConstraintInstantiationError(ScenarioError):
    exit_code = 3


class OverrideWidensRange(ScenarioError):
    exit_code = 3


# concretization
class BadK(ScenarioError):
    exit_code = 3


class InfeasibleLevels(ScenarioError):
    exit_code = 4


class SamplingExhausted(ScenarioError):
    exit_code = 4


class SourceMismatch(ScenarioError):
    exit_code = 5


# test cases
class BadTiming(ScenarioError):
    exit_code = 3


class MissingKinematicInputs(ScenarioError):
    exit_code = 3


class IncompleteField(ScenarioError):
    exit_code = 3

    def __init__(self, field: str):
        self.field = field
        super().__init__(f"mandatory test case field is empty: {field}")


class TraceMismatch(ScenarioError):
    exit_code = 5


class DuplicateId(ScenarioError):
    exit_code = 5
