"""Exception types shared across the toolkit."""


class ActimError(Exception):
    """Base class for all toolkit errors."""


class SchemaViolationError(ActimError):
    """An entity class or relation type is not registered in the schema."""


class PatternViolationError(SchemaViolationError):
    """A (head class, relation, tail class) triple is not admissible.

    Carries the offending combination so callers can report it.
    """

    def __init__(self, head_class, relation, tail_class, context=""):
        self.head_class = head_class
        self.relation = relation
        self.tail_class = tail_class
        msg = f"inadmissible triple ({head_class.value}, {relation.value}, {tail_class.value})"
        if context:
            msg += f" [{context}]"
        super().__init__(msg)


class AbbrevLookupError(ActimError, KeyError):
    """An entity-class abbreviation is not registered."""


class BratParseError(ActimError):
    """A standoff annotation line could not be parsed."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class IntegrityError(ActimError):
    """Annotation content contradicts the document text or token layout."""


class EncodeError(ActimError):
    """A document cannot be expressed in the joint tag scheme."""


class TagParseError(ActimError):
    """A joint tag string is malformed."""


class ConfigError(ActimError):
    """Invalid model or pipeline configuration."""


class AlignmentError(ActimError):
    """Two sequences that must share a token stream do not."""


class NumericError(ActimError):
    """Non-finite values entered a numeric computation."""


class CheckpointError(ActimError):
    """A parameter checkpoint is malformed or inconsistent with its config."""
