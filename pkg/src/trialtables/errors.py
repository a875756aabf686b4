"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit failures."""


class AnnotationParseError(ToolkitError):
    """A standoff or record line could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class OffsetRangeError(ToolkitError):
    """A character or token offset lies outside its document."""


class SurfaceMismatchError(ToolkitError):
    """Recorded surface text disagrees with the document slice at its offsets."""


class ConfigurationError(ToolkitError):
    """Incompatible or incomplete run configuration (e.g. mismatched model backends)."""


class LabelMappingError(ConfigurationError):
    """A source label has no entry in the label mapping."""


class TagSequenceError(ToolkitError):
    """An IOB tag sequence is ill-formed; carries the offending index."""

    def __init__(self, message: str, index: int):
        self.index = index
        super().__init__(f"index {index}: {message}")


class SchemaError(AnnotationParseError):
    """A record violates the annotation-file schema."""


class SplitSizeError(ToolkitError):
    """Too few documents to split, or ratios malformed."""


class FractionRangeError(ToolkitError):
    """A sampling fraction is outside (0, 1]."""


class DomainLookupError(ToolkitError):
    """A requested domain is not present in the corpus."""


class TransportError(ToolkitError):
    """A remote query failed and no cached response was available."""


class BatchQueryError(TransportError):
    """One or more query batches failed; carries the failed batch indexes."""

    def __init__(self, message: str, failed_batches: list[int]):
        self.failed_batches = failed_batches
        super().__init__(f"{message} (failed batches: {failed_batches})")


class EmbeddingFormatError(ToolkitError):
    """An embedding file is malformed or dimensionally inconsistent."""


class AlignmentError(ToolkitError):
    """Embeddings do not align with a document's tokens, or are missing for it."""


class ContractError(ToolkitError):
    """An operation was invoked outside its stated preconditions."""


class PairingError(ToolkitError):
    """Predicted and gold inputs could not be paired one-to-one by id."""


class CorrectionConflictError(ToolkitError):
    """A correction targeted an item that is no longer pending."""


class ValidationFailure(ToolkitError):
    """Submitted annotations violate document invariants; carries every violation."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(violations) if violations else "validation failed")
