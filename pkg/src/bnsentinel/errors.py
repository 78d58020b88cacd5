"""Exception hierarchy for bnsentinel."""


class BnsentinelError(Exception):
    """Base class for all library errors."""


class NetworkError(BnsentinelError):
    """Invalid network structure or conditional probability table."""


class SchemaError(NetworkError):
    """A file or document does not match the expected schema."""


class UnknownVariableError(BnsentinelError):
    """A referenced variable or outcome does not exist."""


class ScopeError(BnsentinelError):
    """Variables passed to an operation violate its scope requirements."""


class EvidenceError(BnsentinelError):
    """Invalid evidence operation on a session."""


class ConflictingEvidenceError(EvidenceError):
    """A variable was re-observed with a different outcome."""


class ImpossibleEvidenceError(EvidenceError):
    """The evidence has probability zero under the assessed model."""


class EnumerationCapError(BnsentinelError):
    """An exact enumeration would exceed the configured configuration cap."""
