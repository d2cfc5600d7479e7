"""
Exception hierarchy for xsams-provenance.

Every error carries the structured fields callers need to render it (ids,
locations, candidates) and a ``code`` equal to its class name, which is what
the HTTP layer and the MCP tools report back to clients.
"""

from typing import Any, Dict, Optional, Sequence, Tuple


class XsamsError(Exception):
    """Base class for every error raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_payload(self) -> Dict[str, Any]:
        return {"error": self.code, "detail": str(self)}


class ConfigurationError(XsamsError):
    """Raised when runtime configuration cannot be loaded."""


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------


class DuplicateIdentifier(XsamsError):
    def __init__(self, identifier: str, kinds: Sequence[str]):
        self.identifier = identifier
        self.kinds = tuple(kinds)
        super().__init__(f"identifier {identifier!r} declared more than once ({', '.join(self.kinds)})")


class UnresolvedReference(XsamsError):
    def __init__(self, identifier: str, referrer: Optional[str] = None):
        self.identifier = identifier
        self.referrer = referrer
        where = f" (referenced from {referrer})" if referrer else ""
        super().__init__(f"reference {identifier!r} does not resolve{where}")


class MultipleVersionMembership(XsamsError):
    def __init__(self, identifier: str, version_ids: Sequence[str]):
        self.identifier = identifier
        self.version_ids = tuple(version_ids)
        super().__init__(f"{identifier!r} is claimed by versions {', '.join(self.version_ids)}")


# ---------------------------------------------------------------------------
# io
# ---------------------------------------------------------------------------


class XmlSyntax(XsamsError):
    def __init__(self, location: Tuple[int, int], message: str):
        self.location = location
        super().__init__(f"line {location[0]}, column {location[1]}: {message}")


class UnknownOriginKind(XsamsError):
    def __init__(self, value: str):
        self.value = value
        super().__init__(f"unknown Origin xsi:type {value!r}")


class MissingRequiredField(XsamsError):
    def __init__(self, element: str, field: str, subject: Optional[str] = None):
        self.element = element
        self.field = field
        self.subject = subject
        suffix = f" ({subject})" if subject else ""
        super().__init__(f"{element} is missing required {field}{suffix}")


# ---------------------------------------------------------------------------
# query language
# ---------------------------------------------------------------------------


class QuerySyntax(XsamsError):
    def __init__(self, position: int, expected: Sequence[str]):
        self.position = position
        self.expected = tuple(sorted(set(expected)))
        super().__init__(f"syntax error at offset {position}: expected {' or '.join(self.expected)}")


class TypeMismatch(XsamsError):
    def __init__(self, keyword: str, message: str = "ordering comparison on a text value"):
        self.keyword = keyword
        super().__init__(f"{keyword}: {message}")


# ---------------------------------------------------------------------------
# node simulation
# ---------------------------------------------------------------------------


class DatasetError(XsamsError):
    """Raised when node holdings or their attribute sidecar are inconsistent."""


# ---------------------------------------------------------------------------
# merge
# ---------------------------------------------------------------------------


class AmbiguousMatch(XsamsError):
    def __init__(self, state_id: str, candidate_ids: Sequence[str]):
        self.state_id = state_id
        self.candidate_ids = tuple(candidate_ids)
        super().__init__(f"state {state_id!r} matches several states: {', '.join(self.candidate_ids)}")


class SpeciesMismatch(XsamsError):
    def __init__(self, left: str, right: str):
        self.left = left
        self.right = right
        super().__init__(f"species {left!r} and {right!r} do not describe the same molecule")


class UnmatchedReferencedState(XsamsError):
    def __init__(self, state_id: str, process_id: Optional[str] = None):
        self.state_id = state_id
        self.process_id = process_id
        where = f" by {process_id}" if process_id else ""
        super().__init__(f"state {state_id!r} is referenced{where} but has no spectroscopic counterpart")


class MultipleRootOrigins(XsamsError):
    def __init__(self, count: int):
        self.count = count
        super().__init__(f"expected exactly one root Origin, found {count}")


class IdentifierCollision(XsamsError):
    def __init__(self, identifiers: Sequence[str]):
        self.identifiers = tuple(identifiers)
        super().__init__(f"both inputs declare {', '.join(self.identifiers)}")


# ---------------------------------------------------------------------------
# query store
# ---------------------------------------------------------------------------


class InvalidDocument(XsamsError):
    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class StorageFailure(XsamsError):
    """Raised when the journal or the document store cannot be written."""


class UnknownIdentifier(XsamsError):
    def __init__(self, identifier: str):
        self.identifier = identifier
        super().__init__(f"no extraction registered under {identifier!r}")


class NotReexecutable(XsamsError):
    def __init__(self, identifier: str):
        self.identifier = identifier
        super().__init__(f"extraction {identifier!r} cannot be re-executed")


class NodeUnavailable(XsamsError):
    def __init__(self, origin_identifier: str, reason: str = "no handle registered"):
        self.origin_identifier = origin_identifier
        super().__init__(f"node {origin_identifier!r} unavailable: {reason}")
