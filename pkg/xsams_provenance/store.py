"""
Query Store: resolvable identifiers for data extractions.

Every registered extraction becomes an :class:`ExtractionRecord` appended as
one JSON line to the journal. The in-memory index is an immutable mapping
replaced wholesale after each write, so readers never take the lock.
"""

import hashlib
import logging
import os
import threading
from datetime import datetime
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .bibtex import doc_to_bibtex
from .errors import (
    InvalidDocument,
    NodeUnavailable,
    NotReexecutable,
    QuerySyntax,
    StorageFailure,
    UnknownIdentifier,
)
from .landing import render_landing_page
from .model import Origin, OriginKind, Timestamp, XsamsDocument
from .node import NodeHandle
from .query import canonicalize
from .validator import ValidationReport, explain, validate
from .xml_io import canonical_digest, serialize

logger = logging.getLogger(__name__)

IDENTIFIER_SCHEME = "vamdc-qs:"
IDENTIFIER_HEX_LENGTH = 16


class VersionStamp(BaseModel):
    model_config = ConfigDict(frozen=True)

    version_id: str
    timestamp: Timestamp


class ExtractionRecord(BaseModel):
    """One registered extraction, as persisted in the journal."""

    model_config = ConfigDict(frozen=True)

    identifier: str = Field(..., pattern=r"^vamdc-qs:[0-9a-f]{16}$")
    node_origin_identifier: str
    node_name: str = Field(..., description="Name of the root origin")
    homepage_url: str
    canonical_query: str = Field("", description="Empty when the root origin is not a node")
    extraction_timestamp: Timestamp
    version_ids: Tuple[VersionStamp, ...]
    content_digest: str = Field(..., pattern=r"^[0-9a-f]{64}$")
    bibtex_blob: str
    stored_document_path: Optional[str] = None
    reexecutable: bool


def mint_identifier(node_origin_identifier: str, canonical_query: str, extraction_timestamp: str, digest: str) -> str:
    material = "\n".join([node_origin_identifier, canonical_query, extraction_timestamp, digest])
    return IDENTIFIER_SCHEME + hashlib.sha256(material.encode("utf-8")).hexdigest()[:IDENTIFIER_HEX_LENGTH]


def _root_of(doc: XsamsDocument) -> Origin:
    report: ValidationReport = validate(doc)
    if not report.valid:
        raise InvalidDocument(explain(report), report)
    if len(doc.origins) != 1:
        raise InvalidDocument(f"expected exactly one root Origin, found {len(doc.origins)}")
    return doc.origins[0]


def build_record(doc: XsamsDocument) -> ExtractionRecord:
    """Describe ``doc`` as an extraction record without persisting it.

    Raises:
        InvalidDocument: the document has validation errors, several root
            origins, or a node query that does not parse
    """
    root = _root_of(doc)
    if root.kind is OriginKind.NODE:
        try:
            query = canonicalize(root.query or "")
        except QuerySyntax as e:
            raise InvalidDocument(f"node query does not parse: {e}") from e
        node_id = root.origin_identifier or ""
        reexecutable = True
    else:
        query = ""
        node_id = root.origin_identifier or root.homepage_url
        reexecutable = False

    digest = canonical_digest(doc)
    return ExtractionRecord(
        identifier=mint_identifier(node_id, query, root.timestamp, digest),
        node_origin_identifier=node_id,
        node_name=root.name,
        homepage_url=root.homepage_url,
        canonical_query=query,
        extraction_timestamp=root.timestamp,
        version_ids=tuple(VersionStamp(version_id=v.version_id, timestamp=v.timestamp) for v in doc.all_versions()),
        content_digest=digest,
        bibtex_blob=doc_to_bibtex(doc),
        reexecutable=reexecutable,
    )


class QueryStore:
    """Journal-backed registry of extractions plus the nodes able to re-run them."""

    def __init__(
        self,
        journal_path: Union[str, Path],
        store_documents: bool = True,
        documents_dir: Optional[Union[str, Path]] = None,
    ):
        self.journal_path = Path(journal_path)
        self.store_documents = store_documents
        if documents_dir is None:
            documents_dir = self.journal_path.with_name(f"{self.journal_path.stem}.documents")
        self.documents_dir = Path(documents_dir)
        self._lock = threading.Lock()
        self._records: Mapping[str, ExtractionRecord] = MappingProxyType({})
        self._nodes: Dict[str, NodeHandle] = {}
        self._replay()

    def _replay(self) -> None:
        if not self.journal_path.exists():
            logger.info(f"Starting empty Query Store at {self.journal_path}")
            return
        records: Dict[str, ExtractionRecord] = {}
        with self.journal_path.open("r", encoding="utf-8") as journal:
            for number, line in enumerate(journal, start=1):
                if not line.strip():
                    continue
                try:
                    record = ExtractionRecord.model_validate_json(line)
                except ValidationError as e:
                    logger.warning(f"Skipping corrupt journal line {number}: {e.error_count()} error(s)")
                    continue
                records[record.identifier] = record
        self._records = MappingProxyType(records)
        logger.info(f"Replayed {len(records)} record(s) from {self.journal_path}")

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> List[ExtractionRecord]:
        return list(self._records.values())

    # -- nodes ---------------------------------------------------------------

    def register_node(self, handle: NodeHandle) -> None:
        self._nodes[handle.origin_identifier] = handle
        logger.info(f"Registered re-execution target {handle.origin_identifier}")

    def node(self, origin_identifier: str) -> NodeHandle:
        try:
            return self._nodes[origin_identifier]
        except KeyError:
            raise NodeUnavailable(origin_identifier) from None

    # -- writes --------------------------------------------------------------

    def _retain(self, digest: str, doc: XsamsDocument, raw: Optional[bytes]) -> str:
        path = self.documents_dir / f"{digest}.xml"
        if not path.exists():
            self.documents_dir.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".xml.tmp")
            tmp.write_bytes(raw if raw is not None else serialize(doc))
            os.replace(tmp, path)
        return str(path)

    def _append(self, record: ExtractionRecord) -> None:
        self.journal_path.parent.mkdir(parents=True, exist_ok=True)
        with self.journal_path.open("a", encoding="utf-8") as journal:
            journal.write(record.model_dump_json() + "\n")
            journal.flush()
            os.fsync(journal.fileno())

    def register(self, doc: XsamsDocument, raw: Optional[bytes] = None) -> ExtractionRecord:
        """Register an extraction; registering the same document again returns the same record.

        Args:
            doc: the extracted document
            raw: the bytes as received, retained instead of a re-serialization

        Raises:
            InvalidDocument: the document cannot be registered
            StorageFailure: the journal or the document store cannot be written
        """
        record = build_record(doc)
        with self._lock:
            existing = self._records.get(record.identifier)
            if existing is not None:
                logger.info(f"Extraction {record.identifier} already registered")
                return existing
            try:
                if self.store_documents:
                    stored = self._retain(record.content_digest, doc, raw)
                    record = record.model_copy(update={"stored_document_path": stored})
                self._append(record)
            except OSError as e:
                raise StorageFailure(f"cannot persist {record.identifier}: {e}") from e
            records = dict(self._records)
            records[record.identifier] = record
            self._records = MappingProxyType(records)
        logger.info(f"Registered extraction {record.identifier} from {record.node_origin_identifier}")
        return record

    # -- reads ---------------------------------------------------------------

    def resolve(self, identifier: str) -> ExtractionRecord:
        try:
            return self._records[identifier]
        except KeyError:
            raise UnknownIdentifier(identifier) from None

    def landing_record(self, identifier: str) -> Dict[str, object]:
        """Machine-readable rendering of a record, with the journal's field names."""
        return self.resolve(identifier).model_dump(mode="json")

    def landing_page(self, identifier: str) -> str:
        return render_landing_page(self.resolve(identifier))

    def document_bytes(self, identifier: str) -> bytes:
        """The retained document of a record.

        Raises:
            UnknownIdentifier: no record, or the record's document was not retained
        """
        record = self.resolve(identifier)
        if not record.stored_document_path:
            raise UnknownIdentifier(identifier)
        try:
            return Path(record.stored_document_path).read_bytes()
        except OSError as e:
            raise StorageFailure(f"retained document of {identifier} is unreadable: {e}") from e

    def reexecute(
        self,
        identifier: str,
        node: Optional[NodeHandle] = None,
        now: Optional[datetime] = None,
    ) -> Tuple[XsamsDocument, bool]:
        """Run the stored query again and compare digests.

        Args:
            identifier: record to re-execute
            node: handle to use instead of the registered one
            now: extraction instant for the fresh answer

        Returns:
            (fresh document, True iff its digest equals the stored digest)

        Raises:
            UnknownIdentifier, NotReexecutable, NodeUnavailable
        """
        record = self.resolve(identifier)
        if not record.reexecutable:
            raise NotReexecutable(identifier)
        handle = node if node is not None else self.node(record.node_origin_identifier)
        fresh = handle.execute(record.canonical_query, now)
        match = canonical_digest(fresh) == record.content_digest
        if match:
            logger.info(f"Re-executed {identifier}: digest unchanged")
        else:
            logger.warning(f"Re-executed {identifier}: node data changed since registration")
        return fresh, match
