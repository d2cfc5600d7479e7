"""
BibTeX rendering of document sources.

Journal sources become ``@article`` entries, everything else ``@misc``.
Entries are written with bibtexparser so quoting and layout match what
reference managers expect.
"""

import logging
import re
from typing import Dict, List, Tuple

from bibtexparser.bibdatabase import BibDatabase
from bibtexparser.bwriter import BibTexWriter
from pydantic import BaseModel, ConfigDict

from .model import Source, XsamsDocument

logger = logging.getLogger(__name__)

FIELD_ORDER = ["author", "title", "journal", "howpublished", "year", "volume", "pages", "doi", "url", "note"]


class BibEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    entry_kind: str
    key: str
    fields: Dict[str, str]

    def as_record(self) -> Dict[str, str]:
        return {"ENTRYTYPE": self.entry_kind, "ID": self.key, **self.fields}


def _collapse(text: str) -> str:
    return " ".join(text.split())


def split_name(name: str) -> Tuple[str, str]:
    """Return (family, given); "Winnewisser, G." is already inverted."""
    name = _collapse(name)
    if "," in name:
        family, _, given = name.partition(",")
        return family.strip(), given.strip()
    given, _, family = name.rpartition(" ")
    return family, given


def bibtex_name(name: str) -> str:
    family, given = split_name(name)
    return f"{family}, {given}" if given else family


def entry_key(source: Source) -> str:
    family = split_name(source.authors[0])[0] if source.authors else ""
    ascii_family = re.sub(r"[^A-Za-z0-9-]", "", family) or "anon"
    return f"{ascii_family}{source.year}:{source.source_id}"


def to_entry(source: Source) -> BibEntry:
    fields: Dict[str, str] = {}
    if source.authors:
        fields["author"] = " and ".join(bibtex_name(a) for a in source.authors)
    is_article = source.category == "journal"

    title = _collapse(source.title or "")
    if not title and not is_article and source.source_name:
        title = _collapse(source.source_name)
    if title:
        fields["title"] = title
    if is_article and source.source_name:
        fields["journal"] = _collapse(source.source_name)
    uri = re.sub(r"\s+", "", source.uri or "")
    if not is_article and uri:
        fields["howpublished"] = uri
    fields["year"] = str(source.year)
    if source.volume:
        fields["volume"] = _collapse(source.volume)
    if source.page_begin:
        pages = source.page_begin.strip()
        if source.page_end:
            pages = f"{pages}--{source.page_end.strip()}"
        fields["pages"] = pages
    if source.doi:
        fields["doi"] = source.doi.strip()
    if is_article and uri:
        fields["url"] = uri

    notes: List[str] = []
    if source.comments:
        notes.append(_collapse(source.comments))
    if source.production_date is not None:
        notes.append(f"produced {source.production_date.isoformat()}")
    if notes:
        fields["note"] = "; ".join(notes)

    return BibEntry(entry_kind="article" if is_article else "misc", key=entry_key(source), fields=fields)


def _writer() -> BibTexWriter:
    writer = BibTexWriter()
    writer.indent = "  "
    writer.order_entries_by = None
    writer.display_order = FIELD_ORDER
    return writer


def _write(entries: List[BibEntry]) -> str:
    if not entries:
        return ""
    db = BibDatabase()
    db.entries = [e.as_record() for e in entries]
    return _writer().write(db)


def sources_of(doc: XsamsDocument) -> List[Source]:
    """Sources in document order, first occurrence of each id."""
    seen = set()
    sources = []
    for source in doc.sources:
        if source.source_id not in seen:
            seen.add(source.source_id)
            sources.append(source)
    return sources


def to_bibtex(src: Source) -> str:
    return _write([to_entry(src)])


def doc_to_bibtex(doc: XsamsDocument, include_self: bool = True) -> str:
    """All sources of ``doc`` as BibTeX, separated by blank lines.

    Args:
        doc: the document
        include_self: keep the nodes' dated self-reference entries
    """
    sources = [s for s in sources_of(doc) if include_self or not s.is_self_reference]
    return _write([to_entry(s) for s in sources])
