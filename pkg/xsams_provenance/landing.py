"""
Human-readable landing pages for Query Store records.

Pages are rendered from the record alone; the retained document is never
re-parsed.
"""

import logging
from typing import TYPE_CHECKING, Optional

from jinja2 import Environment, PackageLoader, select_autoescape

if TYPE_CHECKING:
    from .store import ExtractionRecord

logger = logging.getLogger(__name__)

_env: Optional[Environment] = None


def get_environment() -> Environment:
    global _env
    if _env is None:
        _env = Environment(
            loader=PackageLoader("xsams_provenance", "templates"),
            autoescape=select_autoescape(["html"]),
            trim_blocks=True,
            lstrip_blocks=True,
        )
    return _env


def reexecute_link(identifier: str) -> str:
    return f"/reexecute/{identifier}"


def render_landing_page(record: "ExtractionRecord") -> str:
    template = get_environment().get_template("landing.html")
    entries = sum(1 for line in record.bibtex_blob.splitlines() if line.startswith("@"))
    return template.render(
        record=record,
        bibtex_entries=entries,
        reexecute_url=reexecute_link(record.identifier) if record.reexecutable else None,
    )


def render_not_found(identifier: str) -> str:
    logger.info(f"Landing page requested for unknown identifier {identifier}")
    return get_environment().get_template("not_found.html").render(identifier=identifier)
