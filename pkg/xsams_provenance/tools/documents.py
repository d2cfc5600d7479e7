"""
Document MCP tools: validation, citation extraction and merging.
"""

import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

from ..bibtex import doc_to_bibtex
from ..mcp_instance import mcp
from ..merge import MatchSpec, ToolConfig, merge
from ..model import parse_timestamp
from ..validator import explain, validate
from ..xml_io import parse, serialize

logger = logging.getLogger(__name__)

DEFAULT_TOOL_NAME = "SpectCol"
DEFAULT_TOOL_HOMEPAGE = "http://www.vamdc.org/activities/research/software/spectcol/"


def clock(now: Optional[str]) -> datetime:
    return parse_timestamp(now) if now else datetime.now().astimezone()


@mcp.tool()
def validate_document(xml: str) -> Dict[str, Any]:
    """
    Validate an XSAMS document against the provenance rules.

    Args:
        xml: XSAMS document text

    Returns:
        Validity flag, error and warning findings, and a text summary
    """
    try:
        doc, _ = parse(xml.encode("utf-8"))
        report = validate(doc)
        logger.info(f"Executed validate_document: {len(report.errors)} error(s)")
        return {
            "valid": report.valid,
            "errors": [f.model_dump() for f in report.errors],
            "warnings": [f.model_dump() for f in report.warnings],
            "summary": explain(report),
        }
    except Exception as e:
        logger.error(f"Error in validate_document: {e}")
        raise


@mcp.tool()
def extract_bibtex(xml: str, include_self: bool = True) -> str:
    """
    Render the sources of an XSAMS document as BibTeX.

    Args:
        xml: XSAMS document text
        include_self: keep the nodes' dated self-reference entries

    Returns:
        BibTeX entries separated by blank lines
    """
    try:
        doc, _ = parse(xml.encode("utf-8"))
        result = doc_to_bibtex(doc, include_self=include_self)
        logger.info(f"Executed extract_bibtex for {len(doc.sources)} source(s)")
        return result
    except Exception as e:
        logger.error(f"Error in extract_bibtex: {e}")
        raise


@mcp.tool()
def merge_documents(
    spectroscopic_xml: str,
    collisional_xml: str,
    match_on: Optional[List[str]] = None,
    tool_name: str = DEFAULT_TOOL_NAME,
    tool_homepage: str = DEFAULT_TOOL_HOMEPAGE,
    comment: Optional[str] = None,
    now: Optional[str] = None,
) -> str:
    """
    Merge a spectroscopic and a collisional document by cross-matching states.

    Args:
        spectroscopic_xml: document whose molecules are kept
        collisional_xml: document whose matching molecules are replaced
        match_on: quantum numbers that identify a state (default ["J"])
        tool_name: name recorded in the root origin
        tool_homepage: homepage recorded in the root origin
        comment: comments of the root origin
        now: extraction timestamp with offset, defaults to the current time

    Returns:
        The merged XSAMS document
    """
    try:
        spec_doc, _ = parse(spectroscopic_xml.encode("utf-8"))
        coll_doc, _ = parse(collisional_xml.encode("utf-8"))
        merged = merge(
            spec_doc,
            coll_doc,
            MatchSpec(match_keys=tuple(match_on or ["J"])),
            ToolConfig(name=tool_name, homepage_url=tool_homepage, comment=comment),
            clock(now),
        )
        logger.info(f"Executed merge_documents with {tool_name}")
        return serialize(merged).decode("utf-8")
    except Exception as e:
        logger.error(f"Error in merge_documents: {e}")
        raise
