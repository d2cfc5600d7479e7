"""
Query Store MCP tools.
"""

import logging
from typing import Any, Dict

from ..mcp_instance import mcp
from ..store_manager import get_store
from ..xml_io import parse, serialize

logger = logging.getLogger(__name__)


@mcp.tool()
def register_extraction(xml: str) -> Dict[str, Any]:
    """
    Register an extracted XSAMS document and mint its identifier.

    Args:
        xml: XSAMS document text with exactly one root origin

    Returns:
        The extraction record
    """
    try:
        raw = xml.encode("utf-8")
        doc, _ = parse(raw)
        record = get_store().register(doc, raw=raw)
        logger.info(f"Executed register_extraction: {record.identifier}")
        return record.model_dump(mode="json")
    except Exception as e:
        logger.error(f"Error in register_extraction: {e}")
        raise


@mcp.tool()
def resolve_extraction(identifier: str) -> Dict[str, Any]:
    """
    Resolve a Query Store identifier to its machine-readable record.

    Args:
        identifier: e.g. vamdc-qs:0123456789abcdef

    Returns:
        The extraction record
    """
    try:
        return get_store().landing_record(identifier)
    except Exception as e:
        logger.error(f"Error in resolve_extraction: {e}")
        raise


@mcp.tool()
def get_landing_page(identifier: str) -> str:
    """
    Human-readable landing page of an extraction.

    Args:
        identifier: Query Store identifier

    Returns:
        HTML page
    """
    try:
        return get_store().landing_page(identifier)
    except Exception as e:
        logger.error(f"Error in get_landing_page: {e}")
        raise


@mcp.tool()
def reexecute_extraction(identifier: str) -> Dict[str, Any]:
    """
    Re-run the query of an extraction on its node and compare content digests.

    Args:
        identifier: Query Store identifier

    Returns:
        Whether the fresh answer matches the registered one, and the fresh document
    """
    try:
        fresh, match = get_store().reexecute(identifier)
        logger.info(f"Executed reexecute_extraction: match={match}")
        return {"match": match, "document": serialize(fresh).decode("utf-8")}
    except Exception as e:
        logger.error(f"Error in reexecute_extraction: {e}")
        raise
