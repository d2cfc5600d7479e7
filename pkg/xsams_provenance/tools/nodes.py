"""
Node MCP tools: query the node served by this process.
"""

import logging
from typing import Any, Dict, Optional

from ..mcp_instance import mcp
from ..store_manager import get_config, get_node, get_store
from ..xml_io import serialize
from .documents import clock

logger = logging.getLogger(__name__)


@mcp.tool()
def query_node(query: str, now: Optional[str] = None) -> Dict[str, Any]:
    """
    Run a VSS2 query against the served node.

    Args:
        query: e.g. select * where ((MoleculeStoichiometricFormula = 'CO'))
        now: extraction timestamp with offset, defaults to the current time

    Returns:
        The answer document, and its Query Store identifier when answers are
        registered automatically
    """
    try:
        doc = get_node().execute(query, clock(now))
        content = serialize(doc)
        result: Dict[str, Any] = {"document": content.decode("utf-8"), "identifier": None}
        if get_config().node_auto_register:
            result["identifier"] = get_store().register(doc, raw=content).identifier
        logger.info(f"Executed query_node: {len(doc.processes)} process(es)")
        return result
    except Exception as e:
        logger.error(f"Error in query_node: {e}")
        raise


@mcp.tool()
def describe_node() -> Dict[str, Any]:
    """
    Describe the served node: identity, versions and restrictable keywords.

    Returns:
        Node metadata
    """
    try:
        node = get_node()
        config = node.config
        return {
            "name": config.name,
            "homepage_url": config.homepage_url,
            "origin_identifier": config.origin_identifier,
            "versions": [{"version_id": v.version_id, "timestamp": v.timestamp} for v in config.versions],
            "restrictables": list(config.restrictables),
            "processes": len(node.dataset.process_ids),
        }
    except Exception as e:
        logger.error(f"Error in describe_node: {e}")
        raise
