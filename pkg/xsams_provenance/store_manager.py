"""
Lazy initialization of the Query Store and the served node.

Both are created on first use from :func:`config.load_config`, so importing
the tools or routes never touches the filesystem.
"""

import logging
from typing import Optional

from .config import ServerConfig, load_config
from .errors import NodeUnavailable
from .node import LocalNode, RemoteNode
from .store import QueryStore

logger = logging.getLogger(__name__)

_config: Optional[ServerConfig] = None
_store: Optional[QueryStore] = None
_node: Optional[LocalNode] = None


def configure(config: ServerConfig) -> None:
    """Use ``config`` instead of the environment; drops any existing store."""
    global _config
    reset()
    _config = config


def get_config() -> ServerConfig:
    global _config
    if _config is None:
        _config = load_config()
    return _config


def get_node() -> LocalNode:
    """Get or create the node served at ``/tap/sync``."""
    global _node
    if _node is None:
        config = get_config()
        if not config.serves_node:
            raise NodeUnavailable("local", "no node configured (NODE_CONFIG_PATH)")
        try:
            _node = LocalNode.from_files(config.node_config_path, config.node_holdings_path)
            logger.info(f"Serving node {_node.config.name} ({_node.origin_identifier})")
        except Exception as e:
            logger.error(f"Failed to load node: {e}")
            raise
    return _node


def get_store() -> QueryStore:
    """Get or create the Query Store with its re-execution targets."""
    global _store
    if _store is None:
        config = get_config()
        store = QueryStore(config.journal_path, config.store_documents, config.documents_dir)
        if config.serves_node:
            store.register_node(get_node())
        for origin_identifier, base_url in config.remote_nodes.items():
            store.register_node(RemoteNode(origin_identifier, base_url))
        _store = store
        logger.info(f"Query Store initialized with {len(store)} record(s)")
    return _store


def reset() -> None:
    global _config, _store, _node
    _config = None
    _store = None
    _node = None
