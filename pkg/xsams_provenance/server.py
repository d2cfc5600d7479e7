"""
Query Store service using FastMCP.

One process serves the HTTP endpoints (register, resolve, landing pages,
re-execution, and optionally a simulated node at ``/tap/sync``) together with
MCP tools exposing the same operations.
"""

import logging
import sys
from typing import Optional

from .config import ServerConfig, load_config
from .errors import ConfigurationError

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Import the shared MCP instance
from .mcp_instance import mcp  # noqa: E402

# Tools and routes self-register on import
from . import routes  # noqa: E402,F401
from . import store_manager  # noqa: E402
from . import tools  # noqa: E402,F401


def create_app(config: Optional[ServerConfig] = None):
    """Starlette application serving the HTTP routes and MCP over streamable HTTP."""
    if config is not None:
        store_manager.configure(config)
    return mcp.http_app()


def run_server(config: ServerConfig) -> None:
    logging.getLogger().setLevel(config.log_level)
    store_manager.configure(config)
    logger.info("Starting Query Store service")
    logger.info(f"Journal: {config.journal_path}")
    logger.info(f"Serving node: {config.node_config_path or 'none'}")
    if config.transport == "stdio":
        mcp.run()
    else:
        mcp.run(transport="streamable-http", host=config.host, port=config.port)


def main():
    """Main entry point for the server."""
    try:
        config = load_config()
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(1)
    try:
        run_server(config)
    except KeyboardInterrupt:
        logger.info("Server shutdown requested")
        sys.exit(0)
    except Exception as e:
        logger.error(f"Server error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
