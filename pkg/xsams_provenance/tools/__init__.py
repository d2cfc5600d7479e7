"""
MCP tools of the Query Store service.

Importing this package registers every tool on the shared instance.
"""

from . import documents
from . import nodes
from . import query_store

# All tools are registered via the @mcp.tool() decorators
