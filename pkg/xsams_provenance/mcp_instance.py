"""
Shared MCP instance for the Query Store service.

Tool modules and HTTP routes register themselves on this single instance.
"""

from fastmcp import FastMCP

mcp = FastMCP(name="xsams-query-store")
