"""
Runtime configuration for the Query Store service.

Values come from environment variables (a ``.env`` file is honoured through
python-dotenv) and are validated by pydantic.
"""

import logging
import os
from pathlib import Path
from typing import Dict, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .errors import ConfigurationError

logger = logging.getLogger(__name__)


class ServerConfig(BaseModel):
    """Server configuration model."""

    journal_path: Path = Field(Path("./querystore.jsonl"), description="Query Store journal file")
    store_documents: bool = Field(True, description="Retain registered document bytes")
    documents_dir: Optional[Path] = Field(None, description="Directory for retained documents")
    host: str = Field("127.0.0.1", description="HTTP bind address")
    port: int = Field(8000, ge=1, le=65535, description="HTTP port")
    transport: Literal["http", "stdio"] = Field("http", description="MCP transport")
    node_config_path: Optional[Path] = Field(None, description="Node configuration served at /tap/sync")
    node_holdings_path: Optional[Path] = Field(None, description="XSAMS holdings of the served node")
    node_auto_register: bool = Field(False, description="Register every answer of the served node")
    remote_nodes: Dict[str, str] = Field(
        default_factory=dict,
        description="origin identifier -> base URL of nodes reachable for re-execution",
    )
    log_level: str = Field("INFO", description="Root logging level")

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.strip().upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level {value!r}")
        return level

    @model_validator(mode="after")
    def _node_paths_together(self) -> "ServerConfig":
        if (self.node_config_path is None) != (self.node_holdings_path is None):
            raise ValueError("NODE_CONFIG_PATH and NODE_HOLDINGS_PATH must be set together")
        return self

    @property
    def serves_node(self) -> bool:
        return self.node_config_path is not None


def parse_remote_nodes(text: str) -> Dict[str, str]:
    """Parse ``id=url,id=url`` pairs."""
    nodes: Dict[str, str] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        origin_identifier, sep, base_url = item.partition("=")
        if not sep or not origin_identifier.strip() or not base_url.strip():
            raise ConfigurationError(f"QS_REMOTE_NODES entry {item!r} is not origin_identifier=base_url")
        nodes[origin_identifier.strip()] = base_url.strip()
    return nodes


def load_config() -> ServerConfig:
    """Load configuration from environment variables.

    Raises:
        ConfigurationError: a variable is malformed
    """
    load_dotenv()
    try:
        return ServerConfig(
            journal_path=os.getenv("QS_JOURNAL_PATH", "./querystore.jsonl"),
            store_documents=os.getenv("QS_STORE_DOCUMENTS", "true"),
            documents_dir=os.getenv("QS_DOCUMENTS_DIR") or None,
            host=os.getenv("QS_HOST", "127.0.0.1"),
            port=os.getenv("QS_PORT", "8000"),
            transport=os.getenv("QS_TRANSPORT", "http").strip().lower(),
            node_config_path=os.getenv("NODE_CONFIG_PATH") or None,
            node_holdings_path=os.getenv("NODE_HOLDINGS_PATH") or None,
            node_auto_register=os.getenv("NODE_AUTO_REGISTER", "false"),
            remote_nodes=parse_remote_nodes(os.getenv("QS_REMOTE_NODES", "")),
            log_level=os.getenv("LOG_LEVEL", "INFO"),
        )
    except ValidationError as e:
        raise ConfigurationError(f"invalid configuration: {e}") from e
