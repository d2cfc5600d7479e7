"""
Shared fixtures: the reference documents, the two simulated nodes and a
Query Store in a temporary directory.
"""

from pathlib import Path

import pytest

from xsams_provenance import store_manager
from xsams_provenance.model import parse_timestamp
from xsams_provenance.node import LocalNode
from xsams_provenance.store import QueryStore
from xsams_provenance.xml_io import load

FIXTURES = Path(__file__).parent / "fixtures"

BASECOL_QUERY = (
    "select * where ((target.MoleculeStoichiometricFormula = 'CO')) AND ((collider.AtomSymbol = 'he'))"
)
CDMS_QUERY = (
    "select * where (RadTransWavelength >= 2.6006E7 AND RadTransWavelength <= 2.6008E7) "
    "AND ((MoleculeStoichiometricFormula = 'CO'))"
)
SPECTCOL_HOMEPAGE = "http://www.vamdc.org/activities/research/software/spectcol/"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def basecol_doc():
    """Collisional extraction from BASECOL."""
    doc, _ = load(FIXTURES / "basecol_extraction.xml")
    return doc


@pytest.fixture
def cdms_doc():
    """Spectroscopic extraction from CDMS."""
    doc, _ = load(FIXTURES / "cdms_extraction.xml")
    return doc


@pytest.fixture
def merged_doc():
    """The SPECTCOL merge of the two extractions."""
    doc, _ = load(FIXTURES / "spectcol_merge.xml")
    return doc


@pytest.fixture
def basecol_now():
    return parse_timestamp("2015-12-03T14:40:21+01:00")


@pytest.fixture
def cdms_now():
    return parse_timestamp("2015-12-03T15:50:21+01:00")


@pytest.fixture
def merge_now():
    return parse_timestamp("2015-12-07T15:50:21+01:00")


@pytest.fixture
def basecol_node():
    return LocalNode.from_files(FIXTURES / "basecol_node.json", FIXTURES / "basecol_holdings.xml")


@pytest.fixture
def cdms_node():
    return LocalNode.from_files(FIXTURES / "cdms_node.json", FIXTURES / "cdms_holdings.xml")


@pytest.fixture
def journal_path(tmp_path) -> Path:
    return tmp_path / "querystore.jsonl"


@pytest.fixture
def store(journal_path, basecol_node):
    """Query Store able to re-execute against the BASECOL node."""
    query_store = QueryStore(journal_path)
    query_store.register_node(basecol_node)
    return query_store


@pytest.fixture(autouse=True)
def reset_store_manager():
    """Never let one test see the store or node of another."""
    store_manager.reset()
    yield
    store_manager.reset()
