"""
Tests for the simulated data nodes.
"""

from decimal import Decimal

import httpx
import pytest

from tests.conftest import BASECOL_QUERY, CDMS_QUERY
from xsams_provenance.errors import ConfigurationError, DatasetError, NodeUnavailable
from xsams_provenance.model import OriginKind
from xsams_provenance.node import (
    LocalNode,
    NodeConfig,
    RemoteNode,
    build_dataset,
    load_dataset,
    read_sidecar,
    wavelength_angstrom,
)
from xsams_provenance.query import parse_query
from xsams_provenance.validator import explain, validate
from xsams_provenance.xml_io import load, serialize


class TestNodeConfig:
    """Test node configuration loading."""

    def test_load(self, fixtures_dir):
        config = NodeConfig.load(fixtures_dir / "basecol_node.json")
        assert config.self_source_id == "BBAS0"
        assert config.latest_version().version_id == "VER002"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            NodeConfig.load(tmp_path / "absent.json")

    def test_overlapping_versions(self, tmp_path):
        path = tmp_path / "node.json"
        path.write_text(
            '{"name": "N", "homepage_url": "http://n", "origin_identifier": "ivo://n", "source_prefix": "BN",'
            ' "versions": [{"version_id": "V1", "timestamp": "2015-01-01T00:00:00+00:00", "members": ["X1"]},'
            ' {"version_id": "V2", "timestamp": "2015-02-01T00:00:00+00:00", "members": ["X1"]}]}'
        )
        with pytest.raises(ConfigurationError):
            NodeConfig.load(path)


class TestDataset:
    """Test holdings indexing."""

    def test_wavelength_of_co_line(self):
        wavelength = wavelength_angstrom(Decimal("115271.2021"), "MHz")
        assert Decimal("2.6006E7") <= wavelength <= Decimal("2.6008E7")

    def test_derived_attributes(self, basecol_node):
        attrs = basecol_node.dataset.attributes["PBASC50t2T1c1C1"]
        assert attrs["target.MoleculeStoichiometricFormula"] == "CO"
        assert attrs["collider.AtomSymbol"] == "He"

    def test_sidecar_attributes(self, basecol_node):
        attrs = basecol_node.dataset.attributes["PBASC51"]
        assert attrs["collider.MoleculeChemicalName"] == "para-H2"
        assert "collider.AtomSymbol" not in attrs

    def test_cites(self, cdms_node):
        assert cdms_node.dataset.cites["PCDMS-R15140649"] == ("BCDMS-1921", "BCDMS-1681")

    def test_wavelength_window(self, cdms_node):
        dataset = cdms_node.dataset
        assert dataset.processes_in_window(Decimal("2.6006E7"), Decimal("2.6008E7")) == {"PCDMS-R15140649"}
        assert dataset.candidates(parse_query(CDMS_QUERY)) == ["PCDMS-R15140649"]
        assert len(dataset.processes_in_window(None, None)) == 2

    def test_formula_index(self, basecol_node):
        assert basecol_node.dataset.processes_with_formula("co") == ("PBASC50t2T1c1C1", "PBASC51")

    def test_unknown_sidecar_section(self, fixtures_dir, tmp_path):
        holdings, _ = load(fixtures_dir / "basecol_holdings.xml")
        sidecar_path = tmp_path / "holdings.attrs"
        sidecar_path.write_text("[PNOPE]\nAtomSymbol = He\n")
        with pytest.raises(DatasetError):
            build_dataset(holdings, read_sidecar(sidecar_path))

    def test_advertised_keyword_without_value(self, fixtures_dir):
        with pytest.raises(DatasetError):
            load_dataset(fixtures_dir / "basecol_holdings.xml", restrictables=["collider.AtomSymbol"])

    def test_sidecar_wavelength_is_searchable(self, cdms_node, cdms_now, tmp_path):
        holdings = cdms_node.dataset.holdings
        radiative = tuple(
            r.model_copy(update={"frequency_value": None, "frequency_units": None})
            if r.id == "PCDMS-R15140649"
            else r
            for r in holdings.radiative
        )
        sidecar_path = tmp_path / "holdings.attrs"
        sidecar_path.write_text("[PCDMS-R15140649]\nRadTransWavelength = 2.6007E7\n")
        dataset = build_dataset(
            holdings.model_copy(update={"radiative": radiative}),
            read_sidecar(sidecar_path),
            restrictables=cdms_node.config.restrictables,
        )
        assert dataset.attributes["PCDMS-R15140649"]["RadTransWavelength"] == Decimal("2.6007E7")
        assert dataset.candidates(parse_query(CDMS_QUERY)) == ["PCDMS-R15140649"]

        answer = LocalNode(cdms_node.config, dataset).execute(CDMS_QUERY, cdms_now)
        assert [p.id for p in answer.radiative] == ["PCDMS-R15140649"]

    def test_sidecar_wavelength_not_a_number(self, fixtures_dir, tmp_path):
        holdings, _ = load(fixtures_dir / "cdms_holdings.xml")
        sidecar_path = tmp_path / "holdings.attrs"
        sidecar_path.write_text("[PCDMS-R15140649]\nRadTransWavelength = far\n")
        with pytest.raises(DatasetError):
            build_dataset(holdings, read_sidecar(sidecar_path))

    def test_empty_holdings(self, tmp_path):
        path = tmp_path / "empty.xml"
        path.write_text("")
        dataset = load_dataset(path)
        assert dataset.is_empty()


class TestBasecolAnswer:
    """The BASECOL node reproduces its published extraction."""

    @pytest.fixture
    def answer(self, basecol_node, basecol_now):
        return basecol_node.execute(BASECOL_QUERY, basecol_now)

    def test_origin(self, answer, basecol_doc):
        origin = answer.origins[0]
        expected = basecol_doc.origins[0]
        assert origin.kind is OriginKind.NODE
        assert origin.timestamp == expected.timestamp
        assert origin.versions == expected.versions
        assert origin.query == BASECOL_QUERY
        assert origin.origin_identifier == expected.origin_identifier
        assert origin.homepage_url == expected.homepage_url
        assert origin.name == expected.name

    def test_h2_collision_excluded(self, answer):
        assert [p.id for p in answer.processes] == ["PBASC50t2T1c1C1"]
        assert [m.species_id for m in answer.molecules] == ["XBAS52"]
        assert [s.state_id for s in answer.molecules[0].states] == ["SBASET52-1", "SBASET52-2"]

    def test_self_reference(self, answer, basecol_doc):
        ours = {s.source_id: s for s in answer.sources}
        published = {s.source_id: s for s in basecol_doc.sources}
        assert list(ours) == ["BBAS0", "BBAS849"]
        assert ours["BBAS0"] == published["BBAS0"]

    def test_valid(self, answer):
        report = validate(answer)
        assert report.valid, explain(report)
        assert report.warnings == ()


class TestCdmsAnswer:
    """The CDMS node answers a wavelength window."""

    @pytest.fixture
    def answer(self, cdms_node, cdms_now):
        return cdms_node.execute(CDMS_QUERY, cdms_now)

    def test_only_line_in_window(self, answer):
        assert [p.id for p in answer.radiative] == ["PCDMS-R15140649"]
        assert [s.state_id for s in answer.molecules[0].states] == [
            "SCDMS-83-1",
            "SCDMS-83-2",
            "SCDMS-origin-83",
        ]

    def test_version(self, answer, cdms_doc):
        version = answer.origins[0].version
        assert version.member_set() == cdms_doc.origins[0].version.member_set()
        assert version.timestamp == "2000-10-01T12:00:00+01:00"

    def test_origin_identity(self, answer, cdms_doc):
        origin = answer.origins[0]
        expected = cdms_doc.origins[0]
        assert origin.homepage_url == expected.homepage_url
        assert origin.name == expected.name
        assert origin.origin_identifier == expected.origin_identifier

    def test_cited_sources(self, answer):
        assert [s.source_id for s in answer.sources] == ["BCDMS0", "BCDMS-1921", "BCDMS-1681"]

    def test_self_reference_uri(self, answer):
        self_source = answer.sources[0]
        assert self_source.is_self_reference
        assert self_source.uri.startswith("http://cdms.ph1.uni-koeln.de/cdms/tap/sync?")
        assert self_source.uri.endswith("QUERY=" + answer.origins[0].query)
        assert self_source.year == 2015

    def test_valid(self, answer):
        report = validate(answer)
        assert report.valid, explain(report)


class TestVersionAssignment:
    """Answers spanning releases list one Version per contributing release."""

    def test_two_releases(self, basecol_node):
        from xsams_provenance.model import parse_timestamp

        doc = basecol_node.execute(
            "select * where ((collider.MoleculeChemicalName = 'para-H2'))",
            parse_timestamp("2016-02-01T12:00:00+01:00"),
        )
        versions = {v.version_id: v for v in doc.origins[0].versions}
        assert set(versions) == {"VER001", "VER002"}
        assert versions["VER002"].process_refs == ("PBASC51",)
        assert set(versions["VER002"].members) == {"XBAS1", "SBASET1-1", "SBASET52-3", "PBASC51", "BBAS850"}
        assert "BBAS0" in versions["VER001"].source_refs
        assert validate(doc).valid

    def test_no_match_uses_latest_release(self, basecol_node, basecol_now):
        doc = basecol_node.execute("select * where ((target.MoleculeStoichiometricFormula = 'H2O'))", basecol_now)
        assert doc.processes == ()
        assert doc.sources == ()
        assert [v.version_id for v in doc.origins[0].versions] == ["VER002"]


class TestRemoteNode:
    """Test the HTTP node handle."""

    def test_execute(self, basecol_doc):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen.update(request.url.params)
            seen["path"] = request.url.path
            return httpx.Response(200, content=serialize(basecol_doc))

        node = RemoteNode("ivo://vamdc/basecol/vamdc-tap_12.07", "http://basecol.test/", transport=httpx.MockTransport(handler))
        doc = node.execute(BASECOL_QUERY)
        assert doc.origins[0].name == "Basecol"
        assert seen["path"] == "/tap/sync"
        assert seen["QUERY"] == BASECOL_QUERY
        assert seen["FORMAT"] == "XSAMS"

    def test_server_error(self):
        transport = httpx.MockTransport(lambda request: httpx.Response(503))
        node = RemoteNode("ivo://x", "http://x.test", transport=transport)
        with pytest.raises(NodeUnavailable):
            node.execute(BASECOL_QUERY)

    def test_unreadable_answer(self):
        transport = httpx.MockTransport(lambda request: httpx.Response(200, content=b"<html>down</html>"))
        node = RemoteNode("ivo://x", "http://x.test", transport=transport)
        with pytest.raises(NodeUnavailable):
            node.execute(BASECOL_QUERY)


class TestLocalNode:
    def test_from_files(self, fixtures_dir):
        node = LocalNode.from_files(fixtures_dir / "cdms_node.json", fixtures_dir / "cdms_holdings.xml")
        assert node.origin_identifier == "ivo://vamdc/cdms/vamdc-tap_12.07"
        assert node.dataset.process_ids == ["PCDMS-R15140649", "PCDMS-R15140650"]
