"""
Tests for reading, writing and digesting XSAMS documents.
"""

from decimal import Decimal

import pytest

from xsams_provenance.errors import MissingRequiredField, UnknownOriginKind, XmlSyntax
from xsams_provenance.model import OriginKind
from xsams_provenance.xml_io import canonical_digest, load, parse, serialize

MINIMAL = b"""<?xml version="1.0" encoding="UTF-8"?>
<XSAMSData xmlns="http://vamdc.org/xml/xsams/1.0" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance">
  <Origin xsi:type="%s">
    <Timestamp>2015-12-03T14:40:21+01:00</Timestamp>
    <Version versionID="V1" timestamp="2015-09-01T08:10:12+01:00" global="true"/>
    <HomepageUrl>http://example.org</HomepageUrl>
    <Name>Example</Name>
    %s
  </Origin>
  <Sources>
    <Source sourceID="B1">
      <Year>2001</Year>
      <Comments>A &amp; B</Comments>
    </Source>
  </Sources>
</XSAMSData>
"""


def minimal(kind: str = "OtherOriginType", extra: str = "") -> bytes:
    return MINIMAL % (kind.encode(), extra.encode())


class TestParse:
    """Test mapping XML onto the model."""

    def test_node_origin(self, basecol_doc):
        origin = basecol_doc.origins[0]
        assert origin.kind is OriginKind.NODE
        assert origin.name == "Basecol"
        assert origin.origin_identifier == "ivo://vamdc/basecol/vamdc-tap_12.07"
        assert origin.timestamp == "2015-12-03T14:40:21+01:00"
        assert origin.version.version_id == "VER001"
        assert "collider.AtomSymbol" in origin.query

    def test_nested_origins(self, merged_doc):
        root = merged_doc.origins[0]
        assert root.kind is OriginKind.OTHER
        assert [sub.kind for sub in root.sub_origins] == [OriginKind.NODE, OriginKind.NODE]
        assert root.version.version_id == "VERMER1"

    def test_quantum_numbers_in_order(self, cdms_doc):
        molecule = cdms_doc.molecules[0]
        state = molecule.state("SCDMS-83-2")
        assert list(state.quantum_numbers) == ["ElecStateLabel", "v", "J"]
        assert state.quantum_numbers["J"] == "1"
        assert state.energy_origin_ref == "SCDMS-origin-83"
        assert molecule.state("SCDMS-origin-83").auxiliary is True

    def test_radiative_line(self, cdms_doc):
        line = cdms_doc.radiative[0]
        assert line.frequency_value == Decimal("115271.2021")
        assert line.frequency_units == "MHz"
        assert (line.upper_state_ref, line.lower_state_ref) == ("SCDMS-83-2", "SCDMS-83-1")

    def test_collision_tables(self, basecol_doc):
        collision = basecol_doc.collisions[0]
        dataset = collision.datasets[0]
        assert len(dataset.x_values) == len(dataset.y_values) == 10
        assert dataset.y_values[0] == Decimal("3.4E-11")
        assert collision.reactants[0].state_ref == "SBASET52-2"

    def test_partition_function(self, cdms_doc):
        pf = cdms_doc.molecules[0].partition_function
        assert pf is not None
        assert len(pf.temperatures) == len(pf.values)

    def test_namespaces_recorded(self, basecol_doc):
        assert basecol_doc.namespaces[""] == "http://vamdc.org/xml/xsams/1.0"
        assert "dcs" in basecol_doc.namespaces

    def test_global_version(self):
        doc, _ = parse(minimal())
        assert doc.origins[0].version.is_global is True
        assert doc.sources[0].comments == "A & B"


class TestParseErrors:
    """Test rejection of malformed input."""

    def test_not_well_formed(self):
        with pytest.raises(XmlSyntax) as exc_info:
            parse(b"<XSAMSData><Origin></XSAMSData>")
        assert exc_info.value.location[0] == 1

    def test_wrong_root(self):
        with pytest.raises(XmlSyntax):
            parse(b"<Something/>")

    def test_unknown_origin_kind(self):
        with pytest.raises(UnknownOriginKind) as exc_info:
            parse(minimal("MadeUpOriginType"))
        assert exc_info.value.value == "MadeUpOriginType"

    def test_node_without_query(self):
        with pytest.raises(MissingRequiredField) as exc_info:
            parse(minimal("VamdcNodeOriginType", "<OriginIdentifier>ivo://x</OriginIdentifier>"))
        assert exc_info.value.field == "Query"

    def test_processor_without_identifier(self):
        with pytest.raises(MissingRequiredField) as exc_info:
            parse(minimal("VamdcProcessorOriginType"))
        assert exc_info.value.field == "OriginIdentifier"

    def test_raw_ampersand_rejected(self):
        with pytest.raises(XmlSyntax):
            parse(minimal().replace(b"A &amp; B", b"A & B"))


class TestRecover:
    """Test the recovering parser."""

    def test_raw_ampersand_recovered(self):
        doc, diagnostics = parse(minimal().replace(b"A &amp; B", b"A & B"), recover=True)
        assert diagnostics.recovered is True
        assert diagnostics.warnings
        (line, _), message = diagnostics.warnings[0]
        assert line > 0
        assert message
        assert doc.sources[0].source_id == "B1"

    def test_clean_input_has_no_warnings(self, fixtures_dir):
        _, diagnostics = load(fixtures_dir / "basecol_extraction.xml", recover=True)
        assert diagnostics.recovered is False
        assert diagnostics.warnings == []


class TestSerialize:
    """Test writing documents back."""

    @pytest.mark.parametrize("name", ["basecol_extraction.xml", "cdms_extraction.xml", "spectcol_merge.xml"])
    def test_round_trip(self, fixtures_dir, name):
        doc, _ = load(fixtures_dir / name)
        again, _ = parse(serialize(doc))
        assert again == doc

    def test_origin_written_first(self, merged_doc):
        text = serialize(merged_doc).decode("utf-8")
        assert text.index("<Origin") < text.index("<Species>")
        assert 'xsi:type="OtherOriginType"' in text

    def test_serialize_is_stable(self, cdms_doc):
        assert serialize(cdms_doc) == serialize(parse(serialize(cdms_doc))[0])


class TestCanonicalDigest:
    """Test the content digest."""

    def test_ignores_extraction_stamps(self, basecol_doc):
        origin = basecol_doc.origins[0].model_copy(update={"timestamp": "2020-01-01T00:00:00+00:00"})
        sources = tuple(
            s.model_copy(update={"year": 2020}) if s.is_self_reference else s for s in basecol_doc.sources
        )
        restamped = basecol_doc.model_copy(update={"origins": (origin,), "sources": sources})
        assert canonical_digest(restamped) == canonical_digest(basecol_doc)

    def test_sensitive_to_data(self, basecol_doc):
        collision = basecol_doc.collisions[0]
        dataset = collision.datasets[0]
        changed = dataset.model_copy(update={"y_values": (Decimal("9.9E-11"),) + dataset.y_values[1:]})
        doc = basecol_doc.model_copy(
            update={"collisions": (collision.model_copy(update={"datasets": (changed,)}),)}
        )
        assert canonical_digest(doc) != canonical_digest(basecol_doc)

    def test_independent_of_prefixes(self, basecol_doc):
        renamed = basecol_doc.model_copy(update={"namespaces": {"": "http://vamdc.org/xml/xsams/1.0"}})
        assert canonical_digest(renamed) == canonical_digest(basecol_doc)

    def test_hex_sha256(self, cdms_doc):
        digest = canonical_digest(cdms_doc)
        assert len(digest) == 64
        int(digest, 16)

    @pytest.mark.parametrize("fixture_name", ["basecol_doc", "cdms_doc", "merged_doc"])
    def test_sensitive_to_version_members(self, request, fixture_name):
        doc = request.getfixturevalue(fixture_name)
        root = doc.origins[0]
        version = root.version
        edited = version.without({version.members[0]})
        changed = doc.model_copy(
            update={"origins": (root.model_copy(update={"versions": (edited,) + root.versions[1:]}),)}
        )
        assert canonical_digest(changed) != canonical_digest(doc)

