"""
Tests for the document model and identifier helpers.
"""

import pytest
from pydantic import ValidationError

from xsams_provenance.errors import DuplicateIdentifier, MultipleVersionMembership, UnresolvedReference
from xsams_provenance.model import (
    AtomSpecies,
    MolecularState,
    Origin,
    OriginKind,
    Source,
    Version,
    collect_identifiers,
    data_identifiers,
    format_timestamp,
    iter_references,
    parse_timestamp,
    resolve_ref,
    state_owners,
    version_membership,
)
from xsams_provenance.validator import validate


class TestTimestamps:
    """Test timestamp parsing and formatting."""

    def test_offset_is_kept(self):
        value = parse_timestamp("2015-12-03T14:40:21+01:00")
        assert format_timestamp(value) == "2015-12-03T14:40:21+01:00"

    def test_missing_offset_rejected(self):
        with pytest.raises(ValueError):
            parse_timestamp("2015-12-03T14:40:21")

    def test_version_rejects_naive_timestamp(self):
        with pytest.raises(ValidationError):
            Version(version_id="V1", timestamp="2015-12-03T14:40:21")


class TestOrigin:
    """Test the provenance tree."""

    def test_requires_a_version(self):
        with pytest.raises(ValidationError):
            Origin(
                kind=OriginKind.OTHER,
                timestamp="2015-12-07T15:50:21+01:00",
                versions=(),
                homepage_url="http://example.org",
                name="tool",
            )

    def test_walk_and_depth(self, merged_doc):
        root = merged_doc.origins[0]
        names = [o.name for o in root.walk()]
        assert names == ["Spectcol", "CDMS database", "Basecol"]
        assert root.depth() == 2

    def test_global_alias(self):
        version = Version.model_validate({"version_id": "V", "global": True, "timestamp": "2015-01-01T00:00:00+00:00"})
        assert version.is_global is True

    def test_without_removes_from_every_list(self, basecol_doc):
        version = basecol_doc.origins[0].version.without({"XBAS2", "BBAS0", "PBASC50t2T1c1C1"})
        assert "XBAS2" not in version.members
        assert version.source_refs == ("BBAS849",)
        assert version.process_refs == ()


class TestSource:
    """Test self-reference detection."""

    def test_dated_database_entry_is_self_reference(self, basecol_doc):
        sources = {s.source_id: s for s in basecol_doc.sources}
        assert sources["BBAS0"].is_self_reference
        assert not sources["BBAS849"].is_self_reference

    def test_undated_database_entry_is_not(self, cdms_doc):
        sources = {s.source_id: s for s in cdms_doc.sources}
        assert sources["BCDMS0"].is_self_reference
        assert not sources["BCDMS-1921"].is_self_reference


class TestIdentifiers:
    """Test the flat identifier namespace."""

    def test_collect_identifiers(self, basecol_doc):
        kinds = collect_identifiers(basecol_doc)
        assert kinds["XBAS2"] == "species"
        assert kinds["SBASET52-1"] == "state"
        assert kinds["PBASC50t2T1c1C1"] == "process"
        assert kinds["BBAS849"] == "source"
        assert kinds["VER001"] == "version"

    def test_data_identifiers_in_document_order(self, basecol_doc):
        assert data_identifiers(basecol_doc) == [
            "XBAS2",
            "XBAS52",
            "SBASET54-1",
            "SBASET52-1",
            "SBASET52-2",
            "PBASC50t2T1c1C1",
            "BBAS0",
            "BBAS849",
        ]

    def test_duplicate_identifier(self, basecol_doc):
        clash = Source(source_id="XBAS2", year=2000, authors=("A. Author",))
        doc = basecol_doc.model_copy(update={"sources": basecol_doc.sources + (clash,)})
        with pytest.raises(DuplicateIdentifier) as exc_info:
            collect_identifiers(doc)
        assert exc_info.value.identifier == "XBAS2"
        assert set(exc_info.value.kinds) == {"species", "source"}

    def test_resolve_ref(self, basecol_doc):
        element = resolve_ref(basecol_doc, "XBAS2")
        assert isinstance(element, AtomSpecies)
        assert element.element_symbol == "He"

    def test_resolve_unknown(self, basecol_doc):
        with pytest.raises(UnresolvedReference):
            resolve_ref(basecol_doc, "SNOPE")

    def test_state_owners(self, basecol_doc):
        owners = state_owners(basecol_doc)
        assert owners["SBASET54-1"] == "XBAS2"
        assert owners["SBASET52-2"] == "XBAS52"

    def test_energy_origin_reference(self, basecol_doc):
        refs = [r for r in iter_references(basecol_doc) if r.role == "energyOrigin"]
        assert {(r.referrer, r.target) for r in refs} == {
            ("SBASET52-1", "SBASET52-1"),
            ("SBASET52-2", "SBASET52-1"),
        }
        molecule = basecol_doc.molecules[0]
        assert isinstance(molecule.state("SBASET52-2"), MolecularState)


class TestVersionMembership:
    """Test version membership resolution."""

    def test_single_membership(self, merged_doc):
        membership = version_membership(merged_doc)
        assert membership["PBASC50t2T1c1C1"] == "VERMER1"
        assert membership["XCDMS-83"] == "VERCDMS1"
        assert membership["XBAS2"] == "VER001"

    def test_global_version_of_sole_origin(self, basecol_doc):
        root = basecol_doc.origins[0]
        version = Version(version_id="VER001", timestamp=root.version.timestamp, is_global=True)
        doc = basecol_doc.model_copy(update={"origins": (root.model_copy(update={"versions": (version,)}),)})
        membership = version_membership(doc)
        assert set(membership) == set(data_identifiers(doc))
        assert set(membership.values()) == {"VER001"}

    def test_global_version_among_several_origins(self, merged_doc):
        root = merged_doc.origins[0]
        cdms, basecol = root.sub_origins
        flagged = basecol.version.model_copy(update={"is_global": True})
        basecol = basecol.model_copy(update={"versions": (flagged,)})
        doc = merged_doc.model_copy(
            update={"origins": (root.model_copy(update={"sub_origins": (cdms, basecol)}),)}
        )
        assert version_membership(doc) == version_membership(merged_doc)
        codes = validate(doc).codes()
        assert "GlobalVersionWithMultipleOrigins" in codes
        assert "MultipleVersionMembership" not in codes

    def test_double_membership(self, basecol_doc):
        root = basecol_doc.origins[0]
        second = Version(version_id="VER002", timestamp="2015-10-01T00:00:00+01:00", state_refs=("SBASET52-1",))
        doc = basecol_doc.model_copy(
            update={"origins": (root.model_copy(update={"versions": root.versions + (second,)}),)}
        )
        with pytest.raises(MultipleVersionMembership) as exc_info:
            version_membership(doc)
        assert exc_info.value.version_ids == ("VER001", "VER002")
