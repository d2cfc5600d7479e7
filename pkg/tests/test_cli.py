"""
Tests for the xsams-provenance command line.
"""

import json

import bibtexparser
import pytest

from tests.conftest import BASECOL_QUERY, FIXTURES
from xsams_provenance.cli import EXIT_INVALID, EXIT_NO_INPUT, EXIT_OK, EXIT_PARSE_FAILURE, EXIT_USAGE, run
from xsams_provenance.xml_io import load

BASECOL_NOW = "2015-12-03T14:40:21+01:00"


@pytest.fixture(autouse=True)
def no_service_env(monkeypatch, tmp_path):
    for name in ("QS_JOURNAL_PATH", "QS_DOCUMENTS_DIR", "NODE_CONFIG_PATH", "NODE_HOLDINGS_PATH", "QS_REMOTE_NODES"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def journal(tmp_path):
    return str(tmp_path / "journal.jsonl")


def fixture(name: str) -> str:
    return str(FIXTURES / name)


class TestUsage:
    def test_no_command(self, capsys):
        assert run([]) == EXIT_USAGE
        assert "usage" in capsys.readouterr().err

    def test_unknown_option(self):
        assert run(["validate", "--bogus", fixture("basecol_extraction.xml")]) == EXIT_USAGE

    def test_store_without_subcommand(self):
        assert run(["store"]) == EXIT_USAGE

    @pytest.mark.parametrize("match_on", [",", " , "])
    def test_merge_without_match_keys(self, capsys, match_on):
        code = run(
            [
                "merge",
                "--spectroscopic", fixture("cdms_extraction.xml"),
                "--collisional", fixture("basecol_extraction.xml"),
                "--match-on", match_on,
            ]
        )
        assert code == EXIT_USAGE
        assert "--match-on" in capsys.readouterr().err

    def test_help(self, capsys):
        assert run(["--help"]) == EXIT_OK
        assert "Examples:" in capsys.readouterr().out


class TestValidate:
    """Test the validate command and its exit codes."""

    @pytest.mark.parametrize("name", ["basecol_extraction.xml", "cdms_extraction.xml", "spectcol_merge.xml"])
    def test_valid(self, capsys, name):
        assert run(["validate", fixture(name)]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "OK: 0 errors, 0 warnings"

    def test_invalid(self, capsys, tmp_path):
        broken = tmp_path / "broken.xml"
        text = (FIXTURES / "basecol_extraction.xml").read_text(encoding="utf-8")
        broken.write_text(text.replace("<SourceRef>BBAS849</SourceRef>", "<SourceRef>BNOPE</SourceRef>", 1))
        assert run(["validate", str(broken)]) == EXIT_INVALID
        out = capsys.readouterr().out
        assert "UnresolvedReference" in out
        assert "INVALID" in out

    def test_malformed(self, tmp_path):
        broken = tmp_path / "broken.xml"
        broken.write_text("<XSAMSData><Sources>")
        assert run(["validate", str(broken)]) == EXIT_PARSE_FAILURE

    def test_missing_file(self, tmp_path):
        assert run(["validate", str(tmp_path / "nothing.xml")]) == EXIT_NO_INPUT


class TestDocumentCommands:
    """Test bibtex, merge and query."""

    def test_bibtex_to_file(self, tmp_path):
        out = tmp_path / "refs.bib"
        assert run(["bibtex", fixture("spectcol_merge.xml"), "--no-self", "--out", str(out)]) == EXIT_OK
        database = bibtexparser.loads(out.read_text(encoding="utf-8"))
        assert len(database.entries) == 3

    def test_bibtex_to_stdout(self, capsys):
        assert run(["bibtex", fixture("basecol_extraction.xml")]) == EXIT_OK
        assert "Balakrishnan2002:BBAS849" in capsys.readouterr().out

    def test_merge(self, tmp_path):
        out = tmp_path / "merged.xml"
        code = run(
            [
                "merge",
                "--spectroscopic", fixture("cdms_extraction.xml"),
                "--collisional", fixture("basecol_extraction.xml"),
                "--match-on", "J",
                "--tool-name", "Spectcol",
                "--now", "2015-12-07T15:50:21+01:00",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        merged, _ = load(out)
        assert merged.origins[0].version.version_id == "VERMER1"
        assert [m.species_id for m in merged.molecules] == ["XCDMS-83"]

    def test_merge_unmatched(self, capsys, tmp_path):
        code = run(
            [
                "merge",
                "--spectroscopic", fixture("cdms_extraction.xml"),
                "--collisional", fixture("basecol_extraction.xml"),
                "--match-on", "J,Ka",
                "--out", str(tmp_path / "merged.xml"),
            ]
        )
        assert code == EXIT_INVALID
        assert "UnmatchedReferencedState" in capsys.readouterr().err

    def test_query(self, capsys):
        code = run(
            [
                "query",
                "--node", fixture("basecol_node.json"),
                "--holdings", fixture("basecol_holdings.xml"),
                "--query", BASECOL_QUERY,
                "--now", BASECOL_NOW,
            ]
        )
        assert code == EXIT_OK
        assert "PBASC50t2T1c1C1" in capsys.readouterr().out

    def test_query_syntax_error(self, capsys):
        code = run(
            [
                "query",
                "--node", fixture("basecol_node.json"),
                "--holdings", fixture("basecol_holdings.xml"),
                "--query", "select everything",
            ]
        )
        assert code == EXIT_INVALID
        assert "QuerySyntax" in capsys.readouterr().err

    def test_bad_timestamp(self):
        assert run(["merge", "--spectroscopic", "a", "--collisional", "b", "--match-on", "J", "--now", "today"]) == EXIT_USAGE


class TestStoreCommands:
    """Test the Query Store commands against a temporary journal."""

    def register(self, capsys, journal, path) -> str:
        assert run(["store", "--journal", journal, "register", str(path)]) == EXIT_OK
        return json.loads(capsys.readouterr().out)["identifier"]

    def test_register_and_resolve(self, capsys, journal):
        identifier = self.register(capsys, journal, fixture("basecol_extraction.xml"))
        assert run(["store", "--journal", journal, "resolve", identifier]) == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["node_name"] == "Basecol"
        assert record["canonical_query"] == BASECOL_QUERY

    def test_resolve_formats(self, capsys, journal, tmp_path):
        identifier = self.register(capsys, journal, fixture("basecol_extraction.xml"))
        out = tmp_path / "doc.xml"
        assert run(["store", "--journal", journal, "resolve", identifier, "--format", "xsams", "--out", str(out)]) == 0
        assert out.read_bytes() == (FIXTURES / "basecol_extraction.xml").read_bytes()
        assert run(["store", "--journal", journal, "resolve", identifier, "--format", "html"]) == EXIT_OK
        assert identifier in capsys.readouterr().out

    def test_resolve_unknown(self, capsys, journal):
        assert run(["store", "--journal", journal, "resolve", "vamdc-qs:0000000000000000"]) == EXIT_INVALID
        assert "UnknownIdentifier" in capsys.readouterr().err

    def test_register_invalid(self, capsys, journal, tmp_path):
        broken = tmp_path / "broken.xml"
        text = (FIXTURES / "basecol_extraction.xml").read_text(encoding="utf-8")
        broken.write_text(text.replace("<SourceRef>BBAS849</SourceRef>", "<SourceRef>BNOPE</SourceRef>", 1))
        assert run(["store", "--journal", journal, "register", str(broken)]) == EXIT_INVALID
        assert "InvalidDocument" in capsys.readouterr().err

    def test_reexecute(self, capsys, journal, tmp_path):
        answer = tmp_path / "answer.xml"
        node_args = ["--node", fixture("basecol_node.json"), "--holdings", fixture("basecol_holdings.xml")]
        query = ["query", *node_args, "--query", BASECOL_QUERY, "--now", BASECOL_NOW, "--out", str(answer)]
        assert run(query) == EXIT_OK
        identifier = self.register(capsys, journal, answer)

        assert run(["store", "--journal", journal, "reexecute", identifier, *node_args]) == EXIT_OK
        assert "digest match: yes" in capsys.readouterr().err

    def test_reexecute_without_node(self, capsys, journal):
        identifier = self.register(capsys, journal, fixture("basecol_extraction.xml"))
        assert run(["store", "--journal", journal, "reexecute", identifier]) == EXIT_INVALID
        assert "NodeUnavailable" in capsys.readouterr().err

    def test_reexecute_needs_both_node_files(self, journal):
        args = ["store", "--journal", journal, "reexecute", "vamdc-qs:0", "--node", fixture("basecol_node.json")]
        assert run(args) == EXIT_USAGE
