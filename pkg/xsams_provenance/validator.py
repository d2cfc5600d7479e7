"""
Provenance rules for parsed documents.

Each rule is a function yielding ``Finding`` values; ``validate`` runs them all
and sorts the findings into errors and warnings. Nothing here raises on a bad
document.
"""

import logging
from typing import Callable, Dict, Iterator, List, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .model import (
    MolecularState,
    Origin,
    OriginKind,
    XsamsDocument,
    data_identifiers,
    iter_declarations,
    iter_references,
    parse_timestamp,
    state_owners,
    version_claims,
)

logger = logging.getLogger(__name__)

ERROR = "error"
WARNING = "warning"


class Finding(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    subject: str
    message: str
    severity: str = ERROR


class ValidationReport(BaseModel):
    """Errors and warnings found in a document; valid iff there are no errors."""

    model_config = ConfigDict(frozen=True)

    errors: Tuple[Finding, ...] = ()
    warnings: Tuple[Finding, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.errors

    def codes(self) -> List[str]:
        return sorted(f.code for f in self.errors)


Rule = Callable[[XsamsDocument], Iterator[Finding]]


def _origin_subject(origin: Origin) -> str:
    return origin.origin_identifier or origin.name or origin.homepage_url


def _error(code: str, subject: str, message: str) -> Finding:
    return Finding(code=code, subject=subject, message=message, severity=ERROR)


def _warning(code: str, subject: str, message: str) -> Finding:
    return Finding(code=code, subject=subject, message=message, severity=WARNING)


# ---------------------------------------------------------------------------
# Origin rules
# ---------------------------------------------------------------------------


def check_origins(doc: XsamsDocument) -> Iterator[Finding]:
    for origin in doc.all_origins():
        subject = _origin_subject(origin)
        for field, value in (("HomepageUrl", origin.homepage_url), ("Name", origin.name)):
            if not value:
                yield _error("MissingRequiredField", subject, f"Origin has an empty {field}")
        if origin.kind in (OriginKind.NODE, OriginKind.PROCESSOR) and not origin.origin_identifier:
            yield _error("MissingRequiredField", subject, f"{origin.kind.value} origin without OriginIdentifier")

        if origin.kind is OriginKind.NODE:
            if not origin.query:
                yield _error("MissingRequiredField", subject, "Node origin without Query")
            if origin.sub_origins:
                yield _error(
                    "NodeOriginWithSubOrigins",
                    subject,
                    f"Node origin nests {len(origin.sub_origins)} origin(s)",
                )
        elif origin.kind is OriginKind.PROCESSOR:
            if not origin.sub_origins:
                yield _error("ProcessorWithoutSubOrigins", subject, "Processor origin nests no origin")
        elif origin.query is not None:
            yield _error("OtherOriginWithQuery", subject, "Other origin carries a Query")


def check_timestamps(doc: XsamsDocument) -> Iterator[Finding]:
    for origin in doc.all_origins():
        extracted = parse_timestamp(origin.timestamp)
        for version in origin.versions:
            if parse_timestamp(version.timestamp) > extracted:
                yield _warning(
                    "PublicationAfterExtraction",
                    version.version_id,
                    f"published {version.timestamp}, extracted {origin.timestamp}",
                )


def check_global_versions(doc: XsamsDocument) -> Iterator[Finding]:
    origin_count = sum(1 for _ in doc.all_origins())
    for version in doc.all_versions():
        if not version.is_global:
            continue
        if origin_count != 1:
            yield _error(
                "GlobalVersionWithMultipleOrigins",
                version.version_id,
                f"global Version in a document with {origin_count} origins",
            )
        if version.members:
            yield _error(
                "GlobalVersionWithReferences",
                version.version_id,
                f"global Version lists {len(version.members)} reference(s)",
            )


# ---------------------------------------------------------------------------
# Identifier rules
# ---------------------------------------------------------------------------


def check_duplicate_identifiers(doc: XsamsDocument) -> Iterator[Finding]:
    kinds: Dict[str, List[str]] = {}
    for identifier, kind, _ in iter_declarations(doc):
        kinds.setdefault(identifier, []).append(kind)
    for identifier, found in kinds.items():
        if len(found) > 1:
            yield _error("DuplicateIdentifier", identifier, f"declared {len(found)} times ({', '.join(found)})")


_EXPECTED_KIND = {
    "SourceRef": "source",
    "SpeciesRef": "species",
    "StateRef": "state",
    "UpperStateRef": "state",
    "LowerStateRef": "state",
    "energyOrigin": "state",
    "ProcessRef": "process",
}


def check_references(doc: XsamsDocument) -> Iterator[Finding]:
    declared: Dict[str, Set[str]] = {}
    for identifier, kind, _ in iter_declarations(doc):
        declared.setdefault(identifier, set()).add(kind)
    for ref in iter_references(doc):
        expected = _EXPECTED_KIND[ref.role]
        kinds = declared.get(ref.target)
        if kinds is None:
            yield _error("UnresolvedReference", ref.target, f"{ref.role} from {ref.referrer} does not resolve")
        elif expected not in kinds:
            yield _error(
                "UnresolvedReference",
                ref.target,
                f"{ref.role} from {ref.referrer} names a {'/'.join(sorted(kinds))}, not a {expected}",
            )


def check_version_membership(doc: XsamsDocument) -> Iterator[Finding]:
    for identifier, version_ids in version_claims(doc).items():
        if len(version_ids) > 1:
            yield _error(
                "MultipleVersionMembership",
                identifier,
                f"claimed by versions {', '.join(version_ids)}",
            )


def check_orphans(doc: XsamsDocument) -> Iterator[Finding]:
    claims = version_claims(doc)
    for identifier in data_identifiers(doc):
        if identifier not in claims:
            yield _warning("VersionOrphan", identifier, "belongs to no Version")


# ---------------------------------------------------------------------------
# Species and process consistency
# ---------------------------------------------------------------------------


def check_state_species(doc: XsamsDocument) -> Iterator[Finding]:
    owners = state_owners(doc)

    def mismatch(process_id: str, species_ref, state_ref) -> Iterator[Finding]:
        if species_ref and state_ref and state_ref in owners and owners[state_ref] != species_ref:
            yield _error(
                "StateSpeciesMismatch",
                process_id,
                f"state {state_ref} belongs to {owners[state_ref]}, not {species_ref}",
            )

    for line in doc.radiative:
        for state_ref in (line.upper_state_ref, line.lower_state_ref):
            yield from mismatch(line.id, line.species_ref, state_ref)
    for collision in doc.collisions:
        for participant in collision.participants:
            yield from mismatch(collision.id, participant.species_ref, participant.state_ref)


def check_energy_origins(doc: XsamsDocument) -> Iterator[Finding]:
    owners = state_owners(doc)
    for molecule in doc.molecules:
        for state in molecule.states:
            if not isinstance(state, MolecularState) or not state.energy_origin_ref:
                continue
            owner = owners.get(state.energy_origin_ref)
            if owner is not None and owner != molecule.species_id:
                yield _error(
                    "EnergyOriginMismatch",
                    state.state_id,
                    f"energy origin {state.energy_origin_ref} lies outside {molecule.species_id}",
                )


def check_tables(doc: XsamsDocument) -> Iterator[Finding]:
    for collision in doc.collisions:
        for dataset in collision.datasets:
            if len(dataset.x_values) != len(dataset.y_values):
                yield _error(
                    "DatasetLengthMismatch",
                    collision.id,
                    f"{dataset.description}: {len(dataset.x_values)} x values, {len(dataset.y_values)} y values",
                )
    for molecule in doc.molecules:
        pf = molecule.partition_function
        if pf is not None and len(pf.temperatures) != len(pf.values):
            yield _error(
                "PartitionFunctionLengthMismatch",
                molecule.species_id,
                f"{len(pf.temperatures)} temperatures, {len(pf.values)} values",
            )
    for atom in doc.atoms:
        if atom.nuclear_charge < 1:
            yield _error("InvalidNuclearCharge", atom.species_id, f"nuclear charge {atom.nuclear_charge}")


def check_sources(doc: XsamsDocument) -> Iterator[Finding]:
    for source in doc.sources:
        if not source.source_id.strip():
            yield _error("MissingRequiredField", "<source>", "Source with an empty sourceID")
        if not 1000 <= source.year <= 9999:
            yield _error("InvalidSourceYear", source.source_id, f"year {source.year} is not four digits")
        if not source.authors and not source.comments:
            yield _warning("SourceWithoutAuthors", source.source_id, "no authors and no comments")


RULES: List[Rule] = [
    check_origins,
    check_timestamps,
    check_global_versions,
    check_duplicate_identifiers,
    check_references,
    check_version_membership,
    check_orphans,
    check_state_species,
    check_energy_origins,
    check_tables,
    check_sources,
]


def validate(doc: XsamsDocument) -> ValidationReport:
    """Run every rule over ``doc``."""
    errors: List[Finding] = []
    warnings: List[Finding] = []
    for rule in RULES:
        for finding in rule(doc):
            (errors if finding.severity == ERROR else warnings).append(finding)

    def order(f: Finding):
        return (f.code, f.subject, f.message)

    report = ValidationReport(errors=tuple(sorted(errors, key=order)), warnings=tuple(sorted(warnings, key=order)))
    if report.warnings:
        logger.warning(f"Validation produced {len(report.warnings)} warning(s)")
    return report


def explain(report: ValidationReport) -> str:
    """One line per finding, errors first, then a summary line."""
    lines = [f"ERROR {f.code} {f.subject}: {f.message}" for f in report.errors]
    lines += [f"WARN {f.code} {f.subject}: {f.message}" for f in report.warnings]
    status = "OK" if report.valid else "INVALID"
    lines.append(f"{status}: {len(report.errors)} errors, {len(report.warnings)} warnings")
    return "\n".join(lines)
