"""
Domain types for provenance-extended XSAMS documents.

The types cover the subset of XSAMS exercised by node extractions and merged
documents (species, states, radiative and collisional processes, sources)
together with the ``Origin``/``Version`` provenance elements. Everything is an
immutable pydantic model; transformations build new values with
``model_copy(update=...)``.

Identifier helpers at the bottom treat the identifier namespace as flat and
document-wide.
"""

import logging
from datetime import date, datetime
from decimal import Decimal
from enum import Enum
from typing import Annotated, Dict, Iterator, List, Literal, Optional, Tuple, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, field_validator

from .errors import DuplicateIdentifier, MultipleVersionMembership, UnresolvedReference

logger = logging.getLogger(__name__)


def parse_timestamp(text: str) -> datetime:
    """Parse an XSAMS timestamp; the offset is mandatory."""
    value = datetime.fromisoformat(text.strip())
    if value.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no timezone offset")
    return value


def format_timestamp(value: datetime) -> str:
    """Render an aware datetime the way the node outputs do (seconds, offset)."""
    if value.tzinfo is None:
        raise ValueError("timestamps must carry a timezone offset")
    return value.isoformat(timespec="seconds")


def _check_timestamp(text: str) -> str:
    parse_timestamp(text)
    return text


# Stored as the original text so offsets such as "+01:00" survive untouched.
Timestamp = Annotated[str, AfterValidator(_check_timestamp)]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)


class OpaqueXml(_Frozen):
    """An unmodeled subtree kept verbatim (exclusive C14N text, blank text removed)."""

    xml: str


# ---------------------------------------------------------------------------
# Provenance
# ---------------------------------------------------------------------------


class OriginKind(str, Enum):
    NODE = "Node"
    PROCESSOR = "Processor"
    OTHER = "Other"


class Version(_Frozen):
    """A dated release of a data resource and the identifiers it claims."""

    version_id: str
    is_global: bool = Field(False, alias="global")
    timestamp: Timestamp
    species_refs: Tuple[str, ...] = ()
    state_refs: Tuple[str, ...] = ()
    process_refs: Tuple[str, ...] = ()
    source_refs: Tuple[str, ...] = ()

    @property
    def members(self) -> Tuple[str, ...]:
        return self.species_refs + self.state_refs + self.process_refs + self.source_refs

    def member_set(self) -> frozenset:
        return frozenset(self.members)

    def without(self, identifiers) -> "Version":
        """Copy with the given identifiers removed from every reference list."""
        drop = set(identifiers)
        return self.model_copy(
            update={
                "species_refs": tuple(i for i in self.species_refs if i not in drop),
                "state_refs": tuple(i for i in self.state_refs if i not in drop),
                "process_refs": tuple(i for i in self.process_refs if i not in drop),
                "source_refs": tuple(i for i in self.source_refs if i not in drop),
            }
        )


class Origin(_Frozen):
    """Provenance tree node: who produced the data, when, and with what query."""

    kind: OriginKind
    timestamp: Timestamp
    versions: Tuple[Version, ...] = Field(..., min_length=1)
    homepage_url: str
    name: str
    comments: Optional[str] = None
    query: Optional[str] = None
    origin_identifier: Optional[str] = None
    sub_origins: Tuple["Origin", ...] = ()

    @property
    def version(self) -> Version:
        return self.versions[0]

    def walk(self) -> Iterator["Origin"]:
        """Yield this origin and every nested origin, depth first."""
        yield self
        for sub in self.sub_origins:
            yield from sub.walk()

    def depth(self) -> int:
        return 1 + max((sub.depth() for sub in self.sub_origins), default=0)


Origin.model_rebuild()


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------


class Source(_Frozen):
    source_id: str
    category: Optional[str] = None
    source_name: Optional[str] = None
    year: int
    authors: Tuple[str, ...] = ()
    title: Optional[str] = None
    volume: Optional[str] = None
    page_begin: Optional[str] = None
    page_end: Optional[str] = None
    uri: Optional[str] = None
    doi: Optional[str] = None
    production_date: Optional[date] = None
    comments: Optional[str] = None

    @property
    def is_self_reference(self) -> bool:
        """A dated database entry: the node's record of the extraction itself."""
        return self.category == "database" and self.production_date is not None


# ---------------------------------------------------------------------------
# Species and states
# ---------------------------------------------------------------------------


class AtomicState(_Frozen):
    state_id: str
    comments: Optional[str] = None
    source_refs: Tuple[str, ...] = ()
    energy_value: Optional[Decimal] = None
    energy_units: Optional[str] = None
    total_angular_momentum: Optional[Decimal] = None
    composition: Optional[OpaqueXml] = None


class AtomSpecies(_Frozen):
    species_id: str
    element_symbol: str
    nuclear_charge: int
    mass_number: Optional[int] = None
    mass_amu: Optional[Decimal] = None
    ion_charge: int = 0
    inchikey: Optional[str] = None
    states: Tuple[AtomicState, ...] = ()


class PartitionFunction(_Frozen):
    temperature_units: str = "K"
    temperatures: Tuple[Decimal, ...]
    values: Tuple[Decimal, ...]


class MolecularState(_Frozen):
    state_id: str
    auxiliary: bool = False
    energy_value: Optional[Decimal] = None
    energy_units: Optional[str] = None
    energy_origin_ref: Optional[str] = None
    total_statistical_weight: Optional[int] = None
    nuclear_statistical_weight: Optional[int] = None
    source_refs: Tuple[str, ...] = ()
    description: Optional[str] = None
    case_id: Optional[str] = None
    # insertion order is the document order of the QNs block
    quantum_numbers: Dict[str, str] = Field(default_factory=dict)


class MoleculeSpecies(_Frozen):
    species_id: str
    ordinary_formula: Optional[str] = None
    stoichiometric_formula: str
    chemical_name: Optional[str] = None
    inchi: Optional[str] = None
    inchikey: Optional[str] = None
    vamdc_species_id: Optional[str] = None
    structure: Optional[OpaqueXml] = None
    partition_function: Optional[PartitionFunction] = None
    molecular_weight: Optional[Decimal] = None
    molecular_weight_units: Optional[str] = None
    comment: Optional[str] = None
    states: Tuple[MolecularState, ...] = ()

    def state(self, state_id: str) -> Optional[MolecularState]:
        return next((s for s in self.states if s.state_id == state_id), None)


# ---------------------------------------------------------------------------
# Processes
# ---------------------------------------------------------------------------


class RadiativeTransition(_Frozen):
    id: str
    process_kind: Optional[str] = None
    source_refs: Tuple[str, ...] = ()
    frequency_value: Optional[Decimal] = None
    frequency_units: Optional[str] = None
    frequency_accuracy: Optional[Decimal] = None
    upper_state_ref: Optional[str] = None
    lower_state_ref: Optional[str] = None
    species_ref: Optional[str] = None
    probability_a_value: Optional[Decimal] = None
    probability_a_units: Optional[str] = None
    idealised_intensity: Optional[Decimal] = None
    idealised_intensity_units: Optional[str] = None
    multipole: Optional[str] = None
    process_class_code: Optional[str] = None


class Participant(_Frozen):
    species_ref: Optional[str] = None
    state_ref: Optional[str] = None


class DataSet(_Frozen):
    description: str
    comments: Optional[str] = None
    x_units: Optional[str] = None
    x_values: Tuple[Decimal, ...] = ()
    y_units: Optional[str] = None
    y_values: Tuple[Decimal, ...] = ()


class CollisionalTransition(_Frozen):
    id: str
    comments: Optional[str] = None
    source_refs: Tuple[str, ...] = ()
    process_class_code: Optional[str] = None
    reactants: Tuple[Participant, ...] = ()
    products: Tuple[Participant, ...] = ()
    datasets: Tuple[DataSet, ...] = ()

    @property
    def participants(self) -> Tuple[Participant, ...]:
        return self.reactants + self.products


Process = Union[RadiativeTransition, CollisionalTransition]
State = Union[AtomicState, MolecularState]
Species = Union[AtomSpecies, MoleculeSpecies]
Element = Union[AtomSpecies, MoleculeSpecies, AtomicState, MolecularState,
                RadiativeTransition, CollisionalTransition, Source, Version]
ElementKind = Literal["species", "state", "process", "source", "version"]


# ---------------------------------------------------------------------------
# Document
# ---------------------------------------------------------------------------


class XsamsDocument(_Frozen):
    """Root container of an XSAMS document."""

    origins: Tuple[Origin, ...] = ()
    atoms: Tuple[AtomSpecies, ...] = ()
    molecules: Tuple[MoleculeSpecies, ...] = ()
    radiative: Tuple[RadiativeTransition, ...] = ()
    collisions: Tuple[CollisionalTransition, ...] = ()
    sources: Tuple[Source, ...] = ()
    comments: Optional[str] = None
    # prefix -> namespace URI as declared on the root; "" is the default namespace
    namespaces: Dict[str, str] = Field(default_factory=dict)
    schema_location: Optional[str] = None

    @field_validator("namespaces")
    @classmethod
    def _no_none_prefix(cls, value: Dict[str, str]) -> Dict[str, str]:
        return {(k or ""): v for k, v in value.items()}

    @property
    def species(self) -> Tuple[Species, ...]:
        return self.atoms + self.molecules

    @property
    def processes(self) -> Tuple[Process, ...]:
        return self.radiative + self.collisions

    def all_origins(self) -> Iterator[Origin]:
        for origin in self.origins:
            yield from origin.walk()

    def all_versions(self) -> Iterator[Version]:
        for origin in self.all_origins():
            yield from origin.versions

    def is_empty(self) -> bool:
        return not (self.origins or self.species or self.processes or self.sources)


# ---------------------------------------------------------------------------
# Identifier helpers
# ---------------------------------------------------------------------------


def iter_declarations(doc: XsamsDocument) -> Iterator[Tuple[str, str, Element]]:
    """Yield ``(identifier, kind, element)`` for every declaration, in document order."""
    for atom in doc.atoms:
        yield atom.species_id, "species", atom
    for molecule in doc.molecules:
        yield molecule.species_id, "species", molecule
    for atom in doc.atoms:
        for atomic_state in atom.states:
            yield atomic_state.state_id, "state", atomic_state
    for molecule in doc.molecules:
        for molecular_state in molecule.states:
            yield molecular_state.state_id, "state", molecular_state
    for process in doc.processes:
        yield process.id, "process", process
    for source in doc.sources:
        yield source.source_id, "source", source
    for version in doc.all_versions():
        yield version.version_id, "version", version


def data_identifiers(doc: XsamsDocument) -> List[str]:
    """Species, state, process and source identifiers in document order."""
    return [ident for ident, kind, _ in iter_declarations(doc) if kind != "version"]


def collect_identifiers(doc: XsamsDocument) -> Dict[str, ElementKind]:
    """Map every declared identifier to its element kind.

    Raises:
        DuplicateIdentifier: if any identifier is declared twice
    """
    kinds: Dict[str, List[str]] = {}
    for identifier, kind, _ in iter_declarations(doc):
        kinds.setdefault(identifier, []).append(kind)
    for identifier, found in kinds.items():
        if len(found) > 1:
            raise DuplicateIdentifier(identifier, found)
    return {identifier: found[0] for identifier, found in kinds.items()}  # type: ignore[misc]


def resolve_ref(doc: XsamsDocument, identifier: str) -> Element:
    """Return the element declared under ``identifier``."""
    collect_identifiers(doc)
    for declared, _, element in iter_declarations(doc):
        if declared == identifier:
            return element
    raise UnresolvedReference(identifier)


def version_claims(doc: XsamsDocument) -> Dict[str, List[str]]:
    """Map each identifier to every version id claiming it (no exclusivity check).

    A global Version covers every data identifier only when its origin is the
    document's sole origin; otherwise it claims just the members it lists.
    """
    sole_origin = sum(1 for _ in doc.all_origins()) == 1
    all_data = data_identifiers(doc)
    claims: Dict[str, List[str]] = {}
    for version in doc.all_versions():
        if version.is_global and sole_origin:
            members = list(all_data) + list(version.members)
        else:
            members = list(version.members)
        for identifier in members:
            claimed = claims.setdefault(identifier, [])
            if version.version_id not in claimed:
                claimed.append(version.version_id)
    return claims


def version_membership(doc: XsamsDocument) -> Dict[str, str]:
    """Map each claimed identifier to the single version claiming it.

    Raises:
        MultipleVersionMembership: if an identifier belongs to two versions
    """
    membership: Dict[str, str] = {}
    for identifier, version_ids in version_claims(doc).items():
        if len(version_ids) > 1:
            raise MultipleVersionMembership(identifier, version_ids)
        membership[identifier] = version_ids[0]
    return membership


def state_owners(doc: XsamsDocument) -> Dict[str, str]:
    """Map each state id to the species id declaring it."""
    owners: Dict[str, str] = {}
    for species in doc.species:
        for state in species.states:
            owners[state.state_id] = species.species_id
    return owners


class Reference(_Frozen):
    referrer: str
    role: str
    target: str


def iter_references(doc: XsamsDocument, include_versions: bool = True) -> Iterator[Reference]:
    """Yield every identifier reference in the document."""
    for species in doc.species:
        for state in species.states:
            for ref in state.source_refs:
                yield Reference(referrer=state.state_id, role="SourceRef", target=ref)
            if isinstance(state, MolecularState) and state.energy_origin_ref:
                yield Reference(referrer=state.state_id, role="energyOrigin", target=state.energy_origin_ref)
    for radiative in doc.radiative:
        for ref in radiative.source_refs:
            yield Reference(referrer=radiative.id, role="SourceRef", target=ref)
        for role, target in (
            ("SpeciesRef", radiative.species_ref),
            ("UpperStateRef", radiative.upper_state_ref),
            ("LowerStateRef", radiative.lower_state_ref),
        ):
            if target:
                yield Reference(referrer=radiative.id, role=role, target=target)
    for collision in doc.collisions:
        for ref in collision.source_refs:
            yield Reference(referrer=collision.id, role="SourceRef", target=ref)
        for participant in collision.participants:
            if participant.species_ref:
                yield Reference(referrer=collision.id, role="SpeciesRef", target=participant.species_ref)
            if participant.state_ref:
                yield Reference(referrer=collision.id, role="StateRef", target=participant.state_ref)
    if include_versions:
        for version in doc.all_versions():
            for role, refs in (
                ("SpeciesRef", version.species_refs),
                ("StateRef", version.state_refs),
                ("ProcessRef", version.process_refs),
                ("SourceRef", version.source_refs),
            ):
                for ref in refs:
                    yield Reference(referrer=version.version_id, role=role, target=ref)
