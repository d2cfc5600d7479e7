"""
Simulated data node.

A node holds its full XSAMS holdings plus an attribute map per process (the
restrictable keywords a query can test), answers parsed queries with the
matching processes and everything they reference, and stamps each answer
with a ``VamdcNodeOriginType`` origin.

Attribute sidecars are INI files next to the holdings (``<holdings>.attrs``)
with one section per process id::

    [PCDMS-R15140649]
    @cites = BCDMS-1921 BCDMS-1681
    MoleculeStoichiometricFormula = CO

``@cites`` names sources the node attributes to a process without the
process listing them.
"""

import bisect
import configparser
import json
import logging
from datetime import datetime
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Protocol, Set, Tuple, Union

import httpx
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy import constants

from .errors import ConfigurationError, DatasetError, NodeUnavailable, XsamsError
from .model import (
    AtomSpecies,
    MolecularState,
    MoleculeSpecies,
    Origin,
    OriginKind,
    Process,
    RadiativeTransition,
    Source,
    Species,
    Timestamp,
    Version,
    XsamsDocument,
    format_timestamp,
    iter_declarations,
    parse_timestamp,
    state_owners,
)
from .query import Operator, QueryAst, evaluate, parse_query, render
from .xml_io import DEFAULT_NAMESPACES, parse

logger = logging.getLogger(__name__)

CITES = "@cites"
WAVELENGTH = "RadTransWavelength"
FREQUENCY = "RadTransFrequency"
NUMERIC_KEYWORDS = (WAVELENGTH, FREQUENCY)

# exact by SI definition
SPEED_OF_LIGHT = Decimal(repr(constants.c))  # m/s
_HZ_PER_UNIT = {
    "Hz": Decimal(1),
    "kHz": Decimal("1E3"),
    "MHz": Decimal("1E6"),
    "GHz": Decimal("1E9"),
}
_ANGSTROM_PER_METRE = Decimal("1E10")


def frequency_hz(value: Decimal, units: str) -> Decimal:
    """Frequency in Hz from a frequency or a wavenumber (``1/cm``)."""
    if units == "1/cm":
        return value * SPEED_OF_LIGHT * 100
    try:
        return value * _HZ_PER_UNIT[units]
    except KeyError:
        raise DatasetError(f"unsupported frequency units {units!r}") from None


def wavelength_angstrom(value: Decimal, units: str) -> Decimal:
    """Vacuum wavelength in Å for a line given in ``units``."""
    return SPEED_OF_LIGHT * _ANGSTROM_PER_METRE / frequency_hz(value, units)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class NodeVersion(BaseModel):
    model_config = ConfigDict(frozen=True)

    version_id: str
    timestamp: Timestamp
    members: Tuple[str, ...] = ()


class NodeConfig(BaseModel):
    """Identity and release history of a node."""

    model_config = ConfigDict(frozen=True)

    name: str
    homepage_url: str
    origin_identifier: str
    versions: Tuple[NodeVersion, ...] = Field(..., min_length=1)
    source_prefix: str = Field(..., description="Prefix of source ids; the self-reference is prefix + '0'")
    database_name: Optional[str] = None
    database_uri: Optional[str] = None
    sync_url: Optional[str] = Field(None, description="TAP sync endpoint quoted in the self-reference URI")
    authors: Tuple[str, ...] = ()
    comments: Optional[str] = None
    restrictables: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _disjoint_versions(self) -> "NodeConfig":
        seen: Dict[str, str] = {}
        for version in self.versions:
            for member in version.members:
                if member in seen:
                    raise ValueError(f"{member} is listed by {seen[member]} and {version.version_id}")
                seen[member] = version.version_id
        return self

    @property
    def self_source_id(self) -> str:
        return self.source_prefix + "0"

    def latest_version(self) -> NodeVersion:
        return max(self.versions, key=lambda v: parse_timestamp(v.timestamp))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NodeConfig":
        try:
            return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValidationError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot load node configuration {path}: {e}") from e


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


class NodeDataset(BaseModel):
    """Holdings of a node with per-process attribute maps and lookup indexes."""

    model_config = ConfigDict(frozen=True)

    holdings: XsamsDocument = Field(default_factory=XsamsDocument)
    attributes: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    cites: Dict[str, Tuple[str, ...]] = Field(default_factory=dict)
    by_formula: Dict[str, Tuple[str, ...]] = Field(default_factory=dict)
    by_wavelength: Tuple[Tuple[Decimal, str], ...] = ()

    @property
    def process_ids(self) -> List[str]:
        return [p.id for p in self.holdings.processes]

    def is_empty(self) -> bool:
        return not self.holdings.processes

    def processes_with_formula(self, formula: str) -> Tuple[str, ...]:
        return self.by_formula.get(formula.casefold(), ())

    def processes_in_window(self, low: Optional[Decimal], high: Optional[Decimal]) -> Set[str]:
        """Radiative process ids whose wavelength lies in [low, high] (Å)."""
        keys = [w for w, _ in self.by_wavelength]
        start = 0 if low is None else bisect.bisect_left(keys, low)
        stop = len(keys) if high is None else bisect.bisect_right(keys, high)
        return {pid for _, pid in self.by_wavelength[start:stop]}

    def candidates(self, ast: QueryAst) -> List[str]:
        """Process ids worth evaluating for ``ast``, in holdings order."""
        low = high = None
        for c in ast.constraints:
            if c.keyword != WAVELENGTH or not isinstance(c.value, Decimal):
                continue
            if c.operator is Operator.GE:
                low = c.value if low is None else max(low, c.value)
            elif c.operator is Operator.LE:
                high = c.value if high is None else min(high, c.value)
            else:
                low = high = c.value
        if low is None and high is None:
            return self.process_ids
        window = self.processes_in_window(low, high)
        return [pid for pid in self.process_ids if pid in window]


def _species_attributes(species: Species, prefix: str = "") -> Dict[str, Any]:
    if isinstance(species, MoleculeSpecies):
        attrs: Dict[str, Any] = {f"{prefix}MoleculeStoichiometricFormula": species.stoichiometric_formula}
        if species.inchikey:
            attrs[f"{prefix}MoleculeInchiKey"] = species.inchikey
        if species.chemical_name:
            attrs[f"{prefix}MoleculeChemicalName"] = species.chemical_name
        return attrs
    attrs = {f"{prefix}AtomSymbol": species.element_symbol, f"{prefix}IonCharge": species.ion_charge}
    if species.inchikey:
        attrs[f"{prefix}AtomInchiKey"] = species.inchikey
    return attrs


def _derived_attributes(process, species_by_id: Dict[str, Species]) -> Dict[str, Any]:
    attrs: Dict[str, Any] = {}
    if isinstance(process, RadiativeTransition):
        species = species_by_id.get(process.species_ref or "")
        if species is not None:
            attrs.update(_species_attributes(species))
        if process.frequency_value is not None and process.frequency_units:
            hz = frequency_hz(process.frequency_value, process.frequency_units)
            attrs[FREQUENCY] = hz / _HZ_PER_UNIT["MHz"]
            attrs[WAVELENGTH] = SPEED_OF_LIGHT * _ANGSTROM_PER_METRE / hz
        return attrs

    # first reactant is the target, the others collide with it
    for position, participant in enumerate(process.reactants):
        species = species_by_id.get(participant.species_ref or "")
        if species is None:
            continue
        role = "target." if position == 0 else "collider."
        for key, value in _species_attributes(species, role).items():
            attrs.setdefault(key, value)
    return attrs


def read_sidecar(path: Union[str, Path]) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except configparser.Error as e:
        raise DatasetError(f"malformed attribute file {path}: {e}") from e
    return parser


def _sidecar_number(section: str, key: str, value: str) -> Decimal:
    try:
        return Decimal(value.strip())
    except InvalidOperation as e:
        raise DatasetError(f"{section}: {key} = {value!r} is not a number") from e


def build_dataset(
    holdings: XsamsDocument,
    sidecar: Optional[configparser.ConfigParser] = None,
    restrictables: Iterable[str] = (),
) -> NodeDataset:
    """Index ``holdings`` and attach attribute maps."""
    species_by_id: Dict[str, Species] = {s.species_id: s for s in holdings.species}
    process_ids = {p.id for p in holdings.processes}
    attributes: Dict[str, Dict[str, Any]] = {}
    cites: Dict[str, Tuple[str, ...]] = {}

    for process in holdings.processes:
        attributes[process.id] = _derived_attributes(process, species_by_id)

    if sidecar is not None:
        for section in sidecar.sections():
            if section not in process_ids:
                raise DatasetError(f"attribute record for unknown process {section!r}")
            for key, value in sidecar.items(section):
                if key == CITES:
                    cites[section] = tuple(value.replace(",", " ").split())
                elif key in NUMERIC_KEYWORDS:
                    attributes[section][key] = _sidecar_number(section, key, value)
                else:
                    attributes[section][key] = value.strip()

    missing = [
        (pid, keyword) for pid, attrs in attributes.items() for keyword in restrictables if keyword not in attrs
    ]
    if missing:
        pid, keyword = missing[0]
        raise DatasetError(f"process {pid} has no value for advertised keyword {keyword} ({len(missing)} gaps)")

    by_formula: Dict[str, List[str]] = {}
    wavelengths: List[Tuple[Decimal, str]] = []
    for pid, attrs in attributes.items():
        for key, value in attrs.items():
            if key.endswith("MoleculeStoichiometricFormula"):
                bucket = by_formula.setdefault(str(value).casefold(), [])
                if pid not in bucket:
                    bucket.append(pid)
        if isinstance(attrs.get(WAVELENGTH), Decimal):
            wavelengths.append((attrs[WAVELENGTH], pid))

    return NodeDataset(
        holdings=holdings,
        attributes=attributes,
        cites=cites,
        by_formula={k: tuple(v) for k, v in by_formula.items()},
        by_wavelength=tuple(sorted(wavelengths)),
    )


def load_dataset(
    path: Union[str, Path],
    sidecar_path: Optional[Union[str, Path]] = None,
    restrictables: Iterable[str] = (),
) -> NodeDataset:
    """Load node holdings and their attribute sidecar.

    The sidecar defaults to ``<path>.attrs`` and may be absent. An empty
    holdings file gives an empty dataset.
    """
    path = Path(path)
    data = path.read_bytes()
    if not data.strip():
        logger.info(f"Holdings file {path} is empty")
        return NodeDataset()

    holdings, _ = parse(data)
    sidecar_path = Path(sidecar_path) if sidecar_path else path.with_name(path.name + ".attrs")
    sidecar = read_sidecar(sidecar_path) if sidecar_path.exists() else None
    dataset = build_dataset(holdings, sidecar, restrictables)
    logger.info(
        f"Loaded {len(holdings.radiative)} radiative and {len(holdings.collisions)} collisional "
        f"processes from {path}"
    )
    return dataset


# ---------------------------------------------------------------------------
# Answering
# ---------------------------------------------------------------------------


def _closure(dataset: NodeDataset, matched: List[Process]) -> Tuple[Set[str], Set[str], Set[str]]:
    owners = state_owners(dataset.holdings)
    states_by_id = {s.state_id: s for sp in dataset.holdings.species for s in sp.states}
    species: Set[str] = set()
    states: Set[str] = set()
    sources: Set[str] = set()
    pending: List[str] = []

    for process in matched:
        sources.update(process.source_refs)
        sources.update(dataset.cites.get(process.id, ()))
        if isinstance(process, RadiativeTransition):
            if process.species_ref:
                species.add(process.species_ref)
            pending += [ref for ref in (process.upper_state_ref, process.lower_state_ref) if ref]
        else:
            for participant in process.participants:
                if participant.species_ref:
                    species.add(participant.species_ref)
                if participant.state_ref:
                    pending.append(participant.state_ref)

    while pending:
        state_id = pending.pop()
        if state_id in states:
            continue
        if state_id not in states_by_id:
            raise DatasetError(f"holdings reference undeclared state {state_id!r}")
        states.add(state_id)
        species.add(owners[state_id])
        state = states_by_id[state_id]
        sources.update(state.source_refs)
        if isinstance(state, MolecularState) and state.energy_origin_ref:
            pending.append(state.energy_origin_ref)
    return species, states, sources


def _self_source(config: NodeConfig, query: str, now: datetime) -> Source:
    uri = config.database_uri
    if config.sync_url:
        uri = f"{config.sync_url}?LANG=VSS2&REQUEST=doQuery&FORMAT=XSAMS&QUERY={query}"
    return Source(
        source_id=config.self_source_id,
        category="database",
        source_name=config.database_name,
        year=now.year,
        authors=config.authors,
        uri=uri,
        production_date=now.date(),
        comments=query,
    )


def _assign_versions(config: NodeConfig, include: Dict[str, List[str]]) -> Tuple[Version, ...]:
    identifiers = include["species"] + include["state"] + include["process"] + include["source"]
    owner = {member: v.version_id for v in config.versions for member in v.members}
    claimed: Dict[str, List[str]] = {v.version_id: [] for v in config.versions}
    unclaimed: List[str] = []
    for identifier in identifiers:
        if identifier in owner:
            claimed[owner[identifier]].append(identifier)
        else:
            unclaimed.append(identifier)

    contributing = [v for v in config.versions if claimed[v.version_id]]
    if not contributing:
        contributing = [config.latest_version()]
    claimed[contributing[0].version_id] = unclaimed + claimed[contributing[0].version_id]

    versions = []
    for node_version in contributing:
        members = set(claimed[node_version.version_id])
        versions.append(
            Version(
                version_id=node_version.version_id,
                timestamp=node_version.timestamp,
                species_refs=tuple(i for i in include["species"] if i in members),
                state_refs=tuple(i for i in include["state"] if i in members),
                process_refs=tuple(i for i in include["process"] if i in members),
                source_refs=tuple(i for i in include["source"] if i in members),
            )
        )
    return tuple(versions)


def answer(dataset: NodeDataset, config: NodeConfig, ast: QueryAst, now: datetime) -> XsamsDocument:
    """Answer ``ast`` the way a node does: matching processes, their closure, and a Node origin.

    Args:
        dataset: node holdings
        config: node identity and versions
        ast: parsed query
        now: extraction instant (timezone aware)

    Returns:
        A document whose every reference resolves within itself
    """
    holdings = dataset.holdings
    query = render(ast)
    candidates = set(dataset.candidates(ast))
    matched = [p for p in holdings.processes if p.id in candidates and evaluate(ast, dataset.attributes.get(p.id, {}))]
    species_ids, state_ids, source_ids = _closure(dataset, matched)

    atoms: List[AtomSpecies] = []
    for atom in holdings.atoms:
        if atom.species_id in species_ids:
            atoms.append(atom.model_copy(update={"states": tuple(s for s in atom.states if s.state_id in state_ids)}))
    molecules: List[MoleculeSpecies] = []
    for molecule in holdings.molecules:
        if molecule.species_id in species_ids:
            molecules.append(
                molecule.model_copy(update={"states": tuple(s for s in molecule.states if s.state_id in state_ids)})
            )

    matched_ids = {p.id for p in matched}
    sources: List[Source] = []
    if matched:
        sources.append(_self_source(config, query, now))
    declared_sources = {s.source_id for s in holdings.sources}
    for wanted in source_ids - declared_sources - {config.self_source_id}:
        raise DatasetError(f"holdings reference undeclared source {wanted!r}")
    sources += [s for s in holdings.sources if s.source_id in source_ids and s.source_id != config.self_source_id]

    body = XsamsDocument(
        atoms=tuple(atoms),
        molecules=tuple(molecules),
        radiative=tuple(p for p in holdings.radiative if p.id in matched_ids),
        collisions=tuple(p for p in holdings.collisions if p.id in matched_ids),
        sources=tuple(sources),
    )
    include: Dict[str, List[str]] = {"species": [], "state": [], "process": [], "source": []}

    for identifier, kind, _ in iter_declarations(body):
        include[kind].append(identifier)

    origin = Origin(
        kind=OriginKind.NODE,
        timestamp=format_timestamp(now),
        versions=_assign_versions(config, include),
        homepage_url=config.homepage_url,
        name=config.name,
        comments=config.comments,
        query=query,
        origin_identifier=config.origin_identifier,
    )
    logger.info(f"{config.name} answered with {len(matched)} process(es) for {query}")
    return body.model_copy(
        update={
            "origins": (origin,),
            "namespaces": dict(holdings.namespaces or DEFAULT_NAMESPACES),
            "schema_location": holdings.schema_location,
        }
    )


# ---------------------------------------------------------------------------
# Handles used for re-execution
# ---------------------------------------------------------------------------


class NodeHandle(Protocol):
    origin_identifier: str

    def execute(self, query: str, now: Optional[datetime] = None) -> XsamsDocument: ...


class LocalNode:
    """A node simulated in-process."""

    def __init__(self, config: NodeConfig, dataset: NodeDataset):
        self.config = config
        self.dataset = dataset

    @property
    def origin_identifier(self) -> str:  # type: ignore[override]
        return self.config.origin_identifier

    def execute(self, query: str, now: Optional[datetime] = None) -> XsamsDocument:
        return answer(self.dataset, self.config, parse_query(query), now or datetime.now().astimezone())

    @classmethod
    def from_files(cls, config_path: Union[str, Path], holdings_path: Union[str, Path]) -> "LocalNode":
        config = NodeConfig.load(config_path)
        return cls(config, load_dataset(holdings_path, restrictables=config.restrictables))


class RemoteNode:
    """A node reached over HTTP through its ``/tap/sync`` endpoint."""

    def __init__(self, origin_identifier: str, base_url: str, timeout: float = 30.0,
                 transport: Optional[httpx.BaseTransport] = None):
        self.origin_identifier = origin_identifier
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._transport = transport

    def execute(self, query: str, now: Optional[datetime] = None) -> XsamsDocument:
        params = {"REQUEST": "doQuery", "FORMAT": "XSAMS", "QUERY": query}
        try:
            with httpx.Client(timeout=self.timeout, transport=self._transport) as client:
                response = client.get(f"{self.base_url}/tap/sync", params=params)
                response.raise_for_status()
        except httpx.HTTPError as e:
            raise NodeUnavailable(self.origin_identifier, str(e)) from e
        try:
            doc, _ = parse(response.content)
        except XsamsError as e:
            raise NodeUnavailable(self.origin_identifier, f"unreadable answer: {e}") from e
        return doc
