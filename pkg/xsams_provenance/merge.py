"""
Cross-match merge of a spectroscopic and a collisional document.

Molecules that describe the same species are paired, collisional states are
identified with spectroscopic states agreeing on the match keys, and the
collisional molecule is replaced by its spectroscopic counterpart. Processes
whose references now span both inputs move to the Version of a new root
``Other`` origin, together with every source of both inputs.
"""

import logging
from datetime import datetime
from decimal import Decimal, InvalidOperation
from typing import Dict, Hashable, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .errors import (
    AmbiguousMatch,
    IdentifierCollision,
    MultipleRootOrigins,
    SpeciesMismatch,
    UnmatchedReferencedState,
)
from .model import (
    CollisionalTransition,
    MoleculeSpecies,
    Origin,
    OriginKind,
    Participant,
    RadiativeTransition,
    Version,
    XsamsDocument,
    data_identifiers,
    format_timestamp,
    iter_declarations,
    parse_timestamp,
)

logger = logging.getLogger(__name__)

ROOT_VERSION_PREFIX = "VERMER"


class MatchSpec(BaseModel):
    """Quantum numbers that must agree for two states to be the same state."""

    model_config = ConfigDict(frozen=True)

    match_keys: Tuple[str, ...] = Field(..., min_length=1)
    species_pairing: str = Field("vamdc_species_id", description="VAMDCSpeciesID, InChIKey as fallback")


class StateMatching(BaseModel):
    model_config = ConfigDict(frozen=True)

    pairs: Dict[str, str] = Field(default_factory=dict, description="collisional state id -> spectroscopic state id")
    unmatched_collisional: Tuple[str, ...] = ()
    unmatched_spectroscopic: Tuple[str, ...] = ()


class ToolConfig(BaseModel):
    """The processor performing the merge, as recorded in the root origin."""

    model_config = ConfigDict(frozen=True)

    name: str
    homepage_url: str
    comment: Optional[str] = None


def species_key(molecule: MoleculeSpecies) -> Optional[str]:
    return molecule.vamdc_species_id or molecule.inchikey


def _qn_value(text: str) -> Hashable:
    try:
        return Decimal(text).normalize()
    except InvalidOperation:
        return text.strip().casefold()


def _state_key(quantum_numbers: Dict[str, str], keys: Tuple[str, ...]) -> Optional[Tuple[Hashable, ...]]:
    if any(k not in quantum_numbers for k in keys):
        return None
    return tuple(_qn_value(quantum_numbers[k]) for k in keys)


def crossmatch_states(spec_mol: MoleculeSpecies, coll_mol: MoleculeSpecies, spec: MatchSpec) -> StateMatching:
    """Pair collisional states with spectroscopic states agreeing on every match key.

    Auxiliary states never take part in matching.

    Raises:
        SpeciesMismatch: the molecules are not the same species
        AmbiguousMatch: a state has several candidates, or two states share one
    """
    key = species_key(spec_mol)
    if key is None or key != species_key(coll_mol):
        raise SpeciesMismatch(spec_mol.species_id, coll_mol.species_id)

    by_key: Dict[Tuple[Hashable, ...], List[str]] = {}
    for state in spec_mol.states:
        state_key = _state_key(state.quantum_numbers, spec.match_keys)
        if not state.auxiliary and state_key is not None:
            by_key.setdefault(state_key, []).append(state.state_id)

    pairs: Dict[str, str] = {}
    unmatched: List[str] = []
    for state in coll_mol.states:
        state_key = None if state.auxiliary else _state_key(state.quantum_numbers, spec.match_keys)
        candidates = by_key.get(state_key, []) if state_key is not None else []
        if len(candidates) > 1:
            raise AmbiguousMatch(state.state_id, candidates)
        if candidates:
            pairs[state.state_id] = candidates[0]
        else:
            unmatched.append(state.state_id)

    claimed: Dict[str, List[str]] = {}
    for coll_id, spec_id in pairs.items():
        claimed.setdefault(spec_id, []).append(coll_id)
    for spec_id, coll_ids in claimed.items():
        if len(coll_ids) > 1:
            raise AmbiguousMatch(spec_id, coll_ids)

    return StateMatching(
        pairs=pairs,
        unmatched_collisional=tuple(unmatched),
        unmatched_spectroscopic=tuple(s.state_id for s in spec_mol.states if s.state_id not in claimed),
    )


def _single_root(doc: XsamsDocument) -> Origin:
    if len(doc.origins) != 1:
        raise MultipleRootOrigins(len(doc.origins))
    return doc.origins[0]


def _explicit(origin: Origin, doc: XsamsDocument) -> Origin:
    """Replace global Versions by Versions listing the document's data."""
    versions = []
    for version in origin.versions:
        if not version.is_global:
            versions.append(version)
            continue
        kinds: Dict[str, List[str]] = {"species": [], "state": [], "process": [], "source": []}
        for identifier, kind, _ in iter_declarations(doc):
            if kind in kinds:
                kinds[kind].append(identifier)
        versions.append(
            version.model_copy(
                update={
                    "is_global": False,
                    "species_refs": tuple(kinds["species"]),
                    "state_refs": tuple(kinds["state"]),
                    "process_refs": tuple(kinds["process"]),
                    "source_refs": tuple(kinds["source"]),
                }
            )
        )
    return origin.model_copy(update={"versions": tuple(versions)})


def _strip_origin(origin: Origin, removed: Set[str]) -> Origin:
    return origin.model_copy(
        update={
            "versions": tuple(v.without(removed) for v in origin.versions),
            "sub_origins": tuple(_strip_origin(sub, removed) for sub in origin.sub_origins),
        }
    )


def _next_version_id(taken: Set[str]) -> str:
    counter = 1
    while f"{ROOT_VERSION_PREFIX}{counter}" in taken:
        counter += 1
    return f"{ROOT_VERSION_PREFIX}{counter}"


class _Rewriter:
    """Maps collisional species/state references onto the spectroscopic molecule."""

    def __init__(self, species_map: Dict[str, str], state_map: Dict[str, str], dropped_states: Set[str]):
        self.species_map = species_map
        self.state_map = state_map
        self.dropped_states = dropped_states

    def state(self, state_ref: Optional[str], process_id: str) -> Optional[str]:
        if state_ref is None or state_ref not in self.dropped_states:
            return state_ref
        if state_ref not in self.state_map:
            raise UnmatchedReferencedState(state_ref, process_id)
        return self.state_map[state_ref]

    def species(self, species_ref: Optional[str]) -> Optional[str]:
        return self.species_map.get(species_ref, species_ref) if species_ref else species_ref

    def collision(self, process: CollisionalTransition) -> CollisionalTransition:
        def participant(p: Participant) -> Participant:
            return Participant(species_ref=self.species(p.species_ref), state_ref=self.state(p.state_ref, process.id))

        return process.model_copy(
            update={
                "reactants": tuple(participant(p) for p in process.reactants),
                "products": tuple(participant(p) for p in process.products),
            }
        )

    def radiative(self, process: RadiativeTransition) -> RadiativeTransition:
        return process.model_copy(
            update={
                "species_ref": self.species(process.species_ref),
                "upper_state_ref": self.state(process.upper_state_ref, process.id),
                "lower_state_ref": self.state(process.lower_state_ref, process.id),
            }
        )


def merge(
    spec_doc: XsamsDocument,
    coll_doc: XsamsDocument,
    spec: MatchSpec,
    tool: ToolConfig,
    now: datetime,
) -> XsamsDocument:
    """Merge spectroscopic and collisional documents under a new root origin.

    Args:
        spec_doc: document whose molecules are kept
        coll_doc: document whose matching molecules are replaced
        spec: match keys for state identification
        tool: identity of the merging processor
        now: extraction timestamp of the merged document

    Returns:
        The merged document; nested origins keep their data minus moved processes and sources

    Raises:
        MultipleRootOrigins: an input has more or fewer than one root origin
        SpeciesMismatch / AmbiguousMatch: molecules or states cannot be paired
        UnmatchedReferencedState: a referenced collisional state has no counterpart
        IdentifierCollision: both inputs declare the same identifier
    """
    spec_origin = _explicit(_single_root(spec_doc), spec_doc)
    coll_origin = _explicit(_single_root(coll_doc), coll_doc)

    species_map: Dict[str, str] = {}
    state_map: Dict[str, str] = {}
    dropped_states: Set[str] = set()
    for coll_mol in coll_doc.molecules:
        key = species_key(coll_mol)
        partners = [m for m in spec_doc.molecules if key is not None and species_key(m) == key]
        if len(partners) > 1:
            raise AmbiguousMatch(coll_mol.species_id, [m.species_id for m in partners])
        if not partners:
            continue
        matching = crossmatch_states(partners[0], coll_mol, spec)
        logger.info(
            f"Paired {coll_mol.species_id} with {partners[0].species_id}: "
            f"{len(matching.pairs)} states matched, {len(matching.unmatched_collisional)} unmatched"
        )
        species_map[coll_mol.species_id] = partners[0].species_id
        state_map.update(matching.pairs)
        dropped_states.update(s.state_id for s in coll_mol.states)

    rewriter = _Rewriter(species_map, state_map, dropped_states)
    moved: List[str] = []
    collisions = []
    for process in coll_doc.collisions:
        rewritten = rewriter.collision(process)
        if rewritten != process:
            moved.append(process.id)
        collisions.append(rewritten)
    radiative = []
    for line in coll_doc.radiative:
        rewritten_line = rewriter.radiative(line)
        if rewritten_line != line:
            moved.append(line.id)
        radiative.append(rewritten_line)

    kept_molecules = tuple(m for m in coll_doc.molecules if m.species_id not in species_map)
    dropped = set(species_map) | dropped_states

    spec_ids = {i for i, _, _ in iter_declarations(spec_doc)}
    coll_ids = {i for i, _, _ in iter_declarations(coll_doc)} - dropped
    collisions_found = sorted(spec_ids & coll_ids)
    if collisions_found:
        raise IdentifierCollision(collisions_found)

    source_ids = [s.source_id for s in coll_doc.sources] + [s.source_id for s in spec_doc.sources]
    removed = dropped | set(moved) | set(source_ids)
    nested = (_strip_origin(spec_origin, removed), _strip_origin(coll_origin, removed))

    nested_versions = [v for origin in nested for o in origin.walk() for v in o.versions]
    root_version = Version(
        version_id=_next_version_id({v.version_id for v in nested_versions}),
        timestamp=min((v.timestamp for v in nested_versions), key=parse_timestamp),
        process_refs=tuple(moved),
        source_refs=tuple(source_ids),
    )
    root = Origin(
        kind=OriginKind.OTHER,
        timestamp=format_timestamp(now),
        versions=(root_version,),
        homepage_url=tool.homepage_url,
        name=tool.name,
        comments=tool.comment,
        sub_origins=nested,
    )

    namespaces = dict(coll_doc.namespaces)
    for prefix, uri in spec_doc.namespaces.items():
        namespaces.setdefault(prefix, uri)
    comments = [c for c in (spec_doc.comments, coll_doc.comments) if c]
    comments.append(f"Data merged by {tool.name.upper()}.")

    merged = XsamsDocument(
        origins=(root,),
        atoms=spec_doc.atoms + coll_doc.atoms,
        molecules=spec_doc.molecules + kept_molecules,
        radiative=spec_doc.radiative + tuple(radiative),
        collisions=spec_doc.collisions + tuple(collisions),
        sources=coll_doc.sources + spec_doc.sources,
        comments="\n".join(comments),
        namespaces=namespaces,
        schema_location=coll_doc.schema_location or spec_doc.schema_location,
    )
    logger.info(
        f"Merged {len(data_identifiers(merged))} identifiers; {len(moved)} process(es) moved to {root_version.version_id}"
    )
    return merged
