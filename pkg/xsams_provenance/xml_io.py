"""
XML reading and writing for XSAMS documents.

``parse`` maps an ``XSAMSData`` tree onto the immutable model, ``serialize``
writes it back with a fixed element order and two-space indentation, and
``canonical_digest`` hashes a C14N rendering with extraction stamps blanked so
that re-running a query yields the same digest.
"""

import copy
import hashlib
import logging
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

from lxml import etree
from pydantic import BaseModel, Field, ValidationError

from .errors import MissingRequiredField, UnknownOriginKind, XmlSyntax
from .model import (
    AtomicState,
    AtomSpecies,
    CollisionalTransition,
    DataSet,
    MolecularState,
    MoleculeSpecies,
    OpaqueXml,
    Origin,
    OriginKind,
    Participant,
    PartitionFunction,
    RadiativeTransition,
    Source,
    Version,
    XsamsDocument,
)

logger = logging.getLogger(__name__)

XSAMS_NS = "http://vamdc.org/xml/xsams/1.0"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"
CML_NS = "http://www.xml-cml.org/schema"
CASES_NS = XSAMS_NS + "/cases/"

DEFAULT_NAMESPACES: Dict[str, str] = {"": XSAMS_NS, "cml": CML_NS, "xsi": XSI_NS}

ORIGIN_TYPES: Dict[str, OriginKind] = {
    "VamdcNodeOriginType": OriginKind.NODE,
    "VamdcProcessorOriginType": OriginKind.PROCESSOR,
    "OtherOriginType": OriginKind.OTHER,
}
ORIGIN_TYPE_NAMES = {kind: name for name, kind in ORIGIN_TYPES.items()}

TIMESTAMP_SENTINEL = "1970-01-01T00:00:00+00:00"

_XSI_TYPE = f"{{{XSI_NS}}}type"
_XSI_SCHEMA_LOCATION = f"{{{XSI_NS}}}schemaLocation"


class ParseDiagnostics(BaseModel):
    """Non-fatal findings collected while parsing."""

    warnings: List[Tuple[Tuple[int, int], str]] = Field(default_factory=list)
    recovered: bool = False


def _q(tag: str) -> str:
    return f"{{{XSAMS_NS}}}{tag}"


def _local(el: etree._Element) -> str:
    return etree.QName(el).localname


def _location(el: etree._Element) -> Tuple[int, int]:
    return (el.sourceline or 0, 0)


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------


def _text(el: Optional[etree._Element], *path: str) -> Optional[str]:
    """Stripped text of the element at ``path`` below ``el``; "" for empty elements."""
    node = el
    for tag in path:
        if node is None:
            return None
        node = node.find(_q(tag))
    if node is None:
        return None
    return (node.text or "").strip()


def _required(el: etree._Element, element: str, subject: Optional[str], *path: str) -> str:
    value = _text(el, *path)
    if value is None:
        raise MissingRequiredField(element, "/".join(path), subject)
    return value


def _texts(el: etree._Element, tag: str) -> Tuple[str, ...]:
    return tuple((child.text or "").strip() for child in el.findall(_q(tag)))


def _decimal(value: Optional[str], el: etree._Element) -> Optional[Decimal]:
    if value is None or value == "":
        return None
    try:
        return Decimal(value)
    except InvalidOperation as e:
        raise XmlSyntax(_location(el), f"not a number: {value!r}") from e


def _decimals(value: Optional[str], el: etree._Element) -> Tuple[Decimal, ...]:
    if not value:
        return ()
    return tuple(_decimal(token, el) for token in value.split())  # type: ignore[misc]


def _int(value: Optional[str], el: etree._Element) -> Optional[int]:
    if value is None or value == "":
        return None
    try:
        return int(value)
    except ValueError as e:
        raise XmlSyntax(_location(el), f"not an integer: {value!r}") from e


def _bool(value: Optional[str]) -> bool:
    return (value or "false").strip().lower() in ("true", "1")


def _units(el: etree._Element, *path: str) -> Optional[str]:
    node = el
    for tag in path:
        if node is None:
            return None
        node = node.find(_q(tag))
    return None if node is None else node.get("units")


def _opaque(el: Optional[etree._Element]) -> Optional[OpaqueXml]:
    if el is None:
        return None
    clone = copy.deepcopy(el)
    for node in clone.iter():
        if node.text is not None and not node.text.strip():
            node.text = None
        if node.tail is not None and not node.tail.strip():
            node.tail = None
    clone.tail = None
    return OpaqueXml(xml=etree.tostring(clone, method="c14n", exclusive=True).decode("utf-8"))


def _build(model, el: etree._Element, **fields):
    try:
        return model(**fields)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise XmlSyntax(_location(el), f"{_local(el)}: invalid {where}: {first['msg']}") from e


def _parse_version(el: etree._Element) -> Version:
    version_id = el.get("versionID")
    if not version_id:
        raise MissingRequiredField("Version", "versionID")
    timestamp = el.get("timestamp")
    if timestamp is None:
        raise MissingRequiredField("Version", "timestamp", version_id)
    return _build(
        Version,
        el,
        version_id=version_id,
        is_global=_bool(el.get("global")),
        timestamp=timestamp.strip(),
        species_refs=_texts(el, "SpeciesRef"),
        state_refs=_texts(el, "StateRef"),
        process_refs=_texts(el, "ProcessRef"),
        source_refs=_texts(el, "SourceRef"),
    )


def _parse_origin(el: etree._Element) -> Origin:
    xsi_type = el.get(_XSI_TYPE)
    if xsi_type is None:
        raise MissingRequiredField("Origin", "xsi:type")
    kind = ORIGIN_TYPES.get(xsi_type.split(":")[-1])
    if kind is None:
        raise UnknownOriginKind(xsi_type)

    name = _required(el, "Origin", None, "Name")
    versions = tuple(_parse_version(v) for v in el.findall(_q("Version")))
    if not versions:
        raise MissingRequiredField("Origin", "Version", name)
    query = _text(el, "Query")
    identifier = _text(el, "OriginIdentifier")
    if kind is OriginKind.NODE and query is None:
        raise MissingRequiredField("Origin", "Query", name)
    if kind in (OriginKind.NODE, OriginKind.PROCESSOR) and identifier is None:
        raise MissingRequiredField("Origin", "OriginIdentifier", name)

    return _build(
        Origin,
        el,
        kind=kind,
        timestamp=_required(el, "Origin", name, "Timestamp"),
        versions=versions,
        homepage_url=_required(el, "Origin", name, "HomepageUrl"),
        name=name,
        comments=_text(el, "Comments"),
        query=query,
        origin_identifier=identifier,
        sub_origins=tuple(_parse_origin(sub) for sub in el.findall(_q("Origin"))),
    )


def _parse_atomic_state(el: etree._Element) -> AtomicState:
    state_id = el.get("stateID")
    if not state_id:
        raise MissingRequiredField("AtomicState", "stateID")
    return _build(
        AtomicState,
        el,
        state_id=state_id,
        comments=_text(el, "Comments"),
        source_refs=_texts(el, "SourceRef"),
        energy_value=_decimal(_text(el, "AtomicNumericalData", "StateEnergy", "Value"), el),
        energy_units=_units(el, "AtomicNumericalData", "StateEnergy", "Value"),
        total_angular_momentum=_decimal(
            _text(el, "AtomicQuantumNumbers", "TotalAngularMomentum"), el
        ),
        composition=_opaque(el.find(_q("AtomicComposition"))),
    )


def _parse_atoms(atom: etree._Element) -> List[AtomSpecies]:
    symbol = _required(atom, "Atom", None, "ChemicalElement", "ElementSymbol")
    charge = _int(_required(atom, "Atom", symbol, "ChemicalElement", "NuclearCharge"), atom)
    species = []
    for isotope in atom.findall(_q("Isotope")):
        mass_number = _int(_text(isotope, "IsotopeParameters", "MassNumber"), isotope)
        mass = _decimal(_text(isotope, "IsotopeParameters", "Mass", "Value"), isotope)
        for ion in isotope.findall(_q("Ion")):
            species_id = ion.get("speciesID")
            if not species_id:
                raise MissingRequiredField("Ion", "speciesID", symbol)
            species.append(
                _build(
                    AtomSpecies,
                    ion,
                    species_id=species_id,
                    element_symbol=symbol,
                    nuclear_charge=charge,
                    mass_number=mass_number,
                    mass_amu=mass,
                    ion_charge=_int(_text(ion, "IonCharge"), ion) or 0,
                    inchikey=_text(ion, "InChIKey"),
                    states=tuple(_parse_atomic_state(s) for s in ion.findall(_q("AtomicState"))),
                )
            )
    return species


def _parse_case(el: Optional[etree._Element]) -> Tuple[Optional[str], Dict[str, str]]:
    if el is None:
        return None, {}
    quantum_numbers: Dict[str, str] = {}
    for block in el:
        if _local(block) != "QNs":
            continue
        for qn in block:
            quantum_numbers[_local(qn)] = (qn.text or "").strip()
    return el.get("caseID"), quantum_numbers


def _parse_molecular_state(el: etree._Element) -> MolecularState:
    state_id = el.get("stateID")
    if not state_id:
        raise MissingRequiredField("MolecularState", "stateID")
    characterisation = el.find(_q("MolecularStateCharacterisation"))
    energy = None if characterisation is None else characterisation.find(_q("StateEnergy"))
    case_id, quantum_numbers = _parse_case(el.find(_q("Case")))
    return _build(
        MolecularState,
        el,
        state_id=state_id,
        auxiliary=_bool(el.get("auxillary")),
        energy_value=_decimal(_text(energy, "Value"), el),
        energy_units=_units(energy, "Value") if energy is not None else None,
        energy_origin_ref=None if energy is None else energy.get("energyOrigin"),
        total_statistical_weight=_int(_text(characterisation, "TotalStatisticalWeight"), el),
        nuclear_statistical_weight=_int(_text(characterisation, "NuclearStatisticalWeight"), el),
        source_refs=_texts(el, "SourceRef"),
        description=_text(el, "Description"),
        case_id=case_id,
        quantum_numbers=quantum_numbers,
    )


def _parse_molecule(el: etree._Element) -> MoleculeSpecies:
    species_id = el.get("speciesID")
    if not species_id:
        raise MissingRequiredField("Molecule", "speciesID")
    chem = el.find(_q("MolecularChemicalSpecies"))
    if chem is None:
        raise MissingRequiredField("Molecule", "MolecularChemicalSpecies", species_id)

    partition = chem.find(_q("PartitionFunction"))
    partition_function = None
    if partition is not None:
        partition_function = _build(
            PartitionFunction,
            partition,
            temperature_units=_units(partition, "T") or "K",
            temperatures=_decimals(_text(partition, "T", "DataList"), partition),
            values=_decimals(_text(partition, "Q", "DataList"), partition),
        )

    return _build(
        MoleculeSpecies,
        el,
        species_id=species_id,
        ordinary_formula=_text(chem, "OrdinaryStructuralFormula", "Value"),
        stoichiometric_formula=_required(chem, "Molecule", species_id, "StoichiometricFormula"),
        chemical_name=_text(chem, "ChemicalName", "Value"),
        inchi=_text(chem, "InChI"),
        inchikey=_text(chem, "InChIKey"),
        vamdc_species_id=_text(chem, "VAMDCSpeciesID"),
        structure=_opaque(chem.find(_q("MoleculeStructure"))),
        partition_function=partition_function,
        molecular_weight=_decimal(
            _text(chem, "StableMolecularProperties", "MolecularWeight", "Value"), chem
        ),
        molecular_weight_units=_units(chem, "StableMolecularProperties", "MolecularWeight", "Value"),
        comment=_text(chem, "Comment"),
        states=tuple(_parse_molecular_state(s) for s in el.findall(_q("MolecularState"))),
    )


def _parse_radiative(el: etree._Element) -> RadiativeTransition:
    process_id = el.get("id")
    if not process_id:
        raise MissingRequiredField("RadiativeTransition", "id")
    frequency = el.find(_q("EnergyWavelength"))
    frequency = None if frequency is None else frequency.find(_q("Frequency"))
    probability = el.find(_q("Probability"))
    return _build(
        RadiativeTransition,
        el,
        id=process_id,
        process_kind=el.get("process"),
        source_refs=_texts(el, "SourceRef"),
        frequency_value=_decimal(_text(frequency, "Value"), el),
        frequency_units=_units(frequency, "Value") if frequency is not None else None,
        frequency_accuracy=_decimal(_text(frequency, "Accuracy"), el),
        upper_state_ref=_text(el, "UpperStateRef"),
        lower_state_ref=_text(el, "LowerStateRef"),
        species_ref=_text(el, "SpeciesRef"),
        probability_a_value=_decimal(_text(probability, "TransitionProbabilityA", "Value"), el),
        probability_a_units=(
            _units(probability, "TransitionProbabilityA", "Value") if probability is not None else None
        ),
        idealised_intensity=_decimal(_text(probability, "IdealisedIntensity", "Value"), el),
        idealised_intensity_units=(
            _units(probability, "IdealisedIntensity", "Value") if probability is not None else None
        ),
        multipole=_text(probability, "Multipole"),
        process_class_code=_text(el, "ProcessClass", "Code"),
    )


def _parse_participants(el: etree._Element, tag: str) -> Tuple[Participant, ...]:
    return tuple(
        Participant(species_ref=_text(p, "SpeciesRef"), state_ref=_text(p, "StateRef"))
        for p in el.findall(_q(tag))
    )


def _parse_dataset(el: etree._Element) -> DataSet:
    table = el.find(_q("TabulatedData"))
    return _build(
        DataSet,
        el,
        description=el.get("dataDescription", ""),
        comments=_text(table, "Comments"),
        x_units=_units(table, "X") if table is not None else None,
        x_values=_decimals(_text(table, "X", "DataList"), el),
        y_units=_units(table, "Y") if table is not None else None,
        y_values=_decimals(_text(table, "Y", "DataList"), el),
    )


def _parse_collision(el: etree._Element) -> CollisionalTransition:
    process_id = el.get("id")
    if not process_id:
        raise MissingRequiredField("CollisionalTransition", "id")
    datasets = el.find(_q("DataSets"))
    return _build(
        CollisionalTransition,
        el,
        id=process_id,
        comments=_text(el, "Comments"),
        source_refs=_texts(el, "SourceRef"),
        process_class_code=_text(el, "ProcessClass", "Code"),
        reactants=_parse_participants(el, "Reactant"),
        products=_parse_participants(el, "Product"),
        datasets=tuple(
            _parse_dataset(d) for d in ([] if datasets is None else datasets.findall(_q("DataSet")))
        ),
    )


def _parse_source(el: etree._Element) -> Source:
    source_id = el.get("sourceID")
    if not source_id:
        raise MissingRequiredField("Source", "sourceID")
    year = _int(_required(el, "Source", source_id, "Year"), el)
    authors = el.find(_q("Authors"))
    return _build(
        Source,
        el,
        source_id=source_id,
        category=_text(el, "Category"),
        source_name=_text(el, "SourceName"),
        year=year,
        authors=() if authors is None else tuple(
            _required(a, "Author", source_id, "Name") for a in authors.findall(_q("Author"))
        ),
        title=_text(el, "Title"),
        volume=_text(el, "Volume"),
        page_begin=_text(el, "PageBegin"),
        page_end=_text(el, "PageEnd"),
        uri=_text(el, "UniformResourceIdentifier"),
        doi=_text(el, "DigitalObjectIdentifier"),
        production_date=_text(el, "ProductionDate") or None,
        comments=_text(el, "Comments"),
    )


def _all(root: etree._Element, *path: str) -> List[etree._Element]:
    return root.findall("/".join(_q(tag) for tag in path))


def parse(data: bytes, recover: bool = False) -> Tuple[XsamsDocument, ParseDiagnostics]:
    """Parse XSAMS bytes into a document.

    Args:
        data: UTF-8 encoded XML
        recover: use the recovering parser and report repaired errors as warnings

    Returns:
        The document and the diagnostics gathered while reading it

    Raises:
        XmlSyntax: input is not well-formed or a value cannot be read
        UnknownOriginKind: an Origin carries an unrecognised xsi:type
        MissingRequiredField: a required element or attribute is absent
    """
    parser = etree.XMLParser(
        recover=recover,
        remove_comments=True,
        remove_pis=True,
        resolve_entities=False,
        no_network=True,
    )
    try:
        root = etree.fromstring(data, parser)
    except etree.XMLSyntaxError as e:
        line, column = e.position
        raise XmlSyntax((line, column), e.msg) from e

    diagnostics = ParseDiagnostics()
    if recover:
        for entry in parser.error_log:
            diagnostics.warnings.append(((entry.line, entry.column), entry.message))
        if diagnostics.warnings:
            diagnostics.recovered = True
            logger.warning(f"Recovered from {len(diagnostics.warnings)} XML errors")
    if root is None:
        raise XmlSyntax((1, 0), "document has no root element")
    if root.tag != _q("XSAMSData"):
        raise XmlSyntax(_location(root), f"root element must be XSAMSData in {XSAMS_NS}, got {root.tag}")

    atoms: List[AtomSpecies] = []
    for atom in _all(root, "Species", "Atoms", "Atom"):
        atoms.extend(_parse_atoms(atom))

    doc = XsamsDocument(
        origins=tuple(_parse_origin(o) for o in root.findall(_q("Origin"))),
        atoms=tuple(atoms),
        molecules=tuple(_parse_molecule(m) for m in _all(root, "Species", "Molecules", "Molecule")),
        radiative=tuple(
            _parse_radiative(r) for r in _all(root, "Processes", "Radiative", "RadiativeTransition")
        ),
        collisions=tuple(
            _parse_collision(c)
            for c in _all(root, "Processes", "Collisions", "CollisionalTransition")
        ),
        sources=tuple(_parse_source(s) for s in _all(root, "Sources", "Source")),
        comments=_text(root, "Comments"),
        namespaces={(prefix or ""): uri for prefix, uri in root.nsmap.items()},
        schema_location=root.get(_XSI_SCHEMA_LOCATION),
    )
    return doc, diagnostics


def load(path: Union[str, Path], recover: bool = False) -> Tuple[XsamsDocument, ParseDiagnostics]:
    """Read and parse an XSAMS file."""
    return parse(Path(path).read_bytes(), recover=recover)


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def _num(value: Decimal) -> str:
    return str(value)


def _nums(values: Iterable[Decimal]) -> str:
    return " ".join(_num(v) for v in values)


def _sub(parent: etree._Element, tag: str, text: Optional[str] = None, **attrib: str) -> etree._Element:
    el = etree.SubElement(parent, _q(tag))
    for key, value in attrib.items():
        el.set(key, value)
    if text is not None:
        el.text = text
    return el


def _opt(parent: etree._Element, tag: str, text: Optional[str]) -> None:
    if text is not None:
        _sub(parent, tag, text)


def _value(parent: etree._Element, tag: str, value: Optional[Decimal], units: Optional[str]) -> None:
    if value is None:
        return
    holder = _sub(parent, tag)
    el = _sub(holder, "Value", _num(value))
    if units is not None:
        el.set("units", units)


def _refs(parent: etree._Element, tag: str, refs: Iterable[str]) -> None:
    for ref in refs:
        _sub(parent, tag, ref)


def _append_opaque(parent: etree._Element, opaque: Optional[OpaqueXml]) -> None:
    if opaque is not None:
        parent.append(etree.fromstring(opaque.xml.encode("utf-8")))


def _write_version(parent: etree._Element, version: Version) -> None:
    el = _sub(
        parent,
        "Version",
        versionID=version.version_id,
        timestamp=version.timestamp,
    )
    el.set("global", "true" if version.is_global else "false")
    _refs(el, "SpeciesRef", version.species_refs)
    _refs(el, "StateRef", version.state_refs)
    _refs(el, "ProcessRef", version.process_refs)
    _refs(el, "SourceRef", version.source_refs)


def _write_origin(parent: etree._Element, origin: Origin) -> None:
    el = _sub(parent, "Origin")
    el.set(_XSI_TYPE, ORIGIN_TYPE_NAMES[origin.kind])
    _sub(el, "Timestamp", origin.timestamp)
    for version in origin.versions:
        _write_version(el, version)
    _sub(el, "HomepageUrl", origin.homepage_url)
    _sub(el, "Name", origin.name)
    _opt(el, "Comments", origin.comments)
    _opt(el, "Query", origin.query)
    _opt(el, "OriginIdentifier", origin.origin_identifier)
    for sub in origin.sub_origins:
        _write_origin(el, sub)


def _write_atom(parent: etree._Element, atom: AtomSpecies) -> None:
    el = _sub(parent, "Atom")
    element = _sub(el, "ChemicalElement")
    _sub(element, "NuclearCharge", str(atom.nuclear_charge))
    _sub(element, "ElementSymbol", atom.element_symbol)
    isotope = _sub(el, "Isotope")
    if atom.mass_number is not None or atom.mass_amu is not None:
        params = _sub(isotope, "IsotopeParameters")
        if atom.mass_number is not None:
            _sub(params, "MassNumber", str(atom.mass_number))
        _value(params, "Mass", atom.mass_amu, "amu")
    ion = _sub(isotope, "Ion", speciesID=atom.species_id)
    _sub(ion, "IonCharge", str(atom.ion_charge))
    for state in atom.states:
        state_el = _sub(ion, "AtomicState", stateID=state.state_id)
        _opt(state_el, "Comments", state.comments)
        _refs(state_el, "SourceRef", state.source_refs)
        if state.energy_value is not None:
            _value(_sub(state_el, "AtomicNumericalData"), "StateEnergy", state.energy_value, state.energy_units)
        if state.total_angular_momentum is not None:
            numbers = _sub(state_el, "AtomicQuantumNumbers")
            _sub(numbers, "TotalAngularMomentum", _num(state.total_angular_momentum))
        _append_opaque(state_el, state.composition)
    _opt(ion, "InChIKey", atom.inchikey)


def _write_case(parent: etree._Element, state: MolecularState) -> None:
    if state.case_id is None:
        return
    case_ns = CASES_NS + state.case_id
    case = etree.SubElement(parent, _q("Case"), nsmap={state.case_id: case_ns})
    case.set(_XSI_TYPE, f"{state.case_id}:Case")
    case.set("caseID", state.case_id)
    block = etree.SubElement(case, f"{{{case_ns}}}QNs")
    for name, value in state.quantum_numbers.items():
        etree.SubElement(block, f"{{{case_ns}}}{name}").text = value


def _write_molecule(parent: etree._Element, molecule: MoleculeSpecies) -> None:
    el = _sub(parent, "Molecule", speciesID=molecule.species_id)
    chem = _sub(el, "MolecularChemicalSpecies")
    if molecule.ordinary_formula is not None:
        _sub(_sub(chem, "OrdinaryStructuralFormula"), "Value", molecule.ordinary_formula)
    _sub(chem, "StoichiometricFormula", molecule.stoichiometric_formula)
    if molecule.chemical_name is not None:
        _sub(_sub(chem, "ChemicalName"), "Value", molecule.chemical_name)
    _opt(chem, "InChI", molecule.inchi)
    _opt(chem, "InChIKey", molecule.inchikey)
    _opt(chem, "VAMDCSpeciesID", molecule.vamdc_species_id)
    _append_opaque(chem, molecule.structure)
    if molecule.partition_function is not None:
        pf = molecule.partition_function
        block = _sub(chem, "PartitionFunction")
        _sub(_sub(block, "T", units=pf.temperature_units), "DataList", _nums(pf.temperatures))
        _sub(_sub(block, "Q"), "DataList", _nums(pf.values))
    if molecule.molecular_weight is not None:
        props = _sub(chem, "StableMolecularProperties")
        _value(props, "MolecularWeight", molecule.molecular_weight, molecule.molecular_weight_units)
    _opt(chem, "Comment", molecule.comment)

    for state in molecule.states:
        state_el = _sub(el, "MolecularState")
        if state.auxiliary:
            state_el.set("auxillary", "true")
        state_el.set("stateID", state.state_id)
        _refs(state_el, "SourceRef", state.source_refs)
        _opt(state_el, "Description", state.description)
        if (
            state.energy_value is not None
            or state.total_statistical_weight is not None
            or state.nuclear_statistical_weight is not None
        ):
            characterisation = _sub(state_el, "MolecularStateCharacterisation")
            if state.energy_value is not None:
                energy = _sub(characterisation, "StateEnergy")
                if state.energy_origin_ref is not None:
                    energy.set("energyOrigin", state.energy_origin_ref)
                value = _sub(energy, "Value", _num(state.energy_value))
                if state.energy_units is not None:
                    value.set("units", state.energy_units)
            if state.total_statistical_weight is not None:
                _sub(characterisation, "TotalStatisticalWeight", str(state.total_statistical_weight))
            if state.nuclear_statistical_weight is not None:
                _sub(characterisation, "NuclearStatisticalWeight", str(state.nuclear_statistical_weight))
        _write_case(state_el, state)


def _write_radiative(parent: etree._Element, line: RadiativeTransition) -> None:
    el = _sub(parent, "RadiativeTransition", id=line.id)
    if line.process_kind is not None:
        el.set("process", line.process_kind)
    _refs(el, "SourceRef", line.source_refs)
    if line.frequency_value is not None:
        frequency = _sub(_sub(el, "EnergyWavelength"), "Frequency")
        value = _sub(frequency, "Value", _num(line.frequency_value))
        if line.frequency_units is not None:
            value.set("units", line.frequency_units)
        if line.frequency_accuracy is not None:
            _sub(frequency, "Accuracy", _num(line.frequency_accuracy))
    _opt(el, "UpperStateRef", line.upper_state_ref)
    _opt(el, "LowerStateRef", line.lower_state_ref)
    _opt(el, "SpeciesRef", line.species_ref)
    if (
        line.probability_a_value is not None
        or line.idealised_intensity is not None
        or line.multipole is not None
    ):
        probability = _sub(el, "Probability")
        _value(probability, "TransitionProbabilityA", line.probability_a_value, line.probability_a_units)
        _value(probability, "IdealisedIntensity", line.idealised_intensity, line.idealised_intensity_units)
        _opt(probability, "Multipole", line.multipole)
    if line.process_class_code is not None:
        _sub(_sub(el, "ProcessClass"), "Code", line.process_class_code)


def _write_collision(parent: etree._Element, collision: CollisionalTransition) -> None:
    el = _sub(parent, "CollisionalTransition", id=collision.id)
    _opt(el, "Comments", collision.comments)
    _refs(el, "SourceRef", collision.source_refs)
    if collision.process_class_code is not None:
        _sub(_sub(el, "ProcessClass"), "Code", collision.process_class_code)
    for tag, participants in (("Reactant", collision.reactants), ("Product", collision.products)):
        for participant in participants:
            p = _sub(el, tag)
            _opt(p, "SpeciesRef", participant.species_ref)
            _opt(p, "StateRef", participant.state_ref)
    if collision.datasets:
        datasets = _sub(el, "DataSets")
        for dataset in collision.datasets:
            table = _sub(_sub(datasets, "DataSet", dataDescription=dataset.description), "TabulatedData")
            _opt(table, "Comments", dataset.comments)
            x = _sub(table, "X")
            if dataset.x_units is not None:
                x.set("units", dataset.x_units)
            _sub(x, "DataList", _nums(dataset.x_values))
            y = _sub(table, "Y")
            if dataset.y_units is not None:
                y.set("units", dataset.y_units)
            _sub(y, "DataList", _nums(dataset.y_values))


def _write_source(parent: etree._Element, source: Source) -> None:
    el = _sub(parent, "Source", sourceID=source.source_id)
    _opt(el, "Category", source.category)
    _opt(el, "SourceName", source.source_name)
    _sub(el, "Year", str(source.year))
    if source.authors:
        authors = _sub(el, "Authors")
        for name in source.authors:
            _sub(_sub(authors, "Author"), "Name", name)
    _opt(el, "Title", source.title)
    _opt(el, "Volume", source.volume)
    _opt(el, "PageBegin", source.page_begin)
    _opt(el, "PageEnd", source.page_end)
    _opt(el, "UniformResourceIdentifier", source.uri)
    _opt(el, "DigitalObjectIdentifier", source.doi)
    if source.production_date is not None:
        _sub(el, "ProductionDate", source.production_date.isoformat())
    _opt(el, "Comments", source.comments)


def _namespace_map(namespaces: Dict[str, str]) -> Dict[Optional[str], str]:
    nsmap: Dict[Optional[str], str] = {(prefix or None): uri for prefix, uri in namespaces.items()}
    nsmap[None] = XSAMS_NS
    if XSI_NS not in nsmap.values():
        nsmap["xsi"] = XSI_NS
    return nsmap


def build_tree(doc: XsamsDocument, namespaces: Optional[Dict[str, str]] = None) -> etree._Element:
    """Build the lxml tree for ``doc`` without indentation."""
    root = etree.Element(
        _q("XSAMSData"),
        nsmap=_namespace_map(namespaces if namespaces is not None else (doc.namespaces or DEFAULT_NAMESPACES)),
    )
    if doc.schema_location is not None and namespaces is None:
        root.set(_XSI_SCHEMA_LOCATION, doc.schema_location)

    for origin in doc.origins:
        _write_origin(root, origin)
    if doc.atoms or doc.molecules:
        species = _sub(root, "Species")
        if doc.atoms:
            atoms = _sub(species, "Atoms")
            for atom in doc.atoms:
                _write_atom(atoms, atom)
        if doc.molecules:
            molecules = _sub(species, "Molecules")
            for molecule in doc.molecules:
                _write_molecule(molecules, molecule)
    if doc.radiative or doc.collisions:
        processes = _sub(root, "Processes")
        if doc.radiative:
            radiative = _sub(processes, "Radiative")
            for line in doc.radiative:
                _write_radiative(radiative, line)
        if doc.collisions:
            collisions = _sub(processes, "Collisions")
            for collision in doc.collisions:
                _write_collision(collisions, collision)
    if doc.sources:
        sources = _sub(root, "Sources")
        for source in doc.sources:
            _write_source(sources, source)
    _opt(root, "Comments", doc.comments)
    return root


def serialize(doc: XsamsDocument) -> bytes:
    """Write ``doc`` as indented UTF-8 XML."""
    root = build_tree(doc)
    etree.indent(root, space="  ")
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", standalone=True) + b"\n"


def _blank_origin(origin: Origin) -> Origin:
    return origin.model_copy(
        update={
            "timestamp": TIMESTAMP_SENTINEL,
            "sub_origins": tuple(_blank_origin(sub) for sub in origin.sub_origins),
        }
    )


def _blank_source(source: Source) -> Source:
    if source.is_self_reference:
        return source.model_copy(update={"production_date": None, "year": 0})
    return source


def canonical_digest(doc: XsamsDocument) -> str:
    """SHA-256 over the C14N form of ``doc`` with extraction stamps blanked."""
    blanked = doc.model_copy(
        update={
            "origins": tuple(_blank_origin(o) for o in doc.origins),
            "sources": tuple(_blank_source(s) for s in doc.sources),
        }
    )
    root = build_tree(blanked, namespaces=DEFAULT_NAMESPACES)
    return hashlib.sha256(etree.tostring(root, method="c14n")).hexdigest()
