"""PDB (ATOM/HETATM/MODEL/CONECT subset) and Vina PDBQT readers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Atom, Bond, Molecule, MolFormatError, normalize_element, split_lines

AMINO_ACIDS = frozenset(
    "ALA ARG ASN ASP CYS GLN GLU GLY HIS ILE LEU LYS MET PHE PRO SER THR TRP TYR VAL "
    "HID HIE HIP HSD HSE HSP CYX ASH GLH LYN MSE SEC PYL".split()
)
WATERS = frozenset({"HOH", "WAT", "H2O", "DOD", "TIP", "TIP3", "SOL"})

# AutoDock atom types that are not plain element symbols
_PDBQT_TYPES = {"A": "C", "NA": "N", "NS": "N", "OA": "O", "OS": "O", "SA": "S", "HD": "H", "HS": "H", "CL": "Cl", "BR": "Br"}


@dataclass(frozen=True)
class StructureFile:
    proteins: tuple[Molecule, ...] = ()
    ligands: tuple[Molecule, ...] = ()
    waters: tuple[Molecule, ...] = ()
    metadata: dict = field(default_factory=dict)


@dataclass
class _Record:
    lineno: int
    hetatm: bool
    serial: int
    name: str
    altloc: str
    resname: str
    chain: str
    resnum: int
    icode: str
    xyz: tuple[float, float, float]
    occupancy: float
    element: str
    charge: int
    atom_type: str = ""


def _element_from_name(name: str, resname: str) -> str:
    """Fallback when columns 77-78 are blank; PDB right-justifies one-letter elements in 13-14."""
    if len(name) < 2 or not name.strip():
        raise ValueError(f"cannot infer element from atom name {name!r}")
    if name[0] == " " or name[0].isdigit():
        return normalize_element(name[1])
    if name.strip().upper() == resname.upper():
        return normalize_element(name.strip())
    if name[:2].upper() in ("CL", "BR") and resname not in AMINO_ACIDS:
        return normalize_element(name[:2])
    return normalize_element(name[0])


def _parse_charge(field: str) -> int:
    field = field.strip()
    if not field:
        return 0
    if field[-1] in "+-" and field[:-1].isdigit():
        return int(field[:-1]) * (1 if field[-1] == "+" else -1)
    if field[0] in "+-" and field[1:].isdigit():
        return int(field)
    return 0


def _atom_record(ln: str, lineno: int, pdbqt: bool = False) -> _Record:
    ln = ln.ljust(80)
    try:
        serial = int(ln[6:11]) if ln[6:11].strip() else 0
        xyz = (float(ln[30:38]), float(ln[38:46]), float(ln[46:54]))
    except ValueError:
        raise MolFormatError(f"bad coordinate record {ln.rstrip()!r}", lineno) from None
    name = ln[12:16]
    resname = ln[17:21].strip()
    try:
        resnum = int(ln[22:26]) if ln[22:26].strip() else 0
    except ValueError:
        raise MolFormatError(f"bad residue number {ln[22:26]!r}", lineno) from None
    occ_field = ln[54:60].strip()
    try:
        occupancy = float(occ_field) if occ_field else 1.0
    except ValueError:
        occupancy = 1.0
    atom_type = ""
    charge = 0
    try:
        if pdbqt:
            atom_type = ln[77:79].strip()
            if not atom_type:
                raise ValueError(f"missing AutoDock atom type in {ln.rstrip()!r}")
            element = normalize_element(_PDBQT_TYPES.get(atom_type.upper(), atom_type))
        else:
            elem_field = ln[76:78].strip()
            element = normalize_element(elem_field) if elem_field else _element_from_name(name, resname)
            charge = _parse_charge(ln[78:80])
    except ValueError as exc:
        raise MolFormatError(str(exc), lineno) from None
    return _Record(
        lineno, ln.startswith("HETATM"), serial, name.strip(), ln[16].strip(), resname,
        ln[21].strip(), resnum, ln[26].strip(), xyz, occupancy, element, charge, atom_type,
    )


def _resolve_altlocs(records: list[_Record]) -> list[_Record]:
    """Keep one record per alternate-location atom: highest occupancy, ties to file order."""
    best: dict[tuple, int] = {}
    keep = []
    for i, rec in enumerate(records):
        if not rec.altloc:
            keep.append(i)
            continue
        key = (rec.chain, rec.resnum, rec.icode, rec.name, rec.hetatm)
        j = best.get(key)
        if j is None or rec.occupancy > records[j].occupancy:
            best[key] = i
    keep.extend(best.values())
    return [records[i] for i in sorted(keep)]


def _first_model(lines):
    out = []
    seen_model = False
    for i, ln in enumerate(lines):
        if ln.startswith("MODEL"):
            if seen_model:
                break
            seen_model = True
            continue
        if ln.startswith("ENDMDL"):
            break
        out.append((i + 1, ln))
    return out


def _to_atom(rec: _Record) -> Atom:
    return Atom(rec.element, rec.xyz, rec.name, rec.charge, rec.atom_type, rec.resname, rec.resnum, rec.chain)


def split_structure(text: str) -> StructureFile:
    """Partition a PDB entry into polymer chains, hetero groups and waters.

    ATOM records, and HETATM records with amino-acid residue names (e.g. MSE),
    become one protein per chain. Waters become one molecule each. Every other
    HETATM group (residue name, chain, residue number, insertion code) becomes
    a ligand, with CONECT records supplying single bonds.
    """
    numbered = _first_model(split_lines(text))
    records = []
    conect: list[tuple[int, list[int]]] = []
    for lineno, ln in numbered:
        tag = ln[:6]
        if tag in ("ATOM  ", "HETATM"):
            records.append(_atom_record(ln, lineno))
        elif tag == "CONECT":
            fields = [ln[k : k + 5] for k in range(6, len(ln.rstrip()), 5)]
            try:
                ids = [int(f) for f in fields if f.strip()]
            except ValueError:
                raise MolFormatError(f"bad CONECT record {ln.rstrip()!r}", lineno) from None
            if ids:
                conect.append((ids[0], ids[1:]))
    if not any(not r.hetatm for r in records):
        raise MolFormatError("no ATOM records found")
    records = _resolve_altlocs(records)

    protein_groups: dict[str, list[_Record]] = {}
    ligand_groups: dict[tuple, list[_Record]] = {}
    water_groups: dict[tuple, list[_Record]] = {}
    for rec in records:
        if not rec.hetatm or rec.resname in AMINO_ACIDS:
            protein_groups.setdefault(rec.chain, []).append(rec)
        elif rec.resname in WATERS:
            if rec.element not in ("O", "H"):
                raise MolFormatError(f"water residue contains {rec.element}", rec.lineno)
            water_groups.setdefault((rec.chain, rec.resnum, rec.icode), []).append(rec)
        else:
            ligand_groups.setdefault((rec.resname, rec.chain, rec.resnum, rec.icode), []).append(rec)

    proteins = tuple(
        Molecule(f"chain {chain or '_'}", [_to_atom(r) for r in recs]) for chain, recs in protein_groups.items()
    )
    waters = tuple(
        Molecule(f"HOH {c}{n}{ic}", [_to_atom(r) for r in recs]) for (c, n, ic), recs in water_groups.items()
    )
    ligands = []
    for (resname, chain, resnum, icode), recs in ligand_groups.items():
        index = {r.serial: k for k, r in enumerate(recs) if r.serial}
        pairs = set()
        for src, targets in conect:
            if src not in index:
                continue
            for t in targets:
                if t in index and t != src:
                    pairs.add((min(index[src], index[t]), max(index[src], index[t])))
        bonds = [Bond(a, b) for a, b in sorted(pairs)]
        try:
            ligands.append(Molecule(f"{resname} {chain}{resnum}{icode}", [_to_atom(r) for r in recs], bonds))
        except ValueError as exc:
            raise MolFormatError(f"ligand {resname} {chain}{resnum}: {exc}", recs[0].lineno) from None
    return StructureFile(proteins, tuple(ligands), waters)


def parse_pdbqt_models(text: str) -> list[tuple[Molecule, float | None]]:
    """Read Vina output: one (molecule, score) per MODEL block.

    The score is the first number of ``REMARK VINA RESULT``; torsion-tree
    records are skipped. A file without MODEL records is a single pose.
    """
    lines = split_lines(text)
    models: list[tuple[list[_Record], float | None, int]] = []
    current: list[_Record] | None = None
    score: float | None = None
    start = 0
    for i, ln in enumerate(lines):
        lineno = i + 1
        if ln.startswith("MODEL"):
            current, score, start = [], None, lineno
        elif ln.startswith("ENDMDL"):
            if current is None:
                raise MolFormatError("ENDMDL without MODEL", lineno)
            models.append((current, score, start))
            current = None
        elif ln.startswith("REMARK VINA RESULT"):
            rest = ln[len("REMARK VINA RESULT"):].replace(":", " ").split()
            try:
                score = float(rest[0])
            except (ValueError, IndexError):
                raise MolFormatError(f"bad VINA RESULT remark {ln!r}", lineno) from None
        elif ln.startswith(("ATOM  ", "HETATM")):
            if current is None:
                if models:
                    raise MolFormatError("coordinates outside a MODEL block", lineno)
                current, start = [], lineno
            current.append(_atom_record(ln, lineno, pdbqt=True))
    if current:
        models.append((current, score, start))
    out = []
    for k, (recs, sc, start) in enumerate(models):
        if not recs:
            raise MolFormatError("MODEL block without atoms", start)
        out.append((Molecule(f"pose{k + 1}", [_to_atom(r) for r in recs]), sc))
    return out
