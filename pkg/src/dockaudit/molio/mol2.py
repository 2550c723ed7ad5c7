"""SYBYL MOL2 reader and writer."""

from __future__ import annotations

from dataclasses import replace

from .core import METALS, Atom, Bond, BondOrder, Molecule, MolFormatError, split_lines

# Explicit table; anything else is an error rather than a guess.
SYBYL_ELEMENTS = {
    "C.1": "C", "C.2": "C", "C.3": "C", "C.ar": "C", "C.cat": "C",
    "N.1": "N", "N.2": "N", "N.3": "N", "N.4": "N", "N.ar": "N", "N.am": "N", "N.pl3": "N",
    "O.2": "O", "O.3": "O", "O.co2": "O", "O.spc": "O", "O.t3p": "O",
    "S.2": "S", "S.3": "S", "S.O": "S", "S.O2": "S", "S.o": "S", "S.o2": "S",
    "P.3": "P",
    "H": "H", "H.spc": "H", "H.t3p": "H",
    "F": "F", "Cl": "Cl", "Br": "Br", "I": "I",
    "B": "B", "Si": "Si", "Se": "Se", "As": "As",
    "Fe": "Fe", "Co.oh": "Co", "Cr.oh": "Cr", "Cr.th": "Cr", "Mo": "Mo",
}
SYBYL_ELEMENTS.update({m: m for m in METALS})

_BOND_CODES = {
    "1": BondOrder.SINGLE, "2": BondOrder.DOUBLE, "3": BondOrder.TRIPLE,
    "ar": BondOrder.AROMATIC, "am": BondOrder.AMIDE,
}
_BOND_WRITE = {v: k for k, v in _BOND_CODES.items()}

_DEFAULT_TYPES = {"C": "C.3", "N": "N.3", "O": "O.3", "S": "S.3", "P": "P.3"}


def sybyl_element(atom_type: str, lineno: int | None = None) -> str:
    try:
        return SYBYL_ELEMENTS[atom_type]
    except KeyError:
        raise MolFormatError(f"unknown SYBYL atom type {atom_type!r}", lineno) from None


def parse_mol2(text: str) -> list[Molecule]:
    """Parse every ``@<TRIPOS>MOLECULE`` record in ``text``.

    Formal charges come from ``UNITY_ATOM_ATTR`` ``charge`` attributes when
    present, otherwise from the charge column if the record's charge type is
    ``FORMAL_CHARGES``; partial-charge columns are ignored.
    """
    lines = split_lines(text)
    starts = [i for i, ln in enumerate(lines) if ln.strip() == "@<TRIPOS>MOLECULE"]
    if not starts and any(ln.startswith("@<TRIPOS>") for ln in lines):
        first = next(i for i, ln in enumerate(lines) if ln.startswith("@<TRIPOS>"))
        raise MolFormatError("section found before any @<TRIPOS>MOLECULE header", first + 1)
    mols = []
    for k, start in enumerate(starts):
        end = starts[k + 1] if k + 1 < len(starts) else len(lines)
        mols.append(_parse_record(lines, start, end))
    return mols


def _sections(lines, start, end):
    sections: dict[str, tuple[int, list[tuple[int, str]]]] = {}
    current = None
    for i in range(start, end):
        ln = lines[i]
        if ln.startswith("@<TRIPOS>"):
            name = ln[len("@<TRIPOS>"):].strip()
            if not name or not name.replace("_", "").isalnum():
                raise MolFormatError(f"malformed section header {ln.strip()!r}", i + 1)
            current = name
            sections[current] = (i + 1, [])
        elif ln.startswith("@"):
            raise MolFormatError(f"malformed section header {ln.strip()!r}", i + 1)
        elif current is not None and ln.strip() and not ln.lstrip().startswith("#"):
            sections[current][1].append((i + 1, ln))
    return sections


def _parse_record(lines, start, end) -> Molecule:
    sections = _sections(lines, start, end)
    header_line = start + 1
    # the MOLECULE section keeps blank lines significant, so read it directly
    mol_lines = []
    for i in range(start + 1, end):
        if lines[i].startswith("@<TRIPOS>"):
            break
        mol_lines.append(lines[i])
    if len(mol_lines) < 2:
        raise MolFormatError("truncated MOLECULE section", header_line)
    name = mol_lines[0].strip()
    try:
        counts = [int(tok) for tok in mol_lines[1].split()]
        n_atoms = counts[0]
        n_bonds = counts[1] if len(counts) > 1 else 0
    except (ValueError, IndexError):
        raise MolFormatError(f"bad counts line {mol_lines[1]!r}", header_line + 2) from None
    charge_type = mol_lines[3].strip().upper() if len(mol_lines) > 3 else ""
    formal = charge_type == "FORMAL_CHARGES"
    comment = ""
    if "COMMENT" in sections:
        comment = "\n".join(ln.strip() for _, ln in sections["COMMENT"][1])

    atom_header, atom_lines = sections.get("ATOM", (header_line, []))
    if len(atom_lines) != n_atoms:
        raise MolFormatError(
            f"molecule {name!r} declares {n_atoms} atoms but has {len(atom_lines)}", atom_header
        )
    atoms = []
    ids = {}
    for lineno, ln in atom_lines:
        parts = ln.split()
        if len(parts) < 6:
            raise MolFormatError(f"atom record needs at least 6 fields: {ln.strip()!r}", lineno)
        try:
            atom_id = int(parts[0])
            x, y, z = float(parts[2]), float(parts[3]), float(parts[4])
        except ValueError:
            raise MolFormatError(f"bad atom record {ln.strip()!r}", lineno) from None
        atom_type = parts[5]
        element = sybyl_element(atom_type, lineno)
        resnum, resname = 0, ""
        if len(parts) > 6:
            try:
                resnum = int(parts[6])
            except ValueError:
                raise MolFormatError(f"bad substructure id {parts[6]!r}", lineno) from None
        if len(parts) > 7:
            resname = parts[7]
        charge = 0
        if formal and len(parts) > 8:
            try:
                charge = int(round(float(parts[8])))
            except ValueError:
                raise MolFormatError(f"bad charge {parts[8]!r}", lineno) from None
        if atom_id in ids:
            raise MolFormatError(f"duplicate atom id {atom_id}", lineno)
        ids[atom_id] = len(atoms)
        try:
            atoms.append(Atom(element, (x, y, z), parts[1], charge, atom_type, resname, resnum))
        except ValueError as exc:
            raise MolFormatError(str(exc), lineno) from None

    bond_header, bond_lines = sections.get("BOND", (header_line, []))
    if len(bond_lines) != n_bonds:
        raise MolFormatError(
            f"molecule {name!r} declares {n_bonds} bonds but has {len(bond_lines)}", bond_header
        )
    bonds = []
    for lineno, ln in bond_lines:
        parts = ln.split()
        if len(parts) < 4:
            raise MolFormatError(f"bond record needs 4 fields: {ln.strip()!r}", lineno)
        try:
            a, b = ids[int(parts[1])], ids[int(parts[2])]
        except (ValueError, KeyError):
            raise MolFormatError(f"bond references unknown atom: {ln.strip()!r}", lineno) from None
        code = parts[3].lower() if parts[3].lower() in ("ar", "am") else parts[3]
        if code not in _BOND_CODES:
            raise MolFormatError(f"unsupported bond type {parts[3]!r}", lineno)
        bonds.append(Bond(a, b, _BOND_CODES[code]))
    unity = _unity_charges(sections.get("UNITY_ATOM_ATTR", (0, []))[1], ids)
    if unity:
        atoms = [replace(a, formal_charge=unity.get(k, 0)) for k, a in enumerate(atoms)]
    props = {"comment": comment} if comment else {}
    try:
        return Molecule(name, atoms, bonds, props)
    except ValueError as exc:
        raise MolFormatError(str(exc), header_line) from None


def _unity_charges(lines, ids) -> dict[int, int]:
    """Atom index -> formal charge from ``atom_id n_attrs`` blocks of ``name value`` lines."""
    out = {}
    k = 0
    while k < len(lines):
        lineno, ln = lines[k]
        parts = ln.split()
        try:
            atom_id, n_attr = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise MolFormatError(f"bad UNITY_ATOM_ATTR header {ln.strip()!r}", lineno) from None
        if atom_id not in ids:
            raise MolFormatError(f"UNITY_ATOM_ATTR refers to unknown atom {atom_id}", lineno)
        for lineno2, attr in lines[k + 1 : k + 1 + n_attr]:
            fields = attr.split()
            if len(fields) >= 2 and fields[0].lower() == "charge":
                try:
                    out[ids[atom_id]] = int(fields[1])
                except ValueError:
                    raise MolFormatError(f"bad charge attribute {attr.strip()!r}", lineno2) from None
        k += 1 + n_attr
    return out


def _atom_type(atom: Atom, aromatic: bool) -> str:
    if atom.atom_type in SYBYL_ELEMENTS and SYBYL_ELEMENTS[atom.atom_type] == atom.element:
        return atom.atom_type
    if aromatic and atom.element in ("C", "N"):
        return atom.element + ".ar"
    return _DEFAULT_TYPES.get(atom.element, atom.element)


def write_mol2(mols) -> str:
    """Serialize molecules as MOL2 with ``FORMAL_CHARGES`` so charges survive a round trip."""
    out = []
    for mol in mols:
        aromatic = set()
        for bond in mol.bonds:
            if bond.order is BondOrder.AROMATIC:
                aromatic.update((bond.a, bond.b))
        out.append("@<TRIPOS>MOLECULE")
        out.append(mol.name or "*****")
        out.append(f"{len(mol.atoms)} {len(mol.bonds)} 1 0 0")
        out.append("SMALL")
        out.append("FORMAL_CHARGES")
        out.append("")
        comment = mol.properties.get("comment")
        if comment:
            out.append("@<TRIPOS>COMMENT")
            out.extend(comment.splitlines())
        out.append("@<TRIPOS>ATOM")
        for i, atom in enumerate(mol.atoms):
            x, y, z = atom.position
            name = atom.name or f"{atom.element}{i + 1}"
            out.append(
                f"{i + 1:7d} {name:<8s} {x:10.4f} {y:10.4f} {z:10.4f} {_atom_type(atom, i in aromatic):<6s} "
                f"{atom.residue_number:4d} {atom.residue_name or 'LIG':<8s} {atom.formal_charge:8.4f}"
            )
        out.append("@<TRIPOS>BOND")
        for i, bond in enumerate(mol.bonds):
            out.append(f"{i + 1:6d} {bond.a + 1:5d} {bond.b + 1:5d} {_BOND_WRITE[bond.order]}")
        charged = [(i, a.formal_charge) for i, a in enumerate(mol.atoms) if a.formal_charge]
        if charged:
            # readers that ignore the charge column still pick these up
            out.append("@<TRIPOS>UNITY_ATOM_ATTR")
            for i, q in charged:
                out.append(f"{i + 1} 1")
                out.append(f"charge {q}")
    return "\n".join(out) + ("\n" if out else "")
