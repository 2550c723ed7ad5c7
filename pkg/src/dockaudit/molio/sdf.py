"""MDL SD file (V2000 connection tables only)."""

from __future__ import annotations

import re

from .core import Atom, Bond, BondOrder, Molecule, MolFormatError, normalize_element, split_lines

_BOND_IN = {1: BondOrder.SINGLE, 2: BondOrder.DOUBLE, 3: BondOrder.TRIPLE, 4: BondOrder.AROMATIC}
_BOND_OUT = {
    BondOrder.SINGLE: 1, BondOrder.AMIDE: 1, BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3, BondOrder.AROMATIC: 4,
}
_DATA_KEY = re.compile(r"<([^>]*)>")
# legacy atom-block charge codes
_CHARGE_CODE = {0: 0, 1: 3, 2: 2, 3: 1, 4: 0, 5: -1, 6: -2, 7: -3}


def parse_sdf(text: str) -> list[Molecule]:
    """Parse all records of a V2000 SD file, data items included, in file order."""
    lines = split_lines(text)
    mols = []
    i = 0
    n = len(lines)
    while i < n:
        # skip blank padding between records / at end of file
        if not lines[i].strip() and all(not ln.strip() for ln in lines[i:]):
            break
        mol, i = _parse_record(lines, i)
        mols.append(mol)
    return mols


def _int_field(line: str, lo: int, hi: int, lineno: int, what: str) -> int:
    chunk = line[lo:hi].strip()
    if not chunk:
        return 0
    try:
        return int(chunk)
    except ValueError:
        raise MolFormatError(f"bad {what} field {chunk!r}", lineno) from None


def _parse_record(lines, start):
    n = len(lines)
    if start + 3 >= n:
        raise MolFormatError("truncated header block", start + 1)
    name = lines[start].strip()
    counts = lines[start + 3]
    counts_no = start + 4
    if "V3000" in counts:
        raise MolFormatError("V3000 connection tables are not supported", counts_no)
    n_atoms = _int_field(counts, 0, 3, counts_no, "atom count")
    n_bonds = _int_field(counts, 3, 6, counts_no, "bond count")
    if counts[:6].strip() == "" or len(counts.rstrip()) < 6:
        raise MolFormatError(f"malformed counts line {counts!r}", counts_no)
    i = start + 4
    if i + n_atoms + n_bonds > n:
        raise MolFormatError(
            f"counts line declares {n_atoms} atoms and {n_bonds} bonds but the block is truncated",
            counts_no,
        )
    coords, elements, charges, names = [], [], [], []
    for k in range(n_atoms):
        ln = lines[i + k]
        lineno = i + k + 1
        if ln.startswith("M  ") or len(ln) < 34:
            raise MolFormatError(f"expected atom line, got {ln!r} (counts-line mismatch?)", lineno)
        try:
            xyz = (float(ln[0:10]), float(ln[10:20]), float(ln[20:30]))
        except ValueError:
            raise MolFormatError(f"bad coordinates in {ln!r}", lineno) from None
        try:
            elements.append(normalize_element(ln[31:34]))
        except ValueError as exc:
            raise MolFormatError(str(exc), lineno) from None
        coords.append(xyz)
        charges.append(_CHARGE_CODE.get(_int_field(ln, 36, 39, lineno, "charge"), 0))
        names.append(f"{elements[-1]}{k + 1}")
    i += n_atoms
    bonds = []
    for k in range(n_bonds):
        ln = lines[i + k]
        lineno = i + k + 1
        if ln.startswith("M  "):
            raise MolFormatError("bond block ends early (counts-line mismatch)", lineno)
        a = _int_field(ln, 0, 3, lineno, "bond atom")
        b = _int_field(ln, 3, 6, lineno, "bond atom")
        t = _int_field(ln, 6, 9, lineno, "bond type")
        if not (1 <= a <= n_atoms and 1 <= b <= n_atoms):
            raise MolFormatError(f"bond references atom outside 1..{n_atoms}", lineno)
        if t not in _BOND_IN:
            raise MolFormatError(f"unsupported bond type {t}", lineno)
        bonds.append(Bond(a - 1, b - 1, _BOND_IN[t]))
    i += n_bonds
    # properties block
    chg_seen = False
    while True:
        if i >= n:
            raise MolFormatError("missing 'M  END'", i)
        ln = lines[i]
        lineno = i + 1
        i += 1
        if ln.startswith("M  END"):
            break
        if ln.startswith("$$$$"):
            raise MolFormatError("record ended before 'M  END'", lineno)
        if ln.startswith("M  CHG"):
            if not chg_seen:
                # M  CHG overrides the legacy atom-block charges
                charges = [0] * n_atoms
                chg_seen = True
            toks = ln.split()
            try:
                count = int(toks[2])
                for j in range(count):
                    idx, val = int(toks[3 + 2 * j]), int(toks[4 + 2 * j])
                    charges[idx - 1] = val
            except (ValueError, IndexError):
                raise MolFormatError(f"bad charge property {ln!r}", lineno) from None
    # data items
    props: dict[str, str] = {}
    while i < n:
        ln = lines[i]
        i += 1
        if ln.startswith("$$$$"):
            break
        if ln.startswith(">"):
            m = _DATA_KEY.search(ln)
            key = m.group(1) if m else ln[1:].strip()
            values = []
            while i < n and lines[i].strip() and not lines[i].startswith("$$$$"):
                values.append(lines[i])
                i += 1
            props[key.strip()] = "\n".join(values)
    atoms = [Atom(e, xyz, nm, q) for e, xyz, nm, q in zip(elements, coords, names, charges)]
    try:
        return Molecule(name, atoms, bonds, props), i
    except ValueError as exc:
        raise MolFormatError(str(exc), start + 1) from None


def write_sdf(mols) -> str:
    out = []
    for mol in mols:
        out.append(mol.name)
        out.append("  dockaudit")
        out.append("")
        out.append(f"{len(mol.atoms):3d}{len(mol.bonds):3d}  0  0  0  0  0  0  0  0999 V2000")
        for atom in mol.atoms:
            x, y, z = atom.position
            out.append(f"{x:10.4f}{y:10.4f}{z:10.4f} {atom.element:<3s} 0  0  0  0  0  0  0  0  0  0  0  0")
        for bond in mol.bonds:
            out.append(f"{bond.a + 1:3d}{bond.b + 1:3d}{_BOND_OUT[bond.order]:3d}  0")
        charged = [(i + 1, a.formal_charge) for i, a in enumerate(mol.atoms) if a.formal_charge]
        for k in range(0, len(charged), 8):
            chunk = charged[k : k + 8]
            out.append(f"M  CHG{len(chunk):3d}" + "".join(f" {i:3d} {q:3d}" for i, q in chunk))
        out.append("M  END")
        for key, value in mol.properties.items():
            out.append(f">  <{key}>")
            out.extend(value.splitlines() or [""])
            out.append("")
        out.append("$$$$")
    return "\n".join(out) + ("\n" if out else "")
