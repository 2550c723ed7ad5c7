"""Atom, bond and molecule containers shared by every parser."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

METALS = frozenset(
    "Li Na K Rb Cs Be Mg Ca Sr Ba Al Ga Mn Fe Co Ni Cu Zn Cd Hg Pt Pd Ag Au Cr Mo V W Ti Ru Rh Ir Os Sn Pb".split()
)
HALOGENS = frozenset({"F", "Cl", "Br", "I"})
ELEMENTS = frozenset({"H", "B", "C", "N", "O", "Si", "P", "S", "Se", "As"}) | HALOGENS | METALS

_CANON_SYMBOL = {e.upper(): e for e in ELEMENTS}


class MolFormatError(ValueError):
    """Raised when an input file cannot be parsed.

    ``line`` is the 1-based line number of the offending record when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def normalize_element(symbol: str) -> str:
    """Return the canonical capitalization of an element symbol or raise ``ValueError``."""
    try:
        return _CANON_SYMBOL[symbol.strip().upper()]
    except KeyError:
        raise ValueError(f"unrecognized element symbol {symbol!r}") from None


class BondOrder(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"
    AMIDE = "amide"  # SYBYL "am"; treated as single in graphs

    @property
    def valence(self) -> int:
        return {"single": 1, "double": 2, "triple": 3, "aromatic": 1, "amide": 1}[self.value]


@dataclass(frozen=True)
class Atom:
    element: str
    position: tuple[float, float, float]
    name: str = ""
    formal_charge: int = 0
    atom_type: str = ""  # SYBYL / PDBQT type as read, informational
    residue_name: str = ""
    residue_number: int = 0
    chain: str = ""

    def __post_init__(self):
        object.__setattr__(self, "element", str(self.element))
        if self.element not in ELEMENTS:
            raise ValueError(f"unrecognized element {self.element!r}")
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 3 or not all(math.isfinite(c) for c in pos):
            raise ValueError(f"atom position must be three finite numbers, got {self.position!r}")
        object.__setattr__(self, "position", pos)

    @property
    def is_heavy(self) -> bool:
        return self.element != "H"

    @property
    def residue_label(self) -> str:
        return f"{self.residue_name}{self.residue_number}" if self.residue_name else ""

    def moved(self, position) -> Atom:
        return Atom(
            self.element, tuple(position), self.name, self.formal_charge,
            self.atom_type, self.residue_name, self.residue_number, self.chain,
        )


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"bond from atom {self.a} to itself")


@dataclass(frozen=True, eq=False)
class Molecule:
    """An ordered list of atoms plus bonds between them (0-based indices).

    ``properties`` holds free-form string data (SDF data items, MOL2 comments).
    """

    name: str
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = ()
    properties: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        n = len(self.atoms)
        seen = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise ValueError(f"bond {bond.a}-{bond.b} references a missing atom (n={n})")
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            if key in seen:
                raise ValueError(f"duplicate bond {key[0]}-{key[1]}")
            seen.add(key)
        if not any(a.is_heavy for a in self.atoms):
            raise ValueError(f"molecule {self.name!r} has no heavy atoms")

    def __eq__(self, other):
        if not isinstance(other, Molecule):
            return NotImplemented
        return (self.name, self.atoms, self.bonds, self.properties) == (
            other.name, other.atoms, other.bonds, other.properties
        )

    __hash__ = object.__hash__

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def coords(self) -> np.ndarray:
        arr = np.array([a.position for a in self.atoms], dtype=float).reshape(-1, 3)
        arr.flags.writeable = False
        return arr

    @cached_property
    def heavy_indices(self) -> np.ndarray:
        idx = np.array([i for i, a in enumerate(self.atoms) if a.is_heavy], dtype=int)
        idx.flags.writeable = False
        return idx

    @property
    def heavy_coords(self) -> np.ndarray:
        return self.coords[self.heavy_indices]

    @property
    def num_heavy(self) -> int:
        return len(self.heavy_indices)

    def with_coords(self, coords) -> Molecule:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (len(self.atoms), 3):
            raise ValueError(f"expected coordinates of shape ({len(self.atoms)}, 3), got {coords.shape}")
        atoms = tuple(a.moved(c) for a, c in zip(self.atoms, coords))
        return Molecule(self.name, atoms, self.bonds, dict(self.properties))

    def transformed(self, rotation, translation) -> Molecule:
        rotation = np.asarray(rotation, dtype=float)
        return self.with_coords(self.coords @ rotation.T + np.asarray(translation, dtype=float))


def transfer_topology(template: Molecule, conformation: Molecule) -> Molecule:
    """Give ``conformation``'s heavy-atom coordinates the bonds of ``template``.

    PDBQT poses carry no bond table, so they are matched back onto the
    reference ligand. Heavy atoms are matched by name when every heavy atom
    name is unique and present in both, otherwise by order. Hydrogens keep
    the template coordinates (they are never used for RMSD).
    """
    t_heavy = [i for i, a in enumerate(template.atoms) if a.is_heavy]
    c_heavy = [i for i, a in enumerate(conformation.atoms) if a.is_heavy]
    if len(t_heavy) != len(c_heavy):
        raise ValueError(
            f"heavy-atom count mismatch: template {len(t_heavy)}, conformation {len(c_heavy)}"
        )
    t_names = [template.atoms[i].name.strip() for i in t_heavy]
    c_names = {conformation.atoms[i].name.strip(): i for i in c_heavy}
    by_name = (
        len(set(t_names)) == len(t_names)
        and len(c_names) == len(c_heavy)
        and set(t_names) == set(c_names)
        and all(t_names)
    )
    coords = template.coords.copy()
    for k, ti in enumerate(t_heavy):
        ci = c_names[t_names[k]] if by_name else c_heavy[k]
        if conformation.atoms[ci].element != template.atoms[ti].element:
            raise ValueError(
                f"element mismatch matching atom {template.atoms[ti].name!r}: "
                f"{template.atoms[ti].element} vs {conformation.atoms[ci].element}"
            )
        coords[ti] = conformation.atoms[ci].position
    mol = template.with_coords(coords)
    return Molecule(conformation.name or template.name, mol.atoms, mol.bonds, dict(conformation.properties))


def split_lines(text: str) -> list[str]:
    """Split on LF or CRLF without treating other control characters as breaks."""
    return text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
