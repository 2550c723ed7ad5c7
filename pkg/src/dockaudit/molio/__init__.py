"""Readers and writers for MOL2, SDF (V2000), PDB and Vina PDBQT."""

from .core import (
    ELEMENTS,
    HALOGENS,
    METALS,
    Atom,
    Bond,
    BondOrder,
    Molecule,
    MolFormatError,
    transfer_topology,
)
from .mol2 import SYBYL_ELEMENTS, parse_mol2, write_mol2
from .pdb import AMINO_ACIDS, StructureFile, parse_pdbqt_models, split_structure
from .poses import PoseFormat, ScoredPose, Tool, parse_pose_output, read_score_table
from .sdf import parse_sdf, write_sdf

__all__ = [
    "AMINO_ACIDS", "ELEMENTS", "HALOGENS", "METALS", "SYBYL_ELEMENTS",
    "Atom", "Bond", "BondOrder", "Molecule", "MolFormatError", "PoseFormat",
    "ScoredPose", "StructureFile", "Tool",
    "parse_mol2", "parse_pdbqt_models", "parse_pose_output", "parse_sdf",
    "read_score_table", "split_structure", "transfer_topology", "write_mol2", "write_sdf",
]


def read_molecules(path) -> list[Molecule]:
    """Dispatch on file extension (.mol2, .sdf/.mol, .pdb ligands)."""
    from pathlib import Path

    path = Path(path)
    text = path.read_text()
    suffix = path.suffix.lower()
    if suffix == ".mol2":
        return parse_mol2(text)
    if suffix in (".sdf", ".mol", ".sd"):
        return parse_sdf(text)
    if suffix in (".pdb", ".ent"):
        return list(split_structure(text).ligands)
    raise MolFormatError(f"unsupported file type {path.suffix!r} for {path}")
