"""Chemical graphs: SMILES, canonical labels, automorphisms, fingerprints."""

from ..molio import Molecule
from .canon import (
    DEFAULT_CAP,
    AutomorphismGroup,
    automorphisms,
    canonical_form,
    canonical_labels,
    graphs_identical,
    isomorphism,
    refine,
)
from .fingerprint import RADIUS, WIDTH, Fingerprint, atom_identifiers, environment_matches, fingerprint, stable_hash, tanimoto
from .graph import MolGraph, Node, ValenceError, from_molecule, implicit_hydrogens
from .smiles import SmilesError, parse_smiles

Permutation = tuple  # mapping[i] is the image of node i

__all__ = [
    "DEFAULT_CAP", "RADIUS", "WIDTH",
    "AutomorphismGroup", "Fingerprint", "MolGraph", "Node", "Permutation", "SmilesError", "ValenceError",
    "atom_identifiers", "automorphisms", "environment_matches", "canonical_form", "canonical_labels", "fingerprint", "from_molecule",
    "graphs_identical", "implicit_hydrogens", "isomorphism", "parse_smiles", "refine", "stable_hash",
    "tanimoto", "verify_ligand",
]


def verify_ligand(candidate: Molecule, curated_smiles: str) -> bool:
    """True when the ligand's topology matches the curated SMILES exactly."""
    return graphs_identical(from_molecule(candidate), parse_smiles(curated_smiles))
