"""
Symmetry-corrected RMSD
=======================

A benzoate pose whose ring atoms are listed in a rotated order looks far
from the crystal pose under a plain RMSD, yet it is the same placement.
Minimizing over the graph automorphisms removes the artifact.
"""

from pathlib import Path

import numpy as np

from dockaudit.chemgraph import automorphisms, from_molecule
from dockaudit.geom import rmsd, symmetry_corrected_rmsd
from dockaudit.molio import read_molecules

LIGANDS = Path(__file__).resolve().parents[1] / "tests" / "data" / "ligands"

# %%
# Load the ligand and look at its symmetry group
mol = read_molecules(LIGANDS / "benzoate.mol2")[0]
g = from_molecule(mol)
group = automorphisms(g)
print(mol.name, "heavy atoms:", mol.num_heavy, "automorphisms:", len(group))

# %%
# Relabel the pose with a non-trivial automorphism; put a little noise on top
heavy = np.asarray(g.source_atoms)
perm = np.array(group[len(group) - 1])
rng = np.random.default_rng(0)
xyz = mol.coords.copy()
xyz[heavy] = mol.coords[heavy][perm] + rng.normal(0, 0.1, (len(heavy), 3))
pose = mol.with_coords(xyz)

print("plain RMSD      %.3f A" % rmsd(mol.coords[heavy], pose.coords[heavy]))
print("corrected RMSD  %.3f A" % symmetry_corrected_rmsd(mol, pose, group))
