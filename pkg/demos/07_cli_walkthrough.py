"""
Command-line walkthrough
========================

Builds a two-case archive in a temporary directory and runs each
subcommand on it, the same way the shell entry point would.
"""

import shutil
import tempfile
from pathlib import Path

import numpy as np

from dockaudit.cli import main
from dockaudit.molio import Molecule, read_molecules, write_sdf

LIGANDS = Path(__file__).resolve().parents[1] / "tests" / "data" / "ligands"
root = Path(tempfile.mkdtemp(prefix="dockaudit_demo_"))
cases = root / "cases"

# %%
# One directory per case: crystal ligand plus gnina-style poses with a score field
for name in ("aspirin", "ibuprofen"):
    d = cases / name
    d.mkdir(parents=True)
    shutil.copy(LIGANDS / f"{name}.mol2", d / "gold-lig.mol2")
    mol = read_molecules(d / "gold-lig.mol2")[0]
    poses = [
        Molecule(mol.name, mol.with_coords(mol.coords + np.array([dx, 0.0, 0.0])).atoms, mol.bonds,
                 {"minimizedAffinity": str(score)})
        for dx, score in ((4.0, -9.1), (0.3, -8.7), (0.0, -8.0))
    ]
    (d / f"p01_{name}_gnina_dock.sdf").write_text(write_sdf(poses))

print("$ dockaudit verify")
main(["verify", str(cases), str(LIGANDS / "curated.smi")])

print("\n$ dockaudit rmsd --tool gnina")
main(["rmsd", str(cases), "--tool", "gnina", "-o", str(root / "gnina.tab")])
print((root / "gnina.tab").read_text())

print("$ dockaudit stats")
main(["stats", str(root / "gnina.tab"), "-o", str(root / "stats.json")])
print((root / "stats.json").read_text())

print("$ dockaudit box gold-lig.mol2 2.0 10.0")
main(["box", str(cases / "aspirin" / "gold-lig.mol2"), "2.0", "10.0"])
shutil.rmtree(root)
