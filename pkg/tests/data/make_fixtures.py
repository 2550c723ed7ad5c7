"""Regenerate the ligand fixtures with RDKit (SDF) and Open Babel (MOL2, PDBQT).

Not part of the test run and not a package dependency; run it in an
environment that has both toolkits:

    python tests/data/make_fixtures.py
"""

import re
from pathlib import Path

from openbabel import pybel
from rdkit import Chem
from rdkit.Chem import AllChem

HERE = Path(__file__).parent
LIG = HERE / "ligands"

# (name, SMILES); the small ones have <= 12 heavy atoms
SMALL = [
    ("benzene", "c1ccccc1"),
    ("biphenyl", "c1ccc(cc1)-c1ccccc1"),
    ("acetate", "CC(=O)[O-]"),
    ("acetic_acid", "CC(=O)O"),
    ("benzoate", "[O-]C(=O)c1ccccc1"),
    ("terephthalate", "[O-]C(=O)c1ccc(cc1)C([O-])=O"),
    ("malonate", "[O-]C(=O)CC([O-])=O"),
    ("glycine_zwitterion", "[NH3+]CC(=O)[O-]"),
    ("nitrobenzene", "[O-][N+](=O)c1ccccc1"),
    ("methyl_phosphate", "COP(=O)([O-])[O-]"),
    ("methanesulfonate", "CS(=O)(=O)[O-]"),
    ("toluene", "Cc1ccccc1"),
    ("phenol", "Oc1ccccc1"),
    ("pyridine", "c1ccncc1"),
    ("naphthalene", "c1ccc2ccccc2c1"),
    ("cyclohexane", "C1CCCCC1"),
    ("neopentane", "CC(C)(C)C"),
    ("tert_butanol", "CC(C)(C)O"),
    ("ethanol", "CCO"),
    ("dimethyl_ether", "COC"),
    ("acetone", "CC(C)=O"),
    ("urea", "NC(N)=O"),
    ("acetamide", "CC(N)=O"),
    ("imidazole", "c1c[nH]cn1"),
    ("thiophene", "c1ccsc1"),
    ("furan", "c1ccoc1"),
    ("indole", "c1ccc2[nH]ccc2c1"),
    ("p_xylene", "Cc1ccc(C)cc1"),
    ("mesitylene", "Cc1cc(C)cc(C)c1"),
    ("adamantane", "C1C2CC3CC1CC(C2)C3"),
    ("cubane", "C12C3C4C1C5C2C3C45"),
    ("trifluorotoluene", "FC(F)(F)c1ccccc1"),
    ("methylammonium", "C[NH3+]"),
    ("pyridinium", "c1cc[nH+]cc1"),
    ("cyclopentanone", "O=C1CCCC1"),
    ("chlorobromofluoromethane", "FC(Cl)Br"),
]
LARGE = [
    ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
    ("ibuprofen", "CC(C)Cc1ccc(cc1)C(C)C(=O)O"),
    ("sulfamethoxazole", "Cc1cc(NS(=O)(=O)c2ccc(N)cc2)no1"),
    ("tryptophan_zwitterion", "[NH3+]C(Cc1c[nH]c2ccccc12)C(=O)[O-]"),
]


def embed(smiles, seed):
    mol = Chem.AddHs(Chem.MolFromSmiles(smiles))
    AllChem.EmbedMolecule(mol, randomSeed=seed)
    AllChem.MMFFOptimizeMolecule(mol)
    return mol


def unique_names(mol2_text):
    """Rename atoms to element + serial so every name is unique."""
    out, in_atoms = [], False
    for ln in mol2_text.splitlines():
        if ln.startswith("@<TRIPOS>"):
            in_atoms = ln.strip() == "@<TRIPOS>ATOM"
            out.append(ln)
            continue
        if in_atoms and ln.strip():
            parts = ln.split()
            elem = re.match(r"[A-Za-z]+", parts[5].split(".")[0]).group(0)
            ln = ln.replace(f" {parts[1]} ", f" {elem}{parts[0]} ", 1)
        out.append(ln)
    return "\n".join(out) + "\n"


def main():
    LIG.mkdir(exist_ok=True)
    curated = []
    for seed, (name, smi) in enumerate(SMALL + LARGE):
        mol = embed(smi, seed + 11)
        mol.SetProp("_Name", name)
        # aromatic bonds as order 4, matching the MOL2 "ar" annotation
        mb = Chem.MolToMolBlock(mol, kekulize=False)
        (LIG / f"{name}.sdf").write_text(mb + "$$$$\n")
        if name == "benzene":
            (HERE / "benzene_kekule.sdf").write_text(Chem.MolToMolBlock(mol) + "$$$$\n")
        ob = pybel.readstring("mol", Chem.MolToMolBlock(mol))
        ob.title = name
        (LIG / f"{name}.mol2").write_text(unique_names(ob.write("mol2")))
        curated.append(f"{smi} {name}")
    (LIG / "curated.smi").write_text("\n".join(curated) + "\n")

    # three Vina-style models of ibuprofen with known scores
    template = pybel.readstring("mol2", (LIG / "ibuprofen.mol2").read_text())
    pdbqt = template.write("pdbqt")
    body = [ln for ln in pdbqt.splitlines() if not ln.startswith(("MODEL", "ENDMDL", "REMARK"))]
    scores = [(-7.4, 0.000, 0.000), (-6.9, 1.871, 3.122), (-6.25, 4.402, 6.953)]
    shifts = [(0.0, 0.0, 0.0), (0.8, 0.0, 0.0), (3.0, 1.0, -2.0)]
    models = []
    for k, ((s, lb, ub), (dx, dy, dz)) in enumerate(zip(scores, shifts), 1):
        models.append(f"MODEL {k}")
        models.append(f"REMARK VINA RESULT: {s:9.3f} {lb:9.3f} {ub:9.3f}")
        for ln in body:
            if ln.startswith(("ATOM", "HETATM")):
                x, y, z = float(ln[30:38]) + dx, float(ln[38:46]) + dy, float(ln[46:54]) + dz
                ln = f"{ln[:30]}{x:8.3f}{y:8.3f}{z:8.3f}{ln[54:]}"
            models.append(ln)
        models.append("ENDMDL")
    (HERE / "ibuprofen_vina_out.pdbqt").write_text("\n".join(models) + "\n")


if __name__ == "__main__":
    main()
