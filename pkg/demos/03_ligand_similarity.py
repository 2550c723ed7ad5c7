"""
Ligand similarity from circular fingerprints
============================================
"""

from dockaudit.chemgraph import fingerprint, parse_smiles, tanimoto

ref = "CC(C)Cc1ccc(cc1)C(C)C(=O)O"  # ibuprofen
others = {
    "ibuprofen methyl ester": "CC(C)Cc1ccc(cc1)C(C)C(=O)OC",
    "naproxen": "COc1ccc2cc(ccc2c1)C(C)C(=O)O",
    "aspirin": "CC(=O)Oc1ccccc1C(=O)O",
    "ethanol": "CCO",
}

fp = fingerprint(parse_smiles(ref))
for name, smi in others.items():
    print(f"{name:24s} {tanimoto(fp, fingerprint(parse_smiles(smi))):.3f}")
