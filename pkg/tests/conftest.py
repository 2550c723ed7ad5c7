from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
LIGANDS = DATA / "ligands"


def curated_pairs():
    """(name, smiles) for every paired SDF/MOL2 fixture ligand."""
    rows = []
    for ln in (LIGANDS / "curated.smi").read_text().splitlines():
        if ln.strip():
            smi, name = ln.split()
            rows.append((name, smi))
    return rows


def small_fixture_names(limit=12):
    from dockaudit.molio import read_molecules

    return [n for n, _ in curated_pairs() if read_molecules(LIGANDS / f"{n}.mol2")[0].num_heavy <= limit]


@pytest.fixture(scope="session")
def fixture_ligands():
    """name -> (sdf Molecule, mol2 Molecule, curated SMILES)."""
    from dockaudit.molio import read_molecules

    return {
        n: (read_molecules(LIGANDS / f"{n}.sdf")[0], read_molecules(LIGANDS / f"{n}.mol2")[0], smi)
        for n, smi in curated_pairs()
    }
