"""Deterministic synthetic structures for tests and demos.

Everything here is driven by an explicit ``numpy.random.Generator`` so
fixtures are reproducible. Geometry is only loosely physical: bond lengths
along a spanning tree are 1.5 A and atoms keep a minimum separation, which is
enough for RMSD, clustering and pocket-comparison exercises.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chemgraph import MolGraph, environment_matches, fingerprint, from_molecule, parse_smiles, tanimoto
from .geom import RigidTransform
from .molio import Atom, Bond, BondOrder, Molecule


# one open attachment "{}" per fragment; ring digits are filled per depth
FRAGMENTS = (
    "c{r}ccc({})cc{r}",
    "c{r}ccc({})nc{r}",
    "C{r}CCN({})CC{r}",
    "C{r}CC({})CC{r}",
    "c{r}cc({})sc{r}",
    "C(=O)N{}",
    "CC{}",
    "OC{}",
    "S(=O)(=O)N{}",
    "C(C)(C){}",
    "NC(=O){}",
)
TERMINALS = ("C", "F", "Cl", "OC", "C(=O)O", "N", "C#N", "C(F)(F)F", "Br", "O")


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_transform(rng: np.random.Generator, shift: float = 10.0) -> RigidTransform:
    return RigidTransform(random_rotation(rng), rng.uniform(-shift, shift, 3))


def ligand_smiles(fragments, terminal: str) -> str:
    out = "{}"
    for depth, frag in enumerate(fragments):
        out = out.replace("{}", frag.replace("{r}", str(depth + 1)), 1)
    return out.replace("{}", terminal)


def random_ligand_smiles(rng: np.random.Generator, n_fragments: int = 4) -> tuple[tuple[str, ...], str]:
    frags = tuple(FRAGMENTS[i] for i in rng.integers(len(FRAGMENTS), size=n_fragments))
    return frags, TERMINALS[rng.integers(len(TERMINALS))]


def _embed(g: MolGraph, rng, center, radius: float, with_h: bool, fixed: dict | None = None) -> np.ndarray:
    """BFS embedding: 1.5 A steps, >= 1.1 A from every placed atom, kept inside a sphere if possible.

    ``fixed`` pins heavy-atom nodes to given coordinates; the rest grow out from them.
    """
    center = np.asarray(center, dtype=float)
    n = len(g) + (sum(nd.h_count for nd in g.nodes) if with_h else 0)
    xyz = np.zeros((n, 3))
    placed = np.zeros(n, bool)
    adj = [[u for u, _ in g.neighbors[v]] for v in range(len(g))]
    h_next = len(g)
    h_parent = []
    for v in range(len(g)):
        for _ in range(g.nodes[v].h_count if with_h else 0):
            h_parent.append((h_next, v))
            h_next += 1

    def place(i, anchor):
        best, best_gap = None, -1.0
        for attempt in range(60):
            if anchor is None:
                cand = center + rng.normal(scale=0.5, size=3)
            else:
                cand = anchor + 1.5 * _unit(rng)
            others = xyz[placed]
            gap = float(np.min(np.linalg.norm(others - cand, axis=1))) if len(others) else 9.9
            inside = np.linalg.norm(cand - center) <= radius or attempt > 40
            if inside and gap >= 1.1:
                best = cand
                break
            if gap > best_gap:
                best, best_gap = cand, gap
        xyz[i] = best
        placed[i] = True

    def grow(queue):
        while queue:
            v = queue.pop(0)
            for u in adj[v]:
                if not placed[u]:
                    place(u, xyz[v])
                    queue.append(u)

    for v, p in sorted((fixed or {}).items()):
        xyz[v] = p
        placed[v] = True
    grow(sorted(fixed or {}))
    for root in range(len(g)):
        if not placed[root]:
            place(root, None)
            grow([root])
    for h, v in h_parent:
        place(h, xyz[v])
    return xyz


def molecule_from_graph(g: MolGraph, coords, name: str = "", with_h: bool = True) -> Molecule:
    """Molecule whose graph reproduces ``g``; hydrogens become explicit atoms after the heavy atoms."""
    coords = np.asarray(coords, dtype=float)
    atoms, bonds = [], []
    for v, nd in enumerate(g.nodes):
        atoms.append(Atom(nd.element, tuple(coords[v]), f"{nd.element}{v + 1}", nd.formal_charge))
    for i, j, order in g.edges:
        bonds.append(Bond(i, j, order))
    if with_h:
        k = len(g)
        for v, nd in enumerate(g.nodes):
            for _ in range(nd.h_count):
                atoms.append(Atom("H", tuple(coords[k]), f"H{k + 1}"))
                bonds.append(Bond(v, k, BondOrder.SINGLE))
                k += 1
    return Molecule(name or g.name, tuple(atoms), tuple(bonds))


def embed_smiles(smiles: str, rng: np.random.Generator, center=(0.0, 0.0, 0.0), radius: float = 4.0,
                 name: str = "", with_h: bool = True, like: Molecule | None = None) -> Molecule:
    """3-D coordinates for a SMILES; with ``like``, atoms shared with that ligand inherit its positions."""
    g = parse_smiles(smiles)
    fixed = None
    if like is not None:
        tg = from_molecule(like)
        fixed = {v: like.coords[tg.source_atoms[t]] for v, t in environment_matches(tg, g).items()}
        center = like.heavy_coords.mean(axis=0)
    return molecule_from_graph(g, _embed(g, rng, center, radius, with_h, fixed), name or smiles, with_h)


def perturbed(mol: Molecule, rng: np.random.Generator, sigma: float) -> Molecule:
    return mol.with_coords(mol.coords + rng.normal(scale=sigma, size=mol.coords.shape))


# --- proteins ---------------------------------------------------------------

_SIDE_ELEMENTS = np.array(["C", "C", "C", "C", "N", "O", "O", "S"])
_RESIDUES = ("ALA", "LEU", "SER", "ASP", "LYS", "PHE", "GLY", "THR", "VAL", "MET")


def random_protein(rng: np.random.Generator, n_residues: int = 120, cavity: float = 4.5,
                   extent: float = 12.0, name: str = "protein", chain: str = "A") -> Molecule:
    """Pseudo-protein: a confined random-walk chain of residues around an empty central cavity."""
    atoms: list[Atom] = []
    buf = np.empty((n_residues * 8, 3))
    count = 0

    def ok(p, min_gap=1.25):
        r = np.linalg.norm(p)
        if r < cavity or r > extent:
            return False
        return count == 0 or float(np.min(np.linalg.norm(buf[:count] - p, axis=1))) >= min_gap

    ca = None
    for _ in range(500):
        p = rng.uniform(-extent, extent, 3)
        if ok(p):
            ca = p
            break
    resnum = 0
    while resnum < n_residues:
        resnum += 1
        resname = _RESIDUES[rng.integers(len(_RESIDUES))]
        names = ["N", "CA", "C", "O"] + [f"X{k}" for k in range(int(rng.integers(1, 5)))]
        elements = ["N", "C", "C", "O"] + list(rng.choice(_SIDE_ELEMENTS, size=len(names) - 4))
        prev = ca
        for nm, el in zip(names, elements):
            for _ in range(80):
                p = prev + 1.5 * _unit(rng)
                if ok(p):
                    break
            else:
                p = None
            if p is None:
                continue
            buf[count] = p
            count += 1
            atoms.append(Atom(el, tuple(p), nm, 0, "", resname, resnum, chain))
            prev = p
        for _ in range(200):
            cand = ca + 3.8 * _unit(rng)
            if ok(cand, 1.0):
                ca = cand
                break
        else:
            ca = rng.uniform(-extent, extent, 3)
    return Molecule(name, tuple(atoms), ())


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Complex:
    case_id: str
    smiles: str
    protein: Molecule
    ligand: Molecule


def random_complex(rng: np.random.Generator, case_id: str, smiles: str | None = None,
                   n_residues: int = 120) -> Complex:
    if smiles is None:
        smiles = ligand_smiles(*random_ligand_smiles(rng))
    protein = random_protein(rng, n_residues=n_residues, name=f"{case_id}_protein")
    ligand = embed_smiles(smiles, rng, radius=3.5, name=f"{case_id}_ligand")
    return Complex(case_id, smiles, protein, ligand)


def moved_complex(cx: Complex, rng: np.random.Generator, case_id: str, sigma: float = 0.25,
                  smiles: str | None = None) -> Complex:
    """Near copy of a complex: jittered protein, optional new ligand, one random rigid motion."""
    t = random_transform(rng)
    protein = perturbed(cx.protein, rng, sigma)
    if smiles is None or smiles == cx.smiles:
        smiles, ligand = cx.smiles, perturbed(cx.ligand, rng, sigma)
    else:
        ligand = embed_smiles(smiles, rng, radius=3.5, like=perturbed(cx.ligand, rng, sigma))
    protein = protein.transformed(t.rotation, t.translation)
    ligand = ligand.transformed(t.rotation, t.translation)
    return Complex(case_id, smiles, Molecule(f"{case_id}_protein", protein.atoms, protein.bonds),
                   Molecule(f"{case_id}_ligand", ligand.atoms, ligand.bonds))


# --- planted leakage corpus -------------------------------------------------


@dataclass(frozen=True)
class PlantedCorpus:
    tests: tuple[Complex, ...]
    training: tuple[Complex, ...]
    expected: dict  # test case_id -> "hard" | "near_neighbor" | "extreme"
    planted: dict  # test case_id -> training case_id of the planted neighbor (absent for hard)


@lru_cache(maxsize=4096)
def _fp(smiles: str):
    return fingerprint(parse_smiles(smiles))


def _sim(a: str, b: str) -> float:
    return tanimoto(_fp(a), _fp(b))


def _analog(rng, frags, term, lo: float, hi: float, base: str, terminal_only: bool, tries: int = 60) -> str | None:
    """A SMILES at ligand similarity in [lo, hi) to ``base``.

    Terminal-only analogs take the most similar end-group swap; the others
    replace one random internal fragment.
    """
    if terminal_only:
        cands = [ligand_smiles(frags, t) for t in TERMINALS if t != term]
        cands = sorted(cands, key=lambda c: -_sim(base, c))[:1]
    else:
        cands = []
        for _ in range(tries):
            f = list(frags)
            f[int(rng.integers(len(f)))] = FRAGMENTS[rng.integers(len(FRAGMENTS))]
            cands.append(ligand_smiles(f, term))
    for cand in cands:
        if cand != base and lo <= _sim(base, cand) < hi:
            return cand
    return None


def planted_corpus(rng: np.random.Generator, n_tests: int = 12, n_filler: int = 40,
                   n_residues: int = 90) -> PlantedCorpus:
    """Test cases with known near-neighbor classes and decoys that fail one floor each.

    Every third test case is hard (its only close training relatives are an
    identical ligand in a near-identical pocket, and an analog in an unrelated
    pocket); the others get one planted neighbor in a jittered, rigidly moved copy
    of the test complex, with ligand similarity in [0.30, 0.80) or >= 0.80.
    """
    tests, training = [], []
    expected, planted = {}, {}
    filler_smiles = []
    for k in range(n_tests):
        kind = ("hard", "near_neighbor", "extreme")[k % 3]
        size = (7, 9) if kind == "extreme" else (4, 6)
        while True:
            frags, term = random_ligand_smiles(rng, n_fragments=int(rng.integers(*size)))
            smi = ligand_smiles(frags, term)
            near = _analog(rng, frags, term, 0.35, 0.75, smi, terminal_only=False)
            ext = _analog(rng, frags, term, 0.82, 1.0, smi, terminal_only=True) if kind == "extreme" else ""
            if near and ext is not None:
                break
        cid = f"t{k:03d}"
        cx = random_complex(rng, cid, smi, n_residues)
        tests.append(cx)
        expected[cid] = kind
        # identical ligand in an almost identical pocket: excluded however similar
        training.append(moved_complex(cx, rng, f"{cid}_same"))
        # similar ligand in an unrelated pocket: fails the pocket floor
        decoy = random_complex(rng, f"{cid}_fold", near, n_residues)
        training.append(decoy)
        if kind != "hard":
            partner = near if kind == "near_neighbor" else ext
            nb = moved_complex(cx, rng, f"{cid}_nb", sigma=0.15, smiles=partner)
            training.append(nb)
            planted[cid] = nb.case_id
        filler_smiles.append(smi)
    # unrelated filler: dissimilar ligands, unrelated pockets
    for k in range(n_filler):
        smi = ligand_smiles(*random_ligand_smiles(rng, n_fragments=2))
        training.append(random_complex(rng, f"f{k:03d}", smi, n_residues))
    return PlantedCorpus(tuple(tests), tuple(training), expected, planted)


__all__ = [
    "FRAGMENTS", "TERMINALS", "Complex", "PlantedCorpus",
    "embed_smiles", "ligand_smiles", "molecule_from_graph", "moved_complex", "perturbed", "planted_corpus",
    "random_complex", "random_ligand_smiles", "random_protein", "random_rotation", "random_transform",
]
