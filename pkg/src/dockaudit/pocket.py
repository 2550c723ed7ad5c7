"""Binding pockets, ligand-derived docking boxes and pocket similarity.

Pocket similarity superposes the two pockets from several starting seeds,
refines each by class-aware iterated closest point, scores the result by a
Gaussian overlap of one-to-one matched atoms and keeps the best seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from .chemgraph import environment_matches, from_molecule, graphs_identical, isomorphism
from .geom import GeometryError, RigidTransform, kabsch
from .molio import HALOGENS, METALS, Molecule

DEFAULT_CUTOFF = 5.0
BOX_PADDING = 2.0
BOX_MIN_SIZE = 10.0

MATCH_CUTOFF = 3.0
SIGMA = 1.0
CROSS_CLASS_WEIGHT = 0.3
ICP_ROUNDS = 50
METHOD = "pocket-atom gaussian overlap (PCA + ligand seeds, class-aware ICP)"


class EmptyPocketError(ValueError):
    pass


def element_class(element: str) -> str:
    """Coarse class used to score matched atoms."""
    if element in ("C", "S"):
        return "CS"
    if element in ("N", "O", "P"):
        return element
    if element in HALOGENS:
        return "X"
    if element in METALS:
        return "M"
    return "other"


def icp_class(element: str) -> str:
    """Coarser class used to pick ICP correspondences."""
    if element in ("C", "S", "N", "O"):
        return {"S": "C"}.get(element, element)
    return "other"


@dataclass(frozen=True)
class PocketAtom:
    element: str
    position: tuple[float, float, float]
    residue: str = ""
    chain: str = ""
    name: str = ""


@dataclass(frozen=True, eq=False)
class Pocket:
    atoms: tuple[PocketAtom, ...]
    reference_ligand: Molecule
    source_id: str = ""

    def __post_init__(self):
        if not self.atoms:
            raise EmptyPocketError(f"pocket {self.source_id!r} has no atoms")

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def coords(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=float)

    @property
    def residues(self) -> list[tuple[str, str]]:
        return sorted({(a.chain, a.residue) for a in self.atoms})

    def transformed(self, transform: RigidTransform) -> Pocket:
        xyz = transform.apply(self.coords)
        atoms = tuple(
            PocketAtom(a.element, tuple(p), a.residue, a.chain, a.name) for a, p in zip(self.atoms, xyz)
        )
        lig = self.reference_ligand.transformed(transform.rotation, transform.translation)
        return Pocket(atoms, lig, self.source_id)


def extract_pocket(protein: Molecule, ligand: Molecule, cutoff: float = DEFAULT_CUTOFF, source_id: str = "") -> Pocket:
    """Protein heavy atoms within ``cutoff`` of any ligand heavy atom."""
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    heavy = [a for a in protein.atoms if a.is_heavy]
    if not heavy:
        raise EmptyPocketError("protein has no heavy atoms")
    xyz = np.array([a.position for a in heavy])
    tree = cKDTree(ligand.heavy_coords)
    dist, _ = tree.query(xyz, k=1, distance_upper_bound=cutoff)
    keep = np.nonzero(dist <= cutoff)[0]
    if len(keep) == 0:
        raise EmptyPocketError(f"no protein atoms within {cutoff} A of ligand {ligand.name!r}")
    atoms = tuple(
        PocketAtom(heavy[i].element, heavy[i].position, heavy[i].residue_label, heavy[i].chain, heavy[i].name)
        for i in keep
    )
    return Pocket(atoms, ligand, source_id)


@dataclass(frozen=True)
class Box3D:
    center: tuple[float, float, float]
    extents: tuple[float, float, float]

    def to_vina_config(self) -> str:
        cx, cy, cz = self.center
        sx, sy, sz = self.extents
        return (
            f"center_x = {cx:.4f}\ncenter_y = {cy:.4f}\ncenter_z = {cz:.4f}\n"
            f"size_x = {sx:.4f}\nsize_y = {sy:.4f}\nsize_z = {sz:.4f}\n"
        )

    @classmethod
    def from_vina_config(cls, text: str) -> Box3D:
        values = {}
        for ln in text.splitlines():
            if "=" in ln:
                key, val = ln.split("=", 1)
                values[key.strip()] = float(val)
        return cls(
            tuple(values[f"center_{a}"] for a in "xyz"),
            tuple(values[f"size_{a}"] for a in "xyz"),
        )


def ligand_box(ligand: Molecule, padding: float = BOX_PADDING, min_size: float = BOX_MIN_SIZE) -> Box3D:
    """Axis-aligned heavy-atom bounds plus ``padding`` per side, each edge at least ``min_size``."""
    if padding < 0 or min_size <= 0:
        raise ValueError("padding must be >= 0 and min_size > 0")
    xyz = ligand.heavy_coords
    lo, hi = xyz.min(axis=0), xyz.max(axis=0)
    center = (lo + hi) / 2.0
    extents = np.maximum(hi - lo + 2.0 * padding, min_size)
    return Box3D(tuple(float(c) for c in center), tuple(float(e) for e in extents))


# --- similarity -----------------------------------------------------------


def _principal_frame(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    center = xyz.mean(axis=0)
    cov = np.cov((xyz - center).T) if len(xyz) > 1 else np.eye(3)
    _, vecs = np.linalg.eigh(cov)
    vecs = vecs[:, ::-1]
    if np.linalg.det(vecs) < 0:
        vecs[:, 2] *= -1
    return center, vecs


def _pca_seeds(a_xyz, b_xyz) -> list[RigidTransform]:
    ca, va = _principal_frame(a_xyz)
    cb, vb = _principal_frame(b_xyz)
    seeds = []
    for signs in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
        rot = va @ np.diag(signs) @ vb.T
        u, _, vt = np.linalg.svd(rot)
        rot = u @ vt
        seeds.append(RigidTransform(rot, ca - rot @ cb))
    return seeds


def ligand_correspondence(a: Molecule, b: Molecule) -> list[tuple[int, int]]:
    """Matched heavy-atom index pairs between two ligands.

    Identical topologies use the full graph isomorphism; otherwise atoms are
    paired by circular environments that are unique in both ligands, largest
    radius first.
    """
    ga, gb = from_molecule(a), from_molecule(b)
    if graphs_identical(ga, gb):
        m = isomorphism(ga, gb)
        return [(ga.source_atoms[i], gb.source_atoms[m[i]]) for i in range(len(ga))]
    pairs = environment_matches(ga, gb)  # gb node -> ga node
    return sorted((ga.source_atoms[u], gb.source_atoms[v]) for v, u in pairs.items())


def _ligand_seed(a: Pocket, b: Pocket) -> RigidTransform | None:
    pairs = ligand_correspondence(a.reference_ligand, b.reference_ligand)
    if len(pairs) < 3:
        return None
    pa = a.reference_ligand.coords[[i for i, _ in pairs]]
    pb = b.reference_ligand.coords[[j for _, j in pairs]]
    try:
        transform, _ = kabsch(pa, pb)
    except GeometryError:
        return None
    return transform


class _Side:
    def __init__(self, pocket: Pocket):
        self.xyz = pocket.coords
        elements = [a.element for a in pocket.atoms]
        self.score_class = np.array([element_class(e) for e in elements])
        icp = np.array([icp_class(e) for e in elements])
        self.icp_groups = {c: np.nonzero(icp == c)[0] for c in sorted(set(icp))}
        self.trees = {c: cKDTree(self.xyz[idx]) for c, idx in self.icp_groups.items()}


def _icp(fixed: _Side, moving: _Side, transform: RigidTransform, rounds: int = ICP_ROUNDS) -> RigidTransform:
    prev = None
    for _ in range(rounds):
        moved = transform.apply(moving.xyz)
        src, dst = [], []
        for c, idx in moving.icp_groups.items():
            if c not in fixed.trees:
                continue
            d, j = fixed.trees[c].query(moved[idx], k=1, distance_upper_bound=MATCH_CUTOFF)
            ok = np.isfinite(d)
            src.append(idx[ok])
            dst.append(fixed.icp_groups[c][j[ok]])
        src = np.concatenate(src) if src else np.empty(0, int)
        dst = np.concatenate(dst) if dst else np.empty(0, int)
        if len(src) < 3:
            break
        key = (tuple(src), tuple(dst))
        if key == prev:
            break
        prev = key
        try:
            transform, _ = kabsch(fixed.xyz[dst], moving.xyz[src])
        except GeometryError:
            break
    return transform


def _overlap_score(a: _Side, b: _Side, transform: RigidTransform) -> float:
    moved = transform.apply(b.xyz)
    tree_a = cKDTree(a.xyz)
    pairs = tree_a.query_ball_point(moved, r=MATCH_CUTOFF)
    rows, cols, vals = [], [], []
    for j, hits in enumerate(pairs):
        for i in hits:
            d2 = float(np.sum((a.xyz[i] - moved[j]) ** 2))
            w = 1.0 if a.score_class[i] == b.score_class[j] else CROSS_CLASS_WEIGHT
            rows.append(i)
            cols.append(j)
            vals.append(w * np.exp(-d2 / (2.0 * SIGMA**2)))
    if not vals:
        return 0.0
    ui, ri = np.unique(rows, return_inverse=True)
    uj, rj = np.unique(cols, return_inverse=True)
    gain = np.zeros((len(ui), len(uj)))
    np.maximum.at(gain, (ri, rj), vals)
    r, c = linear_sum_assignment(gain, maximize=True)
    total = float(gain[r, c].sum())
    return min(1.0, max(0.0, total / max(len(a.xyz), len(b.xyz))))


@dataclass(frozen=True)
class PocketAlignment:
    score: float
    transform: RigidTransform  # maps pocket b onto pocket a
    seed: str


def align_pockets(a: Pocket, b: Pocket) -> PocketAlignment:
    if len(a) < 3 or len(b) < 3:
        raise GeometryError("degenerate pocket: fewer than 3 atoms")
    sa, sb = _Side(a), _Side(b)
    best = None
    # seeds run in both directions so that sim(a, b) == sim(b, a)
    for direction, (fixed, moving, pf, pm) in enumerate(((sa, sb, a, b), (sb, sa, b, a))):
        seeds = [(f"pca{k}", t) for k, t in enumerate(_pca_seeds(fixed.xyz, moving.xyz))]
        lig = _ligand_seed(pf, pm)
        if lig is not None:
            seeds.append(("ligand", lig))
        for name, seed in seeds:
            refined = _icp(fixed, moving, seed)
            if direction:
                refined, name = refined.inverse(), name + "-rev"
            score = _overlap_score(sa, sb, refined)
            if best is None or score > best.score + 1e-12:
                best = PocketAlignment(score, refined, name)
    return best


def pocket_similarity(a: Pocket, b: Pocket) -> float:
    """Similarity in [0, 1]; 1 for a pocket against itself."""
    return align_pockets(a, b).score


__all__ = [
    "BOX_MIN_SIZE", "BOX_PADDING", "DEFAULT_CUTOFF", "METHOD",
    "Box3D", "EmptyPocketError", "Pocket", "PocketAlignment", "PocketAtom",
    "align_pockets", "element_class", "extract_pocket", "ligand_box", "ligand_correspondence",
    "pocket_similarity",
]
