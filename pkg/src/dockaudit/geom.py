"""Rigid superposition and fixed-frame, symmetry-corrected RMSD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chemgraph import AutomorphismGroup, MolGraph, automorphisms, from_molecule, isomorphism
from .molio import Molecule


class GeometryError(ValueError):
    pass


class TopologyMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9) or abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise GeometryError("rotation must be orthonormal with determinant +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> RigidTransform:
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def compose(self, other: RigidTransform) -> RigidTransform:
        """``self`` after ``other``."""
        return RigidTransform(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def inverse(self) -> RigidTransform:
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)


def rmsd(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.sqrt(np.mean(np.sum((a - b) ** 2, axis=1))))


def kabsch(fixed, moving) -> tuple[RigidTransform, float]:
    """Least-squares proper rotation and translation taking ``moving`` onto ``fixed``.

    Returns the transform and the RMSD after applying it.
    """
    p = np.asarray(fixed, dtype=float)
    q = np.asarray(moving, dtype=float)
    if p.shape != q.shape:
        raise GeometryError(f"point sets differ in shape: {p.shape} vs {q.shape}")
    if p.ndim != 2 or p.shape[1] != 3 or len(p) < 3:
        raise GeometryError("need at least three 3-D points")
    pc, qc = p.mean(axis=0), q.mean(axis=0)
    p0, q0 = p - pc, q - qc
    for pts in (p0, q0):
        s = np.linalg.svd(pts, compute_uv=False)
        if s[0] < 1e-12 or s[1] <= 1e-8 * s[0]:
            raise GeometryError("degenerate (collinear or coincident) point set")
    h = q0.T @ p0
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T)) or 1.0
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    # re-orthonormalize against round-off before the strict invariant check
    uu, _, vv = np.linalg.svd(rot)
    rot = uu @ vv
    transform = RigidTransform(rot, pc - rot @ qc)
    return transform, rmsd(p, transform.apply(q))


def permutation_rmsd(ref_coords, pose_coords, perms) -> np.ndarray:
    """RMSD of ``ref[i]`` against ``pose[perm[i]]`` for every row of ``perms``."""
    ref = np.asarray(ref_coords, dtype=float)
    pose = np.asarray(pose_coords, dtype=float)
    perms = np.asarray(perms, dtype=int)
    out = np.empty(len(perms))
    chunk = max(1, 2_000_000 // max(1, ref.size))
    for s in range(0, len(perms), chunk):
        diff = ref[None, :, :] - pose[perms[s : s + chunk]]
        out[s : s + chunk] = np.sqrt(np.mean(np.einsum("kij,kij->ki", diff, diff), axis=1))
    return out


def aligned_heavy_coords(ref_graph: MolGraph, pose: Molecule, pose_graph: MolGraph | None = None) -> np.ndarray:
    """Heavy-atom coordinates of ``pose`` reordered to the node order of ``ref_graph``."""
    pose_graph = pose_graph or from_molecule(pose)
    if pose_graph.nodes == ref_graph.nodes and pose_graph.edges == ref_graph.edges:
        mapping = np.arange(len(ref_graph))
    else:
        mapping = isomorphism(ref_graph, pose_graph)
        if mapping is None:
            raise TopologyMismatch(f"pose {pose.name!r} is not topologically identical to the reference")
    return pose.coords[np.asarray(pose_graph.source_atoms)[mapping]]


def symmetry_corrected_rmsd(
    reference: Molecule,
    pose: Molecule,
    autos: AutomorphismGroup | None = None,
    ref_graph: MolGraph | None = None,
) -> float:
    """Minimum heavy-atom RMSD over the reference graph's automorphisms, without re-superposition.

    ``pose`` may list its atoms in a different order; it is matched to the
    reference through the canonical labeling first.
    """
    ref_graph = ref_graph or from_molecule(reference)
    if autos is None:
        autos = automorphisms(ref_graph)
    if len(autos) == 0:
        raise ValueError("empty automorphism list")
    perms = autos.mappings if isinstance(autos, AutomorphismGroup) else np.asarray(list(autos), dtype=int)
    if perms.shape[1] != len(ref_graph):
        raise TopologyMismatch("automorphisms do not belong to the reference graph")
    ref = reference.coords[np.asarray(ref_graph.source_atoms)]
    pose_xyz = aligned_heavy_coords(ref_graph, pose)
    return float(permutation_rmsd(ref, pose_xyz, perms).min())
