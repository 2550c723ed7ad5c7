"""Pose families and Top-K pose accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .chemgraph import AutomorphismGroup, automorphisms, from_molecule, graphs_identical
from .geom import TopologyMismatch, aligned_heavy_coords, permutation_rmsd
from .molio import Molecule, ScoredPose

DEFAULT_THRESHOLD = 2.0
FAILURE_RMSD = 20.0
MAX_SITE_RUNS = 10


@dataclass(frozen=True)
class PoseFamily:
    head: ScoredPose
    members: tuple[ScoredPose, ...]
    rank: int
    member_rmsd: tuple[float, ...] = ()  # RMSD of each member to the head


@dataclass(frozen=True)
class TopKResult:
    k: int
    best_rmsd: float
    per_rank_rmsd: tuple[float, ...] = ()
    penalty_applied: bool = False
    truncated: bool = False  # automorphism set was capped; best_rmsd is an upper bound
    flags: frozenset[str] = field(default_factory=frozenset)


class _PoseFrame:
    """Heavy-atom coordinates of a list of poses in one shared node order."""

    def __init__(self, poses, autos: AutomorphismGroup | None):
        self.graph = from_molecule(poses[0].conformation)
        self.autos = autos if autos is not None else automorphisms(self.graph)
        if self.autos.mappings.shape[1] != len(self.graph):
            raise TopologyMismatch("automorphisms do not match the pose topology")
        self.coords = [aligned_heavy_coords(self.graph, p.conformation) for p in poses]

    def rmsd(self, i: int, j: int) -> float:
        return float(permutation_rmsd(self.coords[i], self.coords[j], self.autos.mappings).min())


def cluster_poses(
    poses, threshold: float = DEFAULT_THRESHOLD, autos: AutomorphismGroup | None = None
) -> list[PoseFamily]:
    """Greedy leader clustering in score order.

    Poses are visited best score first (ties keep input order); each joins
    the first existing family whose head is within ``threshold`` by
    symmetry-corrected RMSD, or founds a new family. Families are ranked in
    founding order, which is head-score order.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    poses = list(poses)
    if not poses:
        return []
    frame = _PoseFrame(poses, autos)
    order = sorted(range(len(poses)), key=lambda i: poses[i].sort_key())
    heads: list[int] = []
    members: list[list[tuple[int, float]]] = []
    for i in order:
        for f, h in enumerate(heads):
            d = frame.rmsd(h, i)
            if d <= threshold:
                members[f].append((i, d))
                break
        else:
            heads.append(i)
            members.append([(i, 0.0)])
    return [
        PoseFamily(poses[h], tuple(poses[i] for i, _ in mem), rank, tuple(d for _, d in mem))
        for rank, (h, mem) in enumerate(zip(heads, members), 1)
    ]


def merge_site_runs(runs, max_runs: int = MAX_SITE_RUNS) -> list[ScoredPose]:
    """Concatenate per-site docking runs into one pose list for clustering.

    ``runs`` is a sequence of ``(site_index, poses)``. Each pose is tagged with
    its site and given a run-independent integer ``pose_id``; ranking is left
    to the scores.
    """
    runs = list(runs)
    if len(runs) > max_runs:
        raise ValueError(f"{len(runs)} site runs exceeds the limit of {max_runs}")
    merged: list[ScoredPose] = []
    ref_graph = None
    for site, poses in runs:
        for pose in poses:
            if ref_graph is None:
                ref_graph = from_molecule(pose.conformation)
            elif not graphs_identical(ref_graph, from_molecule(pose.conformation)):
                raise TopologyMismatch(f"pose from site {site} has a different topology")
            merged.append(replace(pose, site_index=site, pose_id=len(merged)))
    return merged


def topk_accuracy(
    families,
    crystal: Molecule,
    k: int,
    autos: AutomorphismGroup | None = None,
    *,
    best_member: bool = False,
    penalty: float = FAILURE_RMSD,
) -> TopKResult:
    """Best RMSD to the crystal ligand among the top ``k`` families.

    Family heads are scored by default; ``best_member`` uses the closest
    member of each family instead. No families means docking failed and the
    penalty RMSD is reported.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    families = sorted(families, key=lambda f: f.rank)[:k]
    if not families:
        return TopKResult(k, penalty, (), True, False, frozenset({"no_poses"}))
    ref_graph = from_molecule(crystal)
    if autos is None:
        autos = automorphisms(ref_graph)
    if autos.mappings.shape[1] != len(ref_graph):
        raise TopologyMismatch("automorphisms do not match the crystal ligand")
    ref = crystal.coords[np.asarray(ref_graph.source_atoms)]
    per_rank = []
    for fam in families:
        candidates = fam.members if best_member else (fam.head,)
        best = min(
            float(permutation_rmsd(ref, aligned_heavy_coords(ref_graph, p.conformation), autos.mappings).min())
            for p in candidates
        )
        per_rank.append(best)
    return TopKResult(k, min(per_rank), tuple(per_rank), False, autos.truncated)
