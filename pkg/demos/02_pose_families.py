"""
Pose families and Top-k accuracy
================================

Docked poses are grouped into families around the best-scored remaining pose,
and Top-1/Top-5 is the best RMSD among the first one or five family heads.
"""

from pathlib import Path

import numpy as np

from dockaudit.molio import ScoredPose, Tool, read_molecules
from dockaudit.posefam import cluster_poses, topk_accuracy

LIGANDS = Path(__file__).resolve().parents[1] / "tests" / "data" / "ligands"
crystal = read_molecules(LIGANDS / "ibuprofen.mol2")[0]
rng = np.random.default_rng(1)

# %%
# Three placements: the right one and two shifted ones, five noisy poses each
poses = []
for k, shift in enumerate([(0, 0, 0), (6, 0, 0), (0, -9, 2)]):
    for j in range(5):
        xyz = crystal.coords + np.array(shift) + rng.normal(0, 0.3, crystal.coords.shape)
        score = -8.0 + k * 0.2 - 0.5 * rng.random()  # the wrong sites score about as well
        poses.append(ScoredPose(crystal.with_coords(xyz), round(score, 2), Tool.VINA, pose_id=len(poses)))

families = cluster_poses(poses, threshold=2.0)
for f in families:
    print(f"rank {f.rank}: head pose {f.head.pose_id} score {f.head.score} members {len(f.members)}")

# %%
top1 = topk_accuracy(families, crystal, 1)
top5 = topk_accuracy(families, crystal, 5)
print("Top-1 RMSD %.2f  Top-5 RMSD %.2f" % (top1.best_rmsd, top5.best_rmsd))
