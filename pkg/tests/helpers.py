import numpy as np
from scipy.spatial.transform import Rotation

from dockaudit.molio import ScoredPose, Tool


def jitter(mol, rng, sigma):
    return mol.with_coords(mol.coords + rng.normal(0, sigma, mol.coords.shape))


def rigid_moved(mol, rng, angle_deg, shift):
    axis = rng.normal(size=3)
    rot = Rotation.from_rotvec(np.deg2rad(angle_deg) * axis / np.linalg.norm(axis))
    c = mol.heavy_coords.mean(axis=0)
    xyz = (mol.coords - c) @ rot.as_matrix().T + c + np.asarray(shift)
    return mol.with_coords(xyz)


def random_pose_set(mol, rng, n=None, tool=Tool.VINA):
    """A few pose clusters around random placements, with random (possibly tied) scores."""
    n = n if n is not None else int(rng.integers(1, 16))
    centers = [rigid_moved(mol, rng, rng.uniform(0, 180), rng.normal(0, 3, 3)) for _ in range(rng.integers(1, 5))]
    scores = np.round(rng.normal(-7, 1.5, n), 1)  # rounding makes ties likely
    poses = []
    for k in range(n):
        base = centers[rng.integers(len(centers))]
        poses.append(ScoredPose(jitter(base, rng, rng.uniform(0.05, 1.2)), float(scores[k]), tool, pose_id=k))
    return poses
