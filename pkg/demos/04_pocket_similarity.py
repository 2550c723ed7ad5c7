"""
Pocket similarity
=================

Pockets are the protein atoms near the ligand. Two pockets are compared
after superposition, so a rigid motion does not change the score while an
unrelated pocket scores low.
"""

import numpy as np

from dockaudit.pocket import extract_pocket, ligand_box, pocket_similarity
from dockaudit.synthetic import moved_complex, random_complex, random_transform

rng = np.random.default_rng(3)
cx = random_complex(rng, "a", n_residues=100)
near = moved_complex(cx, rng, "b", sigma=0.3)
other = random_complex(rng, "c", n_residues=100)

pa, pb, pc = (extract_pocket(c.protein, c.ligand) for c in (cx, near, other))
print("pocket sizes", len(pa), len(pb), len(pc))
print("self            %.3f" % pocket_similarity(pa, pa))
print("moved copy      %.3f" % pocket_similarity(pa, pa.transformed(random_transform(rng))))
print("jittered copy   %.3f" % pocket_similarity(pa, pb))
print("unrelated       %.3f" % pocket_similarity(pa, pc))

# %%
# The docking box for the same ligand
print(ligand_box(cx.ligand).to_vina_config())
