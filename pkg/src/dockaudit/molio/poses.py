"""Scored docking poses and readers for docking-tool output files."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .core import Molecule, MolFormatError, split_lines
from .mol2 import parse_mol2
from .pdb import parse_pdbqt_models
from .sdf import parse_sdf


class Tool(enum.Enum):
    """Docking engines; the second field is True when a higher score is better."""

    SURFLEX = ("surflex", True)
    GLIDE = ("glide", False)
    VINA = ("vina", False)
    GNINA = ("gnina", False)
    DIFFDOCK = ("diffdock", True)

    def __init__(self, label: str, higher_is_better: bool):
        self.label = label
        self.higher_is_better = higher_is_better

    @classmethod
    def from_label(cls, label: str) -> Tool:
        for tool in cls:
            if tool.label == label.lower():
                return tool
        raise ValueError(f"unknown tool {label!r}; expected one of {[t.label for t in cls]}")


class PoseFormat(enum.Enum):
    VINA_PDBQT = "vina_pdbqt"
    MOL2_MULTI_WITH_SCORES = "mol2_multi_with_scores"
    SDF_WITH_SCORE_FIELD = "sdf_with_score_field"


DEFAULT_TOOL = {
    PoseFormat.VINA_PDBQT: Tool.VINA,
    PoseFormat.MOL2_MULTI_WITH_SCORES: Tool.SURFLEX,
    PoseFormat.SDF_WITH_SCORE_FIELD: Tool.GLIDE,
}
DEFAULT_SCORE_FIELDS = ("r_i_docking_score", "minimizedAffinity", "SCORE", "score", "confidence")


@dataclass(frozen=True)
class ScoredPose:
    conformation: Molecule
    score: float
    tool: Tool = Tool.SURFLEX
    site_index: int = 0
    pose_id: int = 0

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"pose score must be finite, got {self.score}")
        if self.site_index < 0:
            raise ValueError("site_index must be >= 0")

    def sort_key(self) -> float:
        """Smaller is better regardless of the tool's sign convention."""
        return -self.score if self.tool.higher_is_better else self.score


_EMBEDDED_SCORE = re.compile(r"\bscore\s*[:=]\s*([-+0-9.eE]+)", re.IGNORECASE)


def read_score_table(text: str) -> list[tuple[str, float]]:
    """Sidecar score table: one pose per line, ``name score`` or just ``score``; ``#`` comments."""
    rows = []
    for lineno, ln in enumerate(split_lines(text), 1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        parts = ln.split()
        try:
            value = float(parts[-1])
        except ValueError:
            if not rows:  # tolerate a header row
                continue
            raise MolFormatError(f"bad score {parts[-1]!r}", lineno) from None
        rows.append((parts[0] if len(parts) > 1 else "", value))
    return rows


def parse_pose_output(
    text: str,
    fmt: PoseFormat,
    tool: Tool | None = None,
    *,
    scores: str | None = None,
    score_field: str | None = None,
    max_poses: int | None = None,
    site_index: int = 0,
) -> list[ScoredPose]:
    """Read the poses of one docking run in the tool's rank order.

    PDBQT scores come from ``REMARK VINA RESULT``; SDF scores from
    ``score_field`` (or the first of the usual Glide/Gnina field names that
    is present); MOL2 scores from the ``scores`` sidecar table, falling back
    to a ``score: x`` line in each record's COMMENT section.
    """
    fmt = PoseFormat(fmt)
    tool = tool or DEFAULT_TOOL[fmt]
    if fmt is PoseFormat.VINA_PDBQT:
        models = parse_pdbqt_models(text)
        pairs = []
        for k, (mol, score) in enumerate(models):
            if score is None:
                raise MolFormatError(f"pose {k + 1} has no REMARK VINA RESULT score")
            pairs.append((mol, score))
    elif fmt is PoseFormat.SDF_WITH_SCORE_FIELD:
        mols = parse_sdf(text)
        pairs = []
        for k, mol in enumerate(mols):
            fields = (score_field,) if score_field else DEFAULT_SCORE_FIELDS
            key = next((f for f in fields if f in mol.properties), None)
            if key is None:
                raise MolFormatError(f"pose {k + 1} ({mol.name!r}) has no score field {fields[0]!r}")
            try:
                pairs.append((mol, float(mol.properties[key].strip().split()[0])))
            except (ValueError, IndexError):
                raise MolFormatError(f"pose {k + 1}: non-numeric score {mol.properties[key]!r}") from None
    else:
        mols = parse_mol2(text)
        pairs = []
        table = read_score_table(scores) if scores is not None else None
        if table is not None:
            named = {name: v for name, v in table if name}
            for k, mol in enumerate(mols):
                if named and mol.name in named:
                    pairs.append((mol, named[mol.name]))
                elif not named and k < len(table):
                    pairs.append((mol, table[k][1]))
                else:
                    raise MolFormatError(f"pose {k + 1} ({mol.name!r}) missing from score table")
        else:
            for k, mol in enumerate(mols):
                m = _EMBEDDED_SCORE.search(mol.properties.get("comment", ""))
                if not m:
                    raise MolFormatError(f"pose {k + 1} ({mol.name!r}) has no score")
                pairs.append((mol, float(m.group(1))))
    if not pairs:
        raise MolFormatError("no poses found")
    if max_poses is not None:
        pairs = pairs[:max_poses]
    return [ScoredPose(mol, score, tool, site_index, k) for k, (mol, score) in enumerate(pairs)]
