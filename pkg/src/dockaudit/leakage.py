"""Near-neighbor train/test contamination audit.

Stage one ranks training ligands by fingerprint similarity to the test
ligand and keeps the rank head plus everything above a similarity floor.
Stage two computes pocket similarity for those candidates only. A test case
is a near neighbor when some non-identical candidate clears the pocket
floor, and extreme when such a confirmation also clears a high ligand floor.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

from .chemgraph import RADIUS, WIDTH, Fingerprint, MolGraph, fingerprint, from_molecule, graphs_identical, tanimoto
from .molio import Molecule
from .pocket import DEFAULT_CUTOFF, METHOD as POCKET_METHOD, Pocket, extract_pocket, pocket_similarity

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
HARD, NEAR, EXTREME, UNAUDITABLE = "hard", "near_neighbor", "extreme", "unauditable"
CLASSES = (HARD, NEAR, EXTREME)
LIGAND_METHOD = f"circular fingerprint radius {RADIUS}, {WIDTH} bits, Tanimoto"


@dataclass(frozen=True, eq=False)
class TrainEntry:
    case_id: str
    ligand_graph: MolGraph
    fingerprint: Fingerprint
    pocket: Pocket

    def __post_init__(self):
        if self.fingerprint != fingerprint(self.ligand_graph, self.fingerprint.width, self.fingerprint.radius):
            raise ValueError(f"{self.case_id}: fingerprint does not belong to the ligand graph")

    @classmethod
    def build(cls, case_id: str, protein: Molecule, ligand: Molecule, cutoff: float = DEFAULT_CUTOFF) -> TrainEntry:
        g = from_molecule(ligand)
        return cls(case_id, g, fingerprint(g), extract_pocket(protein, ligand, cutoff, case_id))


@dataclass(frozen=True)
class NeighborEvidence:
    train_id: str
    ligand_sim: float
    pocket_sim: float | None = None  # filled in the second stage
    identical_ligand: bool = False

    def __post_init__(self):
        for v in (self.ligand_sim, self.pocket_sim):
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"similarity {v} outside [0, 1]")


@dataclass(frozen=True)
class CaseClassification:
    test_id: str
    klass: str
    evidence: tuple[NeighborEvidence, ...] = ()
    candidates_examined: int = 0

    def __post_init__(self):
        if self.klass not in CLASSES:
            raise ValueError(f"unknown class {self.klass!r}")
        if self.klass == HARD and self.evidence:
            raise ValueError("hard cases carry no confirmations")

    @property
    def best(self) -> NeighborEvidence | None:
        return self.evidence[0] if self.evidence else None


def head_size(n_training: int, top_fraction: float, fixed_head: int | None = None) -> int:
    """Number of rank-based candidates: a fixed head if given, else ceil(top_fraction * N)."""
    if fixed_head is not None:
        return min(n_training, max(0, int(fixed_head)))
    # round first so that 0.01 * 300 style products do not ceil up by float noise
    return min(n_training, math.ceil(round(top_fraction * n_training, 9)))


def candidate_neighbors(
    test: TrainEntry,
    training,
    top_fraction: float = 0.01,
    sim_floor: float = 0.30,
    fixed_head: int | None = None,
) -> list[NeighborEvidence]:
    """Union of the top-ranked training ligands and those at or above ``sim_floor``.

    Ranking is by ligand similarity descending with ties broken by case_id.
    The result is in the same order. Nothing here touches pockets.
    """
    training = list(training)
    if not training:
        raise ValueError("empty training set")
    if not 0.0 <= top_fraction <= 1.0:
        raise ValueError("top_fraction must lie in [0, 1]")
    scored = sorted(
        ((tanimoto(test.fingerprint, t.fingerprint), t) for t in training), key=lambda st: (-st[0], st[1].case_id)
    )
    head = head_size(len(training), top_fraction, fixed_head)
    out = []
    for rank, (sim, t) in enumerate(scored):
        if rank < head or sim >= sim_floor:
            out.append(NeighborEvidence(t.case_id, sim, None, graphs_identical(test.ligand_graph, t.ligand_graph)))
    return out


def classify_case(
    test_id: str, candidates, pocket_floor: float = 0.65, extreme_floor: float = 0.80
) -> CaseClassification:
    candidates = list(candidates)
    conf = [
        c for c in candidates
        if c.pocket_sim is not None and c.pocket_sim >= pocket_floor and not c.identical_ligand
    ]
    conf.sort(key=lambda c: (-c.ligand_sim, -c.pocket_sim, c.train_id))
    if not conf:
        klass = HARD
    elif any(c.ligand_sim >= extreme_floor for c in conf):
        klass = EXTREME
    else:
        klass = NEAR
    return CaseClassification(test_id, klass, tuple(conf), len(candidates))


@dataclass(frozen=True)
class AuditConfig:
    top_fraction: float = 0.01
    sim_floor: float = 0.30
    fixed_head: int | None = None
    pocket_floor: float = 0.65
    extreme_floor: float = 0.80
    pocket_cutoff: float = DEFAULT_CUTOFF
    jobs: int = 1


@dataclass(frozen=True)
class AuditReport:
    cases: tuple[CaseClassification, ...]
    unauditable: dict = field(default_factory=dict)  # case_id -> reason
    config: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [c.test_id for c in self.cases]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate test ids in report")
        if set(ids) & set(self.unauditable):
            raise ValueError("a case cannot be both classified and unauditable")

    def classes(self) -> dict[str, str]:
        return {c.test_id: c.klass for c in self.cases}

    def ids(self, klass: str) -> list[str]:
        """Case ids in a class; ``near_neighbor`` includes the extreme cases."""
        if klass == NEAR:
            return [c.test_id for c in self.cases if c.klass in (NEAR, EXTREME)]
        return [c.test_id for c in self.cases if c.klass == klass]

    @property
    def counts(self) -> dict[str, int]:
        return {
            "total": len(self.cases) + len(self.unauditable),
            HARD: len(self.ids(HARD)),
            NEAR: len(self.ids(NEAR)),
            EXTREME: len(self.ids(EXTREME)),
            UNAUDITABLE: len(self.unauditable),
        }

    # -- serialization
    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "metadata": self.metadata,
            "counts": self.counts,
            "cases": [
                {
                    "test_id": c.test_id,
                    "class": c.klass,
                    "candidates_examined": c.candidates_examined,
                    "evidence": [asdict(e) for e in c.evidence],
                }
                for c in self.cases
            ],
            "unauditable": dict(sorted(self.unauditable.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> AuditReport:
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported audit report schema version {version!r}")
        cases = tuple(
            CaseClassification(
                c["test_id"], c["class"], tuple(NeighborEvidence(**e) for e in c["evidence"]),
                c.get("candidates_examined", 0),
            )
            for c in doc["cases"]
        )
        return cls(cases, dict(doc.get("unauditable", {})), dict(doc.get("config", {})), dict(doc.get("metadata", {})))

    @classmethod
    def from_json(cls, text: str) -> AuditReport:
        return cls.from_dict(json.loads(text))

    def to_tsv(self) -> str:
        lines = ["test_id\tclass\tbest_train_id\tligand_sim\tpocket_sim"]
        rows = [(c.test_id, c) for c in self.cases] + [(k, None) for k in self.unauditable]
        for cid, c in sorted(rows, key=lambda r: r[0]):
            if c is None:
                lines.append(f"{cid}\t{UNAUDITABLE}\t-\t-\t-")
            elif c.best is None:
                lines.append(f"{cid}\t{c.klass}\t-\t-\t-")
            else:
                b = c.best
                lines.append(f"{cid}\t{c.klass}\t{b.train_id}\t{b.ligand_sim:.4f}\t{b.pocket_sim:.4f}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_case_lists(cls, all_ids, near_neighbor_ids, extreme_ids, source: str = "") -> AuditReport:
        """Evidence-free classification from id lists; extreme ids must also be near-neighbor ids."""
        near, ext = set(near_neighbor_ids), set(extreme_ids)
        if not ext <= near:
            raise ValueError("extreme cases must also be near-neighbor cases")
        all_ids = sorted(set(all_ids) | near)
        cases = []
        for cid in all_ids:
            klass = (EXTREME if cid in ext else NEAR) if cid in near else HARD
            cases.append(CaseClassification(cid, klass))
        return cls(tuple(cases), {}, {}, {"source": source or "case lists"})


def published_case_lists() -> tuple[list[str], list[str]]:
    """The published near-neighbor (191, extreme included) and extreme (24) clean-test-set ids."""
    pkg = resources.files("dockaudit") / "data"

    def read(name):
        ids = []
        for ln in (pkg / name).read_text().splitlines():
            if not ln.startswith("#"):
                ids.extend(ln.split())
        return ids

    return read("near_neighbor_cases.txt"), read("extreme_cases.txt")


def _audit_one(test: TrainEntry, training, cfg: AuditConfig) -> CaseClassification:
    cands = candidate_neighbors(test, training, cfg.top_fraction, cfg.sim_floor, cfg.fixed_head)
    by_id = {t.case_id: t for t in training}
    filled = []
    for c in cands:
        # identical ligands can never confirm, so their pockets are not compared
        ps = 0.0 if c.identical_ligand else pocket_similarity(test.pocket, by_id[c.train_id].pocket)
        filled.append(NeighborEvidence(c.train_id, c.ligand_sim, ps, c.identical_ligand))
    return classify_case(test.case_id, filled, cfg.pocket_floor, cfg.extreme_floor)


def audit_dataset(tests, training, config: AuditConfig | None = None, failures: dict | None = None) -> AuditReport:
    """Classify every test case against the training set.

    ``failures`` maps case ids that could not even be loaded to a reason; they
    and any case whose audit raises are reported as unauditable.
    """
    cfg = config or AuditConfig()
    tests, training = list(tests), list(training)
    if not tests and not failures:
        raise ValueError("empty test set")
    if not training:
        raise ValueError("empty training set")
    if len({t.case_id for t in training}) != len(training):
        raise ValueError("duplicate training case ids")
    unauditable = dict(failures or {})

    def run(test):
        try:
            return _audit_one(test, training, cfg)
        except Exception as exc:  # recorded per case, the audit continues
            log.warning("case %s unauditable: %s", test.case_id, exc)
            return f"{type(exc).__name__}: {exc}"

    ordered = sorted(tests, key=lambda t: t.case_id)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run, ordered))
    else:
        results = [run(t) for t in ordered]
    cases = []
    for t, res in zip(ordered, results):
        if isinstance(res, str):
            unauditable[t.case_id] = res
        else:
            cases.append(res)
    conf_doc = {k: v for k, v in asdict(cfg).items() if k != "jobs"}
    meta = {
        "ligand_similarity": LIGAND_METHOD,
        "pocket_similarity": POCKET_METHOD,
        "n_training": len(training),
        "effective_rank_cutoff": head_size(len(training), cfg.top_fraction, cfg.fixed_head),
    }
    return AuditReport(tuple(cases), unauditable, conf_doc, meta)


__all__ = [
    "CLASSES", "EXTREME", "HARD", "NEAR", "SCHEMA_VERSION", "UNAUDITABLE",
    "AuditConfig", "AuditReport", "CaseClassification", "NeighborEvidence", "TrainEntry",
    "audit_dataset", "candidate_neighbors", "classify_case", "head_size", "published_case_lists",
]
