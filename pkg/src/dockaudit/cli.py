"""Command-line entry point: ``dockaudit {verify,rmsd,audit,stats,box}``.

Case directories follow the archive layout: one lowercase subdirectory per
case holding ``protein.mol2`` (or ``protein.pdb``), the crystal ligand
``gold-lig.mol2`` (or ``.sdf``) and, optionally, docking output. Defaults for
every threshold can be overridden by a ``key = value`` config file, and
flags override the config. Logs go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .chemgraph import verify_ligand
from .evalstats import (
    PENALTY_RMSD,
    ResultRow,
    ResultTable,
    cumulative_curve,
    curves_svg,
    penalty_fill,
    read_result_table,
    stats_document,
    stats_json,
    subset_tsv,
    write_result_table,
)
from .leakage import AuditConfig, AuditReport, TrainEntry, audit_dataset, published_case_lists
from .molio import Molecule, MolFormatError, PoseFormat, Tool, parse_pose_output, read_molecules, split_structure
from .molio.core import transfer_topology
from .pocket import BOX_MIN_SIZE, BOX_PADDING, DEFAULT_CUTOFF, ligand_box
from .posefam import DEFAULT_THRESHOLD, cluster_poses, merge_site_runs, topk_accuracy

log = logging.getLogger("dockaudit")

JOBS_ENV = "DOCKAUDIT_JOBS"
PROTEIN_FILES = ("protein.mol2", "protein.pdb")
LIGAND_FILES = ("gold-lig.mol2", "gold-lig.sdf")
MANIFEST_FILE = "manifest.cfg"

# per-tool pose file template, format and score source; "{case}" and "{site}" are substituted
POSE_DEFAULTS = {
    "vina": ("p01_{case}_vina_out.pdbqt", PoseFormat.VINA_PDBQT, None),
    "gnina": ("p01_{case}_gnina_dock.sdf", PoseFormat.SDF_WITH_SCORE_FIELD, None),
    "glide": ("{case}_glide_dock.sdf", PoseFormat.SDF_WITH_SCORE_FIELD, None),
    "diffdock": ("{case}_diffdock.sdf", PoseFormat.SDF_WITH_SCORE_FIELD, None),
    "surflex": ("{case}_surflex.mol2", PoseFormat.MOL2_MULTI_WITH_SCORES, "{case}_surflex.scores"),
}

DEFAULTS = {
    "cluster_threshold": DEFAULT_THRESHOLD,
    "penalty": PENALTY_RMSD,
    "pocket_cutoff": DEFAULT_CUTOFF,
    "top_fraction": 0.01,
    "sim_floor": 0.30,
    "fixed_head": None,
    "pocket_floor": 0.65,
    "extreme_floor": 0.80,
    "padding": BOX_PADDING,
    "min_size": BOX_MIN_SIZE,
    "jobs": 1,
}
_INT_KEYS = {"fixed_head", "jobs"}


class CLIError(Exception):
    pass


# --- config ---------------------------------------------------------------


def read_config(text: str) -> dict:
    """``key = value`` lines; '#' starts a comment; keys use underscores or dashes."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CLIError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, value):
    if value is None or value == "":
        return None
    if key in _INT_KEYS:
        return int(value)
    if isinstance(DEFAULTS.get(key), float):
        return float(value)
    return value


def resolve(args, key: str):
    """Flag value, else config value, else the built-in default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in args.config_values:
        return _coerce(key, args.config_values[key])
    if key == "jobs" and os.environ.get(JOBS_ENV):
        return int(os.environ[JOBS_ENV])
    return DEFAULTS.get(key)


# --- manifests ---------------------------------------------------------------


@dataclass
class CaseManifest:
    root: Path
    cases: dict = field(default_factory=dict)  # case_id -> directory
    settings: dict = field(default_factory=dict)

    @classmethod
    def load(cls, root) -> CaseManifest:
        root = Path(root)
        if not root.is_dir():
            raise CLIError(f"case root {root} is not a directory")
        settings = read_config((root / MANIFEST_FILE).read_text()) if (root / MANIFEST_FILE).exists() else {}
        cases = {}
        for d in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
            cid = d.name.lower()
            if cid in cases:
                raise CLIError(f"case id {cid} appears twice under {root}")
            cases[cid] = d
        return cls(root, cases, settings)

    def _first(self, cid: str, names) -> Path:
        for n in names:
            p = self.cases[cid] / n
            if p.exists():
                return p
        raise FileNotFoundError(f"{cid}: none of {', '.join(names)} present")

    def ligand(self, cid: str) -> Molecule:
        path = self._first(cid, LIGAND_FILES)
        mols = read_molecules(path)
        if not mols:
            raise MolFormatError(f"{path}: no molecules")
        return mols[0]

    def protein(self, cid: str) -> Molecule:
        path = self._first(cid, PROTEIN_FILES)
        if path.suffix == ".pdb":
            s = split_structure(path.read_text())
            if not s.proteins:
                raise MolFormatError(f"{path}: no protein chains")
            atoms = tuple(a for p in s.proteins for a in p.atoms)
            return Molecule(f"{cid}_protein", atoms, ())
        return read_molecules(path)[0]

    def pose_spec(self, tool: str):
        template, fmt, scores = POSE_DEFAULTS.get(tool, (f"{{case}}_{tool}.sdf", PoseFormat.SDF_WITH_SCORE_FIELD, None))
        s = self.settings
        template = s.get(f"pose_template.{tool}", template)
        fmt = PoseFormat(s.get(f"pose_format.{tool}", fmt.value))
        scores = s.get(f"score_template.{tool}", scores)
        return template, fmt, scores, s.get(f"score_field.{tool}")

    def pose_runs(self, cid: str, tool: str):
        """(site, path, score path or None) for every pose file of ``tool`` in a case."""
        template, fmt, scores, _ = self.pose_spec(tool)
        sites = range(10) if "{site" in template else (0,)
        runs = []
        for site in sites:
            path = self.cases[cid] / template.format(case=cid, site=site)
            if path.exists():
                sp = self.cases[cid] / scores.format(case=cid, site=site) if scores else None
                runs.append((site, path, sp if sp is not None and sp.exists() else None))
        return runs


def _jobs(args) -> int:
    return max(1, int(resolve(args, "jobs") or 1))


def _map_cases(fn, ids, jobs: int):
    ids = sorted(ids)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return dict(zip(ids, pool.map(fn, ids)))
    return {c: fn(c) for c in ids}


def _header(args, keys) -> list[str]:
    return [f"dockaudit {__version__} {args.command}"] + [f"{k} = {resolve(args, k)}" for k in keys]


def _emit(text: str, out: str | None):
    if out and out != "-":
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


# --- verify ----------------------------------------------------------------


def read_smiles_table(text: str) -> dict[str, str]:
    """``SMILES name`` per line (the .smi convention); names are lower-cased case ids."""
    out = {}
    for ln in text.splitlines():
        parts = ln.split()
        if len(parts) >= 2 and not ln.lstrip().startswith("#"):
            out[parts[1].lower()] = parts[0]
    return out


def cmd_verify(args) -> int:
    manifest = CaseManifest.load(args.manifest)
    table = read_smiles_table(Path(args.smiles).read_text())

    def check(cid):
        if cid not in table:
            return "error", "no curated SMILES"
        try:
            ok = verify_ligand(manifest.ligand(cid), table[cid])
        except (OSError, ValueError) as exc:
            return "error", str(exc).replace("\t", " ")
        return ("pass", "") if ok else ("fail", "topology differs from curated SMILES")

    results = _map_cases(check, manifest.cases, _jobs(args))
    lines = [f"# {h}" for h in _header(args, [])]
    lines.append("case_id\tstatus\tdetail")
    lines += [f"{cid}\t{st}\t{detail}" for cid, (st, detail) in results.items()]
    n_pass = sum(st == "pass" for st, _ in results.values())
    errors = sum(st == "error" for st, _ in results.values())
    lines.append(f"# clean cases: {n_pass} of {len(results)}")
    _emit("\n".join(lines) + "\n", args.out)
    log.info("verify: %d pass, %d fail, %d error", n_pass, len(results) - n_pass - errors, errors)
    return 1 if errors else 0


# --- rmsd ------------------------------------------------------------------


def case_rmsd(manifest: CaseManifest, cid: str, tool: str, threshold: float, penalty: float,
              best_member: bool = False) -> ResultRow:
    """Top-1 and Top-5 symmetry-corrected RMSD for one case; flags say what went wrong."""
    crystal = manifest.ligand(cid)
    runs = manifest.pose_runs(cid, tool)
    if not runs:
        return ResultRow(cid, tool, penalty, penalty, frozenset({"penalty", "no_poses"}))
    _, fmt, _, score_field = manifest.pose_spec(tool)
    tool_enum = Tool.from_label(tool) if tool in {t.label for t in Tool} else None
    site_runs = []
    for site, path, score_path in runs:
        poses = parse_pose_output(
            path.read_text(), fmt, tool_enum,
            scores=score_path.read_text() if score_path else None, score_field=score_field, site_index=site,
        )
        if fmt is PoseFormat.VINA_PDBQT:
            poses = [replace(p, conformation=transfer_topology(crystal, p.conformation)) for p in poses]
        site_runs.append((site, poses))
    poses = merge_site_runs(site_runs) if len(site_runs) > 1 else site_runs[0][1]
    families = cluster_poses(poses, threshold)
    r1 = topk_accuracy(families, crystal, 1, best_member=best_member, penalty=penalty)
    r5 = topk_accuracy(families, crystal, 5, best_member=best_member, penalty=penalty)
    flags = set(r1.flags | r5.flags)
    if r1.truncated:
        flags.add("automorphisms_truncated")
    return ResultRow(cid, tool, min(r1.best_rmsd, penalty), min(r5.best_rmsd, penalty), frozenset(flags))


def cmd_rmsd(args) -> int:
    manifest = CaseManifest.load(args.manifest)
    threshold = resolve(args, "cluster_threshold")
    penalty = resolve(args, "penalty")
    errors = []

    def run(cid):
        try:
            return case_rmsd(manifest, cid, args.tool, threshold, penalty, args.best_member)
        except Exception as exc:  # per-case failure: flagged row, run continues
            log.error("%s: %s", cid, exc)
            errors.append(cid)
            return ResultRow(cid, args.tool, None, None, frozenset({"error"}))

    rows = _map_cases(run, manifest.cases, _jobs(args))
    table = penalty_fill(ResultTable(tuple(rows.values()), args.tool), penalty)
    header = _header(args, ["cluster_threshold", "penalty"]) + [f"tool = {args.tool}", f"best_member = {args.best_member}"]
    _emit(write_result_table(table, header), args.out)
    log.info("rmsd: %d cases, %d errors", len(rows), len(errors))
    return 1 if errors else 0


# --- audit -----------------------------------------------------------------


def _entries(manifest: CaseManifest, cutoff: float, jobs: int):
    def build(cid):
        try:
            return TrainEntry.build(cid, manifest.protein(cid), manifest.ligand(cid), cutoff)
        except Exception as exc:
            return f"{type(exc).__name__}: {exc}"

    built = _map_cases(build, manifest.cases, jobs)
    entries = [e for e in built.values() if not isinstance(e, str)]
    failures = {c: e for c, e in built.items() if isinstance(e, str)}
    return entries, failures


def cmd_audit(args) -> int:
    jobs = _jobs(args)
    cfg = AuditConfig(
        top_fraction=resolve(args, "top_fraction"),
        sim_floor=resolve(args, "sim_floor"),
        fixed_head=resolve(args, "fixed_head"),
        pocket_floor=resolve(args, "pocket_floor"),
        extreme_floor=resolve(args, "extreme_floor"),
        pocket_cutoff=resolve(args, "pocket_cutoff"),
        jobs=jobs,
    )
    tests, test_fail = _entries(CaseManifest.load(args.test), cfg.pocket_cutoff, jobs)
    training, train_fail = _entries(CaseManifest.load(args.train), cfg.pocket_cutoff, jobs)
    for cid, why in train_fail.items():
        log.warning("training case %s skipped: %s", cid, why)
    if not training:
        raise CLIError("no loadable training cases")
    report = audit_dataset(tests, training, cfg, failures=test_fail)
    report.metadata["training_skipped"] = dict(sorted(train_fail.items()))
    _emit(report.to_json(), args.out_json)
    if args.out_tsv:
        _emit(report.to_tsv(), args.out_tsv)
    c = report.counts
    log.info("audit: %d near-neighbor (%d extreme), %d hard, %d unauditable",
             c["near_neighbor"], c["extreme"], c["hard"], c["unauditable"])
    return 1 if report.unauditable else 0


# --- stats -----------------------------------------------------------------


def _read_ids(path) -> list[str]:
    ids = []
    for ln in Path(path).read_text().splitlines():
        if not ln.lstrip().startswith("#"):
            ids.extend(x.lower() for x in re.split(r"[\s,]+", ln) if x)
    return ids


def cmd_stats(args) -> int:
    penalty = resolve(args, "penalty")
    columns = dict(kv.split("=", 1) for kv in args.column or [])
    tables = []
    for path in args.tables:
        method = Path(path).stem
        tab = read_result_table(Path(path).read_text(), method, columns)
        if not tab.method:
            tab = ResultTable(tab.rows, method, tab.extra_columns, tab.comments)
        tables.append(penalty_fill(tab, penalty))
    if not tables:
        raise CLIError("at least one result table is required")
    classification = None
    if args.audit:
        classification = AuditReport.from_json(Path(args.audit).read_text())
    elif args.near_list or args.published_lists:
        if args.published_lists:
            near, extreme = published_case_lists()
        else:
            near, extreme = _read_ids(args.near_list), _read_ids(args.extreme_list) if args.extreme_list else []
        all_ids = sorted({c for t in tables for c in t.case_ids})
        classification = AuditReport.from_case_lists(all_ids, near, extreme, "case lists")
    provenance = {"penalty": penalty, "tables": [str(p) for p in args.tables]}
    doc = stats_document(tables, classification, provenance=provenance)
    _emit(stats_json(doc), args.out)
    if args.tsv and classification is not None:
        _emit(subset_tsv(tables, classification), args.tsv)
    if args.plot:
        curves = []
        for tab in tables:
            groups = [("overall", tab)]
            if classification is not None:
                groups = [(g, tab.subset(classification.ids(g))) for g in ("near_neighbor", "extreme", "hard")]
            for g, sub in groups:
                if len(sub) == 0:
                    continue
                for col in ("top1", "top5"):
                    curves.append(cumulative_curve(sub, col, name=f"{tab.method} {g} {col}"))
        Path(args.plot).write_text(curves_svg(curves, "Cumulative RMSD"))
        log.info("wrote %s", args.plot)
    return 0


# --- box -------------------------------------------------------------------


def cmd_box(args) -> int:
    mols = read_molecules(args.ligand)
    if not mols:
        raise CLIError(f"{args.ligand}: no molecules")
    box = ligand_box(mols[0], resolve(args, "padding"), resolve(args, "min_size"))
    _emit(box.to_vina_config(), args.out)
    return 0


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dockaudit", description="Docking benchmark evaluation and leakage audit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="key = value file overriding defaults")
    p.add_argument("--jobs", type=int, help=f"parallel cases (default ${JOBS_ENV} or 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check crystal ligands against curated SMILES")
    v.add_argument("manifest", help="case root directory")
    v.add_argument("smiles", help="SMILES table: 'SMILES case_id' per line")
    v.add_argument("-o", "--out")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("rmsd", help="Top-1/Top-5 symmetry-corrected RMSD table for one tool")
    r.add_argument("manifest")
    r.add_argument("--tool", required=True)
    r.add_argument("--cluster-threshold", dest="cluster_threshold", type=float)
    r.add_argument("--penalty", type=float)
    r.add_argument("--best-member", action="store_true", help="score closest family member, not the head")
    r.add_argument("-o", "--out")
    r.set_defaults(func=cmd_rmsd)

    a = sub.add_parser("audit", help="near-neighbor train/test leakage audit")
    a.add_argument("test")
    a.add_argument("train")
    a.add_argument("--top-fraction", dest="top_fraction", type=float)
    a.add_argument("--sim-floor", dest="sim_floor", type=float)
    a.add_argument("--fixed-head", dest="fixed_head", type=int)
    a.add_argument("--pocket-floor", dest="pocket_floor", type=float)
    a.add_argument("--extreme-floor", dest="extreme_floor", type=float)
    a.add_argument("--pocket-cutoff", dest="pocket_cutoff", type=float)
    a.add_argument("--out-json", dest="out_json")
    a.add_argument("--out-tsv", dest="out_tsv")
    a.set_defaults(func=cmd_audit)

    s = sub.add_parser("stats", help="success rates, subsets, paired tests, curves")
    s.add_argument("tables", nargs="+")
    s.add_argument("--audit", help="audit report JSON")
    s.add_argument("--near-list", dest="near_list", help="near-neighbor case ids (extreme included)")
    s.add_argument("--extreme-list", dest="extreme_list")
    s.add_argument("--published-lists", dest="published_lists", action="store_true",
                   help="use the packaged published near-neighbor/extreme case lists")
    s.add_argument("--column", action="append", metavar="ROLE=NAME", help="rename input columns, e.g. top1=rmsd1")
    s.add_argument("--penalty", type=float)
    s.add_argument("-o", "--out")
    s.add_argument("--tsv")
    s.add_argument("--plot")
    s.set_defaults(func=cmd_stats)

    b = sub.add_parser("box", help="Vina box config around a ligand")
    b.add_argument("ligand")
    b.add_argument("padding", nargs="?", type=float)
    b.add_argument("min_size", nargs="?", type=float)
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_box)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        args.config_values = read_config(Path(args.config).read_text()) if args.config else {}
        return args.func(args)
    except (CLIError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
