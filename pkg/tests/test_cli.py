import json
import shutil

import numpy as np
import pytest

from conftest import DATA, LIGANDS
from dockaudit.cli import main, read_config
from dockaudit.evalstats import read_result_table
from dockaudit.molio import Atom, Bond, BondOrder, Molecule, read_molecules, write_mol2, write_sdf
from dockaudit.synthetic import planted_corpus

IBU = read_molecules(LIGANDS / "ibuprofen.mol2")[0]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def shifted(mol, dx, score):
    m = mol.with_coords(mol.coords + np.array([dx, 0.0, 0.0]))
    return Molecule(mol.name, m.atoms, m.bonds, {"minimizedAffinity": f"{score}"})


# ---- config


def test_read_config():
    cfg = read_config("# comment\npocket-floor = 0.7\n\njobs=2  # trailing\n")
    assert cfg == {"pocket_floor": "0.7", "jobs": "2"}
    with pytest.raises(Exception, match="line 1"):
        read_config("no equals sign")


# ---- verify


def verify_root(tmp_path, names):
    root = tmp_path / "cases"
    for n in names:
        (root / n).mkdir(parents=True)
        shutil.copy(LIGANDS / f"{n}.mol2", root / n / "gold-lig.mol2")
    return root


def test_verify_one_corrupted(tmp_path, capsys):
    names = ["ethanol", "benzene", "aspirin", "ibuprofen", "acetone"]
    root = verify_root(tmp_path, names)
    mol = read_molecules(root / "acetone" / "gold-lig.mol2")[0]
    b0 = mol.bonds[0]
    bonds = (Bond(b0.a, b0.b, BondOrder.TRIPLE if b0.order is not BondOrder.TRIPLE else BondOrder.SINGLE),) + mol.bonds[1:]
    (root / "acetone" / "gold-lig.mol2").write_text(write_mol2([Molecule(mol.name, mol.atoms, bonds)]))
    code, out, _ = run(capsys, "verify", root, LIGANDS / "curated.smi")
    assert code == 0
    status = dict(ln.split("\t")[:2] for ln in out.splitlines() if not ln.startswith("#"))
    assert status.pop("case_id") == "status"
    assert status == {"acetone": "fail", "aspirin": "pass", "benzene": "pass", "ethanol": "pass", "ibuprofen": "pass"}
    assert "# clean cases: 4 of 5" in out


def test_verify_empty_and_missing_smiles(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    smi = tmp_path / "x.smi"
    smi.write_text("CCO ethanol\n")
    code, out, _ = run(capsys, "verify", empty, smi)
    assert code == 0 and "# clean cases: 0 of 0" in out
    root = verify_root(tmp_path, ["benzene"])
    code, out, _ = run(capsys, "verify", root, smi)
    assert code == 1 and "benzene\terror\tno curated SMILES" in out


# ---- rmsd


def rmsd_root(tmp_path):
    root = tmp_path / "dock"
    for cid in ("best", "pair", "none"):
        (root / cid).mkdir(parents=True)
        shutil.copy(LIGANDS / "ibuprofen.mol2", root / cid / "gold-lig.mol2")
    # best-scored pose is the crystal pose
    (root / "best" / "p01_best_gnina_dock.sdf").write_text(
        write_sdf([shifted(IBU, 0.0, -9.0), shifted(IBU, 6.0, -8.0)])
    )
    # two families: a wrong one (5 A uniform shift) ranked first, the right one second
    (root / "pair" / "p01_pair_gnina_dock.sdf").write_text(
        write_sdf([shifted(IBU, 5.0, -9.0), shifted(IBU, 0.0, -8.0), shifted(IBU, 0.5, -7.0)])
    )
    return root


def test_rmsd_table(tmp_path, capsys):
    out_file = tmp_path / "gnina.tab"
    code, _, _ = run(capsys, "rmsd", rmsd_root(tmp_path), "--tool", "gnina", "-o", out_file)
    assert code == 0
    tab = read_result_table(out_file.read_text())
    rows = tab.by_id()
    assert (rows["best"].top1, rows["best"].top5) == (0.0, 0.0)
    # a uniform shift cannot be reduced by any atom permutation
    assert (rows["pair"].top1, rows["pair"].top5) == (5.0, 0.0)
    assert (rows["none"].top1, rows["none"].top5) == (20.0, 20.0)
    assert {"penalty", "no_poses"} <= rows["none"].flags
    assert any("cluster_threshold = 2.0" in c for c in tab.comments)


def test_rmsd_no_poses_all_penalized(tmp_path, capsys):
    root = verify_root(tmp_path, ["ethanol", "benzene"])
    out_file = tmp_path / "vina.tab"
    assert run(capsys, "rmsd", root, "--tool", "vina", "-o", out_file)[0] == 0
    tab = read_result_table(out_file.read_text())
    assert all(r.top1 == r.top5 == 20.0 and "penalty" in r.flags for r in tab.rows)


def test_rmsd_vina_pdbqt(tmp_path, capsys):
    root = tmp_path / "v"
    (root / "ibu").mkdir(parents=True)
    shutil.copy(LIGANDS / "ibuprofen.mol2", root / "ibu" / "gold-lig.mol2")
    shutil.copy(DATA / "ibuprofen_vina_out.pdbqt", root / "ibu" / "p01_ibu_vina_out.pdbqt")
    code, out, _ = run(capsys, "rmsd", root, "--tool", "vina")
    assert code == 0
    row = read_result_table(out).by_id()["ibu"]
    assert row.top1 < 0.01 and row.top5 < 0.01


def test_rmsd_corrupt_case_flagged(tmp_path, capsys, caplog):
    root = rmsd_root(tmp_path)
    (root / "pair" / "p01_pair_gnina_dock.sdf").write_text("garbage\n")
    code, out, _ = run(capsys, "rmsd", root, "--tool", "gnina")
    assert code == 1 and any(r.message.startswith("pair:") for r in caplog.records)
    rows = read_result_table(out).by_id()
    assert "error" in rows["pair"].flags and rows["pair"].top1 == 20.0
    assert rows["best"].top1 == 0.0


def test_rmsd_deterministic_and_jobs(tmp_path, capsys, monkeypatch):
    root = rmsd_root(tmp_path)
    _, one, _ = run(capsys, "rmsd", root, "--tool", "gnina")
    monkeypatch.setenv("DOCKAUDIT_JOBS", "3")
    _, env, _ = run(capsys, "rmsd", root, "--tool", "gnina")
    _, flag, _ = run(capsys, "--jobs", "2", "rmsd", root, "--tool", "gnina")
    assert one == env == flag


def test_precedence_flag_config_default(tmp_path, capsys):
    root = rmsd_root(tmp_path)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("penalty = 15\ncluster_threshold = 1.5\n")
    _, default, _ = run(capsys, "rmsd", root, "--tool", "gnina")
    _, from_cfg, _ = run(capsys, "--config", cfg, "rmsd", root, "--tool", "gnina")
    _, from_flag, _ = run(capsys, "--config", cfg, "rmsd", root, "--tool", "gnina", "--penalty", "12")
    assert read_result_table(default).by_id()["none"].top1 == 20.0
    assert read_result_table(from_cfg).by_id()["none"].top1 == 15.0
    assert "cluster_threshold = 1.5" in from_cfg
    assert read_result_table(from_flag).by_id()["none"].top1 == 12.0
    assert "cluster_threshold = 1.5" in from_flag


# ---- audit


def write_case(root, cx):
    d = root / cx.case_id
    d.mkdir(parents=True)
    (d / "protein.mol2").write_text(write_mol2([cx.protein]))
    (d / "gold-lig.mol2").write_text(write_mol2([cx.ligand]))


@pytest.fixture(scope="module")
def audit_dirs(tmp_path_factory):
    corpus = planted_corpus(np.random.default_rng(7), n_tests=6, n_filler=8)
    base = tmp_path_factory.mktemp("audit")
    for cx in corpus.tests:
        write_case(base / "test", cx)
    for cx in corpus.training:
        write_case(base / "train", cx)
    return base, corpus


def test_audit_outputs(audit_dirs, capsys, tmp_path):
    base, corpus = audit_dirs
    js, tsv = tmp_path / "audit.json", tmp_path / "audit.tsv"
    code, _, _ = run(capsys, "--jobs", "4", "audit", base / "test", base / "train", "--out-json", js, "--out-tsv", tsv)
    assert code == 0
    doc = json.loads(js.read_text())
    classes = {c["test_id"]: c["class"] for c in doc["cases"]}
    assert classes == corpus.expected
    lines = tsv.read_text().splitlines()
    assert lines[0].startswith("test_id\tclass") and len(lines) == 1 + len(corpus.tests)
    # raising the pocket floor above 1 leaves only hard cases
    js2 = tmp_path / "strict.json"
    run(capsys, "audit", base / "test", base / "train", "--pocket-floor", "1.0", "--out-json", js2)
    assert {c["class"] for c in json.loads(js2.read_text())["cases"]} == {"hard"}


def test_audit_unauditable_exit(audit_dirs, capsys, tmp_path):
    base, _ = audit_dirs
    test = tmp_path / "test"
    shutil.copytree(base / "test", test)
    (test / "t000" / "protein.mol2").unlink()
    code, out, _ = run(capsys, "audit", test, base / "train")
    assert code == 1
    doc = json.loads(out)
    assert "t000" in doc["unauditable"]


# ---- stats


def stats_table(tmp_path, name, values):
    p = tmp_path / f"{name}.tab"
    p.write_text("case_id\ttop1\ttop5\n" + "".join(f"c{k}\t{a}\t{b}\n" for k, (a, b) in enumerate(values)))
    return p


def test_stats_single_table(tmp_path, capsys):
    p = stats_table(tmp_path, "m", [(1.0, 0.5), (3.0, 1.0), ("NA", "NA"), (2.0, 2.0)])
    near = tmp_path / "near.txt"
    near.write_text("c0, c1\n")
    code, out, _ = run(capsys, "stats", p, "--near-list", near, "--plot", tmp_path / "c.svg", "--tsv", tmp_path / "s.tsv")
    assert code == 0
    doc = json.loads(out)
    m = doc["methods"]["m"]
    assert m["n"] == 4 and m["overall"]["top1@2.0"] == 50.0 and m["overall"]["top5@2.0"] == 75.0
    assert m["subsets"]["near_neighbor"]["top1@2.0"] == 50.0 and m["subsets"]["hard"]["n"] == 2
    assert doc["paired_tests"] == []
    assert (tmp_path / "c.svg").read_text().startswith("<svg")
    assert "m\tnear_neighbor\t2\t" in (tmp_path / "s.tsv").read_text()


def test_stats_identical_tables_p_one(tmp_path, capsys):
    vals = [(1.0, 0.5), (3.0, 1.0), (7.5, 2.0)]
    a, b = stats_table(tmp_path, "a", vals), stats_table(tmp_path, "b", vals)
    code, out, _ = run(capsys, "stats", a, b)
    assert code == 0
    tests = json.loads(out)["paired_tests"]
    assert len(tests) == 2 and all(t["p"] == 1.0 for t in tests)


def test_stats_column_mapping_and_published(tmp_path, capsys):
    p = tmp_path / "x.tab"
    p.write_text("pdb\tr1\tr5\n1a30\t1.0\t1.0\nzzzz\t4.0\t3.0\n")
    code, out, _ = run(capsys, "stats", p, "--column", "case_id=pdb", "--column", "top1=r1", "--column", "top5=r5",
                       "--published-lists")
    assert code == 0
    assert json.loads(out)["methods"]["x"]["n"] == 2


# ---- box


def test_box_command(tmp_path, capsys):
    lig = tmp_path / "gold-lig.mol2"
    pts = [(0.0, 0.0, 0.0), (14.0, 1.0, -3.0), (2.0, -1.0, 3.0)]
    lig.write_text(write_mol2([Molecule("m", [Atom("C", p) for p in pts])]))
    code, out, _ = run(capsys, "box", lig, "2.0", "10.0")
    assert code == 0
    # x: 0..14 -> 18; y: -1..1 -> 4 -> 10; z: -3..3 -> 10
    assert out == (
        "center_x = 7.0000\ncenter_y = 0.0000\ncenter_z = 0.0000\n"
        "size_x = 18.0000\nsize_y = 10.0000\nsize_z = 10.0000\n"
    )
    code, out2, _ = run(capsys, "box", lig)
    assert out2 == out


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "box", tmp_path / "missing.mol2")[0] == 1
    assert run(capsys, "verify", tmp_path / "nope", tmp_path / "x.smi")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense\n")
    assert run(capsys, "--config", bad, "box", LIGANDS / "ethanol.mol2")[0] == 1
