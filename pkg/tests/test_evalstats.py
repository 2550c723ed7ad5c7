import json
import math
import xml.etree.ElementTree as ET

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dockaudit.evalstats import (
    ResultRow,
    ResultTable,
    betainc,
    compare_tables,
    cumulative_curve,
    curves_svg,
    paired_t_test,
    penalty_fill,
    read_result_table,
    stats_document,
    stats_json,
    subset_stats,
    subset_tsv,
    success_rate,
    t_two_tailed,
    write_result_table,
)

SAMPLE = """# produced by a test
case_id\ttop1\ttop5\tnote
1abc\t1.50\t0.90\tok
2abc\t3.20\tNA\tmissing top5
3abc\t\t\tfailed
4abc\t2.00\t2.00\t
"""


def table(values, method="m"):
    rows = [ResultRow(f"c{k:03d}", method, t1, t5) for k, (t1, t5) in enumerate(values)]
    return ResultTable(tuple(rows), method)


def random_table(rng, n, method="m"):
    t1 = rng.gamma(1.5, 1.8, n)
    t5 = t1 * rng.uniform(0.3, 1.0, n)
    return table(list(zip(t1, t5)), method)


# ---- tables


def test_read_sample():
    tab = read_result_table(SAMPLE, method="x")
    assert tab.comments == ("produced by a test",)
    assert tab.case_ids == ["1abc", "2abc", "3abc", "4abc"]
    rows = tab.by_id()
    assert rows["1abc"].top1 == 1.5 and rows["1abc"].top5 == 0.9
    assert rows["2abc"].top5 is None and rows["3abc"].top1 is None
    assert rows["1abc"].method == "x"
    assert tab.extra_columns == ("note",) and dict(rows["2abc"].extras)["note"] == "missing top5"


def test_write_read_roundtrip():
    tab = read_result_table(SAMPLE, method="x")
    text = write_result_table(tab, comments=("again",))
    back = read_result_table(text)
    assert back.comments == ("produced by a test", "again")
    assert [(r.case_id, r.method, r.top1, r.top5, r.extras) for r in back.rows] == [
        (r.case_id, r.method, r.top1, r.top5, r.extras) for r in tab.rows
    ]
    assert write_result_table(back) == write_result_table(tab, comments=("again",))


def test_column_mapping():
    text = "pdb\trmsd_top1\trmsd_top5\n1abc\t0.5\t0.4\n"
    tab = read_result_table(text, columns={"case_id": "pdb", "top1": "rmsd_top1", "top5": "rmsd_top5"})
    assert tab.by_id()["1abc"].top1 == 0.5


@pytest.mark.parametrize(
    "text, msg",
    [
        ("1abc\t1.0\t1.0\n", "header"),
        ("", "header"),
        ("case_id\ttop1\n1abc\t1.0\n", "header lacks"),
        ("case_id\ttop1\ttop5\n1abc\t1.0\n", "line 2"),
        ("case_id\ttop1\ttop5\n1abc\tfast\t1.0\n", "cannot read"),
        ("case_id\ttop1\ttop5\n1abc\t1.0\t2.0\n", "exceeds"),
        ("case_id\ttop1\ttop5\n1abc\t1.0\t1.0\n1abc\t1.0\t1.0\n", "duplicate"),
    ],
)
def test_read_errors(text, msg):
    with pytest.raises(ValueError, match=msg):
        read_result_table(text)


def test_row_validation():
    with pytest.raises(ValueError):
        ResultRow("a", "m", -1.0, None)
    with pytest.raises(ValueError):
        ResultRow("a", "m", math.inf, None)
    with pytest.raises(ValueError):
        ResultRow("a", "m", 1.0, 1.5)
    with pytest.raises(ValueError):
        ResultRow("a", "m", 1.0, 1.0).value("top3")


# ---- penalty fill


def test_penalty_fill_missing_rows():
    rng = np.random.default_rng(0)
    full = random_table(rng, 272)
    dropped = set(rng.choice(full.case_ids, 12, replace=False))
    partial = full.subset(set(full.case_ids) - dropped)
    filled = penalty_fill(partial, expected_ids=full.case_ids)
    assert len(filled) == 272
    flagged = [r for r in filled.rows if "penalty" in r.flags]
    assert {r.case_id for r in flagged} == dropped
    assert all(r.top1 == r.top5 == 20.0 and "absent" in r.flags for r in flagged)
    kept = partial.by_id()
    assert all(r is kept[r.case_id] for r in filled.rows if r.case_id not in dropped)


def test_penalty_fill_identity_and_caps():
    tab = table([(1.0, 0.5), (3.0, 3.0)])
    assert penalty_fill(tab) == tab
    filled = penalty_fill(read_result_table(SAMPLE)).by_id()
    assert filled["3abc"].top1 == filled["3abc"].top5 == 20.0 and "penalty" in filled["3abc"].flags
    assert filled["2abc"].top1 == 3.2 and filled["2abc"].top5 == 3.2
    capped = penalty_fill(table([(35.0, 25.0), (1.0, 1.0)])).rows
    assert (capped[0].top1, capped[0].top5, capped[0].flags) == (20.0, 20.0, frozenset({"capped"}))
    assert capped[1].flags == frozenset()


# ---- rates, curves, subsets


def test_success_rate_examples():
    tab = table([(2.0, 1.0), (2.0001, 2.0), (0.0, 0.0), (19.0, 5.0)])
    assert success_rate(tab, "top1", 2.0) == 0.5  # <= comparison
    assert success_rate(tab, "top5", 2.0) == 0.75
    assert success_rate(tab, "top1", 1000.0) == 1.0
    assert success_rate(table([(20.0, 20.0)] * 5), "top1", 2.0) == 0.0
    with pytest.raises(ValueError):
        success_rate(table([]))
    with pytest.raises(ValueError):
        success_rate(tab, threshold=0.0)
    with pytest.raises(ValueError, match="penalty_fill"):
        success_rate(read_result_table(SAMPLE))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 80))
def test_curve_consistent_with_rates(seed, n):
    rng = np.random.default_rng(seed)
    tab = random_table(rng, n)
    tab = penalty_fill(tab)
    for col in ("top1", "top5"):
        curve = cumulative_curve(tab, col, 0.5, 20.0)
        assert len(curve.grid) == 41 and curve.grid[-1] == 20.0
        assert all(a <= b for a, b in zip(curve.fraction, curve.fraction[1:]))
        assert curve.fraction[-1] == 1.0
        for g, f in zip(curve.grid, curve.fraction):
            if g > 0:
                assert f == success_rate(tab, col, g)
    t1, t5 = cumulative_curve(tab, "top1"), cumulative_curve(tab, "top5")
    assert all(a <= b for a, b in zip(t1.fraction, t5.fraction))


def test_curve_at_and_errors():
    curve = cumulative_curve(table([(1.0, 1.0), (3.0, 1.0)]), "top1", 1.0, 4.0)
    assert curve.at(0.5) == 0.0 and curve.at(1.0) == 0.5 and curve.at(3.5) == 1.0
    with pytest.raises(ValueError):
        cumulative_curve(table([(1.0, 1.0)]), grid_step=0)


def test_subset_single_class_equals_overall():
    rng = np.random.default_rng(1)
    tab = random_table(rng, 50)
    for klass in ("hard", "near_neighbor"):
        sub = subset_stats(tab, {c: klass for c in tab.case_ids})
        assert sub.rates[klass] == sub.rates["overall"]
        assert sub.unmatched_rows == () and sub.unmatched_cases == ()


def test_subset_groups():
    tab = table([(1.0, 1.0), (3.0, 1.0), (3.0, 3.0), (0.5, 0.5), (9.0, 9.0)])
    classes = {"c000": "extreme", "c001": "near_neighbor", "c002": "hard", "c003": "hard", "zzz": "hard"}
    sub = subset_stats(tab, classes)
    assert sub.rates["near_neighbor"]["n"] == 2 and sub.rates["extreme"]["n"] == 1
    assert sub.rate("near_neighbor", "top1", 2.0) == 0.5
    assert sub.rate("near_neighbor", "top5", 2.0) == 1.0
    assert sub.percent("hard", "top1", 2.0) == 50.0
    assert sub.rates["overall"]["n"] == 5
    assert sub.unmatched_rows == ("c004",) and sub.unmatched_cases == ("zzz",)
    with pytest.raises(ValueError, match="unknown class"):
        subset_stats(tab, {"c000": "easy"})
    empty = subset_stats(tab, {c: "hard" for c in tab.case_ids})
    assert math.isnan(empty.rates["extreme"]["top1@2.0"])


# ---- Student t


def quad_two_tailed(t, df):
    """2 * integral of the Student-t density from |t| to infinity."""
    with mpmath.workdps(40):
        v = mpmath.mpf(df)
        c = mpmath.gamma((v + 1) / 2) / (mpmath.sqrt(v * mpmath.pi) * mpmath.gamma(v / 2))
        tail = mpmath.quad(lambda x: c * (1 + x * x / v) ** (-(v + 1) / 2), [abs(t), abs(t) + 10, mpmath.inf])
        return float(2 * tail)


REFERENCE_NT = [
    (2, 0.5), (2, 4.3), (3, 1.2), (4, 2.776), (5, 0.01), (6, 3.5), (8, 1.86), (10, 2.228),
    (12, 0.7), (15, 4.0), (20, 2.086), (25, 1.0), (30, 6.0), (40, 2.5), (60, 0.25),
    (100, 1.984), (150, 3.3), (250, 1.5), (290, 2.9), (1000, 8.0),
]


@pytest.mark.parametrize("n, t", REFERENCE_NT)
def test_t_tail_matches_quadrature(n, t):
    assert abs(t_two_tailed(t, n - 1) - quad_two_tailed(t, n - 1)) <= 1e-9
    assert t_two_tailed(-t, n - 1) == t_two_tailed(t, n - 1)


def test_t_tail_edges():
    assert t_two_tailed(0.0, 5) == 1.0
    assert t_two_tailed(math.inf, 5) == 0.0
    # df = 1 is Cauchy: p = 1 - 2 atan(t) / pi
    for t in (0.3, 1.0, 7.0):
        assert t_two_tailed(t, 1) == pytest.approx(1 - 2 * math.atan(t) / math.pi, abs=1e-13)
    with pytest.raises(ValueError):
        t_two_tailed(1.0, 0)


@pytest.mark.parametrize("k", range(20))
def test_betainc_closed_forms(k):
    rng = np.random.default_rng(k)
    a, b, x = rng.uniform(0.2, 40), rng.uniform(0.2, 40), rng.uniform(0.001, 0.999)
    assert betainc(a, b, x) + betainc(b, a, 1 - x) == pytest.approx(1.0, abs=1e-12)
    assert betainc(a, 1.0, x) == pytest.approx(x**a, abs=1e-12)
    assert betainc(1.0, b, x) == pytest.approx(1 - (1 - x) ** b, abs=1e-12)
    assert abs(betainc(a, b, x) - float(mpmath.betainc(a, b, 0, x, regularized=True))) <= 1e-11


def test_betainc_errors():
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0
    for args in ((0, 1, 0.5), (1, -1, 0.5), (1, 1, 1.5)):
        with pytest.raises(ValueError):
            betainc(*args)


def test_paired_identical_and_constant():
    a = [1.0, 2.5, 3.0, 0.2]
    res = paired_t_test(a, a)
    assert res.p == 1.0 and res.t == 0.0 and res.df == 3
    shifted = paired_t_test([x + 1 for x in a], a)
    assert shifted.p == 0.0 and shifted.t == math.inf
    with pytest.raises(ValueError):
        paired_t_test([1.0], [2.0])
    with pytest.raises(ValueError):
        paired_t_test([1.0, 2.0], [2.0])


def test_paired_hand_example():
    a, b = [5.0, 3.0, 4.0, 6.0], [4.0, 3.0, 2.0, 5.0]
    # d = 1, 0, 2, 1: mean 1, sd sqrt(2/3), t = 1 / (sqrt(2/3) / 2)
    res = paired_t_test(a, b)
    assert res.t == pytest.approx(2 / math.sqrt(2 / 3), rel=1e-14)
    assert res.p == pytest.approx(quad_two_tailed(res.t, 3), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 20), st.floats(0, 20)), min_size=2, max_size=40))
def test_paired_antisymmetry(pairs):
    a, b = [p[0] for p in pairs], [p[1] for p in pairs]
    ab, ba = paired_t_test(a, b), paired_t_test(b, a)
    assert ab.p == ba.p and 0.0 <= ab.p <= 1.0
    assert ab.t == -ba.t or (ab.t == 0.0 and ba.t == 0.0)
    assert ab.mean_difference == pytest.approx(-ba.mean_difference, abs=1e-12)
    if any(x != y for x, y in pairs) and math.isfinite(ab.t):
        assert ab.p > 0.0


def test_compare_tables_shared_ids():
    rng = np.random.default_rng(2)
    x = random_table(rng, 30, "x")
    y = ResultTable(x.subset(x.case_ids[:20]).rows, "y")
    res = compare_tables([x, y])
    assert res[("x", "y")].n == 20 and res[("x", "y")].p == 1.0
    with pytest.raises(ValueError, match="share no"):
        compare_tables([x, ResultTable((ResultRow("other", "z", 1.0, 1.0),), "z")])


# ---- reports


def test_stats_document_and_tsv():
    rng = np.random.default_rng(3)
    x, y = random_table(rng, 40, "x"), random_table(rng, 40, "y")
    classes = {c: ("near_neighbor" if k % 3 else "hard") for k, c in enumerate(x.case_ids)}
    doc = stats_document([x, y], classes, provenance={"source": "unit"})
    back = json.loads(stats_json(doc))
    assert back["provenance"] == {"source": "unit"}
    assert set(back["methods"]) == {"x", "y"}
    assert back["methods"]["x"]["overall"]["top1@2.0"] == round(100 * success_rate(x, "top1", 2.0), 1)
    assert back["methods"]["x"]["subsets"]["extreme"]["top1@2.0"] is None
    assert [(p["a"], p["b"], p["column"]) for p in back["paired_tests"]] == [("x", "y", "top1"), ("x", "y", "top5")]
    lines = subset_tsv([x, y], classes).splitlines()
    assert lines[0] == "method\tgroup\tn\ttop1@1.0\ttop1@2.0\ttop5@1.0\ttop5@2.0"
    assert len(lines) == 1 + 2 * 4
    assert lines[1].startswith("x\toverall\t40\t")
    assert "NA" in [ln for ln in lines if "\textreme\t" in ln][0]


def test_curves_svg():
    rng = np.random.default_rng(4)
    curves = [cumulative_curve(random_table(rng, 20, m), name=m) for m in ("a<b", "c")]
    svg = curves_svg(curves, title="Top-1")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert "a&lt;b" in svg and ">Top-1<" in svg
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
