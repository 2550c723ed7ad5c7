"""Success rates, cumulative RMSD curves, per-class subsets and paired t-tests."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

PENALTY_RMSD = 20.0
THRESHOLDS = (1.0, 2.0)
COLUMNS = ("top1", "top5")
MISSING = {"", "na", "nan", "none", "-", "null"}
GROUPS = ("overall", "near_neighbor", "extreme", "hard")


# --- tables -----------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    case_id: str
    method: str
    top1: float | None
    top5: float | None
    flags: frozenset = frozenset()
    extras: tuple = ()  # (column, text) pairs carried through unchanged

    def __post_init__(self):
        for v in (self.top1, self.top5):
            if v is not None and not (v >= 0.0 and math.isfinite(v)):
                raise ValueError(f"{self.case_id}: RMSD must be finite and >= 0, got {v}")
        if self.top1 is not None and self.top5 is not None and self.top5 > self.top1 + 1e-9:
            raise ValueError(f"{self.case_id}: top5 RMSD {self.top5} exceeds top1 {self.top1}")

    def value(self, column: str) -> float | None:
        if column not in COLUMNS:
            raise ValueError(f"column must be one of {COLUMNS}")
        return getattr(self, column)


@dataclass(frozen=True)
class ResultTable:
    rows: tuple[ResultRow, ...]
    method: str = ""
    extra_columns: tuple[str, ...] = ()
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        ids = [r.case_id for r in self.rows]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate case ids: {dup[:5]}")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def case_ids(self) -> list[str]:
        return [r.case_id for r in self.rows]

    def by_id(self) -> dict[str, ResultRow]:
        return {r.case_id: r for r in self.rows}

    def values(self, column: str) -> np.ndarray:
        vals = [r.value(column) for r in self.rows]
        if any(v is None for v in vals):
            raise ValueError("table has missing values; apply penalty_fill first")
        return np.array(vals, dtype=float)

    def subset(self, ids) -> ResultTable:
        keep = set(ids)
        return replace(self, rows=tuple(r for r in self.rows if r.case_id in keep))


def _parse_value(text: str, where: str) -> float | None:
    if text.strip().lower() in MISSING:
        return None
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{where}: cannot read RMSD value {text!r}") from None


def read_result_table(text: str, method: str = "", columns: dict | None = None) -> ResultTable:
    """Read a tab-separated result table.

    Lines starting with '#' before the header are kept as comments. The
    header row is mandatory; ``columns`` renames the case_id/top1/top5
    columns (for example ``{"top1": "rmsd_top1"}``). Other columns are carried
    along unchanged. Blank or NA values become missing entries.
    """
    names = {"case_id": "case_id", "top1": "top1", "top5": "top5", "method": "method"}
    names.update(columns or {})
    comments, header, rows = [], None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if header is None and line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        fields = line.split("\t")
        if header is None:
            header = [f.strip() for f in fields]
            missing = [names[k] for k in ("case_id", "top1", "top5") if names[k] not in header]
            if missing:
                raise ValueError(f"line {lineno}: header lacks column(s) {missing}")
            col = {h: i for i, h in enumerate(header)}
            continue
        if len(fields) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, found {len(fields)}")
        where = f"line {lineno}"
        flags = frozenset(f for f in fields[col["flags"]].split(",") if f) if "flags" in col else frozenset()
        skip = {names["case_id"], names["top1"], names["top5"], "flags", names["method"]}
        extras = tuple((h, fields[i]) for h, i in col.items() if h not in skip)
        rows.append(
            ResultRow(
                fields[col[names["case_id"]]].strip(),
                fields[col[names["method"]]].strip() if names["method"] in col else method,
                _parse_value(fields[col[names["top1"]]], where),
                _parse_value(fields[col[names["top5"]]], where),
                flags,
                extras,
            )
        )
    if header is None:
        raise ValueError("result table has no header row")
    extra_cols = tuple(h for h in header if h not in {names["case_id"], names["top1"], names["top5"], "flags", names["method"]})
    return ResultTable(tuple(rows), method, extra_cols, tuple(comments))


def _fmt(v: float | None) -> str:
    return "NA" if v is None else f"{v:.4f}"


def write_result_table(table: ResultTable, comments=()) -> str:
    out = [f"# {c}" for c in (*table.comments, *comments)]
    out.append("\t".join(["case_id", "method", "top1", "top5", "flags", *table.extra_columns]))
    for r in sorted(table.rows, key=lambda r: r.case_id):
        extras = dict(r.extras)
        out.append("\t".join(
            [r.case_id, r.method, _fmt(r.top1), _fmt(r.top5), ",".join(sorted(r.flags))]
            + [extras.get(c, "") for c in table.extra_columns]
        ))
    return "\n".join(out) + "\n"


def penalty_fill(table: ResultTable, missing_value: float = PENALTY_RMSD, expected_ids=()) -> ResultTable:
    """Replace failed entries by ``missing_value`` and add rows for expected cases that are absent.

    Values above ``missing_value`` are capped to it. Every changed row gets a
    flag naming what happened; rows that need no change are returned as is.
    """
    rows = []
    for r in table.rows:
        flags = set(r.flags)
        t1, t5 = r.top1, r.top5
        if t1 is None or t5 is None:
            flags.add("penalty")
            t1 = missing_value if t1 is None else t1
            t5 = min(t1, missing_value) if t5 is None else t5
        if t1 > missing_value or t5 > missing_value:
            flags.add("capped")
            t1, t5 = min(t1, missing_value), min(t5, missing_value)
        rows.append(r if flags == set(r.flags) else replace(r, top1=t1, top5=t5, flags=frozenset(flags)))
    present = {r.case_id for r in rows}
    for cid in sorted(set(expected_ids) - present):
        rows.append(ResultRow(cid, table.method, missing_value, missing_value, frozenset({"penalty", "absent"})))
    return replace(table, rows=tuple(rows))


# --- rates and curves ---------------------------------------------------------


def success_rate(table: ResultTable, column: str = "top1", threshold: float = 2.0) -> float:
    """Fraction of rows with RMSD <= threshold."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if len(table) == 0:
        raise ValueError("empty result table")
    return float(np.mean(table.values(column) <= threshold))


@dataclass(frozen=True)
class Curve:
    grid: tuple[float, ...]
    fraction: tuple[float, ...]
    name: str = ""

    def at(self, x: float) -> float:
        i = int(np.searchsorted(self.grid, x + 1e-12, side="right")) - 1
        return 0.0 if i < 0 else self.fraction[i]


def cumulative_curve(table: ResultTable, column: str = "top1", grid_step: float = 0.1,
                     grid_max: float = PENALTY_RMSD, name: str = "") -> Curve:
    if grid_step <= 0 or grid_max <= 0:
        raise ValueError("grid_step and grid_max must be positive")
    if len(table) == 0:
        raise ValueError("empty result table")
    n = int(round(grid_max / grid_step))
    grid = np.round(np.arange(n + 1) * grid_step, 10)
    vals = np.sort(table.values(column))
    # comparisons use the same rounding as the grid so the curve equals success_rate at grid points
    counts = np.searchsorted(vals, grid, side="right")
    return Curve(tuple(float(g) for g in grid), tuple(float(c) / len(vals) for c in counts), name)


# --- subsets -----------------------------------------------------------------


@dataclass(frozen=True)
class SubsetStats:
    rates: dict  # group -> {"n": int, "top1@2.0": fraction, ...}
    unmatched_rows: tuple[str, ...] = ()  # table rows absent from the classification
    unmatched_cases: tuple[str, ...] = ()  # classified cases absent from the table
    thresholds: tuple[float, ...] = THRESHOLDS

    def rate(self, group: str, column: str, threshold: float) -> float:
        return self.rates[group][f"{column}@{threshold:.1f}"]

    def percent(self, group: str, column: str, threshold: float) -> float:
        return round(100.0 * self.rate(group, column, threshold), 1)


def _class_map(classification) -> dict[str, str]:
    if hasattr(classification, "classes"):
        return classification.classes()
    return dict(classification)


def subset_stats(table: ResultTable, classification, thresholds=THRESHOLDS) -> SubsetStats:
    """Success rates per audit class and overall.

    ``classification`` is an AuditReport or a mapping case_id -> class. The
    near_neighbor group includes the extreme cases. Rows without a class count
    toward overall only and are listed in ``unmatched_rows``.
    """
    classes = _class_map(classification)
    members = {g: [] for g in GROUPS}
    unmatched = []
    for r in table.rows:
        members["overall"].append(r.case_id)
        k = classes.get(r.case_id)
        if k is None:
            unmatched.append(r.case_id)
        elif k == "hard":
            members["hard"].append(r.case_id)
        elif k in ("near_neighbor", "extreme"):
            members["near_neighbor"].append(r.case_id)
            if k == "extreme":
                members["extreme"].append(r.case_id)
        else:
            raise ValueError(f"{r.case_id}: unknown class {k!r}")
    rates = {}
    for g, ids in members.items():
        entry = {"n": len(ids)}
        sub = table.subset(ids)
        for col in COLUMNS:
            for th in thresholds:
                entry[f"{col}@{th:.1f}"] = success_rate(sub, col, th) if ids else float("nan")
        rates[g] = entry
    in_table = set(table.case_ids)
    missing = tuple(sorted(c for c in classes if c not in in_table))
    return SubsetStats(rates, tuple(sorted(unmatched)), missing, tuple(thresholds))


# --- Student t ----------------------------------------------------------------


def _betacf(a: float, b: float, x: float, eps: float = 1e-16, max_iter: int = 10_000) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_two_tailed(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class TTest:
    t: float
    p: float
    n: int
    mean_difference: float

    @property
    def df(self) -> int:
        return self.n - 1


def paired_t_test(a, b) -> TTest:
    """Two-tailed paired t-test on differences a - b."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-D and of equal length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least two pairs")
    d = a - b
    mean = float(np.mean(d))
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTest(0.0, 1.0, n, 0.0)
        return TTest(math.copysign(math.inf, mean), 0.0, n, mean)
    t = mean / (sd / math.sqrt(n))
    return TTest(t, t_two_tailed(t, n - 1), n, mean)


def compare_tables(tables, column: str = "top1") -> dict:
    """Paired tests for every pair of tables on their shared case ids."""
    out = {}
    for x, y in combinations(tables, 2):
        shared = sorted(set(x.case_ids) & set(y.case_ids))
        if not shared:
            raise ValueError(f"tables {x.method!r} and {y.method!r} share no case ids")
        bx, by = x.by_id(), y.by_id()
        res = paired_t_test([bx[c].value(column) for c in shared], [by[c].value(column) for c in shared])
        out[(x.method, y.method)] = res
    return out


# --- reports -----------------------------------------------------------------


def stats_document(tables, classification=None, thresholds=THRESHOLDS, provenance: dict | None = None) -> dict:
    doc: dict = {"provenance": provenance or {}, "methods": {}, "paired_tests": []}
    for tab in tables:
        entry: dict = {"n": len(tab), "overall": {}}
        for col in COLUMNS:
            for th in thresholds:
                entry["overall"][f"{col}@{th:.1f}"] = round(100.0 * success_rate(tab, col, th), 1)
        if classification is not None:
            sub = subset_stats(tab, classification, thresholds)
            entry["subsets"] = {
                g: {k: (v if k == "n" else (None if math.isnan(v) else round(100.0 * v, 1))) for k, v in r.items()}
                for g, r in sub.rates.items()
            }
            entry["unmatched_rows"] = list(sub.unmatched_rows)
            entry["unmatched_cases"] = list(sub.unmatched_cases)
        doc["methods"][tab.method] = entry
    if len(tables) > 1:
        for col in COLUMNS:
            for (ma, mb), res in compare_tables(tables, col).items():
                doc["paired_tests"].append({
                    "a": ma, "b": mb, "column": col, "n": res.n,
                    "t": res.t if math.isfinite(res.t) else str(res.t), "p": res.p,
                    "mean_difference": res.mean_difference,
                })
    return doc


def stats_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def subset_tsv(tables, classification, thresholds=THRESHOLDS) -> str:
    cols = [f"{c}@{t:.1f}" for c in COLUMNS for t in thresholds]
    lines = ["\t".join(["method", "group", "n", *cols])]
    for tab in tables:
        sub = subset_stats(tab, classification, thresholds)
        for g in GROUPS:
            r = sub.rates[g]
            vals = ["NA" if math.isnan(r[c]) else f"{100.0 * r[c]:.1f}" for c in cols]
            lines.append("\t".join([tab.method, g, str(r["n"]), *vals]))
    return "\n".join(lines) + "\n"


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
            "#bcbd22", "#17becf")


def curves_svg(curves, title: str = "", width: int = 640, height: int = 420, x_max: float = PENALTY_RMSD) -> str:
    """Cumulative curves as a standalone SVG line chart on fixed 0-20 A and 0-1 axes."""
    left, right, top, bottom = 60, 170, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + pw * min(max(x, 0.0), x_max) / x_max

    def sy(y):
        return top + ph * (1.0 - y)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>')
    for k in range(0, int(x_max) + 1, 2):
        x = sx(k)
        out.append(f'<line x1="{x:.1f}" y1="{top}" x2="{x:.1f}" y2="{top + ph}" stroke="#eeeeee"/>')
        out.append(f'<text x="{x:.1f}" y="{top + ph + 15}" text-anchor="middle">{k}</text>')
    for k in range(0, 11, 2):
        y = sy(k / 10)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#eeeeee"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{k / 10:.1f}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">RMSD threshold (A)</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">fraction of cases</text>'
    )
    for i, c in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(c.grid, c.fraction) if x <= x_max)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{pts}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{_esc(c.name or f"series {i + 1}")}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


__all__ = [
    "COLUMNS", "GROUPS", "PENALTY_RMSD", "THRESHOLDS",
    "Curve", "ResultRow", "ResultTable", "SubsetStats", "TTest",
    "betainc", "compare_tables", "cumulative_curve", "curves_svg", "paired_t_test", "penalty_fill",
    "read_result_table", "stats_document", "stats_json", "subset_stats", "subset_tsv", "success_rate",
    "t_two_tailed", "write_result_table",
]
