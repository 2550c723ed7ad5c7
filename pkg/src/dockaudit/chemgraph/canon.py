"""Canonical labeling and automorphism enumeration by partition refinement.

Colors start from (element, charge, aromatic, H count, degree) and are
refined until equitable. Canonical labeling searches the individualization
tree for the lexicographically smallest labeled edge list, pruning children
with automorphisms discovered along the way. Automorphism enumeration
backtracks over the cells of the equitable partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import MolGraph

DEFAULT_CAP = 100_000


def _node_invariant(g: MolGraph, v: int) -> tuple:
    nd = g.nodes[v]
    return (nd.element, nd.formal_charge, nd.aromatic, nd.h_count, g.degrees[v])


def initial_cells(g: MolGraph) -> list[list[int]]:
    groups: dict[tuple, list[int]] = {}
    for v in range(len(g.nodes)):
        groups.setdefault(_node_invariant(g, v), []).append(v)
    return [groups[k] for k in sorted(groups)]


def refine(g: MolGraph, cells: list[list[int]]) -> list[list[int]]:
    """Split cells by neighbor color multisets until the partition is equitable."""
    cells = [list(c) for c in cells]
    nbrs = g.neighbors
    while True:
        color = [0] * len(g.nodes)
        for ci, cell in enumerate(cells):
            for v in cell:
                color[v] = ci
        new_cells = []
        split = False
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            sig = {v: tuple(sorted((color[u], c) for u, c in nbrs[v])) for v in cell}
            keys = sorted(set(sig.values()))
            if len(keys) == 1:
                new_cells.append(cell)
                continue
            split = True
            for key in keys:
                new_cells.append([v for v in cell if sig[v] == key])
        cells = new_cells
        if not split:
            return cells


def _individualize(cells, ci, v):
    cell = cells[ci]
    rest = [u for u in cell if u != v]
    return cells[:ci] + [[v], rest] + cells[ci + 1 :]


def _target_cell(cells) -> int | None:
    best = None
    for ci, cell in enumerate(cells):
        if len(cell) > 1 and (best is None or len(cell) < len(cells[best])):
            best = ci
    return best


def _orbits(n: int, generators, members) -> dict[int, int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for gen in generators:
        for i, j in enumerate(gen):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    return {v: find(v) for v in members}


@dataclass(frozen=True)
class Canonical:
    labels: tuple[int, ...]  # labels[v] = canonical position of node v
    form: tuple  # (node keys in canonical order, sorted labeled edges)
    generators: tuple[tuple[int, ...], ...]  # automorphisms found while searching


def _encode(g: MolGraph, lab) -> tuple:
    return tuple(sorted(
        (min(lab[i], lab[j]), max(lab[i], lab[j]), code)
        for (i, j), code in ((e[:2], g.edge_codes[e[:2]]) for e in g.edges)
    ))


def canonicalize(g: MolGraph) -> Canonical:
    cached = g.__dict__.get("_canonical")
    if cached is not None:
        return cached
    n = len(g.nodes)
    generators: list[tuple[int, ...]] = []
    first: list = []
    best: list = []

    def leaf(cells):
        lab = [0] * n
        for pos, cell in enumerate(cells):
            lab[cell[0]] = pos
        enc = _encode(g, lab)
        for ref in (first, best):
            if ref and ref[0] == enc:
                inv = [0] * n
                for v, p in enumerate(ref[1]):
                    inv[p] = v
                gamma = tuple(inv[lab[v]] for v in range(n))
                if any(gamma[v] != v for v in range(n)) and gamma not in generators:
                    generators.append(gamma)
                break
        if not first:
            first[:] = [enc, lab]
        if not best or enc < best[0]:
            best[:] = [enc, lab]

    def visit(cells, path):
        ci = _target_cell(cells)
        if ci is None:
            leaf(cells)
            return
        explored: list[int] = []
        for v in sorted(cells[ci]):
            if explored:
                fixing = [gen for gen in generators if all(gen[p] == p for p in path)]
                if fixing:
                    orb = _orbits(n, fixing, explored + [v])
                    if any(orb[v] == orb[w] for w in explored):
                        continue
            visit(refine(g, _individualize(cells, ci, v)), path + [v])
            explored.append(v)

    visit(refine(g, initial_cells(g)), [])
    lab = tuple(best[1])
    order = sorted(range(n), key=lambda v: lab[v])
    keys = tuple(g.nodes[v].key for v in order)
    result = Canonical(lab, (keys, best[0]), tuple(generators))
    g.__dict__["_canonical"] = result
    return result


def canonical_labels(g: MolGraph) -> np.ndarray:
    """Canonical rank of each node; isomorphic graphs map onto the same labeled graph."""
    return np.array(canonicalize(g).labels, dtype=int)


def canonical_form(g: MolGraph) -> tuple:
    return canonicalize(g).form


def graphs_identical(a: MolGraph, b: MolGraph) -> bool:
    """Topological identity: elements, charges, aromaticity, bond classes and H counts."""
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False
    return canonical_form(a) == canonical_form(b)


def isomorphism(a: MolGraph, b: MolGraph) -> np.ndarray | None:
    """Mapping m with node i of ``a`` corresponding to node m[i] of ``b``, or None."""
    if not graphs_identical(a, b):
        return None
    la, lb = canonicalize(a).labels, canonicalize(b).labels
    inv_b = [0] * len(lb)
    for v, p in enumerate(lb):
        inv_b[p] = v
    return np.array([inv_b[la[i]] for i in range(len(la))], dtype=int)


class AutomorphismGroup:
    """Automorphisms as rows of an integer array; row k maps node i to ``mappings[k, i]``.

    ``truncated`` is set when enumeration stopped at the cap, in which case
    the rows are a subset of the group (identity always first).
    """

    def __init__(self, mappings: np.ndarray, truncated: bool = False):
        mappings = np.asarray(mappings, dtype=int)
        mappings.flags.writeable = False
        self.mappings = mappings
        self.truncated = truncated

    def __len__(self) -> int:
        return len(self.mappings)

    def __iter__(self):
        return (tuple(int(x) for x in row) for row in self.mappings)

    def __getitem__(self, k) -> tuple[int, ...]:
        return tuple(int(x) for x in self.mappings[k])

    def __repr__(self) -> str:
        flag = ", truncated" if self.truncated else ""
        return f"AutomorphismGroup({len(self)} permutations{flag})"

    @classmethod
    def identity(cls, n: int) -> AutomorphismGroup:
        return cls(np.arange(n)[None, :])


def automorphisms(g: MolGraph, cap: int = DEFAULT_CAP) -> AutomorphismGroup:
    """All label- and bond-class-preserving node permutations, up to ``cap`` of them."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n = len(g.nodes)
    cells = refine(g, initial_cells(g))
    color = [0] * n
    for ci, cell in enumerate(cells):
        for v in cell:
            color[v] = ci
    members = {ci: cell for ci, cell in enumerate(cells)}
    codes = g.edge_codes
    nbrs = g.neighbors

    # breadth-first order so every vertex after the first of a component has a mapped neighbor
    order: list[int] = []
    seen = [False] * n
    for start in sorted(range(n), key=lambda v: (len(members[color[v]]), v)):
        if seen[start]:
            continue
        seen[start] = True
        queue = [start]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u, _ in nbrs[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)

    image = [-1] * n
    used = [False] * n
    found: list[list[int]] = []
    truncated = False

    def consistent(v: int, u: int) -> bool:
        mapped_v = 0
        for w, c in nbrs[v]:
            if image[w] >= 0:
                mapped_v += 1
                if codes.get((u, image[w])) != c:
                    return False
        mapped_u = sum(1 for x, _ in nbrs[u] if used[x])
        return mapped_u == mapped_v

    def backtrack(k: int) -> bool:
        nonlocal truncated
        if k == n:
            found.append(image.copy())
            if len(found) >= cap:
                truncated = True
                return True
            return False
        v = order[k]
        cand = members[color[v]]
        # identity candidate first so the identity permutation is always found first
        for u in ([v] + [x for x in cand if x != v]) if v in cand else cand:
            if used[u] or not consistent(v, u):
                continue
            image[v], used[u] = u, True
            stop = backtrack(k + 1)
            image[v], used[u] = -1, False
            if stop:
                return True
        return False

    backtrack(0)
    if truncated:
        # the cap may coincide exactly with the group order
        truncated = _has_more(g, found)
    return AutomorphismGroup(np.array(found, dtype=int).reshape(-1, n), truncated)


def _has_more(g: MolGraph, found) -> bool:
    """True if some generator found during canonicalization escapes the enumerated set."""
    have = {tuple(p) for p in found}
    for gen in canonicalize(g).generators:
        for p in found:
            if tuple(gen[x] for x in p) not in have:
                return True
    return False
