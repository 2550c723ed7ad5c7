"""Heavy-atom molecular graphs with normalized bond classes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from ..molio import BondOrder, Molecule

# order-class codes used in hashing and canonical forms
ORDER_CODE = {BondOrder.SINGLE: 1, BondOrder.DOUBLE: 2, BondOrder.TRIPLE: 3, BondOrder.AROMATIC: 4}

_VALENCES = {
    "B": (3,), "C": (4,), "Si": (4,), "N": (3, 5), "P": (3, 5), "As": (3, 5),
    "O": (2,), "S": (2, 4, 6), "Se": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}
_GROUP_14_OR_LESS = frozenset({"B", "C", "Si"})


class ValenceError(ValueError):
    pass


def allowed_valences(element: str, charge: int) -> tuple[int, ...]:
    base = _VALENCES.get(element, ())
    if element in _GROUP_14_OR_LESS:
        return tuple(v - abs(charge) for v in base if v - abs(charge) >= 0)
    return tuple(v + charge for v in base if v + charge >= 0)


def implicit_hydrogens(element: str, charge: int, bond_sum: int, aromatic: bool, strict: bool = False) -> int:
    """Hydrogens needed to reach the lowest allowed valence at or above the bonds already present.

    Aromatic bonds count 1 each, and an aromatic atom contributes one more
    electron to the ring but is only allowed its lowest valence.
    """
    vals = allowed_valences(element, charge)
    if not vals:
        return 0
    if aromatic:
        low = vals[0]
        if low >= bond_sum + 1:
            return low - bond_sum - 1
        if low >= bond_sum:
            return 0
        vals = vals[1:] or vals
    for v in vals:
        if v >= bond_sum:
            return v - bond_sum
    if strict:
        raise ValenceError(f"{element} (charge {charge:+d}) cannot have {bond_sum} bonds")
    return 0


@dataclass(frozen=True)
class Node:
    element: str
    formal_charge: int = 0
    aromatic: bool = False
    h_count: int = 0

    @property
    def key(self) -> tuple:
        return (self.element, self.formal_charge, self.aromatic, self.h_count)


def _cycle_edges(n: int, edges) -> set[tuple[int, int]]:
    """Edges lying on at least one cycle, i.e. the non-bridges."""
    adj = [[] for _ in range(n)]
    for k, (i, j) in enumerate(edges):
        adj[i].append((j, k))
        adj[j].append((i, k))
    disc = [-1] * n
    low = [0] * n
    bridges = set()
    t = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = t
        t += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for u, k in it:
                if k == via:
                    continue
                if disc[u] < 0:
                    disc[u] = low[u] = t
                    t += 1
                    stack.append((u, k, iter(adj[u])))
                    advanced = True
                    break
                low[v] = min(low[v], disc[u])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[v])
                    if low[v] > disc[p]:
                        bridges.add(via)
    return {tuple(sorted(e)) for k, e in enumerate(edges) if k not in bridges}


class MolGraph:
    """Immutable heavy-atom graph: nodes carry hydrogen counts, edges carry order classes.

    ``source_atoms`` maps node index to the atom index of the molecule the
    graph was built from (``None`` for SMILES input).
    """

    __slots__ = ("nodes", "edges", "source_atoms", "name", "__dict__")

    def __init__(self, nodes, edges, source_atoms=None, name: str = ""):
        nodes = tuple(nodes)
        if not nodes:
            raise ValueError("a molecular graph needs at least one heavy atom")
        norm = []
        seen = set()
        for i, j, order in edges:
            if i == j or not (0 <= i < len(nodes) and 0 <= j < len(nodes)):
                raise ValueError(f"invalid edge {i}-{j}")
            a, b = min(i, j), max(i, j)
            if (a, b) in seen:
                raise ValueError(f"duplicate edge {a}-{b}")
            if order not in ORDER_CODE:
                raise ValueError(f"edge {a}-{b}: order class must be single/double/triple/aromatic")
            seen.add((a, b))
            norm.append((a, b, order))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(sorted(norm, key=lambda e: (e[0], e[1]))))
        object.__setattr__(self, "source_atoms", tuple(source_atoms) if source_atoms is not None else None)
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):
        if key in MolGraph.__slots__:
            raise AttributeError("MolGraph is immutable")
        object.__setattr__(self, key, value)

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"MolGraph({self.name!r}, {len(self.nodes)} nodes, {len(self.edges)} edges)"

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per node: ((neighbor, order code), ...) sorted by neighbor."""
        adj = [[] for _ in self.nodes]
        for i, j, order in self.edges:
            c = ORDER_CODE[order]
            adj[i].append((j, c))
            adj[j].append((i, c))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_codes(self) -> dict[tuple[int, int], int]:
        codes = {}
        for i, j, order in self.edges:
            codes[(i, j)] = codes[(j, i)] = ORDER_CODE[order]
        return codes

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.neighbors)

    @cached_property
    def ring_edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(_cycle_edges(len(self.nodes), [(i, j) for i, j, _ in self.edges]))

    @cached_property
    def in_ring(self) -> tuple[bool, ...]:
        flags = [False] * len(self.nodes)
        for i, j in self.ring_edges:
            flags[i] = flags[j] = True
        return tuple(flags)


def normalized_graph(nodes: list[Node], edges: list[tuple[int, int, BondOrder]], source_atoms=None, name="") -> MolGraph:
    """Apply the two normalizations that make equivalent inputs compare equal.

    1. A bond is aromatic-class iff it lies on a ring made only of
       aromatic-flagged atoms; aromatic bonds elsewhere become single.
    2. Delocalized terminal groups (carboxylate, nitro, phosphate, ...):
       when two or more H-free, degree-1 O/S neighbors of one atom mix
       X=O and X-O(-) forms (or are already aromatic-class), all their bonds
       become aromatic-class and their charge moves to the central atom.
    """
    n = len(nodes)
    arom = [nd.aromatic for nd in nodes]
    sub = [(i, j) for i, j, _ in edges if arom[i] and arom[j]]
    ring_sub = _cycle_edges(n, sub) if sub else set()
    out = []
    for i, j, order in edges:
        key = (min(i, j), max(i, j))
        if key in ring_sub:
            order = BondOrder.AROMATIC
        elif order in (BondOrder.AROMATIC, BondOrder.AMIDE):
            order = BondOrder.SINGLE
        out.append((i, j, order))

    # raw (pre-normalization) view for terminal groups: aromatic input bonds off-ring count as delocalized
    raw_order = {(min(i, j), max(i, j)): o for i, j, o in edges}
    degree = [0] * n
    nbrs = [[] for _ in range(n)]
    for i, j, _ in out:
        degree[i] += 1
        degree[j] += 1
        nbrs[i].append(j)
        nbrs[j].append(i)
    nodes = list(nodes)
    bond_index = {(min(i, j), max(i, j)): k for k, (i, j, _) in enumerate(out)}
    for center in range(n):
        members = []
        for t in nbrs[center]:
            nd = nodes[t]
            if nd.element not in ("O", "S") or degree[t] != 1 or nd.h_count != 0 or nd.formal_charge not in (0, -1):
                continue
            key = (min(center, t), max(center, t))
            order = raw_order[key]
            if order not in (BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.AROMATIC):
                continue
            if order is BondOrder.SINGLE and nd.formal_charge == 0:
                continue  # a neutral single-bonded terminal O/S is a radical, not part of the group
            members.append((t, key, order, nd.formal_charge))
        if len(members) < 2:
            continue
        forms = {(o, q) for _, _, o, q in members}
        if len(forms) < 2 and not any(o is BondOrder.AROMATIC for _, _, o, _ in members):
            continue
        moved = 0
        for t, key, _, q in members:
            moved += q
            nodes[t] = Node(nodes[t].element, 0, nodes[t].aromatic, 0)
            i, j, _ = out[bond_index[key]]
            out[bond_index[key]] = (i, j, BondOrder.AROMATIC)
        c = nodes[center]
        nodes[center] = Node(c.element, c.formal_charge + moved, c.aromatic, c.h_count)
    return MolGraph(nodes, out, source_atoms, name)


def from_molecule(mol: Molecule) -> MolGraph:
    """Fold hydrogens into counts and normalize bond classes.

    Hydrogen counts come from explicit H atoms when the molecule has any,
    otherwise from standard valence rules.
    """
    heavy = [i for i, a in enumerate(mol.atoms) if a.is_heavy]
    index = {a: k for k, a in enumerate(heavy)}
    n = len(heavy)
    explicit_h = [0] * n
    bond_sum = [0] * n
    edges = []
    for bond in mol.bonds:
        ha, hb = bond.a in index, bond.b in index
        if ha and hb:
            order = BondOrder.SINGLE if bond.order is BondOrder.AMIDE else bond.order
            edges.append((index[bond.a], index[bond.b], order))
            bond_sum[index[bond.a]] += order.valence
            bond_sum[index[bond.b]] += order.valence
        elif ha:
            explicit_h[index[bond.a]] += 1
        elif hb:
            explicit_h[index[bond.b]] += 1
    has_h = len(heavy) < len(mol.atoms)

    ring = _cycle_edges(n, [(i, j) for i, j, _ in edges])
    aromatic = [mol.atoms[a].atom_type.endswith(".ar") for a in heavy]
    for i, j, order in edges:
        if order is BondOrder.AROMATIC and (min(i, j), max(i, j)) in ring:
            aromatic[i] = aromatic[j] = True

    nodes = []
    for k, a in enumerate(heavy):
        atom = mol.atoms[a]
        if has_h:
            h = explicit_h[k]
        else:
            h = implicit_hydrogens(atom.element, atom.formal_charge, bond_sum[k], aromatic[k])
        nodes.append(Node(atom.element, atom.formal_charge, aromatic[k], h))
    return normalized_graph(nodes, edges, heavy, mol.name)
