"""Independent reference computations used to freeze expected values in tests.

Nothing here calls the package's canonicalization or automorphism code.
"""

import hashlib
import math

import networkx as nx
import numpy as np

from dockaudit.chemgraph import MolGraph
from dockaudit.chemgraph.graph import ORDER_CODE


def relabeled(g: MolGraph, perm) -> MolGraph:
    """Same graph with node i renamed perm[i]."""
    nodes = [None] * len(g.nodes)
    for i, nd in enumerate(g.nodes):
        nodes[perm[i]] = nd
    edges = [(perm[i], perm[j], o) for i, j, o in g.edges]
    return MolGraph(nodes, edges)


def _adjacency(g: MolGraph):
    adj = {v: {} for v in range(len(g.nodes))}
    for i, j, o in g.edges:
        adj[i][j] = adj[j][i] = ORDER_CODE[o]
    return adj


def brute_automorphisms(g: MolGraph) -> set[tuple[int, ...]]:
    """Exhaustive search over label-preserving bijections, pruned only by adjacency.

    Nodes are assigned in index order; a partial map is kept when every
    already-assigned pair has the same bond code (or absence of a bond) as
    its image. No partition refinement or degree reasoning.
    """
    n = len(g.nodes)
    adj = _adjacency(g)
    label = [nd.key for nd in g.nodes]
    out = set()
    image = [-1] * n
    used = [False] * n

    def ok(v, u):
        for w in range(v):
            if adj[v].get(w) != adj[u].get(image[w]):
                return False
        return True

    def go(v):
        if v == n:
            out.add(tuple(image))
            return
        for u in range(n):
            if not used[u] and label[u] == label[v] and ok(v, u):
                image[v], used[u] = u, True
                go(v + 1)
                image[v], used[u] = -1, False

    go(0)
    return out


def networkx_automorphism_count(g: MolGraph) -> int:
    G = nx.Graph()
    for v, nd in enumerate(g.nodes):
        G.add_node(v, key=nd.key)
    for i, j, o in g.edges:
        G.add_edge(i, j, code=ORDER_CODE[o])
    gm = nx.algorithms.isomorphism.GraphMatcher(
        G, G, node_match=lambda a, b: a["key"] == b["key"], edge_match=lambda a, b: a["code"] == b["code"]
    )
    return sum(1 for _ in gm.isomorphisms_iter())


def brute_rmsd(ref_xyz, pose_xyz, perms) -> float:
    """min over perms of sqrt(mean_i |ref_i - pose_perm(i)|^2), one permutation at a time."""
    best = math.inf
    for p in perms:
        d = ref_xyz - pose_xyz[list(p)]
        best = min(best, float(np.sqrt(np.mean(np.einsum("ij,ij->i", d, d)))))
    return best


def _hash(obj) -> int:
    return int.from_bytes(hashlib.blake2b(repr(obj).encode(), digest_size=8).digest(), "little")


def reference_fingerprint_bits(g: MolGraph, width=2048, radius=2) -> set[int]:
    """Circular hashing written from the documented recipe with networkx ring detection.

    Seed identifier: (element, charge, aromatic, H count, degree, in ring).
    Each round: (round, own id, sorted (bond code, neighbor id) pairs).
    Every identifier of every round sets bit id mod width.
    """
    G = nx.Graph()
    G.add_nodes_from(range(len(g.nodes)))
    G.add_edges_from((i, j) for i, j, _ in g.edges)
    ring_atoms = {v for cyc in nx.cycle_basis(G) for v in cyc}
    adj = _adjacency(g)
    ids = {
        v: _hash(("atom", nd.element, nd.formal_charge, nd.aromatic, nd.h_count, len(adj[v]), v in ring_atoms))
        for v, nd in enumerate(g.nodes)
    }
    bits = {x % width for x in ids.values()}
    for r in range(1, radius + 1):
        ids = {
            v: _hash((r, ids[v], tuple(sorted((c, ids[u]) for u, c in adj[v].items()))))
            for v in ids
        }
        bits |= {x % width for x in ids.values()}
    return bits
