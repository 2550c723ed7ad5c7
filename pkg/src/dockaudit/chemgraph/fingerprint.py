"""Circular (Morgan-style) substructure fingerprints and Tanimoto similarity."""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass

from .graph import MolGraph

WIDTH = 2048
RADIUS = 2


def stable_hash(obj) -> int:
    """64-bit hash of ``repr(obj)``; unlike ``hash()`` it is identical across processes."""
    return int.from_bytes(hashlib.blake2b(repr(obj).encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int = WIDTH
    radius: int = RADIUS

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError(f"bitset does not fit in {self.width} bits")

    @property
    def count(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> list[int]:
        return [i for i in range(self.width) if self.bits >> i & 1]

    @classmethod
    def from_bits(cls, on_bits, width: int = WIDTH, radius: int = RADIUS) -> Fingerprint:
        value = 0
        for b in on_bits:
            if not 0 <= b < width:
                raise ValueError(f"bit {b} outside width {width}")
            value |= 1 << b
        return cls(value, width, radius)


def atom_identifiers(g: MolGraph, radius: int = RADIUS) -> list[list[int]]:
    """Environment identifiers per iteration: result[r][v] covers the radius-r neighborhood of v."""
    ids = [
        stable_hash(("atom", nd.element, nd.formal_charge, nd.aromatic, nd.h_count, g.degrees[v], g.in_ring[v]))
        for v, nd in enumerate(g.nodes)
    ]
    layers = [ids]
    for r in range(1, radius + 1):
        prev = layers[-1]
        layers.append([
            stable_hash((r, prev[v], tuple(sorted((c, prev[u]) for u, c in g.neighbors[v]))))
            for v in range(len(g.nodes))
        ])
    return layers


def environment_matches(template: MolGraph, g: MolGraph) -> dict[int, int]:
    """Approximate common-substructure atom pairing, as a map from g nodes to template nodes.

    Atoms whose circular environment is unique in both graphs are paired
    first, largest radius first (radius 0 alone never pins). The pairing then
    grows outward: an unmatched neighbor of a matched pair joins when its atom
    invariant and bond class agree, lowest index first, so equivalent
    symmetric ring atoms are taken in a fixed order.
    """
    lt, lg = atom_identifiers(template), atom_identifiers(g)
    out: dict[int, int] = {}
    used: set[int] = set()
    for r in range(len(lt) - 1, 0, -1):
        free_t = [v for v in range(len(template)) if v not in used]
        free_g = [v for v in range(len(g)) if v not in out]
        ct = Counter(lt[r][v] for v in free_t)
        cg = Counter(lg[r][v] for v in free_g)
        where_t = {lt[r][v]: v for v in free_t if ct[lt[r][v]] == 1}
        for v in free_g:
            ident = lg[r][v]
            if cg[ident] == 1 and ident in where_t:
                out[v] = where_t[ident]
                used.add(where_t[ident])
    frontier = sorted(out)
    while frontier:
        nxt = []
        for v in frontier:
            tv = out[v]
            for u, code in sorted(g.neighbors[v]):
                if u in out:
                    continue
                for w, tcode in sorted(template.neighbors[tv]):
                    if w not in used and tcode == code and lt[0][w] == lg[0][u]:
                        out[u] = w
                        used.add(w)
                        nxt.append(u)
                        break
        frontier = nxt
    return out


def fingerprint(g: MolGraph, width: int = WIDTH, radius: int = RADIUS) -> Fingerprint:
    value = 0
    for layer in atom_identifiers(g, radius):
        for ident in layer:
            value |= 1 << (ident % width)
    return Fingerprint(value, width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|, with two empty fingerprints defined as identical (1.0)."""
    if a.width != b.width:
        raise ValueError(f"fingerprint widths differ: {a.width} vs {b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
