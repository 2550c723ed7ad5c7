"""SMILES reader for the organic subset, bracket atoms, ring closures and charges.

Stereo marks (``@``, ``/``, ``\\``) are accepted and ignored.
"""

from __future__ import annotations

from ..molio import ELEMENTS, BondOrder
from .graph import MolGraph, Node, implicit_hydrogens, normalized_graph


class SmilesError(ValueError):
    def __init__(self, message: str, smiles: str = "", pos: int | None = None):
        if pos is not None:
            message = f"{message} at position {pos} in {smiles!r}"
        super().__init__(message)


_ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
_AROMATIC_ORGANIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_AROMATIC_BRACKET = {**_AROMATIC_ORGANIC, "se": "Se", "as": "As"}
_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE, "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC,
}


class _Atom:
    __slots__ = ("element", "aromatic", "charge", "hcount", "bracket")

    def __init__(self, element, aromatic, charge=0, hcount=None, bracket=False):
        self.element = element
        self.aromatic = aromatic
        self.charge = charge
        self.hcount = hcount
        self.bracket = bracket


def _parse_bracket(s: str, i: int) -> tuple[_Atom, int]:
    end = s.find("]", i)
    if end < 0:
        raise SmilesError("unterminated bracket atom", s, i)
    body = s[i + 1 : end]
    k = 0
    while k < len(body) and body[k].isdigit():  # isotope
        k += 1
    element = aromatic = None
    for width in (2, 1):
        sym = body[k : k + width]
        if len(sym) == width and sym in _AROMATIC_BRACKET:
            element, aromatic = _AROMATIC_BRACKET[sym], True
        elif len(sym) == width and sym in ELEMENTS:
            element, aromatic = sym, False
        if element:
            k += width
            break
    if element is None:
        raise SmilesError(f"unknown element in [{body}]", s, i)
    if k < len(body) and body[k] == "@":
        k += 1
        if k < len(body) and body[k] == "@":
            k += 1
        elif body[k : k + 2] in ("TH", "AL", "SP", "TB", "OH"):
            k += 2
            while k < len(body) and body[k].isdigit():
                k += 1
    hcount = 0
    if k < len(body) and body[k] == "H":
        k += 1
        digits = ""
        while k < len(body) and body[k].isdigit():
            digits += body[k]
            k += 1
        hcount = int(digits) if digits else 1
    charge = 0
    if k < len(body) and body[k] in "+-":
        sign = 1 if body[k] == "+" else -1
        symbol = body[k]
        k += 1
        digits = ""
        while k < len(body) and body[k].isdigit():
            digits += body[k]
            k += 1
        if digits:
            charge = sign * int(digits)
        else:
            charge = sign
            while k < len(body) and body[k] == symbol:
                charge += sign
                k += 1
    if k < len(body) and body[k] == ":":
        k += 1
        while k < len(body) and body[k].isdigit():
            k += 1
    if k != len(body):
        raise SmilesError(f"unexpected {body[k:]!r} in bracket atom [{body}]", s, i)
    return _Atom(element, aromatic, charge, hcount, True), end + 1


def parse_smiles(s: str) -> MolGraph:
    """Build a heavy-atom graph; explicit ``[H]`` atoms are folded into counts."""
    s = s.strip().split()[0] if s.strip() else ""
    if not s:
        raise SmilesError("empty SMILES")
    atoms: list[_Atom] = []
    bonds: dict[tuple[int, int], BondOrder | None] = {}
    branch_stack: list[int] = []
    rings: dict[int, tuple[int, BondOrder | None, int]] = {}
    prev: int | None = None
    pending: BondOrder | None = None
    pending_pos = 0
    i = 0

    def add_bond(a: int, b: int, order: BondOrder | None, pos: int):
        key = (min(a, b), max(a, b))
        if a == b or key in bonds:
            raise SmilesError("duplicate or self bond", s, pos)
        bonds[key] = order

    while i < len(s):
        ch = s[i]
        if ch == "[" or ch.isalpha():
            if ch == "[":
                atom, j = _parse_bracket(s, i)
            elif s[i : i + 2] in ("Cl", "Br"):
                atom, j = _Atom(s[i : i + 2], False), i + 2
            elif ch in _ORGANIC:
                atom, j = _Atom(ch, False), i + 1
            elif ch in _AROMATIC_ORGANIC:
                atom, j = _Atom(_AROMATIC_ORGANIC[ch], True), i + 1
            else:
                raise SmilesError(f"unknown element {ch!r}", s, i)
            atoms.append(atom)
            idx = len(atoms) - 1
            if prev is not None:
                add_bond(prev, idx, pending, i)
            elif pending is not None:
                raise SmilesError("bond symbol without a preceding atom", s, pending_pos)
            prev, pending = idx, None
            i = j
        elif ch in _BOND_SYMBOLS:
            if pending is not None:
                raise SmilesError("two consecutive bond symbols", s, i)
            pending, pending_pos = _BOND_SYMBOLS[ch], i
            i += 1
        elif ch == "$":
            raise SmilesError("quadruple bonds are not supported", s, i)
        elif ch == "(":
            if prev is None:
                raise SmilesError("branch without a preceding atom", s, i)
            branch_stack.append(prev)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise SmilesError("unbalanced ')'", s, i)
            if pending is not None:
                raise SmilesError("bond symbol at end of branch", s, pending_pos)
            prev = branch_stack.pop()
            i += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if not s[i + 1 : i + 3].isdigit() or len(s[i + 1 : i + 3]) != 2:
                    raise SmilesError("'%' must be followed by two digits", s, i)
                num, j = int(s[i + 1 : i + 3]), i + 3
            else:
                num, j = int(ch), i + 1
            if prev is None:
                raise SmilesError("ring closure without a preceding atom", s, i)
            if num in rings:
                other, order, _ = rings.pop(num)
                if order is not None and pending is not None and order != pending:
                    raise SmilesError(f"conflicting bond orders on ring closure {num}", s, i)
                add_bond(other, prev, pending or order, i)
            else:
                rings[num] = (prev, pending, i)
            pending = None
            i = j
        elif ch == ".":
            if pending is not None:
                raise SmilesError("bond symbol before '.'", s, i)
            if branch_stack:
                raise SmilesError("'.' inside a branch", s, i)
            prev = None
            i += 1
        elif ch == "*":
            raise SmilesError("wildcard atoms are not supported", s, i)
        else:
            raise SmilesError(f"unexpected character {ch!r}", s, i)
    if branch_stack:
        raise SmilesError("unbalanced '('", s, len(s))
    if rings:
        num, (_, _, pos) = next(iter(rings.items()))
        raise SmilesError(f"unclosed ring {num}", s, pos)
    if pending is not None:
        raise SmilesError("dangling bond symbol", s, pending_pos)

    orders = {}
    for (a, b), order in bonds.items():
        if order is None:
            order = BondOrder.AROMATIC if atoms[a].aromatic and atoms[b].aromatic else BondOrder.SINGLE
        orders[(a, b)] = order

    # fold explicit hydrogens
    is_h = [at.element == "H" for at in atoms]
    extra_h = [0] * len(atoms)
    bond_sum = [0] * len(atoms)
    for (a, b), order in orders.items():
        bond_sum[a] += order.valence
        bond_sum[b] += order.valence
        if is_h[a] and not is_h[b]:
            extra_h[b] += 1
        elif is_h[b] and not is_h[a]:
            extra_h[a] += 1
    heavy = [k for k in range(len(atoms)) if not is_h[k]]
    if not heavy:
        raise SmilesError(f"no heavy atoms in {s!r}")
    index = {k: n for n, k in enumerate(heavy)}
    nodes = []
    for k in heavy:
        at = atoms[k]
        if at.bracket:
            h = at.hcount + extra_h[k]
        else:
            try:
                h = implicit_hydrogens(at.element, 0, bond_sum[k], at.aromatic, strict=True) + extra_h[k]
            except ValueError as exc:
                raise SmilesError(f"valence violation: {exc}", s) from None
        nodes.append(Node(at.element, at.charge, at.aromatic, h))
    edges = [(index[a], index[b], o) for (a, b), o in orders.items() if not is_h[a] and not is_h[b]]
    return normalized_graph(nodes, edges, None, s)
