"""Covalent connectivity from 3D coordinates, atom paths, and the
residue-level linkage graph.

Bonds are inferred by element-pair distance thresholds and unioned with
any CONECT pairs present in the file, so files with partial connectivity
records degrade gracefully.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import NoPath
from .structure import Structure

_NAME_POSITION = re.compile(r"^[A-Z]+(\d+)")


@dataclass(frozen=True)
class BondThresholds:
    """Maximum bond lengths in Angstrom by element pair: carbon-carbon,
    anything-with-hydrogen, and everything else. Inclusive."""

    cc: float = 1.65
    hx: float = 1.18
    xx: float = 1.50


@dataclass(frozen=True)
class BondGraph:
    n: int
    edges: frozenset[tuple[int, int]]  # unordered, stored (i, j) with i < j

    def neighbor_lists(self) -> list[list[int]]:
        """Adjacency lists with neighbors in ascending index order."""
        cached = self.__dict__.get("_adj_cache")
        if cached is None:
            adj: list[list[int]] = [[] for _ in range(self.n)]
            for i, j in self.edges:
                adj[i].append(j)
                adj[j].append(i)
            for lst in adj:
                lst.sort()
            cached = adj
            object.__setattr__(self, "_adj_cache", cached)
        return cached


@dataclass(frozen=True)
class LinkageEdge:
    """One glycosidic bridge: the child residue links through its
    (anomeric-side) carbon at child_position to the parent residue's
    carbon/oxygen at parent_position."""

    child: int
    parent: int
    child_position: int
    parent_position: int


@dataclass(frozen=True)
class ResidueLinkageGraph:
    nodes: tuple[int, ...]  # residue serials, file order
    edges: tuple[LinkageEdge, ...]


def atom_position_number(name: str) -> int | None:
    """Ring-position number encoded in an atom name.

    "C3" -> 3, "O5" -> 5. Hydrogen names carry a trailing copy index
    ("H61" is the first proton on C6), so for multi-digit numbers on
    hydrogens the leading digit is the position. Names without a usable
    digit, or with a position beyond 9, give None.
    """
    m = _NAME_POSITION.match(name.upper())
    if not m:
        return None
    digits = m.group(1)
    value = int(digits)
    if value <= 9:
        return value
    if name.upper().startswith("H"):
        return int(digits[0])
    return None


def infer_bonds(s: Structure, t: BondThresholds = BondThresholds()) -> BondGraph:
    """Distance-threshold bond perception, unioned with CONECT pairs.

    A pair is bonded when its Euclidean distance is at or below the
    threshold for its element pair: both carbon -> cc, either hydrogen ->
    hx, anything else -> xx.
    """
    n = len(s.atoms)
    coords = np.array([a.coord for a in s.atoms], dtype=float)
    elements = [a.element for a in s.atoms]
    is_h = np.array([e == "H" for e in elements])
    is_c = np.array([e == "C" for e in elements])

    diff = coords[:, None, :] - coords[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)

    either_h = is_h[:, None] | is_h[None, :]
    both_c = is_c[:, None] & is_c[None, :]
    thr = np.where(either_h, t.hx, np.where(both_c, t.cc, t.xx))

    within = dist2 <= thr * thr
    np.fill_diagonal(within, False)
    ii, jj = np.nonzero(np.triu(within, k=1))
    edges = {(int(i), int(j)) for i, j in zip(ii, jj)}

    index_of = {a.serial: k for k, a in enumerate(s.atoms)}
    for sa, sb in s.connect_pairs:
        i, j = index_of[sa], index_of[sb]
        if i != j:
            edges.add((min(i, j), max(i, j)))
    return BondGraph(n=n, edges=frozenset(edges))


def shortest_atom_path(
    g: BondGraph, a: int, targets: set[int]
) -> tuple[int, list[int]]:
    """Hop count and path from atom a to the nearest atom in targets.

    Among all shortest paths to the target set, the lexicographically
    smallest one (by atom index sequence) is returned, making the result
    deterministic. Raises NoPath when no target is reachable.
    """
    if not (0 <= a < g.n):
        raise NoPath(f"atom index {a} out of range")
    if a in targets:
        return 0, [a]
    adj = g.neighbor_lists()
    dist = _multi_source_distances(g, targets, adj)
    if dist[a] < 0:
        raise NoPath(f"no route from atom {a} to targets")
    path = [a]
    cur = a
    while dist[cur] > 0:
        cur = min(w for w in adj[cur] if dist[w] == dist[cur] - 1)
        path.append(cur)
    return dist[a], path


def _multi_source_distances(
    g: BondGraph, sources: set[int], adj: list[list[int]]
) -> list[int]:
    dist = [-1] * g.n
    frontier = sorted(w for w in sources if 0 <= w < g.n)
    for w in frontier:
        dist[w] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def residue_linkage_graph(s: Structure, g: BondGraph) -> ResidueLinkageGraph:
    """Find glycosidic bridges C(p, A)-O-C(q, B) between residues.

    Edge orientation: the side whose linking carbon has the smaller ring
    position is the child (the anomeric carbon is position 1, or 2 in
    ketoses); on a tie the residue with the larger serial is the child.
    Lone inter-residue C-O bonds (bridging oxygen missing its second
    carbon) are also reported, with the parent position read from the
    oxygen's name.
    """
    residue_of = {}
    for res in s.residues:
        for atom in res.atoms:
            residue_of[atom.serial] = res.serial
    atoms = s.atoms
    adj = g.neighbor_lists()

    raw: set[tuple[int, int, int, int]] = set()
    for o_idx, o_atom in enumerate(atoms):
        if o_atom.element != "O":
            continue
        carbons = [w for w in adj[o_idx] if atoms[w].element == "C"]
        cross = [
            (ci, cj) for ci in carbons for cj in carbons
            if ci < cj
            and residue_of[atoms[ci].serial] != residue_of[atoms[cj].serial]
        ]
        for ci, cj in cross:
            pi = atom_position_number(atoms[ci].name)
            pj = atom_position_number(atoms[cj].name)
            if pi is None or pj is None:
                continue
            raw.add(_orient(
                residue_of[atoms[ci].serial], pi,
                residue_of[atoms[cj].serial], pj,
            ))
        if not cross and len(carbons) == 1:
            ci = carbons[0]
            res_c = residue_of[atoms[ci].serial]
            res_o = residue_of[o_atom.serial]
            if res_c != res_o:
                pc = atom_position_number(atoms[ci].name)
                po = atom_position_number(o_atom.name)
                if pc is not None and po is not None:
                    raw.add(_orient(res_c, pc, res_o, po))

    edges = tuple(
        LinkageEdge(child=c, parent=p, child_position=cp, parent_position=pp)
        for c, p, cp, pp in sorted(raw)
    )
    return ResidueLinkageGraph(
        nodes=tuple(r.serial for r in s.residues), edges=edges
    )


def _orient(res_a: int, pos_a: int, res_b: int, pos_b: int) -> tuple[int, int, int, int]:
    if pos_a < pos_b or (pos_a == pos_b and res_a > res_b):
        return res_a, res_b, pos_a, pos_b
    return res_b, res_a, pos_b, pos_a
