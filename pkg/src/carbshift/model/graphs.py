"""Molecular graphs for node regression.

One graph per carbohydrate: node features from the encoder, adjacency
from the bond graph (symmetrically normalized with self-loops), labels
from the main-ring shifts of the requested nucleus. Joint mode carries a
carbon and a hydrogen head side by side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from ..features import AnnotatedRow, FeatureSchema, encode_features

TARGETS = ("c13", "h1", "joint")
_NUCLEUS_OF_TARGET = {"c13": ("C",), "h1": ("H",), "joint": ("C", "H")}


@dataclass(frozen=True)
class MolecularGraph:
    """x: (n, d) node features; adj_norm: D^-1/2 (A+I) D^-1/2;
    y: (n, heads) labels in ppm; mask: (n, heads) labeled-node selector."""

    x: np.ndarray
    adj_norm: np.ndarray
    y: np.ndarray
    mask: np.ndarray
    graph_id: str = ""

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def heads(self) -> int:
        return self.y.shape[1]


def normalized_adjacency(n: int, edges: list[tuple[int, int]]) -> np.ndarray:
    """Symmetric normalization with self-loops."""
    a = np.eye(n)
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise ShapeMismatch(f"edge ({i}, {j}) outside graph of size {n}")
        if i != j:
            a[i, j] = 1.0
            a[j, i] = 1.0
    d_inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return a * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def build_graph(
    rows: list[AnnotatedRow],
    edges: list[tuple[int, int]],
    target: str = "c13",
    drop: str | list[str] | None = None,
    feature_set: tuple[str, ...] | None = None,
    graph_id: str = "",
) -> tuple[MolecularGraph, FeatureSchema]:
    """Encode one carbohydrate into a MolecularGraph.

    Labels come from main_ring_shift, restricted to the target nucleus
    per head (carbon head, hydrogen head, or both for joint).
    """
    if target not in TARGETS:
        raise ShapeMismatch(f"unknown target {target!r}; expected {TARGETS}")
    x, schema = encode_features(rows, drop=drop, feature_set=feature_set)
    adj = normalized_adjacency(len(rows), edges)

    nuclei = _NUCLEUS_OF_TARGET[target]
    y = np.zeros((len(rows), len(nuclei)))
    mask = np.zeros((len(rows), len(nuclei)), dtype=bool)
    for head, nucleus in enumerate(nuclei):
        for i, row in enumerate(rows):
            if row.main_ring_shift is not None and row.atom_type == nucleus:
                y[i, head] = row.main_ring_shift
                mask[i, head] = True
    return MolecularGraph(x=x, adj_norm=adj, y=y, mask=mask,
                          graph_id=graph_id), schema


def block_diagonal(graphs: list[MolecularGraph]) -> MolecularGraph:
    """Concatenate graphs with no cross-molecule edges.

    Equivalent to training on the graphs independently; kept mainly so
    that equivalence is testable.
    """
    if not graphs:
        raise ShapeMismatch("cannot batch zero graphs")
    heads = graphs[0].heads
    d = graphs[0].x.shape[1]
    for g in graphs:
        if g.heads != heads or g.x.shape[1] != d:
            raise ShapeMismatch("graphs disagree on feature/head layout")
    n_total = sum(g.n for g in graphs)
    x = np.vstack([g.x for g in graphs])
    y = np.vstack([g.y for g in graphs])
    mask = np.vstack([g.mask for g in graphs])
    adj = np.zeros((n_total, n_total))
    offset = 0
    for g in graphs:
        adj[offset:offset + g.n, offset:offset + g.n] = g.adj_norm
        offset += g.n
    return MolecularGraph(x=x, adj_norm=adj, y=y, mask=mask,
                          graph_id="+".join(g.graph_id for g in graphs))
