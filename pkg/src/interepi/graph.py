"""Disjoint interdependent networks with colored edges.

Nodes live in disjoint layers and are addressed either as ``(layer, index)``
pairs or by a flat id obtained by stacking the layers in order. Every
undirected edge carries exactly one color: one color per layer for edges
inside that layer, and one color per unordered layer pair for edges between
them, so a network with L layers uses L + L(L-1)/2 colors.

Graphs are immutable after construction and all statistics here are pure
functions of the graph, so instances can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    CrossLayerColorMismatch,
    DuplicateEdge,
    NoEdgesInScope,
    NotTwoLayers,
    SelfLoop,
    UnknownNode,
)

NodeRef = tuple[int, int]  # (layer, index within layer)
EdgeRef = tuple[NodeRef, NodeRef, int]  # endpoints plus color


class Coupling(Enum):
    STRONG = "strongly-coupled"
    WEAK = "weakly-coupled"
    OTHER = "other"


class ColorTable:
    """Canonical color numbering for a given layer count.

    Colors 0..L-1 are the intra-layer colors (color i belongs to layer i);
    the inter-layer colors follow in lexicographic pair order, e.g. for
    L = 3: (0,1), (0,2), (1,2).
    """

    def __init__(self, num_layers: int):
        if num_layers < 1:
            raise ValueError("need at least one layer")
        self.num_layers = num_layers
        self._pairs = [
            (i, j) for i in range(num_layers) for j in range(i + 1, num_layers)
        ]
        self._pair_color = {
            pair: num_layers + k for k, pair in enumerate(self._pairs)
        }

    @property
    def num_colors(self) -> int:
        return self.num_layers + len(self._pairs)

    def intra(self, layer: int) -> int:
        if not 0 <= layer < self.num_layers:
            raise ValueError(f"no layer {layer}")
        return layer

    def inter(self, i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in self._pair_color:
            raise ValueError(f"no layer pair {key}")
        return self._pair_color[key]

    def color_of(self, layer_u: int, layer_v: int) -> int:
        """Color an edge between the two layers must carry."""
        if layer_u == layer_v:
            return self.intra(layer_u)
        return self.inter(layer_u, layer_v)

    def members(self, color: int) -> tuple[int, ...]:
        """Layers whose nodes can be incident to this color."""
        if not 0 <= color < self.num_colors:
            raise ValueError(f"no color {color}")
        if color < self.num_layers:
            return (color,)
        return self._pairs[color - self.num_layers]

    def is_intra(self, color: int) -> bool:
        return color < self.num_layers


class LayeredGraph:
    """Validated edge-colored interdependent network.

    Construct through :func:`build_graph`; the constructor trusts its inputs.
    Edge arrays are canonical: each edge stored with flat ids (u < v), sorted
    lexicographically. Adjacency is CSR with neighbor lists grouped by color
    within each node, which is the order the SIR inner loop consumes.
    """

    def __init__(
        self,
        layer_sizes: Sequence[int],
        edges_u: np.ndarray,
        edges_v: np.ndarray,
        edge_colors: np.ndarray,
    ):
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self.colors = ColorTable(len(self.layer_sizes))
        self.n = sum(self.layer_sizes)
        self.offsets = np.concatenate(([0], np.cumsum(self.layer_sizes)))
        self.node_layer = np.repeat(
            np.arange(len(self.layer_sizes)), self.layer_sizes
        )

        self.edges_u = np.asarray(edges_u, dtype=np.int64)
        self.edges_v = np.asarray(edges_v, dtype=np.int64)
        self.edge_colors = np.asarray(edge_colors, dtype=np.int64)

        src = np.concatenate([self.edges_u, self.edges_v])
        dst = np.concatenate([self.edges_v, self.edges_u])
        col = np.concatenate([self.edge_colors, self.edge_colors])
        order = np.lexsort((col, src))
        deg = np.bincount(src, minlength=self.n)
        self._indptr = np.concatenate(([0], np.cumsum(deg)))
        self._adj = dst[order]
        self._adj_color = col[order]

        for arr in (
            self.edges_u,
            self.edges_v,
            self.edge_colors,
            self.node_layer,
            self.offsets,
            self._indptr,
            self._adj,
            self._adj_color,
        ):
            arr.setflags(write=False)

    # -- identity ---------------------------------------------------------

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes)

    @property
    def num_colors(self) -> int:
        return self.colors.num_colors

    @property
    def num_edges(self) -> int:
        return len(self.edges_u)

    def flat(self, layer: int, index: int) -> int:
        return int(self.offsets[layer]) + index

    def layer_slice(self, layer: int) -> slice:
        return slice(int(self.offsets[layer]), int(self.offsets[layer + 1]))

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR arrays (indptr, neighbors, neighbor edge colors)."""
        return self._indptr, self._adj, self._adj_color

    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def color_degrees(self) -> np.ndarray:
        """Per-color degree of every node, shape (num_colors, n)."""
        out = np.zeros((self.num_colors, self.n), dtype=np.int64)
        for c in range(self.num_colors):
            mask = self.edge_colors == c
            if mask.any():
                ends = np.concatenate([self.edges_u[mask], self.edges_v[mask]])
                out[c] = np.bincount(ends, minlength=self.n)
        return out

    def edge_count_by_color(self) -> np.ndarray:
        return np.bincount(self.edge_colors, minlength=self.num_colors)

    def edge_list(self) -> list[EdgeRef]:
        """Canonical ((layer, idx), (layer, idx), color) triples."""
        out = []
        for u, v, c in zip(
            self.edges_u.tolist(), self.edges_v.tolist(), self.edge_colors.tolist()
        ):
            lu = int(self.node_layer[u])
            lv = int(self.node_layer[v])
            out.append(((lu, u - int(self.offsets[lu])), (lv, v - int(self.offsets[lv])), c))
        return out

    def __repr__(self) -> str:
        return (
            f"LayeredGraph(layers={self.layer_sizes}, edges={self.num_edges}, "
            f"colors={self.num_colors})"
        )


def build_graph(layer_sizes: Sequence[int], edges: Iterable[EdgeRef]) -> LayeredGraph:
    """Validate an edge list and assemble a :class:`LayeredGraph`.

    Raises UnknownNode, SelfLoop, CrossLayerColorMismatch or DuplicateEdge
    when the corresponding invariant fails. Duplicate detection ignores
    endpoint order.
    """
    sizes = [int(s) for s in layer_sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("layer sizes must be positive")
    table = ColorTable(len(sizes))
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    n = int(offsets[-1])

    us, vs, cs = [], [], []
    seen: set[int] = set()
    for (lu, iu), (lv, iv), color in edges:
        for layer, idx in ((lu, iu), (lv, iv)):
            if not 0 <= layer < len(sizes):
                raise UnknownNode(f"layer {layer} not declared")
            if not 0 <= idx < sizes[layer]:
                raise UnknownNode(f"node ({layer}, {idx}) outside layer of size {sizes[layer]}")
        if (lu, iu) == (lv, iv):
            raise SelfLoop(f"self-loop at ({lu}, {iu})")
        expected = table.color_of(lu, lv)
        if color != expected:
            raise CrossLayerColorMismatch(
                f"edge ({lu},{iu})-({lv},{iv}) carries color {color}, "
                f"layer pair requires {expected}"
            )
        fu = int(offsets[lu]) + iu
        fv = int(offsets[lv]) + iv
        if fu > fv:
            fu, fv = fv, fu
        key = fu * n + fv
        if key in seen:
            raise DuplicateEdge(f"duplicate edge ({lu},{iu})-({lv},{iv})")
        seen.add(key)
        us.append(fu)
        vs.append(fv)
        cs.append(color)

    u = np.asarray(us, dtype=np.int64)
    v = np.asarray(vs, dtype=np.int64)
    c = np.asarray(cs, dtype=np.int64)
    if len(u):
        order = np.lexsort((v, u))
        u, v, c = u[order], v[order], c[order]
    return LayeredGraph(sizes, u, v, c)


def graphs_equal(a: LayeredGraph, b: LayeredGraph) -> bool:
    return (
        a.layer_sizes == b.layer_sizes
        and a.num_edges == b.num_edges
        and np.array_equal(a.edges_u, b.edges_u)
        and np.array_equal(a.edges_v, b.edges_v)
        and np.array_equal(a.edge_colors, b.edge_colors)
    )


# ---------------------------------------------------------------------------
# Degree moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColorMoments:
    """First and second degree moments of one color, in two conventions.

    The restricted moments average over nodes of the incident layer(s) only;
    the global moments average over all n nodes, so
    mean_global = (population_restricted / n) * mean_restricted.
    """

    mean_restricted: float
    second_restricted: float
    mean_global: float
    second_global: float
    population_restricted: int

    def ratio_restricted(self) -> float:
        """(<y^2> - <y>) / <y>, the size-biased excess degree; 0 for an empty color."""
        if self.mean_restricted == 0:
            return 0.0
        return (self.second_restricted - self.mean_restricted) / self.mean_restricted


@dataclass(frozen=True)
class MomentSet:
    """Per-color degree moments of a layered graph (or of a model)."""

    per_color: tuple[ColorMoments, ...]
    population_global: int

    @property
    def num_colors(self) -> int:
        return len(self.per_color)


def compute_moments(g: LayeredGraph) -> MomentSet:
    """Measure restricted and global degree moments for every color."""
    deg = g.color_degrees().astype(float)
    out = []
    for c in range(g.num_colors):
        pop = sum(g.layer_sizes[l] for l in g.colors.members(c))
        total = deg[c].sum()
        total_sq = (deg[c] ** 2).sum()
        out.append(
            ColorMoments(
                mean_restricted=total / pop,
                second_restricted=total_sq / pop,
                mean_global=total / g.n,
                second_global=total_sq / g.n,
                population_restricted=pop,
            )
        )
    return MomentSet(per_color=tuple(out), population_global=g.n)


def kappa(g: LayeredGraph, layer: Optional[int] = None) -> float:
    """Mean degree of a random edge endpoint, <k^2>/<k>, for the scoped subgraph.

    ``layer=None`` scopes the whole coupled network; an integer scopes one
    layer as its own network (intra-layer edges only).
    """
    if layer is None:
        deg = g.degrees().astype(float)
    else:
        color = g.colors.intra(layer)
        mask = g.edge_colors == color
        ends = np.concatenate([g.edges_u[mask], g.edges_v[mask]])
        deg = np.bincount(ends, minlength=g.n).astype(float)
    total = deg.sum()
    if total == 0:
        scope = "network" if layer is None else f"layer {layer}"
        raise NoEdgesInScope(f"no edges in scope {scope}")
    return float((deg**2).sum() / total)


# ---------------------------------------------------------------------------
# Connected components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentResult:
    """Connected components of a (possibly edge-masked) graph."""

    component_id: np.ndarray  # per flat node id
    sizes: np.ndarray  # per component
    largest_size: int
    largest_size_by_layer: tuple[int, ...]  # max over components of |comp ∩ layer|


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def giant_component(
    g: LayeredGraph, edge_mask: Optional[np.ndarray] = None
) -> ComponentResult:
    """Connected components under an optional boolean mask over edges."""
    uf = _UnionFind(g.n)
    if edge_mask is None:
        eu, ev = g.edges_u, g.edges_v
    else:
        edge_mask = np.asarray(edge_mask, dtype=bool)
        if edge_mask.shape != (g.num_edges,):
            raise ValueError("edge_mask must have one entry per edge")
        eu, ev = g.edges_u[edge_mask], g.edges_v[edge_mask]
    for a, b in zip(eu.tolist(), ev.tolist()):
        uf.union(a, b)

    roots = np.fromiter((uf.find(i) for i in range(g.n)), dtype=np.int64, count=g.n)
    _, comp_id = np.unique(roots, return_inverse=True)
    sizes = np.bincount(comp_id)
    by_layer = []
    for layer in range(g.num_layers):
        ids = comp_id[g.layer_slice(layer)]
        by_layer.append(int(np.bincount(ids, minlength=len(sizes)).max()))
    return ComponentResult(
        component_id=comp_id,
        sizes=sizes,
        largest_size=int(sizes.max()),
        largest_size_by_layer=tuple(by_layer),
    )


def layer_gcc_size(g: LayeredGraph, layer: int) -> int:
    """Size of the giant component of one layer taken as its own network.

    Returns 0 when the layer has no intra-layer edges.
    """
    color = g.colors.intra(layer)
    if g.edge_count_by_color()[color] == 0:
        return 0
    res = giant_component(g, g.edge_colors == color)
    return res.largest_size_by_layer[layer]


# ---------------------------------------------------------------------------
# Coupling strength
# ---------------------------------------------------------------------------

def classify_coupling(g: LayeredGraph) -> Coupling:
    """Compare kappa of the coupled network against the individual layers.

    Strongly coupled when the whole-network kappa exceeds both layers';
    weakly coupled when it falls strictly between them (the denser layer
    on top). Everything else, including graphs without inter-layer edges
    or with an edgeless layer, is reported as OTHER.
    """
    if g.num_layers != 2:
        raise NotTwoLayers("coupling classification needs exactly two layers")
    if g.edge_count_by_color()[g.colors.inter(0, 1)] == 0:
        return Coupling.OTHER
    try:
        k_total = kappa(g)
        k0 = kappa(g, 0)
        k1 = kappa(g, 1)
    except NoEdgesInScope:
        return Coupling.OTHER
    k_sparse, k_dense = min(k0, k1), max(k0, k1)
    if k_total > k_dense and k_total > k_sparse:
        return Coupling.STRONG
    if k_dense > k_total > k_sparse:
        return Coupling.WEAK
    return Coupling.OTHER
