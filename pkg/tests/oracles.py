"""Independent reference implementations the tests check the package against.

Everything here is deliberately written from first principles (dense
reachability, Cardano's cubic, hash-driven bond percolation, exhaustive grid
scans) so that agreement with the package is meaningful.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from interepi import LayeredGraph, build_graph
from interepi.threshold import _grid_values

# ---------------------------------------------------------------------------
# Connected components by O(n^3) transitive closure
# ---------------------------------------------------------------------------

def brute_force_component_labels(n: int, pairs) -> np.ndarray:
    reach = np.eye(n, dtype=bool)
    for a, b in pairs:
        reach[a, b] = reach[b, a] = True
    while True:
        nxt = reach | (reach @ reach)
        if (nxt == reach).all():
            break
        reach = nxt
    labels = np.full(n, -1, dtype=np.int64)
    groups: dict[bytes, int] = {}
    for i in range(n):
        key = reach[i].tobytes()
        labels[i] = groups.setdefault(key, len(groups))
    return labels


# ---------------------------------------------------------------------------
# Cubic spectral radius via Cardano (3x3 only)
# ---------------------------------------------------------------------------

def cardano_radius_3x3(a: np.ndarray) -> float:
    """Largest |root| of det(x I - A) with coefficients from cofactors."""
    a = np.asarray(a, dtype=float)
    c2 = -(a[0, 0] + a[1, 1] + a[2, 2])
    c1 = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    det = (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )
    c0 = -det
    # depressed cubic t^3 + p t + q with x = t - c2/3
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = cmath.sqrt((q / 2.0) ** 2 + (p / 3.0) ** 3)
    u = 0j
    for cand in (-q / 2.0 + disc, -q / 2.0 - disc):
        if abs(cand) > 1e-300:
            u = cand ** (1.0 / 3.0)
            break
    omega = complex(-0.5, math.sqrt(3.0) / 2.0)
    best = 0.0
    for k in range(3):
        uk = u * omega**k
        if abs(uk) > 1e-300:
            x = uk - p / (3.0 * uk) - c2 / 3.0
        else:
            x = complex(-c2 / 3.0, 0.0)
        best = max(best, abs(x))
    return best


# ---------------------------------------------------------------------------
# Hash-driven bond-percolation SIR reference
# ---------------------------------------------------------------------------

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def hash_uniform(draw_seed: int, src: int, dst: int, age: int) -> float:
    """Deterministic uniform in [0, 1) for a directed transmission attempt."""
    key = _splitmix64(draw_seed * 0x5DEECE66D + 11)
    key = _splitmix64(key ^ (src + 0x1000))
    key = _splitmix64(key ^ (dst + 0x2000))
    key = _splitmix64(key ^ (age + 0x3000))
    return key / 2.0**64


def percolation_ever_infected(
    g: LayeredGraph,
    rates,
    tau: int,
    seeds_flat,
    draw_seed: int,
) -> frozenset:
    """Ever-infected set of the fixed-period SIR as directed bond percolation.

    The directed edge u->v is occupied iff any of tau age-indexed uniforms
    falls below the color's rate; the ever-infected set is exactly the nodes
    reachable from the seeds through occupied edges. Using the same uniforms
    for every rate vector makes the set monotone in the rates.
    """
    indptr, adj, adj_color = g.adjacency()
    visited = set(int(s) for s in seeds_flat)
    stack = list(visited)
    while stack:
        v = stack.pop()
        for pos in range(int(indptr[v]), int(indptr[v + 1])):
            w = int(adj[pos])
            if w in visited:
                continue
            rate = rates[int(adj_color[pos])]
            if rate > 0 and any(
                hash_uniform(draw_seed, v, w, age) < rate for age in range(tau)
            ):
                visited.add(w)
                stack.append(w)
    return frozenset(visited)


# ---------------------------------------------------------------------------
# Exhaustive frontier scan
# ---------------------------------------------------------------------------

def exhaustive_frontier(theta_fn, num_colors: int, grid_step: float) -> set:
    """Full grid scan plus pairwise Pareto-minimality filter."""
    vals = _grid_values(grid_step)
    k = len(vals)
    idx_grid = np.stack(
        np.meshgrid(*([np.arange(k)] * num_colors), indexing="ij"), axis=-1
    ).reshape(-1, num_colors)
    epidemic = []
    for idx in idx_grid:
        rates = tuple(vals[i] for i in idx)
        if theta_fn(rates) >= 1.0:
            epidemic.append(idx)
    if not epidemic:
        return set()
    e = np.asarray(epidemic)
    keep = []
    for i in range(len(e)):
        others_le = (e <= e[i]).all(axis=1)
        others_lt = (e < e[i]).any(axis=1)
        if not (others_le & others_lt).any():
            keep.append(tuple(vals[j] for j in e[i]))
    return set(keep)


# ---------------------------------------------------------------------------
# Shared small-graph builders
# ---------------------------------------------------------------------------

def single_layer_graph(n: int, pairs) -> LayeredGraph:
    return build_graph([n], [((0, int(a)), (0, int(b)), 0) for a, b in pairs])


def two_layer_graph(n0: int, n1: int, intra0, intra1, inter) -> LayeredGraph:
    triples = []
    triples += [((0, int(a)), (0, int(b)), 0) for a, b in intra0]
    triples += [((1, int(a)), (1, int(b)), 1) for a, b in intra1]
    triples += [((0, int(a)), (1, int(b)), 2) for a, b in inter]
    return build_graph([n0, n1], triples)


def chain_plus_layer2() -> LayeredGraph:
    """12-node two-layer example whose layer-1 intra degrees are {1,3,2,3,2,1}."""
    intra0 = [(0, 1), (1, 2), (1, 3), (2, 3), (3, 4), (4, 5)]
    intra1 = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 2)]
    inter = [(0, 0), (2, 3), (5, 5)]
    return two_layer_graph(6, 6, intra0, intra1, inter)


def random_layered_graph(rng: np.random.Generator, max_nodes: int = 20) -> LayeredGraph:
    from interepi import ColorTable

    num_layers = int(rng.integers(1, 4))
    sizes = [int(rng.integers(1, max_nodes // num_layers + 1)) for _ in range(num_layers)]
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    n = int(offsets[-1])
    table = ColorTable(num_layers)
    triples = []
    seen = set()
    for _ in range(int(rng.integers(0, max(1, 2 * n)))):
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u == v:
            continue
        a, b = min(u, v), max(u, v)
        if (a, b) in seen:
            continue
        seen.add((a, b))
        lu = int(np.searchsorted(offsets, a, side="right") - 1)
        lv = int(np.searchsorted(offsets, b, side="right") - 1)
        triples.append(
            (
                (lu, a - int(offsets[lu])),
                (lv, b - int(offsets[lv])),
                table.color_of(lu, lv),
            )
        )
    return build_graph(sizes, triples)
