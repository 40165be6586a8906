"""Discrete-time Monte Carlo SIR with one diffusion rate per edge color.

Dynamics are synchronous: at every step each infected node independently
attempts to infect each susceptible neighbor with the rate of the connecting
edge's color. A node infected at step t transmits during steps t .. t+tau-1
and is recovered at t+tau, so each edge out of an infected node sees exactly
tau Bernoulli trials and the per-edge transmissibility is 1 - (1-beta)^tau.

Randomness is counter-based: realization r of cell c under master seed s
draws from the stream (s, c, r), so sweeps are reproducible bit-for-bit no
matter how cells are scheduled or parallelized.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NotTwoLayers, ZeroGcc
from .graph import LayeredGraph, giant_component, layer_gcc_size


@dataclass(frozen=True)
class SeedPolicy:
    """Where the initially infected nodes come from.

    kind "uniform": ``count`` nodes uniform over the whole network;
    kind "per_layer": ``per_layer[i]`` nodes uniform inside layer i;
    kind "explicit": exactly the given (layer, index) nodes.
    """

    kind: str = "uniform"
    count: int = 1
    per_layer: tuple[int, ...] = ()
    nodes: tuple[tuple[int, int], ...] = ()

    @classmethod
    def uniform(cls, count: int = 1) -> "SeedPolicy":
        return cls(kind="uniform", count=count)

    @classmethod
    def one_per_layer(cls, num_layers: int) -> "SeedPolicy":
        return cls(kind="per_layer", per_layer=(1,) * num_layers)

    @classmethod
    def in_layers(cls, counts: Sequence[int]) -> "SeedPolicy":
        return cls(kind="per_layer", per_layer=tuple(int(c) for c in counts))

    @classmethod
    def explicit(cls, nodes: Sequence[tuple[int, int]]) -> "SeedPolicy":
        return cls(kind="explicit", nodes=tuple((int(l), int(i)) for l, i in nodes))


@dataclass(frozen=True)
class SirConfig:
    rates: tuple[float, ...]
    tau: int = 5
    seeds: SeedPolicy = field(default_factory=SeedPolicy.uniform)
    max_steps: Optional[int] = None
    realizations: int = 100
    master_seed: int = 0

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be at least 1")
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError("rates must lie in [0, 1]")


@dataclass(frozen=True)
class SimSummary:
    """One SIR realization: per-step counts and the final ever-infected sets.

    Row s of the count arrays is the state at step s (step 0 holds the
    seeds); the infected series ends at 0 unless the run was step-capped.
    ``ever_infected[l]`` lists local indices within layer l.
    """

    per_step_infected: np.ndarray  # (steps+1, L) currently infected
    per_step_infected_total: np.ndarray  # (steps+1,)
    per_step_ever: np.ndarray  # (steps+1, L) cumulative ever-infected
    per_step_ever_total: np.ndarray  # (steps+1,)
    ever_infected: tuple[np.ndarray, ...]
    steps_run: int

    @property
    def ever_counts(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.ever_infected)

    @property
    def ever_total(self) -> int:
        return sum(self.ever_counts)


def _stream(master_seed: int, cell_index: int, realization_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(cell_index, realization_index))
    )


def _choose_seeds(g: LayeredGraph, policy: SeedPolicy, rng: np.random.Generator) -> np.ndarray:
    if policy.kind == "uniform":
        if not 1 <= policy.count <= g.n:
            raise ValueError(f"seed count {policy.count} outside [1, {g.n}]")
        return np.sort(rng.choice(g.n, size=policy.count, replace=False))
    if policy.kind == "per_layer":
        if len(policy.per_layer) != g.num_layers:
            raise ValueError("one seed count per layer required")
        picks = []
        for layer, count in enumerate(policy.per_layer):
            if count == 0:
                continue
            size = g.layer_sizes[layer]
            if not 0 <= count <= size:
                raise ValueError(f"layer {layer} cannot seed {count} of {size}")
            local = rng.choice(size, size=count, replace=False)
            picks.append(local + int(g.offsets[layer]))
        if not picks:
            raise ValueError("seed policy selects no nodes")
        return np.sort(np.concatenate(picks))
    if policy.kind == "explicit":
        if not policy.nodes:
            raise ValueError("explicit seed policy without nodes")
        flat = np.asarray([g.flat(l, i) for l, i in policy.nodes], dtype=np.int64)
        if len(np.unique(flat)) != len(flat):
            raise ValueError("explicit seeds must be distinct")
        return np.sort(flat)
    raise ValueError(f"unknown seed policy kind {policy.kind!r}")


_EMPTY = np.empty(0, dtype=np.int64)


def run_sir(
    g: LayeredGraph,
    cfg: SirConfig,
    realization_index: int = 0,
    cell_index: int = 0,
) -> SimSummary:
    """One realization, fully determined by (graph, config, indices)."""
    if len(cfg.rates) != g.num_colors:
        raise ValueError(
            f"{g.num_colors} colors need {g.num_colors} rates, got {len(cfg.rates)}"
        )
    rng = _stream(cfg.master_seed, cell_index, realization_index)
    indptr, adj, adj_color = g.adjacency()
    rate = np.asarray(cfg.rates, dtype=float)
    layer_of = g.node_layer
    num_layers = g.num_layers

    state = np.zeros(g.n, dtype=np.int8)  # 0=S 1=I 2=R
    timer = np.zeros(g.n, dtype=np.int32)
    seeds = _choose_seeds(g, cfg.seeds, rng)
    state[seeds] = 1
    timer[seeds] = cfg.tau
    active = seeds.copy()

    cur = np.bincount(layer_of[active], minlength=num_layers)
    ever = cur
    ever_total = int(cur.sum())
    infected_steps = [cur]
    ever_steps = [ever]

    steps = 0
    while active.size and (cfg.max_steps is None or steps < cfg.max_steps):
        if ever_total == g.n:
            break  # no susceptibles anywhere: timers decay deterministically below
        if active.size == 1:
            lo, hi = indptr[active[0]], indptr[active[0] + 1]
            targets = adj[lo:hi]
            pcol = adj_color[lo:hi]
        elif active.size <= 4:
            spans = [slice(indptr[a], indptr[a + 1]) for a in active.tolist()]
            targets = np.concatenate([adj[s] for s in spans])
            pcol = np.concatenate([adj_color[s] for s in spans])
        else:
            counts = indptr[active + 1] - indptr[active]
            total = int(counts.sum())
            starts = np.repeat(indptr[active], counts)
            pos = starts + (np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts))
            targets = adj[pos]
            pcol = adj_color[pos]
        new = _EMPTY
        if targets.size:
            hits = targets[
                (rng.random(targets.size) < rate[pcol]) & (state[targets] == 0)
            ]
            if hits.size:
                new = np.unique(hits)
        timer[active] -= 1
        still = timer[active] > 0
        done = active[~still]
        survivors = active[still]
        if done.size:
            state[done] = 2
            cur = cur - np.bincount(layer_of[done], minlength=num_layers)
        if new.size:
            state[new] = 1
            timer[new] = cfg.tau
            gained = np.bincount(layer_of[new], minlength=num_layers)
            cur = cur + gained
            ever = ever + gained
            ever_total += new.size
            active = np.concatenate([survivors, new])
        else:
            active = survivors
        steps += 1
        infected_steps.append(cur)
        ever_steps.append(ever)

    if active.size and ever_total == g.n and (
        cfg.max_steps is None or steps < cfg.max_steps
    ):
        # fully saturated: play out the remaining recovery steps without draws
        act_timer = timer[active].copy()
        act_layer = layer_of[active]
        for k in range(1, int(act_timer.max()) + 1):
            if cfg.max_steps is not None and steps >= cfg.max_steps:
                break
            alive = act_timer > k
            cur = np.bincount(act_layer[alive], minlength=num_layers)
            steps += 1
            infected_steps.append(cur)
            ever_steps.append(ever)
        state[active] = 2

    per_step = np.vstack(infected_steps)
    per_ever = np.vstack(ever_steps)
    flat_ever = np.flatnonzero(state != 0)
    per_layer_sets = tuple(
        (flat_ever[layer_of[flat_ever] == l] - int(g.offsets[l])).astype(np.int64)
        for l in range(num_layers)
    )
    return SimSummary(
        per_step_infected=per_step,
        per_step_infected_total=per_step.sum(axis=1),
        per_step_ever=per_ever,
        per_step_ever_total=per_ever.sum(axis=1),
        ever_infected=per_layer_sets,
        steps_run=steps,
    )


# ---------------------------------------------------------------------------
# Infection density
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityResult:
    """Ever-infected counts divided by structural giant-component sizes.

    Ratios can exceed 1 when infection covers nodes outside the gcc; they
    are reported as-is with ``exceeds_gcc`` set.
    """

    per_layer: tuple[float, ...]
    whole: float
    exceeds_gcc: bool


def structural_gcc_sizes(g: LayeredGraph) -> tuple[int, tuple[int, ...]]:
    """Gcc size of the full coupled graph and of each layer on its own."""
    whole = giant_component(g).largest_size
    per_layer = tuple(layer_gcc_size(g, l) for l in range(g.num_layers))
    return whole, per_layer


def infection_density(
    summary: SimSummary,
    g: LayeredGraph,
    gcc_sizes: Optional[tuple[int, tuple[int, ...]]] = None,
) -> DensityResult:
    whole_gcc, layer_gcc = gcc_sizes if gcc_sizes is not None else structural_gcc_sizes(g)
    per_layer = []
    for layer, count in enumerate(summary.ever_counts):
        if layer_gcc[layer] == 0:
            raise ZeroGcc(f"layer {layer} has no edges; density undefined")
        per_layer.append(count / layer_gcc[layer])
    whole = summary.ever_total / whole_gcc
    return DensityResult(
        per_layer=tuple(per_layer),
        whole=whole,
        exceeds_gcc=whole > 1.0 or any(d > 1.0 for d in per_layer),
    )


def _two_layer_rates(g: LayeredGraph, beta: float, alpha: float) -> tuple[float, ...]:
    if g.num_layers != 2:
        raise NotTwoLayers("beta/alpha convention requires two layers")
    return (beta, beta, alpha)


def mean_cell_densities(
    g: LayeredGraph,
    cfg: SirConfig,
    cell_index: int,
    gcc_sizes: tuple[int, tuple[int, ...]],
) -> tuple[np.ndarray, float]:
    """Mean per-layer and whole-network densities over cfg.realizations runs."""
    acc_layers = np.zeros(g.num_layers)
    acc_whole = 0.0
    for r in range(cfg.realizations):
        summary = run_sir(g, cfg, realization_index=r, cell_index=cell_index)
        dens = infection_density(summary, g, gcc_sizes)
        acc_layers += np.asarray(dens.per_layer)
        acc_whole += dens.whole
    return acc_layers / cfg.realizations, acc_whole / cfg.realizations


# ---------------------------------------------------------------------------
# Heat-map sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepResult:
    betas: tuple[float, ...]
    alphas: tuple[float, ...]
    density_per_layer: np.ndarray  # (len(betas), len(alphas), L)
    density_whole: np.ndarray  # (len(betas), len(alphas))


def _sweep_cell(task):
    g, cfg, cell_index, beta, alpha, gcc_sizes = task
    cell_cfg = SirConfig(
        rates=_two_layer_rates(g, beta, alpha),
        tau=cfg.tau,
        seeds=cfg.seeds,
        max_steps=cfg.max_steps,
        realizations=cfg.realizations,
        master_seed=cfg.master_seed,
    )
    layers, whole = mean_cell_densities(g, cell_cfg, cell_index, gcc_sizes)
    return cell_index, layers, whole


def sweep_heatmap(
    g: LayeredGraph,
    beta_grid: Sequence[float],
    alpha_grid: Sequence[float],
    cfg: SirConfig,
    workers: int = 1,
) -> SweepResult:
    """Mean infection densities on a (beta, alpha) grid, beta shared by both
    intra colors and alpha on the interconnection.

    Cell (i, j) uses cell index i * len(alpha_grid) + j for seed derivation,
    so the result is independent of scheduling and of ``workers``.
    """
    if g.num_layers != 2:
        raise NotTwoLayers("sweep requires two layers")
    betas = tuple(float(b) for b in beta_grid)
    alphas = tuple(float(a) for a in alpha_grid)
    if any(not 0.0 <= b <= 1.0 for b in betas + alphas):
        raise ValueError("grid rates must lie in [0, 1]")
    gcc_sizes = structural_gcc_sizes(g)
    tasks = [
        (g, cfg, i * len(alphas) + j, beta, alpha, gcc_sizes)
        for i, beta in enumerate(betas)
        for j, alpha in enumerate(alphas)
    ]
    density_layers = np.zeros((len(betas), len(alphas), g.num_layers))
    density_whole = np.zeros((len(betas), len(alphas)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, tasks))
    else:
        results = [_sweep_cell(t) for t in tasks]
    for cell_index, layers, whole in results:
        i, j = divmod(cell_index, len(alphas))
        density_layers[i, j] = layers
        density_whole[i, j] = whole
    return SweepResult(
        betas=betas,
        alphas=alphas,
        density_per_layer=density_layers,
        density_whole=density_whole,
    )


# ---------------------------------------------------------------------------
# Dynamics time series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicsResult:
    """Mean infected-count trajectories for a list of (beta, alpha) settings.

    ``infected[k]`` has shape (T_k+1, L+1): per-layer columns then the whole
    network, averaged over realizations (shorter runs padded with their final
    state). ``cumulative`` is the ever-infected counterpart.
    """

    settings: tuple[tuple[float, float], ...]
    infected: tuple[np.ndarray, ...]
    cumulative: tuple[np.ndarray, ...]


def dynamics(
    g: LayeredGraph,
    settings: Sequence[tuple[float, float]],
    cfg: SirConfig,
) -> DynamicsResult:
    if g.num_layers != 2:
        raise NotTwoLayers("dynamics convention requires two layers")
    infected_out = []
    ever_out = []
    for s_idx, (beta, alpha) in enumerate(settings):
        run_cfg = SirConfig(
            rates=_two_layer_rates(g, beta, alpha),
            tau=cfg.tau,
            seeds=cfg.seeds,
            max_steps=cfg.max_steps,
            realizations=cfg.realizations,
            master_seed=cfg.master_seed,
        )
        runs = [
            run_sir(g, run_cfg, realization_index=r, cell_index=s_idx)
            for r in range(cfg.realizations)
        ]
        horizon = max(r.per_step_infected.shape[0] for r in runs)
        acc_inf = np.zeros((horizon, g.num_layers + 1))
        acc_ever = np.zeros((horizon, g.num_layers + 1))
        for run in runs:
            t = run.per_step_infected.shape[0]
            acc_inf[:t, : g.num_layers] += run.per_step_infected
            acc_inf[:t, -1] += run.per_step_infected_total
            # infected counts after extinction stay 0 (no padding needed);
            # ever-infected counts persist at their final value
            acc_ever[:t, : g.num_layers] += run.per_step_ever
            acc_ever[:t, -1] += run.per_step_ever_total
            if t < horizon:
                acc_ever[t:, : g.num_layers] += run.per_step_ever[-1]
                acc_ever[t:, -1] += run.per_step_ever_total[-1]
        infected_out.append(acc_inf / cfg.realizations)
        ever_out.append(acc_ever / cfg.realizations)
    return DynamicsResult(
        settings=tuple((float(b), float(a)) for b, a in settings),
        infected=tuple(infected_out),
        cumulative=tuple(ever_out),
    )
