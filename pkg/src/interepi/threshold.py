"""Analytic epidemic machinery for interdependent networks.

The chain is: per-color diffusion rates -> per-color transmissibilities
R = 1 - (1-beta)^tau -> percolation-thinned degree moments -> a non-negative
Jacobian whose Perron root theta decides whether the diffusion network grows
a giant component (theta >= 1). On top of that sits the multidimensional
threshold: the Pareto-minimal set of rate tuples on the epidemic boundary,
found by a monotone grid search.

Two Jacobian routes are provided. ``jacobian_closed_form`` is the two-layer
matrix built from per-layer degree moments under the assumption that colored
degrees are independent; ``jacobian_empirical`` instead measures the colored
degree cross-moments on a concrete graph (any layer count) and so quantifies
the gap that the independence assumption opens.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyColor,
    ExponentSingularity,
    KappaAtMostOne,
    LengthMismatch,
    NonConvergence,
    NotTwoLayers,
)
from .generate import PowerLawSpec
from .graph import ColorMoments, LayeredGraph, MomentSet

RateTuple = tuple[float, ...]


class NetworkState(Enum):
    INFECTION_FREE = "infection-free"
    MIXED = "mixed"
    EPIDEMIC = "epidemic"


# ---------------------------------------------------------------------------
# Transmissibility and the single-layer threshold
# ---------------------------------------------------------------------------

def transmissibility(beta: float, tau: int) -> float:
    """Probability an infected node transmits across an edge before recovery:
    1 - (1 - beta)^tau."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"rate {beta} outside [0, 1]")
    if tau < 1:
        raise DomainError("tau must be at least 1")
    return 1.0 - (1.0 - beta) ** tau


@dataclass(frozen=True)
class Transmissibilities:
    """Per-color transmissibilities for a fixed recovery time."""

    values: tuple[float, ...]
    tau: int

    @classmethod
    def from_rates(cls, rates: Sequence[float], tau: int) -> "Transmissibilities":
        return cls(tuple(transmissibility(b, tau) for b in rates), tau)


class ThresholdResult(NamedTuple):
    beta: float
    saturated: bool  # True when every rate up to 1 is needed (kappa <= 2)


def single_layer_threshold(kappa: float, tau: int) -> ThresholdResult:
    """Critical rate 1 - [1 - (kappa-1)^-1]^(1/tau) of a single network.

    Undefined for kappa <= 1. For 1 < kappa <= 2 the bracket is non-positive,
    so the threshold saturates at 1.0 and the flag is set.
    """
    if tau < 1:
        raise DomainError("tau must be at least 1")
    if kappa <= 1.0:
        raise KappaAtMostOne(f"threshold undefined for kappa={kappa}")
    if kappa <= 2.0:
        return ThresholdResult(1.0, True)
    bracket = 1.0 - 1.0 / (kappa - 1.0)
    return ThresholdResult(1.0 - bracket ** (1.0 / tau), False)


# ---------------------------------------------------------------------------
# Model moments
# ---------------------------------------------------------------------------

def er_moment_ratio(mean: float) -> float:
    """(<y^2> - <y>) / <y> for a Poisson degree distribution equals its mean."""
    if mean < 0:
        raise DomainError("mean degree must be non-negative")
    return mean


def powerlaw_moments(spec: PowerLawSpec, allow_limits: bool = False) -> tuple[float, float]:
    """Continuous power-law mean and moment ratio (<y^2>-<y>)/<y>.

    Moments are integrals of y^m * c * y^-gamma over [y_min, y_max]. The
    exponents vanish at gamma = 2 (mean) and gamma = 3 (second moment);
    those points raise ExponentSingularity unless ``allow_limits`` enables
    the logarithmic antiderivative.
    """
    if spec.y_max == spec.y_min:
        # zero-width support: point mass at y_min
        return float(spec.y_min), float(spec.y_min - 1)

    c = spec.normalization
    a, b = float(spec.y_min), float(spec.y_max)

    def raw_moment(order: int) -> float:
        e = order - spec.gamma + 1.0
        if abs(e) < 1e-12:
            if not allow_limits:
                raise ExponentSingularity(
                    f"moment of order {order} singular at gamma={spec.gamma}"
                )
            return c * math.log(b / a)
        return c * (b**e - a**e) / e

    mean = raw_moment(1)
    second = raw_moment(2)
    return mean, (second - mean) / mean


def er_color_moments(mean: float, population: int, total: int) -> ColorMoments:
    """ColorMoments of a Poisson-degree color restricted to ``population`` nodes."""
    second = mean * (mean + 1.0)
    frac = population / total
    return ColorMoments(
        mean_restricted=mean,
        second_restricted=second,
        mean_global=frac * mean,
        second_global=frac * second,
        population_restricted=population,
    )


def powerlaw_color_moments(spec: PowerLawSpec, population: int, total: int) -> ColorMoments:
    mean, ratio = powerlaw_moments(spec)
    second = (ratio + 1.0) * mean
    frac = population / total
    return ColorMoments(
        mean_restricted=mean,
        second_restricted=second,
        mean_global=frac * mean,
        second_global=frac * second,
        population_restricted=population,
    )


def two_layer_moments(
    intra0: ColorMoments, intra1: ColorMoments, inter: ColorMoments
) -> MomentSet:
    n = intra0.population_restricted + intra1.population_restricted
    return MomentSet(per_color=(intra0, intra1, inter), population_global=n)


# ---------------------------------------------------------------------------
# Percolation thinning
# ---------------------------------------------------------------------------

def thin_moments(m: MomentSet, t: Transmissibilities) -> MomentSet:
    """Moments of the degree distributions after keeping each color-c edge
    with probability R_c: <y'> = R<y>, <y'^2> = R^2(<y^2> - <y>) + R<y>."""
    if len(t.values) != m.num_colors:
        raise LengthMismatch("one transmissibility per color required")
    thinned = []
    for cm, r in zip(m.per_color, t.values):
        thinned.append(
            ColorMoments(
                mean_restricted=r * cm.mean_restricted,
                second_restricted=r * r * (cm.second_restricted - cm.mean_restricted)
                + r * cm.mean_restricted,
                mean_global=r * cm.mean_global,
                second_global=r * r * (cm.second_global - cm.mean_global)
                + r * cm.mean_global,
                population_restricted=cm.population_restricted,
            )
        )
    return MomentSet(per_color=tuple(thinned), population_global=m.population_global)


# ---------------------------------------------------------------------------
# Jacobians
# ---------------------------------------------------------------------------

def jacobian_closed_form(
    m: MomentSet, layer_sizes: Sequence[int], t: Transmissibilities
) -> np.ndarray:
    """Two-layer thinned Jacobian from per-layer moments.

    Column c carries the factor (pop_c / n) * R_c (the interconnection color
    has pop = n, so its factor is R alone); the diagonal entry uses the moment
    ratio (<y^2>-<y>)/<y> of the column's color, off-diagonal entries its
    mean. Colors with zero mean degree cannot propagate, so their row and
    column are dropped (zeroed).
    """
    if len(layer_sizes) != 2 or m.num_colors != 3:
        raise NotTwoLayers("closed-form Jacobian requires two layers / three colors")
    if len(t.values) != 3:
        raise LengthMismatch("need three transmissibilities")
    n = sum(layer_sizes)
    col_diag = np.zeros(3)
    col_off = np.zeros(3)
    for c, cm in enumerate(m.per_color):
        factor = (cm.population_restricted / n) * t.values[c]
        col_off[c] = factor * cm.mean_restricted
        col_diag[c] = factor * cm.ratio_restricted()
    jac = np.tile(col_off, (3, 1))
    np.fill_diagonal(jac, col_diag)
    for c, cm in enumerate(m.per_color):
        if cm.mean_restricted == 0:
            jac[c, :] = 0.0
            jac[:, c] = 0.0
    return jac


@dataclass(frozen=True)
class ColorCrossMoments:
    """Empirical colored-degree moments over all n nodes of a graph."""

    mean: np.ndarray  # <x_i>, shape (C,)
    cross: np.ndarray  # <x_i x_j>, shape (C, C)
    factorial: np.ndarray  # <x_i^2 - x_i>, shape (C,)


def colored_cross_moments(g: LayeredGraph) -> ColorCrossMoments:
    x = g.color_degrees().astype(float)
    n = g.n
    return ColorCrossMoments(
        mean=x.sum(axis=1) / n,
        cross=(x @ x.T) / n,
        factorial=((x * x - x).sum(axis=1)) / n,
    )


def jacobian_from_cross_moments(
    stats: ColorCrossMoments, t: Transmissibilities
) -> np.ndarray:
    """J = T E(1) with E measured rather than assumed independent: the entry
    (i, j) is R_j <x_i x_j> / <x_i> off the diagonal and R_i <x_i^2 - x_i> / <x_i>
    on it (the 1/R_i of T cancels one thinning factor). Edgeless colors are
    dropped (zero row and column)."""
    c = len(stats.mean)
    if len(t.values) != c:
        raise LengthMismatch("one transmissibility per color required")
    r = np.asarray(t.values)
    jac = np.zeros((c, c))
    for i in range(c):
        if stats.mean[i] == 0:
            continue
        for j in range(c):
            if i == j:
                jac[i, i] = r[i] * stats.factorial[i] / stats.mean[i]
            else:
                jac[i, j] = r[j] * stats.cross[i, j] / stats.mean[i]
    for i in range(c):
        if stats.mean[i] == 0:
            jac[i, :] = 0.0
            jac[:, i] = 0.0
    return jac


def jacobian_empirical(g: LayeredGraph, t: Transmissibilities) -> np.ndarray:
    """Measured-cross-moment Jacobian of a concrete graph (any layer count).

    Raises EmptyColor when no color carries an edge at all.
    """
    stats = colored_cross_moments(g)
    if not stats.mean.any():
        raise EmptyColor("graph has no edges on any color")
    return jacobian_from_cross_moments(stats, t)


# ---------------------------------------------------------------------------
# Perron root
# ---------------------------------------------------------------------------

def _char_poly_radius(a: np.ndarray) -> float:
    # Faddeev-LeVerrier coefficients of det(lambda I - A), roots via numpy
    n = a.shape[0]
    coeffs = [1.0]
    m = np.eye(n)
    for k in range(1, n + 1):
        am = a @ m
        ck = -np.trace(am) / k
        coeffs.append(ck)
        m = am + ck * np.eye(n)
    roots = np.roots(coeffs)
    return float(np.max(np.abs(roots)))


def spectral_radius(jac: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Perron root of a non-negative matrix by shifted power iteration.

    The +I shift makes the dominant eigenvalue of the iterated matrix strictly
    largest in modulus for any non-negative input; the residual test
    ||Bx - lambda x|| <= tol decides convergence. On a stall the root is
    recovered from the characteristic polynomial (only for C <= 4).
    """
    a = np.asarray(jac, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.isfinite(a).all():
        raise ValueError("matrix must be finite")
    if (a < 0).any():
        raise ValueError("matrix must be non-negative")
    c = a.shape[0]
    if c == 1:
        return float(a[0, 0])
    if not a.any():
        return 0.0
    if not np.tril(a, -1).any() or not np.triu(a, 1).any():
        # triangular: the spectrum is the diagonal, exactly
        return float(np.diagonal(a).max())

    b = a + np.eye(c)
    x = np.full(c, 1.0 / math.sqrt(c))
    z = b @ x
    for _ in range(max_iter):
        lam = float(x @ z)
        if np.linalg.norm(z - lam * x) <= tol:
            return lam - 1.0
        x = z / np.linalg.norm(z)
        z = b @ x
    if c <= 4:
        return _char_poly_radius(a)
    raise NonConvergence(f"power iteration stalled after {max_iter} iterations")


def epidemic_indicator(
    m: MomentSet,
    layer_sizes: Sequence[int],
    rates: Sequence[float],
    tau: int,
) -> tuple[float, bool]:
    """theta of the closed-form Jacobian at these rates, and theta >= 1."""
    t = Transmissibilities.from_rates(rates, tau)
    theta = spectral_radius(jacobian_closed_form(m, layer_sizes, t))
    return theta, theta >= 1.0


# ---------------------------------------------------------------------------
# Dominance and the multidimensional threshold
# ---------------------------------------------------------------------------

def dominates(t1: Sequence[float], t2: Sequence[float]) -> bool:
    """t1 dominates t2 when it is componentwise <= with at least one strict."""
    if len(t1) != len(t2):
        raise LengthMismatch(f"tuple lengths {len(t1)} != {len(t2)}")
    return all(a <= b for a, b in zip(t1, t2)) and any(a < b for a, b in zip(t1, t2))


@dataclass(frozen=True)
class FrontierSet:
    """Approximate multidimensional epidemic threshold on a rate grid.

    ``points`` is a Pareto antichain of full-length rate tuples with
    theta >= 1; reducing any searched component of a member by one grid step
    drops theta below 1 or leaves [0, 1]^C. Empty when no grid tuple is
    epidemic.
    """

    points: tuple[RateTuple, ...]
    thetas: tuple[float, ...]
    grid_step: float
    num_colors: int

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _grid_values(step: float) -> list[float]:
    k = int(math.floor(1.0 / step + 1e-9))
    vals = [round(i * step, 12) for i in range(k + 1)]
    if vals[-1] < 1.0 - 1e-12:
        vals.append(1.0)
    return vals


def _tie_groups(num_colors: int, num_layers: int, tie_intra: bool) -> tuple[tuple[int, ...], ...]:
    if not tie_intra:
        return tuple((c,) for c in range(num_colors))
    intra = tuple(range(num_layers))
    inter = tuple((c,) for c in range(num_layers, num_colors))
    return (intra,) + inter


def _frontier_search(
    theta_fn: Callable[[RateTuple], float],
    num_colors: int,
    grid_step: float,
    groups: tuple[tuple[int, ...], ...],
    refine_tol: Optional[float],
) -> FrontierSet:
    """Monotone grid search for the Pareto-minimal epidemic tuples.

    For every grid point of the leading group axes, the crossing along the
    last axis is located by binary search (theta is non-decreasing in every
    rate, so each line crosses at most once). A crossing is kept iff no
    immediate predecessor prefix crosses at the same height; by monotonicity
    that check is equivalent to full pairwise non-domination.
    """
    vals = _grid_values(grid_step)
    top = len(vals) - 1
    dims = len(groups)

    def rates_at(prefix: tuple[int, ...], last: int) -> RateTuple:
        full = [0.0] * num_colors
        for axis, idx in enumerate((*prefix, last)):
            for color in groups[axis]:
                full[color] = vals[idx]
        return tuple(full)

    candidates: dict[tuple[int, ...], tuple[int, float]] = {}
    for prefix in itertools.product(range(top + 1), repeat=dims - 1):
        theta_hi = theta_fn(rates_at(prefix, top))
        if theta_hi < 1.0:
            continue
        theta_lo = theta_fn(rates_at(prefix, 0))
        if theta_lo >= 1.0:
            candidates[prefix] = (0, theta_lo)
            continue
        lo, hi = 0, top  # theta(lo) < 1 <= theta(hi)
        theta_at_hi = theta_hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            theta_mid = theta_fn(rates_at(prefix, mid))
            if theta_mid >= 1.0:
                hi, theta_at_hi = mid, theta_mid
            else:
                lo = mid
        candidates[prefix] = (hi, theta_at_hi)

    kept: list[tuple[tuple[int, ...], int, float]] = []
    for prefix, (cross, theta) in candidates.items():
        dominated = False
        for axis in range(dims - 1):
            if prefix[axis] == 0:
                continue
            pred = prefix[:axis] + (prefix[axis] - 1,) + prefix[axis + 1:]
            hit = candidates.get(pred)
            if hit is not None and hit[0] == cross:
                dominated = True
                break
        if not dominated:
            kept.append((prefix, cross, theta))

    if refine_tol:
        refined: list[tuple[tuple[int, ...], float, float]] = []
        for prefix, cross, theta in kept:
            if cross == 0:
                refined.append((prefix, vals[0], theta))
                continue
            lo_v, hi_v = vals[cross - 1], vals[cross]
            while hi_v - lo_v > refine_tol:
                mid_v = 0.5 * (lo_v + hi_v)
                rates = _rates_at_value(prefix, mid_v, groups, vals, num_colors)
                if theta_fn(rates) >= 1.0:
                    hi_v = mid_v
                else:
                    lo_v = mid_v
            rates = _rates_at_value(prefix, hi_v, groups, vals, num_colors)
            refined.append((prefix, hi_v, theta_fn(rates)))
        # re-filter: predecessor crossings within refine_tol count as equal
        final = []
        values = {p: b for p, b, _ in refined}
        for prefix, b, theta in refined:
            dominated = False
            for axis in range(dims - 1):
                if prefix[axis] == 0:
                    continue
                pred = prefix[:axis] + (prefix[axis] - 1,) + prefix[axis + 1:]
                if pred in values and values[pred] <= b + refine_tol:
                    dominated = True
                    break
            if not dominated:
                final.append(
                    (_rates_at_value(prefix, b, groups, vals, num_colors), theta)
                )
        points = final
    else:
        points = [(rates_at(prefix, cross), theta) for prefix, cross, theta in kept]

    points.sort(key=lambda item: item[0])
    return FrontierSet(
        points=tuple(p for p, _ in points),
        thetas=tuple(t for _, t in points),
        grid_step=grid_step,
        num_colors=num_colors,
    )


def _rates_at_value(
    prefix: tuple[int, ...],
    last_value: float,
    groups: tuple[tuple[int, ...], ...],
    vals: list[float],
    num_colors: int,
) -> RateTuple:
    full = [0.0] * num_colors
    for axis, idx in enumerate(prefix):
        for color in groups[axis]:
            full[color] = vals[idx]
    for color in groups[-1]:
        full[color] = last_value
    return tuple(full)


def multi_threshold(
    m: MomentSet,
    layer_sizes: Sequence[int],
    tau: int,
    grid_step: float = 0.01,
    *,
    tie_intra: bool = False,
    refine_tol: Optional[float] = None,
) -> FrontierSet:
    """Multidimensional epidemic threshold of the closed-form model.

    ``tie_intra`` searches with all intra-layer rates equal (the usual
    beta / alpha convention), which reduces the grid dimension by one;
    the returned tuples are always full length. ``refine_tol`` bisects each
    frontier point along the searched axis down to the given resolution.
    """
    if not 0.0 < grid_step <= 0.5:
        raise DomainError("grid step must be in (0, 0.5]")
    groups = _tie_groups(m.num_colors, len(layer_sizes), tie_intra)

    def theta_fn(rates: RateTuple) -> float:
        t = Transmissibilities.from_rates(rates, tau)
        return spectral_radius(jacobian_closed_form(m, layer_sizes, t))

    return _frontier_search(theta_fn, m.num_colors, grid_step, groups, refine_tol)


def multi_threshold_empirical(
    g: LayeredGraph,
    tau: int,
    grid_step: float = 0.01,
    *,
    tie_intra: bool = False,
    refine_tol: Optional[float] = None,
) -> FrontierSet:
    """Frontier of the measured-cross-moment Jacobian (any layer count)."""
    if not 0.0 < grid_step <= 0.5:
        raise DomainError("grid step must be in (0, 0.5]")
    stats = colored_cross_moments(g)
    if not stats.mean.any():
        raise EmptyColor("graph has no edges on any color")
    groups = _tie_groups(g.num_colors, g.num_layers, tie_intra)

    def theta_fn(rates: RateTuple) -> float:
        t = Transmissibilities.from_rates(rates, tau)
        return spectral_radius(jacobian_from_cross_moments(stats, t))

    return _frontier_search(theta_fn, g.num_colors, grid_step, groups, refine_tol)


# ---------------------------------------------------------------------------
# Three-state classification
# ---------------------------------------------------------------------------

def classify_state(
    m: MomentSet,
    layer_sizes: Sequence[int],
    rates: Sequence[float],
    tau: int,
) -> NetworkState:
    """Infection-free / mixed / epidemic at the given rates.

    A layer is epidemic when its own percolated branching factor
    R_c (<y^2>-<y>)/<y> reaches 1; the whole network when theta does.
    Epidemic requires both; infection-free requires neither; everything
    in between is mixed.
    """
    if len(layer_sizes) != 2 or m.num_colors != 3:
        raise NotTwoLayers("state classification requires two layers")
    t = Transmissibilities.from_rates(rates, tau)
    layer_epi = [
        t.values[c] * m.per_color[c].ratio_restricted() >= 1.0 for c in (0, 1)
    ]
    _, whole = epidemic_indicator(m, layer_sizes, rates, tau)
    if whole and all(layer_epi):
        return NetworkState.EPIDEMIC
    if not whole and not any(layer_epi):
        return NetworkState.INFECTION_FREE
    return NetworkState.MIXED
