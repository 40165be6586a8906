"""Randomized invariant checks (hypothesis)."""

import numpy as np
from hypothesis import given, settings, strategies as st

from interepi import (
    ColorTable,
    Transmissibilities,
    build_graph,
    compute_moments,
    dominates,
    epidemic_indicator,
    er_color_moments,
    giant_component,
    kappa,
    thin_moments,
    two_layer_moments,
)
from interepi.errors import NoEdgesInScope
from oracles import brute_force_component_labels


@st.composite
def layered_graphs(draw, max_nodes=16):
    num_layers = draw(st.integers(1, 3))
    sizes = draw(
        st.lists(st.integers(1, max_nodes // num_layers), min_size=num_layers, max_size=num_layers)
    )
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    n = int(offsets[-1])
    table = ColorTable(num_layers)
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.lists(st.sampled_from(all_pairs), unique=True, max_size=min(40, len(all_pairs)))) if all_pairs else []
    triples = []
    for a, b in chosen:
        lu = int(np.searchsorted(offsets, a, side="right") - 1)
        lv = int(np.searchsorted(offsets, b, side="right") - 1)
        triples.append(
            ((lu, a - int(offsets[lu])), (lv, b - int(offsets[lv])), table.color_of(lu, lv))
        )
    return build_graph(sizes, triples), chosen


@settings(max_examples=60, deadline=None)
@given(layered_graphs())
def test_components_match_brute_force(data):
    g, pairs = data
    res = giant_component(g)
    labels = brute_force_component_labels(g.n, pairs)
    mapping = {}
    for mine, theirs in zip(res.component_id.tolist(), labels.tolist()):
        assert mapping.setdefault(mine, theirs) == theirs
    assert len(set(mapping.values())) == len(mapping)
    assert res.largest_size == np.bincount(labels).max()


@settings(max_examples=60, deadline=None)
@given(layered_graphs())
def test_moment_relation_and_kappa_bound(data):
    g, _ = data
    m = compute_moments(g)
    for cm in m.per_color:
        expected = cm.population_restricted / m.population_global * cm.mean_restricted
        assert abs(cm.mean_global - expected) < 1e-12
        assert cm.second_restricted >= cm.mean_restricted**2 - 1e-12  # Jensen
    try:
        k = kappa(g)
    except NoEdgesInScope:
        return
    assert k >= 2 * g.num_edges / g.n - 1e-12


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0, 1), min_size=1, max_size=5),
    st.lists(st.floats(0, 1), min_size=1, max_size=5),
)
def test_dominance_is_a_strict_partial_order(a, b):
    assert not dominates(a, a)  # irreflexive
    if len(a) == len(b):
        assert not (dominates(a, b) and dominates(b, a))  # asymmetric


@st.composite
def moment_pairs(draw):
    # physical moments from a random discrete degree distribution on 0..8
    def color(pop, total):
        weights = np.array(draw(st.lists(st.floats(0.01, 1), min_size=9, max_size=9)))
        ks = np.arange(9, dtype=float)
        p = weights / weights.sum()
        mean = float((ks * p).sum())
        second = float((ks**2 * p).sum())
        frac = pop / total
        from interepi.graph import ColorMoments

        return ColorMoments(mean, second, frac * mean, frac * second, pop)

    n1 = draw(st.integers(50, 500))
    n2 = draw(st.integers(50, 500))
    n = n1 + n2
    m = two_layer_moments(color(n1, n), color(n2, n), color(n, n))
    lo = tuple(draw(st.lists(st.floats(0, 1), min_size=3, max_size=3)))
    bump = tuple(draw(st.lists(st.floats(0, 1), min_size=3, max_size=3)))
    hi = tuple(min(1.0, a + d) for a, d in zip(lo, bump))
    return m, (n1, n2), lo, hi


@settings(max_examples=80, deadline=None)
@given(moment_pairs())
def test_theta_monotone_in_rates(data):
    m, sizes, lo, hi = data
    theta_lo, _ = epidemic_indicator(m, sizes, lo, 5)
    theta_hi, _ = epidemic_indicator(m, sizes, hi, 5)
    assert theta_lo <= theta_hi + 1e-9


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.1, 8.0),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
    st.integers(1, 10),
)
def test_thinning_identities(mean, r1, r2, tau):
    m = two_layer_moments(
        er_color_moments(mean, 100, 200),
        er_color_moments(mean, 100, 200),
        er_color_moments(mean, 200, 200),
    )
    one = thin_moments(m, Transmissibilities((1.0,) * 3, tau))
    for before, after in zip(m.per_color, one.per_color):
        assert abs(after.mean_restricted - before.mean_restricted) < 1e-12
        assert abs(after.second_restricted - before.second_restricted) < 1e-12
    zero = thin_moments(m, Transmissibilities((0.0,) * 3, tau))
    assert all(cm.mean_restricted == 0 and cm.second_restricted == 0 for cm in zero.per_color)
    # composed thinning multiplies on the mean
    once = thin_moments(m, Transmissibilities((r1,) * 3, tau))
    twice = thin_moments(once, Transmissibilities((r2,) * 3, tau))
    direct = thin_moments(m, Transmissibilities((r1 * r2,) * 3, tau))
    for a, b in zip(twice.per_color, direct.per_color):
        assert abs(a.mean_restricted - b.mean_restricted) < 1e-9
