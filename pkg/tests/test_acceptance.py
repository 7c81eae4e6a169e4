#!/usr/bin/env python3
"""
Pruebas de aceptación de extremo a extremo: contraejemplo no arbóreo, cotas
n-ádicas, reducción de ciclos, descomposición en caminos, ejemplo de
semicontinuidad, cotas de distancia, optimizador frente al oráculo y
partición temporal.
"""

import sys
import os
import math

import numpy as np
import pytest

# Agregar los directorios src y config al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'config'))

from costs import branched, eval_tau, step
from distance import DistanceBudget, dtau_bounds, refinement_profile
from errors import NonConcaveCost
from hierarchy import nadic_cost_bound, nadic_graph, nadic_total_bound
from measures import dirac, uniform_grid, wasserstein1
from optimizer import OptimizerConfig, brute_force_oracle, optimize
from patterns import decompose_paths, flux_of_plan, pattern_cost
from ramiflow_cli import lsc_plans, nontree_graphs
from strategies import (random_acyclic_graph, random_graph_with_cycles,
                        random_measure, random_pair)
from transport_graph import (bisect_midpoint, check_conservation,
                             divergence_matches, gilbert_energy, graph_cost,
                             max_flux_bound, remove_cycles, split_at_time,
                             tree_reduce)


def test_non_tree_graph_beats_tree():
    tau = step(0.3)
    g1, g3 = nontree_graphs(a=0.35, eps=0.1, length=3.0)
    assert check_conservation(g1) == []
    assert check_conservation(g3) == []
    assert graph_cost(g1, tau).total == pytest.approx(4.5, abs=1e-12)
    assert graph_cost(g3, tau).total == pytest.approx(4.2, abs=1e-12)
    with pytest.raises(NonConcaveCost):
        tree_reduce(g3, tau)


def test_nadic_levels_respect_bounds():
    tau = branched(0.75)
    m = uniform_grid(2, 16)
    N = nadic_graph(m, 8)
    first_cost, first_bound = nadic_cost_bound(m, 1, tau, nadic=N)
    assert first_cost == pytest.approx(2.0, abs=1e-9)
    assert first_bound == pytest.approx(2.0, abs=1e-9)
    for k in range(1, 9):
        actual, bound = nadic_cost_bound(m, k, tau, nadic=N)
        assert actual <= bound + 1e-9
    total = graph_cost(N.graph, tau).total
    assert nadic_total_bound(tau, 2) == pytest.approx(6.8284, abs=1e-4)
    assert total <= 6.8284 + 1e-9


def test_cycle_removal_and_tree_reduction_never_increase_cost():
    rng = np.random.default_rng(2024)
    tau = branched(0.6)
    for _ in range(100):
        G = random_graph_with_cycles(rng)
        assert G.num_edges <= 30
        H = remove_cycles(G)
        assert graph_cost(H, tau).total <= graph_cost(G, tau).total + 1e-12
        assert divergence_matches(H)
        top, ok = max_flux_bound(H)
        assert ok and top <= 1.0 + 1e-9
        T = tree_reduce(H, tau)
        assert graph_cost(T, tau).total <= graph_cost(H, tau).total + 1e-12
        assert divergence_matches(T)


def test_path_decomposition_matches_graph_cost():
    rng = np.random.default_rng(7)
    tau = branched(0.5)
    for _ in range(100):
        G = random_acyclic_graph(rng)
        plan = decompose_paths(G)
        expected = graph_cost(G, tau).total
        assert pattern_cost(plan, tau) == pytest.approx(expected, rel=1e-9, abs=1e-9)
        assert gilbert_energy(flux_of_plan(plan), tau) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_lower_semicontinuity_example():
    tau = step(0.45, height=1.0)
    looping, separated = lsc_plans(0.45)
    assert pattern_cost(looping, tau) == pytest.approx(5.7, abs=1e-12)
    assert pattern_cost(separated, tau) == pytest.approx(5.0, abs=1e-12)
    assert gilbert_energy(flux_of_plan(looping), tau) == pytest.approx(3.0, abs=1e-12)


def test_distance_bounds_on_random_pairs():
    rng = np.random.default_rng(99)
    budget = DistanceBudget(nadic_levels=2, use_optimizer=False, refinement_levels=2)
    taus = (branched(0.5), branched(0.8), step(0.25))
    for index in range(200):
        plus, minus = random_pair(rng, atoms=3)
        bounds = dtau_bounds(plus, minus, taus[index % len(taus)], budget)
        assert bounds.lower <= bounds.upper


def test_distance_between_diracs_is_exact():
    tau = branched(0.5)
    x, y = (0.1, -0.2), (0.7, 0.6)
    bounds = dtau_bounds(dirac(x), dirac(y), tau, DistanceBudget(nadic_levels=2, use_optimizer=False))
    expected = eval_tau(tau, 1.0) * math.dist(x, y)
    assert bounds.gap == pytest.approx(0.0, abs=1e-12)
    assert bounds.upper == pytest.approx(expected)


def test_refinement_bounds_decay():
    rng = np.random.default_rng(5)
    m = random_measure(rng, atoms=6)
    rows = refinement_profile(m, branched(0.75), 5)
    bounds = [r["bound"] for r in rows]
    uppers = [r["upper"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(bounds, bounds[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(uppers, uppers[1:]))


def test_optimizer_matches_oracle_on_small_instances():
    rng = np.random.default_rng(31)
    tau = branched(0.75)
    for seed in range(20):
        plus = random_measure(rng, atoms=1)
        minus = random_measure(rng, atoms=2)
        oracle = brute_force_oracle(plus, minus, tau, max_steiner=1)
        G = optimize(plus, minus, tau, OptimizerConfig(seed=seed))
        assert check_conservation(G) == []
        assert graph_cost(G, tau).total == pytest.approx(oracle.cost, rel=1e-6)


def test_optimizer_finds_non_tree_instance():
    g1, _ = nontree_graphs()
    tau = step(0.3)
    G = optimize(g1.source, g1.sink, tau, OptimizerConfig(max_iterations=10, descent_iterations=60))
    assert check_conservation(G) == []
    assert graph_cost(G, tau).total <= 4.2 + 1e-9


def test_time_split_composes():
    rng = np.random.default_rng(11)
    tau = branched(0.6)
    for _ in range(50):
        G = random_acyclic_graph(rng)
        g_plus, g_minus, mid = split_at_time(G, 0.37)
        assert graph_cost(g_plus, tau).total + graph_cost(g_minus, tau).total == pytest.approx(
            graph_cost(G, tau).total, rel=1e-9, abs=1e-12)
        assert g_plus.source.same_as(G.source, tol=1e-9)
        assert g_plus.sink.same_as(mid, tol=1e-9)
        assert g_minus.source.same_as(mid, tol=1e-9)
        assert g_minus.sink.same_as(G.sink, tol=1e-9)
        assert check_conservation(g_plus) == []
        assert check_conservation(g_minus) == []

        _, _, _, half = bisect_midpoint(G)
        total = wasserstein1(G.source, G.sink)
        assert abs(wasserstein1(G.source, half) - 0.5 * total) <= 1e-6
