#!/usr/bin/env python3
"""
Pruebas del optimizador de grafos de transporte y del oráculo de fuerza
bruta.
"""

import sys
import os
import math

import numpy as np
import pytest

# Agregar los directorios src y config al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'config'))

from costs import branched, step, urban, wasserstein
from errors import ConfigError, InvalidGraph, TooLarge
from hierarchy import coupling_graph, star_graph
from measures import dirac, validate_measure
from optimizer import (OptimizerConfig, brute_force_oracle, descend,
                       initial_candidates, optimize, tree_flows)
from strategies import random_pair
from transport_graph import (check_conservation, graph_cost, is_acyclic,
                             loop_rank)

FAST = OptimizerConfig(max_iterations=8, descent_iterations=60)


def y_instance():
    plus = validate_measure([((-1, 1), 0.5), ((1, 1), 0.5)], dim=2)
    return plus, dirac((0, -1))


def test_config_validation():
    with pytest.raises(ConfigError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ConfigError):
        OptimizerConfig(moves=("steiner", "teleport"))
    with pytest.raises(ConfigError):
        OptimizerConfig(descent_step=0.0)


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv("RAMIFLOW_THREADS", "3")
    assert OptimizerConfig().worker_count() == 3
    assert OptimizerConfig(threads=2).worker_count() == 2
    monkeypatch.setenv("RAMIFLOW_THREADS", "muchos")
    with pytest.raises(ConfigError):
        OptimizerConfig().worker_count()


def test_tree_flows():
    flows = tree_flows(3, [(0, 1), (1, 2)], [1.0, 0.0, -1.0])
    assert sorted(flows) == [(0, 1, 1.0), (1, 2, 1.0)]
    assert tree_flows(2, [(0, 1)], [1.0, -0.5]) is None
    with pytest.raises(InvalidGraph):
        tree_flows(3, [(0, 1), (1, 2), (2, 0)], [0.0, 0.0, 0.0])


def test_descend_finds_fermat_point():
    # Tres terminales de un triángulo equilátero con pesos iguales: el
    # punto libre converge al centro
    angles = np.deg2rad([90.0, 210.0, 330.0])
    points = np.vstack([np.column_stack([np.cos(angles), np.sin(angles)]), [[0.3, -0.2]]])
    tails = np.array([0, 1, 2])
    heads = np.array([3, 3, 3])
    moved = descend(points, [3], tails, heads, np.ones(3), OptimizerConfig())
    assert moved[3] == pytest.approx([0.0, 0.0], abs=1e-5)
    assert np.array_equal(moved[:3], points[:3])


def test_initial_candidates_conserve_mass():
    plus, minus = y_instance()
    for name, G in initial_candidates(plus, minus, branched(0.5), 2):
        assert check_conservation(G) == [], name


def test_optimize_y_instance():
    plus, minus = y_instance()
    tau = branched(0.5)
    G = optimize(plus, minus, tau, FAST)
    assert check_conservation(G) == []
    assert is_acyclic(G)
    assert loop_rank(G) == 0
    cost = graph_cost(G, tau).total
    assert cost <= graph_cost(coupling_graph(plus, minus), tau).total + 1e-12
    assert cost <= graph_cost(star_graph(plus, minus), tau).total + 1e-12
    oracle = brute_force_oracle(plus, minus, tau, max_steiner=1)
    assert cost <= oracle.cost * (1 + 1e-3)


def test_optimize_random_instances():
    rng = np.random.default_rng(77)
    for tau in (branched(0.6), urban(2.0, 0.2), step(0.3)):
        plus, minus = random_pair(rng, atoms=3)
        G = optimize(plus, minus, tau, FAST)
        assert check_conservation(G) == []
        assert is_acyclic(G)
        baseline = graph_cost(coupling_graph(plus, minus), tau).total
        assert graph_cost(G, tau).total <= baseline + 1e-12


def test_optimize_is_deterministic_across_threads():
    plus, minus = random_pair(np.random.default_rng(3), atoms=3)
    tau = branched(0.7)
    one = optimize(plus, minus, tau, OptimizerConfig(max_iterations=5, descent_iterations=40,
                                                     restarts=5, threads=1, seed=4))
    many = optimize(plus, minus, tau, OptimizerConfig(max_iterations=5, descent_iterations=40,
                                                      restarts=5, threads=3, seed=4))
    assert graph_cost(one, tau).total == graph_cost(many, tau).total


def test_optimize_zero_mass():
    empty = validate_measure([], dim=2)
    G = optimize(empty, empty, branched(0.5), FAST)
    assert G.num_edges == 0


def test_oracle_two_atoms_is_straight_line():
    tau = branched(0.5)
    result = brute_force_oracle(dirac((0, 0), 4.0), dirac((3, 4), 4.0), tau)
    assert result.cost == pytest.approx(2.0 * 5.0)
    assert result.graph.num_edges == 1


def test_oracle_finds_non_tree_for_step_cost():
    plus = validate_measure([((0, 0), 0.35), ((0, 1), 0.65)], dim=2)
    minus = validate_measure([((3, 0), 0.35), ((3, 1), 0.65)], dim=2)
    result = brute_force_oracle(plus, minus, step(0.3), max_steiner=0)
    assert result.cost <= 4.2 + 1e-9
    assert loop_rank(result.graph) >= 1
    assert check_conservation(result.graph) == []


def test_oracle_limits():
    many = validate_measure([((i, 0), 1.0) for i in range(3)], dim=2)
    others = validate_measure([((i, 1), 1.0) for i in range(3)], dim=2)
    with pytest.raises(TooLarge):
        brute_force_oracle(many, others, wasserstein())
    with pytest.raises(TooLarge):
        brute_force_oracle(dirac((0, 0)), dirac((1, 0)), wasserstein(), max_steiner=3)


def test_oracle_below_simple_witnesses():
    rng = np.random.default_rng(41)
    tau = branched(0.5)
    for _ in range(3):
        plus, minus = random_pair(rng, atoms=2)
        result = brute_force_oracle(plus, minus, tau, max_steiner=1)
        assert check_conservation(result.graph) == []
        assert result.cost <= graph_cost(coupling_graph(plus, minus), tau).total + 1e-9
        assert math.isfinite(result.cost)
