#!/usr/bin/env python3
"""
Pruebas de las cotas de d_tau y de la prueba empírica de métrica.
"""

import sys
import os

import numpy as np
import pytest

# Agregar los directorios src y config al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'config'))

from costs import branched, lambda_tau, step, urban, wasserstein
from distance import (DistanceBudget, dtau_bounds, metric_probe,
                      refinement_profile)
from errors import MassImbalance
from measures import dirac, uniform_grid, validate_measure, wasserstein1
from optimizer import OptimizerConfig
from strategies import random_measure, random_pair
from transport_graph import check_conservation, graph_cost

NO_OPT = DistanceBudget(nadic_levels=3, use_optimizer=False, refinement_levels=3)


def test_identical_measures_have_zero_distance():
    m = validate_measure([((0.2, 0.1), 0.4), ((-0.5, 0.5), 0.6)], dim=2)
    bounds = dtau_bounds(m, m, branched(0.5), NO_OPT)
    assert bounds.lower == 0.0
    assert bounds.upper == 0.0
    assert bounds.witness_name == "empty"


def test_single_pair_is_exact():
    tau = branched(0.5)
    bounds = dtau_bounds(dirac((0, 0)), dirac((1, 0)), tau, NO_OPT)
    assert bounds.lower == pytest.approx(1.0)
    assert bounds.upper == pytest.approx(1.0)
    assert bounds.gap == pytest.approx(0.0, abs=1e-12)


def test_wasserstein_cost_gives_w1():
    rng = np.random.default_rng(10)
    for _ in range(5):
        plus, minus = random_pair(rng, atoms=4)
        bounds = dtau_bounds(plus, minus, wasserstein(), NO_OPT)
        assert bounds.lower == pytest.approx(wasserstein1(plus, minus))
        assert bounds.upper == pytest.approx(bounds.lower, rel=1e-9)


def test_bounds_bracket_on_random_pairs():
    rng = np.random.default_rng(20)
    for tau in (branched(0.6), urban(3.0, 0.2), step(0.3)):
        for _ in range(5):
            plus, minus = random_pair(rng, atoms=4)
            bounds = dtau_bounds(plus, minus, tau, NO_OPT)
            assert bounds.lower <= bounds.upper
            assert bounds.lam == pytest.approx(lambda_tau(tau, bounds.mass))
            assert check_conservation(bounds.witness) == []
            assert graph_cost(bounds.witness, tau).total == pytest.approx(bounds.upper)
            names = [name for name, _ in bounds.candidates]
            assert {"star_origin", "coupling", "coupling_reversed", "nadic_1"} <= set(names)


def test_optimizer_never_worsens_upper_bound():
    plus, minus = random_pair(np.random.default_rng(2), atoms=3)
    tau = branched(0.5)
    plain = dtau_bounds(plus, minus, tau, NO_OPT)
    budget = DistanceBudget(nadic_levels=3, optimizer=OptimizerConfig(max_iterations=5, descent_iterations=40))
    tuned = dtau_bounds(plus, minus, tau, budget)
    assert tuned.upper <= plain.upper + 1e-12
    assert "optimizer" in dict(tuned.candidates)


def test_mass_imbalance():
    with pytest.raises(MassImbalance):
        dtau_bounds(dirac((0, 0), 1.0), dirac((1, 0), 2.0), branched(0.5), NO_OPT)


def test_to_dict_reports_certificate():
    data = dtau_bounds(dirac((0, 0)), dirac((0, 2)), branched(0.5), NO_OPT).to_dict()
    assert data["certificate"]["w1"] == pytest.approx(2.0)
    assert data["certificate"]["mass"] == pytest.approx(1.0)
    assert data["gap"] == pytest.approx(data["upper"] - data["lower"])
    assert "note" in data


def test_refinement_profile_decreases():
    m = uniform_grid(2, 8)
    rows = refinement_profile(m, branched(0.75), 4)
    assert [r["k"] for r in rows] == [0, 1, 2, 3, 4]
    uppers = [r["upper"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(uppers, uppers[1:]))
    assert all(r["upper"] <= r["bound"] + 1e-9 for r in rows)


def test_metric_probe_passes_on_small_samples():
    rng = np.random.default_rng(55)
    samples = [random_measure(rng, atoms=3) for _ in range(3)]
    report = metric_probe(samples, branched(0.6), NO_OPT)
    assert len(report.symmetry) == 3
    assert len(report.triangle) == 3
    assert report.passed
    data = report.to_dict()
    assert data["passed"] is True
    assert all("within_slack" in row for row in data["triangle"])


def test_metric_probe_symmetric_lower_bounds():
    rng = np.random.default_rng(56)
    samples = [random_measure(rng, atoms=2), random_measure(rng, atoms=3)]
    report = metric_probe(samples, step(0.3), NO_OPT)
    (row,) = report.symmetry
    assert row["lower"][0] == pytest.approx(row["lower"][1])
    assert row["ok"]
