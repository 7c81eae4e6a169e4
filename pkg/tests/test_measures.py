#!/usr/bin/env python3
"""
Pruebas de medidas atómicas: canonicalización, reescalado, proyección de
nivel k y distancia W1 exacta.
"""

import sys
import os
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings

# Agregar los directorios src y config al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'config'))

from costs import branched, eval_tau
from errors import InvalidMeasure, MassImbalance, OutOfDomain
from measures import (dirac, measure_from_json, measure_to_json, mollify,
                      project_klevel, rescale, signed_difference,
                      uniform_grid, validate_measure, wasserstein1,
                      wasserstein_coupling)
from strategies import measures, random_measure


def test_validate_merges_coincident_atoms():
    m = validate_measure([((0, 0), 0.5), ((0, 0), 0.5)], dim=2)
    assert len(m) == 1
    assert m.mass_at((0, 0)) == 1.0


def test_validate_identity_and_snap():
    m = validate_measure([((1, 0), 1.0)], dim=2)
    assert m.atoms() == [((1.0, 0.0), 1.0)]
    close = validate_measure([((0, 0), 0.25), ((1e-12, 0), 0.75)], dim=2)
    assert len(close) == 1
    assert close.total_mass == pytest.approx(1.0)


def test_validate_rejects_bad_atoms():
    with pytest.raises(InvalidMeasure):
        validate_measure([((0, 0), -0.1)], dim=2)
    with pytest.raises(InvalidMeasure):
        validate_measure([((math.inf, 0), 1.0)], dim=2)


def test_validate_drops_zero_mass():
    m = validate_measure([((0, 0), 0.0), ((1, 1), 1.0)], dim=2)
    assert len(m) == 1


@given(measures())
@settings(max_examples=50, deadline=None)
def test_validate_is_idempotent(m):
    again = validate_measure(m)
    assert again.same_as(m)


def test_signed_difference_parts():
    plus = validate_measure([((0, 0), 1.0), ((1, 0), 0.5)], dim=2)
    minus = validate_measure([((1, 0), 1.5)], dim=2)
    diff = signed_difference(plus, minus)
    assert diff.positive_part().same_as(dirac((0, 0), 1.0))
    assert diff.negative_part().same_as(dirac((1, 0), 1.0))
    assert diff.total_variation == pytest.approx(2.0)


def test_rescale_mass_and_cost():
    m = dirac((0, 0), 2.0)
    tau = branched(0.5)
    problem = rescale(m, m, tau)
    assert problem.plus.same_as(dirac((0, 0), 1.0))
    assert problem.mass_factor == 2.0
    assert problem.length_factor == 1.0
    assert eval_tau(problem.cost, 0.5) == pytest.approx(1.0)


def test_rescale_identity_on_probability():
    plus = validate_measure([((0.5, 0.5), 1.0)], dim=2)
    minus = validate_measure([((-0.5, 0.5), 1.0)], dim=2)
    problem = rescale(plus, minus)
    assert (problem.mass_factor, problem.length_factor) == (1.0, 1.0)
    assert problem.plus.same_as(plus)


def test_rescale_cost_factor_restores_original_cost():
    plus = dirac((0, 0), 3.0)
    minus = dirac((4, 0), 3.0)
    tau = branched(0.75)
    problem = rescale(plus, minus, tau)
    normalized = eval_tau(problem.cost, 1.0) * 1.0
    original = eval_tau(tau, 3.0) * 4.0
    assert problem.cost_factor * normalized == pytest.approx(original)
    # La masa ya está dentro de tau_bar: el factor es s, no m s
    assert problem.cost_factor == problem.length_factor == pytest.approx(4.0)


def test_rescale_mass_imbalance():
    with pytest.raises(MassImbalance):
        rescale(dirac((0, 0), 1.0), dirac((1, 0), 1.1))


def test_project_uniform_level_one():
    m = uniform_grid(2, 4)
    p = project_klevel(m, 1)
    assert len(p) == 4
    for corner in itertools.product((-1.0, 1.0), repeat=2):
        assert p.mass_at(corner) == pytest.approx(0.25)


def test_project_cell_membership():
    assert project_klevel(dirac((0.5, 0.5)), 1).same_as(dirac((1, 1)))
    # Celdas semiabiertas (-s, s]: el borde 0 cae en la celda inferior
    assert project_klevel(dirac((0.0, 0.0)), 1).same_as(dirac((-1, -1)))


def test_project_out_of_domain():
    with pytest.raises(OutOfDomain):
        project_klevel(dirac((3, 0)), 1)


def test_project_preserves_mass_and_w1_bound():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = random_measure(rng, atoms=6, radius=1.5)
        for k in range(1, 5):
            p = project_klevel(m, k)
            assert p.total_mass == pytest.approx(m.total_mass, abs=1e-15)
            assert wasserstein1(m, p) <= m.total_mass * 2.0 ** (1 - k) * math.sqrt(2) + 1e-9


def test_w1_examples():
    assert wasserstein1(dirac((0, 0)), dirac((3, 4))) == pytest.approx(5.0)
    plus = validate_measure([((0, 0), 0.5), ((2, 0), 0.5)], dim=2)
    assert wasserstein1(plus, dirac((1, 0))) == pytest.approx(1.0)


def test_w1_mass_imbalance():
    with pytest.raises(MassImbalance):
        wasserstein1(dirac((0, 0), 1.0), dirac((1, 0), 2.0))


def test_w1_is_a_metric_on_random_triples():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a, b, c = (random_measure(rng, atoms=int(rng.integers(1, 5))) for _ in range(3))
        assert wasserstein1(a, b) == pytest.approx(wasserstein1(b, a), abs=1e-12)
        assert wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-9
        assert wasserstein1(a, a) == pytest.approx(0.0, abs=1e-12)


def test_w1_matches_vertex_enumeration():
    # 2x2: los vértices del politopo de transporte se parametrizan por pi_00
    rng = np.random.default_rng(3)
    for _ in range(10):
        plus = random_measure(rng, atoms=2)
        minus = random_measure(rng, atoms=2)
        a, b = plus.masses, minus.masses
        dist = np.linalg.norm(plus.positions[:, None, :] - minus.positions[None, :, :], axis=2)
        lo, hi = max(0.0, a[0] - b[1]), min(a[0], b[0])
        values = []
        for p00 in (lo, hi):
            plan = np.array([[p00, a[0] - p00], [b[0] - p00, a[1] - b[0] + p00]])
            values.append(float((plan * dist).sum()))
        assert wasserstein1(plus, minus) == pytest.approx(min(values), abs=1e-9)


def test_coupling_marginals():
    rng = np.random.default_rng(5)
    plus, minus = random_measure(rng, 4), random_measure(rng, 3)
    value, plan = wasserstein_coupling(plus, minus)
    assert plan.sum(axis=1) == pytest.approx(plus.masses, abs=1e-9)
    assert plan.sum(axis=0) == pytest.approx(minus.masses, abs=1e-9)
    assert value == pytest.approx(wasserstein1(plus, minus))


def test_mollify_support_and_mass():
    m = dirac((0.2, -0.3), 1.0)
    smooth = mollify(m, 0.3)
    assert len(smooth) == 9
    assert smooth.total_mass == pytest.approx(1.0)
    radius = np.linalg.norm(smooth.positions - np.array([0.2, -0.3]), axis=1).max()
    assert radius <= 0.3 / 3 + 1e-12


def test_json_round_trip_keeps_canonical_form():
    m = validate_measure([((0.1, 0.2), 0.3), ((1, 1), 0.7)], dim=2)
    data = measure_to_json(m)
    assert all(isinstance(atom["m"], str) for atom in data["atoms"])
    assert measure_from_json(data).same_as(m)


def test_json_rejects_malformed():
    with pytest.raises(InvalidMeasure):
        measure_from_json({"atoms": []})
