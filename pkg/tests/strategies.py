#!/usr/bin/env python3
"""
Generadores de instancias para las pruebas: estrategias de hypothesis y
generadores sembrados de numpy para los barridos de tamaño fijo.
"""

import sys
import os
from collections import defaultdict

import numpy as np
from hypothesis import strategies as st

# Agregar los directorios src y config al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'config'))

from costs import branched, discrete, step, tabulated, urban, wasserstein
from measures import validate_measure
from transport_graph import make_graph, with_weights


# Estrategias de hypothesis

@st.composite
def concave_costs(draw):
    family = draw(st.sampled_from(["wasserstein", "branched", "urban", "discrete", "tabulated"]))
    if family == "wasserstein":
        return wasserstein(draw(st.floats(0.1, 5.0)))
    if family == "branched":
        return branched(draw(st.floats(0.05, 0.95)))
    if family == "urban":
        return urban(draw(st.floats(1.1, 4.0)), draw(st.floats(0.05, 1.0)))
    if family == "discrete":
        return discrete()
    xs = sorted(draw(st.lists(st.floats(0.05, 2.0), min_size=1, max_size=4, unique=True)))
    vs = sorted(draw(st.lists(st.floats(0.1, 3.0), min_size=len(xs), max_size=len(xs))))
    return tabulated(list(zip(xs, vs)))


@st.composite
def any_costs(draw):
    if draw(st.booleans()):
        return step(draw(st.floats(0.05, 1.0)))
    return draw(concave_costs())


masses = st.floats(min_value=0.01, max_value=2.0)


@st.composite
def measures(draw, dim=2, max_atoms=6, radius=1.0):
    count = draw(st.integers(1, max_atoms))
    coords = st.floats(min_value=-radius, max_value=radius, allow_nan=False)
    atoms = [([draw(coords) for _ in range(dim)], draw(masses)) for _ in range(count)]
    return validate_measure(atoms, dim=dim)


# Generadores sembrados

def random_measure(rng, atoms=4, dim=2, radius=1.0, mass=1.0):
    """Medida de `atoms` átomos en [-r, r]^n con masas de Dirichlet que suman `mass`."""
    points = rng.uniform(-radius, radius, size=(atoms, dim))
    weights = rng.dirichlet(np.ones(atoms)) * mass
    return validate_measure(list(zip(points, weights)), dim=dim)


def random_pair(rng, atoms=4, dim=2, radius=1.0, mass=1.0):
    return (random_measure(rng, atoms, dim, radius, mass),
            random_measure(rng, int(rng.integers(1, atoms + 1)), dim, radius, mass))


def random_acyclic_graph(rng, dim=2, num_vertices=8, num_paths=5, unit_mass=False):
    """
    Grafo acíclico que conserva masa: superposición de caminos crecientes en
    el orden de los índices de vértices, con fuente y sumidero en sus extremos.
    """
    points = rng.uniform(-1.0, 1.0, size=(num_vertices, dim))
    weights = rng.uniform(0.05, 1.0, size=num_paths)
    if unit_mass:
        weights = weights / weights.sum()
    flows = defaultdict(float)
    starts, ends = [], []
    for w in weights:
        length = int(rng.integers(2, min(5, num_vertices) + 1))
        chain = np.sort(rng.choice(num_vertices, size=length, replace=False))
        for a, b in zip(chain[:-1], chain[1:]):
            flows[(int(a), int(b))] += float(w)
        starts.append((points[chain[0]], float(w)))
        ends.append((points[chain[-1]], float(w)))
    edges = [(a, b, w) for (a, b), w in sorted(flows.items())]
    return make_graph(points, edges, validate_measure(starts, dim=dim), validate_measure(ends, dim=dim))


def random_graph_with_cycles(rng, dim=2, num_vertices=8, num_paths=4, num_cycles=3):
    """Grafo acíclico de masa unitaria más ciclos dirigidos superpuestos (<= 30 aristas)."""
    base = random_acyclic_graph(rng, dim, num_vertices, num_paths, unit_mass=True)
    edges = [(e.tail, e.head, e.weight) for e in base.edges]
    n = len(base.vertices)
    for _ in range(num_cycles):
        if n < 3 or len(edges) > 26:
            break
        size = int(rng.integers(2, min(4, n) + 1))
        ring = [int(v) for v in rng.choice(n, size=size, replace=False)]
        lam = float(rng.uniform(0.05, 0.8))
        for a, b in zip(ring, ring[1:] + ring[:1]):
            edges.append((a, b, lam))
    return make_graph(base.vertices, edges, base.source, base.sink)


@st.composite
def noisy_acyclic_graphs(draw, noise=1e-10):
    """Grafo acíclico aleatorio con pesos alterados hasta noise * masa (dentro de la tolerancia de conservación)."""
    rng = np.random.default_rng(draw(st.integers(0, 2 ** 32 - 1)))
    G = random_acyclic_graph(rng)
    scale = noise * G.mass_scale()
    deltas = draw(st.lists(st.floats(-scale, scale), min_size=G.num_edges, max_size=G.num_edges))
    return with_weights(G, [e.weight + d for e, d in zip(G.edges, deltas)])
