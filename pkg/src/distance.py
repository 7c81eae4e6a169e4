#!/usr/bin/env python3
"""
Estimación certificada por ambos lados de la distancia de costo d_tau entre
dos medidas atómicas y pruebas empíricas de los axiomas de métrica.

La distancia es un ínfimo sobre sucesiones de grafos y no se calcula de
forma exacta: `upper` es siempre el costo de un grafo testigo concreto y
`lower` la cota lineal lambda^tau(M) W1.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from costs import TransportCost, lambda_tau, majorant
from errors import BoundViolation
from hierarchy import (coupling_graph, level_bound, levels_between, nadic_graph,
                       nadic_witness, projection_graph, star_graph)
from measures import DiscreteMeasure, check_mass_balance, rescale, wasserstein1
from optimizer import OptimizerConfig, optimize
from settings import DEFAULT_NADIC_LEVEL, RESIDUAL_TOLERANCE, TRIANGLE_SLACK
from transport_graph import (TransportGraph, graph_cost, graph_to_json,
                             make_graph, remove_cycles, reversed_graph)

logger = logging.getLogger(__name__)

NOT_EXACT = "upper es el costo de un grafo testigo; d_tau no se calcula exactamente"


@dataclass(frozen=True)
class DistanceBudget:
    """Cuánto trabajo se invierte en la cota superior."""
    nadic_levels: int = DEFAULT_NADIC_LEVEL
    use_optimizer: bool = True
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    refinement_levels: int = DEFAULT_NADIC_LEVEL


@dataclass(frozen=True)
class DistanceBounds:
    lower: float
    upper: float
    lam: float
    w1: float
    mass: float
    witness: TransportGraph
    witness_name: str
    candidates: Tuple[Tuple[str, float], ...] = ()

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "certificate": {"lambda": self.lam, "w1": self.w1, "mass": self.mass},
            "witness_name": self.witness_name,
            "witness": graph_to_json(self.witness),
            "candidates": {name: cost for name, cost in self.candidates},
            "note": NOT_EXACT,
        }


def _witnesses(plus: DiscreteMeasure, minus: DiscreteMeasure, tau: TransportCost,
               budget: DistanceBudget) -> List[Tuple[str, TransportGraph]]:
    start = np.average(plus.positions, axis=0, weights=plus.masses)
    end = np.average(minus.positions, axis=0, weights=minus.masses)
    out = [
        ("star_origin", star_graph(plus, minus)),
        ("star_barycenter", star_graph(plus, minus, center=start)),
        ("star_barycenter_reversed", reversed_graph(star_graph(minus, plus, center=end))),
        ("coupling", coupling_graph(plus, minus)),
        ("coupling_reversed", reversed_graph(coupling_graph(minus, plus))),
    ]
    out += [(f"nadic_{k}", nadic_witness(plus, minus, k)) for k in range(1, budget.nadic_levels + 1)]
    if budget.use_optimizer:
        out.append(("optimizer", optimize(plus, minus, tau, budget.optimizer)))
    return out


def dtau_bounds(plus: DiscreteMeasure, minus: DiscreteMeasure, tau: TransportCost,
                budget: Optional[DistanceBudget] = None) -> DistanceBounds:
    """
    Cotas lower <= d_tau(mu+, mu-) <= upper.

    lower = lambda^tau(M) W1(mu+, mu-) con M la masa total; upper es el
    menor costo entre los testigos (estrellas, acoplamiento W1, caminos
    n-ádicos hasta el nivel del presupuesto y la salida del optimizador).

    Raises:
        MassImbalance: masas totales distintas
        BoundViolation: lower > upper (no debería ocurrir nunca)
    """
    budget = budget or DistanceBudget()
    mass = check_mass_balance(plus, minus)
    if mass == 0 or plus.same_as(minus, tol=RESIDUAL_TOLERANCE * max(1.0, mass)):
        empty = make_graph([], [], plus, minus)
        return DistanceBounds(0.0, 0.0, 0.0, 0.0, mass, empty, "empty", (("empty", 0.0),))

    w1 = wasserstein1(plus, minus)
    lam = lambda_tau(tau, mass)
    lower = lam * w1

    scored = []
    for name, G in _witnesses(plus, minus, tau, budget):
        G = remove_cycles(G)
        scored.append((graph_cost(G, tau).total, name, G))
    upper, name, witness = min(scored, key=lambda item: item[0])

    if lower - upper > 1e-12 * max(1.0, upper):
        raise BoundViolation(f"Cota inferior {lower} mayor que la superior {upper}", lower=lower, upper=upper)
    # Diferencias de redondeo (cdist frente a norm, tau(M)/M * M) se cierran
    if abs(upper - lower) <= 1e-12 * max(1.0, upper):
        lower = upper
    logger.debug("d_tau en [%.12g, %.12g] (testigo %s)", lower, upper, name)
    return DistanceBounds(lower, upper, lam, w1, mass, witness, name,
                          tuple((n, c) for c, n, _ in scored))


@dataclass
class MetricProbeReport:
    symmetry: List[Dict[str, Any]] = field(default_factory=list)
    triangle: List[Dict[str, Any]] = field(default_factory=list)
    refinement: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(item["ok"] for item in self.symmetry + self.triangle + self.refinement)

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "symmetry": self.symmetry,
                "triangle": self.triangle, "refinement": self.refinement, "note": NOT_EXACT}


def refinement_profile(m: DiscreteMeasure, tau: TransportCost, levels: int) -> List[Dict[str, Any]]:
    """
    Cota superior de d_tau(P^k(mu), mu) para k = 0..levels.

    El testigo sube por los niveles k+1..K del árbol n-ádico y deshace la
    proyección de nivel K; su parte jerárquica está acotada por la cola
    sum_{j>k} del nivel.
    """
    problem = rescale(m, m, tau)
    bar, tau_bar = problem.plus, problem.cost
    factor = problem.cost_factor
    N = nadic_graph(bar, levels)
    beta = majorant(tau_bar)
    tail_proj = graph_cost(projection_graph(bar, levels), tau_bar).total
    rows = []
    for k in range(levels + 1):
        hier = graph_cost(levels_between(N, k, levels), tau_bar).total
        tail = math.fsum(level_bound(beta, bar.dim, j) for j in range(k + 1, levels + 1))
        upper = factor * (hier + tail_proj)
        bound = factor * (tail + tail_proj)
        rows.append({"k": k, "upper": upper, "bound": bound})
    return rows


def metric_probe(samples: Sequence[DiscreteMeasure], tau: TransportCost,
                 budget: Optional[DistanceBudget] = None) -> MetricProbeReport:
    """
    Pruebas empíricas: simetría de las cotas, desigualdad triangular de las
    cotas superiores (holgura relativa) y la cota dura lower(mu, nu) <=
    upper(mu, xi) + upper(xi, nu), y decaimiento de las cotas de
    refinamiento P^k(mu) -> mu.
    """
    budget = budget or DistanceBudget()
    report = MetricProbeReport()
    cache: Dict[Tuple[int, int], DistanceBounds] = {}

    def bounds(i: int, j: int) -> DistanceBounds:
        if (i, j) not in cache:
            cache[(i, j)] = dtau_bounds(samples[i], samples[j], tau, budget)
        return cache[(i, j)]

    for i, j in itertools.combinations(range(len(samples)), 2):
        ab, ba = bounds(i, j), bounds(j, i)
        scale = max(1.0, ab.upper, ba.upper)
        report.symmetry.append({
            "pair": [i, j],
            "lower": [ab.lower, ba.lower],
            "upper": [ab.upper, ba.upper],
            "ok": abs(ab.lower - ba.lower) <= 1e-9 * scale
                  and abs(ab.upper - ba.upper) <= TRIANGLE_SLACK * scale,
        })

    for i, j, l in itertools.permutations(range(len(samples)), 3):
        if i > l:
            continue
        direct, left, right = bounds(i, l), bounds(i, j), bounds(j, l)
        detour = left.upper + right.upper
        report.triangle.append({
            "triple": [i, j, l],
            "upper": direct.upper,
            "detour": detour,
            "within_slack": direct.upper <= (1.0 + TRIANGLE_SLACK) * detour + 1e-12,
            "ok": direct.lower <= detour + 1e-9 * max(1.0, detour),
        })

    for index, m in enumerate(samples):
        rows = refinement_profile(m, tau, budget.refinement_levels)
        for prev, row in zip([None] + rows[:-1], rows):
            decreasing = prev is None or row["upper"] <= prev["upper"] + 1e-12 * max(1.0, prev["upper"])
            below = row["upper"] <= row["bound"] + 1e-9 * max(1.0, row["bound"])
            report.refinement.append({"sample": index, **row, "ok": decreasing and below})

    logger.info("Prueba de métrica: %d pares, %d ternas, %s",
                len(report.symmetry), len(report.triangle), "ok" if report.passed else "fallos")
    return report
