#!/usr/bin/env python3
"""
Caminos de transporte n-ádicos, sus cotas de costo y los grafos puente que
enlazan aproximaciones de distinto nivel.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from costs import Majorant, TransportCost, check_admissible, majorant
from errors import BoundViolation, DomainError
from geometry import snap_key
from measures import (DiscreteMeasure, check_mass_balance, dirac, klevel_cells,
                      mollify, project_klevel, rescale, validate_measure,
                      wasserstein_coupling)
from settings import RESIDUAL_TOLERANCE, SNAP_TOLERANCE
from transport_graph import (GraphBuilder, TransportGraph, concatenate,
                             graph_cost, graph_to_json, make_graph,
                             remove_cycles, reversed_graph, scaled)

logger = logging.getLogger(__name__)

BRIDGE_KINDS = ("levels", "mollify", "project", "star")


@dataclass(frozen=True)
class NadicGraph:
    """
    Grafo n-ádico G^k_mu con el nivel de cada arista.

    `level_edge_counts[j]` guarda el número combinatorio 2^{n j} de aristas
    del nivel j aunque las de peso cero se hayan podado.
    """
    graph: TransportGraph
    measure: DiscreteMeasure
    edge_levels: Tuple[int, ...]
    levels: int
    scale: float
    center: Tuple[float, ...]
    level_edge_counts: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.graph.dim

    def to_dict(self) -> Dict:
        data = graph_to_json(self.graph)
        data["levels"] = list(self.edge_levels)
        data["scale"] = self.scale
        data["center"] = list(self.center)
        return data


def _leaf(index: np.ndarray, level: int, scale: float, center: np.ndarray) -> np.ndarray:
    half = scale * 2.0 ** (1 - level)
    return center - 2.0 * scale + (2 * index + 1) * half


def nadic_graph(m: DiscreteMeasure, k: int, scale: float = 1.0,
                center: Optional[Tuple[float, ...]] = None) -> NadicGraph:
    """
    Construye G^k_mu: transporta mu((-2,2]^n) delta_0 a P^k(mu).

    El nivel j une cada hoja de nivel j-1 con las hojas de sus 2^n celdas
    hijas, con peso igual a la masa de la celda hija.

    Args:
        m: Medida con soporte en (-2, 2]^n
        k: Número de niveles (k >= 1)

    Returns:
        NadicGraph
    """
    if k < 1:
        raise DomainError(f"El grafo n-ádico requiere k >= 1 (k={k})")
    n = m.dim
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    idx, _ = klevel_cells(m.positions, k, scale, c)
    builder = GraphBuilder(n)
    levels: List[int] = []
    for j in range(1, k + 1):
        child = idx >> (k - j)
        parent = child >> 1
        groups: Dict[Tuple[int, ...], List[float]] = defaultdict(list)
        parents: Dict[Tuple[int, ...], np.ndarray] = {}
        for ch, pa, w in zip(map(tuple, child.tolist()), parent, m.masses.tolist()):
            groups[ch].append(w)
            parents[ch] = pa
        for ch in sorted(groups):
            tail = _leaf(parents[ch], j - 1, scale, c)
            head = _leaf(np.asarray(ch), j, scale, c)
            builder.add_edge(tail, head, math.fsum(groups[ch]))
            levels.append(j)
    total = m.total_mass
    source = dirac(c, total) if total > 0 else validate_measure([], dim=n)
    sink = project_klevel(m, k, scale, c)
    graph = builder.build(source, sink)
    counts = tuple(2 ** (n * j) for j in range(k + 1))
    logger.debug("Grafo n-ádico: n=%d, k=%d, %d aristas", n, k, graph.num_edges)
    return NadicGraph(graph, m, tuple(levels), k, float(scale), tuple(c.tolist()), counts)


def level_subgraph(N: NadicGraph, j: int) -> TransportGraph:
    """F^j: aristas del nivel j, de P^{j-1}(mu) a P^j(mu)."""
    if not 1 <= j <= N.levels:
        raise DomainError(f"Nivel {j} fuera de 1..{N.levels}")
    G = N.graph
    edges = [(e.tail, e.head, e.weight) for e, lvl in zip(G.edges, N.edge_levels) if lvl == j]
    center = np.asarray(N.center)
    before = project_klevel(N.measure, j - 1, N.scale, center)
    after = project_klevel(N.measure, j, N.scale, center)
    return make_graph(G.vertices, edges, before, after)


def levels_between(N: NadicGraph, k: int, K: int) -> TransportGraph:
    """G^{k,K}: niveles k+1..K apilados, de P^k(mu) a P^K(mu)."""
    G = N.graph
    edges = [(e.tail, e.head, e.weight) for e, lvl in zip(G.edges, N.edge_levels) if k < lvl <= K]
    center = np.asarray(N.center)
    return make_graph(G.vertices, edges,
                      project_klevel(N.measure, k, N.scale, center),
                      project_klevel(N.measure, K, N.scale, center))


def _resolve_beta(tau: TransportCost, beta: Optional[Majorant]) -> Majorant:
    return majorant(tau) if beta is None else beta


def level_bound(beta: Majorant, n: int, k: int, mass: float = 1.0, scale: float = 1.0) -> float:
    """Cota 2 sqrt(n) s 2^{(n-1)k} beta(M 2^{-nk}) del costo del nivel k."""
    cells = 2.0 ** (n * k)
    return math.sqrt(n) * scale * 2.0 ** (1 - k) * cells * beta(mass / cells)


def _assert_bound(actual: float, bound: float, what: str) -> None:
    if actual > bound + RESIDUAL_TOLERANCE * max(1.0, abs(bound)):
        raise BoundViolation(f"{what}: costo {actual} supera la cota {bound}", actual=actual, bound=bound)


def nadic_cost_bound(m: DiscreteMeasure, k: int, tau: TransportCost,
                     beta: Optional[Majorant] = None, n: Optional[int] = None,
                     nadic: Optional[NadicGraph] = None) -> Tuple[float, float]:
    """
    Costo real del nivel F^k y su cota 2 sqrt(n) S^beta(n, k).

    Returns:
        (costo del nivel, cota)
    """
    n = m.dim if n is None else n
    beta = _resolve_beta(tau, beta)
    N = nadic if nadic is not None else nadic_graph(m, k)
    actual = graph_cost(level_subgraph(N, k), tau).total
    bound = level_bound(beta, n, k, m.total_mass, N.scale)
    _assert_bound(actual, bound, f"Nivel {k}")
    return actual, bound


def nadic_total_bound(tau: TransportCost, n: int) -> Optional[float]:
    """2 sqrt(n) S^beta(n) para medidas de probabilidad, o None si tau no es admisible."""
    report = check_admissible(tau, n)
    if not report.admissible or report.total_bound is None:
        return None
    return 2.0 * math.sqrt(n) * report.total_bound


def connect_nadic(plus: DiscreteMeasure, minus: DiscreteMeasure, k: int) -> TransportGraph:
    """-G^k_{mu+} unido a G^k_{mu-}: transporta P^k(mu+) a P^k(mu-) pasando por el origen."""
    check_mass_balance(plus, minus)
    up = reversed_graph(nadic_graph(plus, k).graph)
    down = nadic_graph(minus, k).graph
    return concatenate(up, make_graph(down.vertices, [(e.tail, e.head, e.weight) for e in down.edges],
                                      up.sink, down.sink))


def connect_nadic_bound(tau: TransportCost, n: int, k: int, mass: float = 1.0) -> float:
    """4 sqrt(n) sum_{j<=k} S^beta(n, j) (escalado por la masa vía Jensen)."""
    beta = majorant(tau)
    return 2.0 * math.fsum(level_bound(beta, n, j, mass) for j in range(1, k + 1))


@dataclass(frozen=True)
class BridgeGraph:
    kind: str
    graph: TransportGraph
    cost: float
    bound: float


def _jensen_bound(beta: Majorant, edges: int, mass: float, longest: float) -> float:
    if edges == 0:
        return 0.0
    return longest * edges * beta(mass / edges)


def bridge_graphs(kind: str, tau: TransportCost, m: DiscreteMeasure, *, k: int = 1,
                  K: Optional[int] = None, delta: Optional[float] = None,
                  other: Optional[DiscreteMeasure] = None,
                  beta: Optional[Majorant] = None) -> BridgeGraph:
    """
    Grafos puente con su cota de costo verificada.

    Tipos:
        levels:  G^{k,K}, niveles k+1..K apilados
        mollify: P^k(mu) -> P^k(K_delta * mu), emparejamiento rejilla a rejilla
        project: estrella de cada átomo de mu a su hoja de nivel k
        star:    estrella por el origen entre mu y `other`

    Returns:
        BridgeGraph (grafo, costo, cota)
    """
    if kind not in BRIDGE_KINDS:
        raise DomainError(f"Tipo de puente desconocido: {kind}")
    n = m.dim
    beta = _resolve_beta(tau, beta)
    mass = m.total_mass

    if kind == "levels":
        if K is None or not 0 <= k < K:
            raise DomainError(f"El puente de niveles requiere 0 <= k < K (k={k}, K={K})")
        graph = levels_between(nadic_graph(m, K), k, K)
        bound = math.fsum(level_bound(beta, n, j, mass) for j in range(k + 1, K + 1))
    elif kind == "mollify":
        if delta is None or not 0 < delta < 1 or k < 1:
            raise DomainError(f"El puente suavizado requiere 0 < delta < 1 y k >= 1 (delta={delta})")
        smooth = mollify(m, delta)
        _, leaves = klevel_cells(m.positions, k)
        pairs: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], List[float]] = defaultdict(list)
        ends: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Tuple[np.ndarray, np.ndarray]] = {}
        spread = _spread_offsets(n, delta)
        for leaf, pos, w in zip(leaves, m.positions, m.masses.tolist()):
            _, targets = klevel_cells(pos + spread, k)
            for target in targets:
                if np.allclose(target, leaf, atol=SNAP_TOLERANCE):
                    continue
                key = (snap_key(leaf), snap_key(target))
                pairs[key].append(w / len(spread))
                ends[key] = (leaf, target)
        builder = GraphBuilder(n)
        for key in sorted(pairs):
            builder.add_edge(ends[key][0], ends[key][1], math.fsum(pairs[key]))
        graph = builder.build(project_klevel(m, k), project_klevel(smooth, k))
        longest = delta + 2.0 ** (2 - k) * math.sqrt(n)
        bound = _jensen_bound(beta, graph.num_edges, mass, longest)
    elif kind == "project":
        if k < 1:
            raise DomainError(f"La proyección requiere k >= 1 (k={k})")
        graph = projection_graph(m, k)
        bound = _jensen_bound(beta, graph.num_edges, mass, math.sqrt(n) * 2.0 ** (1 - k))
    else:
        if other is None:
            raise DomainError("El puente estrella requiere la medida 'other'")
        graph = star_graph(m, other)
        excess = graph.source.total_mass - _shared_mass(m, other)
        longest = max((graph.edge_length(e) for e in graph.edges), default=0.0)
        bound = _jensen_bound(beta, graph.num_edges, 2.0 * excess, longest)

    cost = graph_cost(graph, tau).total
    _assert_bound(cost, bound, f"Puente {kind}")
    return BridgeGraph(kind, graph, cost, bound)


def _spread_offsets(n: int, delta: float) -> np.ndarray:
    # Mismos desplazamientos que usa mollify alrededor de cada átomo
    probe = mollify(dirac(np.zeros(n)), delta)
    return np.asarray(probe.positions)


def _shared_mass(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    theirs = nu.mass_by_key()
    return math.fsum(min(w, theirs.get(k, 0.0)) for k, w in mu.mass_by_key().items())


def star_graph(mu: DiscreteMeasure, nu: DiscreteMeasure,
               center: Optional[Union[Tuple[float, ...], np.ndarray]] = None) -> TransportGraph:
    """
    G_{mu,nu}: estrella por `center` (origen por defecto) con pesos
    max{0, mu({v}) - nu({v})} hacia el centro y la simétrica desde él.
    """
    check_mass_balance(mu, nu)
    n = mu.dim
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    mine, theirs = mu.mass_by_key(), nu.mass_by_key()
    where = {k: p for k, p in zip(mine, mu.positions)}
    where.update({k: p for k, p in zip(theirs, nu.positions)})
    c_key = snap_key(c)
    builder = GraphBuilder(n)
    for key in sorted(set(mine) | set(theirs)):
        if key == c_key:
            continue
        diff = mine.get(key, 0.0) - theirs.get(key, 0.0)
        if diff > 0:
            builder.add_edge(where[key], c, diff)
        elif diff < 0:
            builder.add_edge(c, where[key], -diff)
    return builder.build(mu, nu)


def projection_graph(m: DiscreteMeasure, k: int) -> TransportGraph:
    """Estrella de cada átomo a la hoja de su celda de nivel k: mu -> P^k(mu)."""
    _, leaves = klevel_cells(m.positions, k)
    builder = GraphBuilder(m.dim)
    for pos, leaf, w in zip(m.positions, leaves, m.masses.tolist()):
        if snap_key(pos) != snap_key(leaf):
            builder.add_edge(pos, leaf, w)
    return builder.build(m, project_klevel(m, k))


def coupling_graph(plus: DiscreteMeasure, minus: DiscreteMeasure) -> TransportGraph:
    """Acoplamiento óptimo de W1 dibujado como grafo: una arista x_i -> y_j por pi_ij > 0."""
    _, plan = wasserstein_coupling(plus, minus)
    builder = GraphBuilder(plus.dim)
    for i, j in zip(*np.nonzero(plan)):
        if snap_key(plus.positions[i]) != snap_key(minus.positions[j]):
            builder.add_edge(plus.positions[i], minus.positions[j], float(plan[i, j]))
    return builder.build(plus, minus)


def nadic_witness(plus: DiscreteMeasure, minus: DiscreteMeasure, k: int) -> TransportGraph:
    """
    Grafo completo mu+ -> mu- por la jerarquía de nivel k.

    Proyecta mu+ a su rejilla, sube y baja por los árboles n-ádicos y
    deshace la proyección de mu-; se construye en coordenadas normalizadas y
    se devuelve en las originales.
    """
    problem = rescale(plus, minus)
    bar_plus, bar_minus = problem.plus, problem.minus
    chain = concatenate(projection_graph(bar_plus, k), connect_nadic(bar_plus, bar_minus, k))
    chain = concatenate(chain, reversed_graph(projection_graph(bar_minus, k)))
    back = scaled(remove_cycles(chain), problem.mass_factor, problem.length_factor)
    return make_graph(back.vertices, [(e.tail, e.head, e.weight) for e in back.edges], plus, minus)
