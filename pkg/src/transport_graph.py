#!/usr/bin/env python3
"""
Caminos de transporte discretos: grafos dirigidos ponderados con medidas
fuente/sumidero, validación de Kirchhoff, costo, eliminación de ciclos,
reducción a árbol, cota de flujo máximo, partición temporal y consolidación
del flujo (energía de Gilbert poliédrica).
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import bisect

from costs import TransportCost, eval_tau, marginal_cost, supergradient
from errors import (ConservationViolation, CyclicGraph, InvalidGraph,
                    NonConcaveCost)
from geometry import as_point, build_arrangement, snap_key
from measures import (DiscreteMeasure, SignedDiscreteMeasure, empty_measure,
                      measure_from_json, measure_to_json, signed_difference,
                      signed_measure, validate_measure, wasserstein1)
from settings import RESIDUAL_TOLERANCE, WEIGHT_EPSILON

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    weight: float


@dataclass(frozen=True, eq=False)
class TransportGraph:
    """
    Camino de transporte discreto G = (V, E, w) entre mu+ (source) y mu- (sink).

    Inmutable; las transformaciones devuelven grafos nuevos.
    """
    vertices: np.ndarray
    edges: Tuple[Edge, ...]
    source: DiscreteMeasure
    sink: DiscreteMeasure

    @property
    def dim(self) -> int:
        return self.source.dim

    @property
    def total_mass(self) -> float:
        return self.source.total_mass

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def point(self, index: int) -> np.ndarray:
        return self.vertices[index]

    def edge_length(self, edge: Edge) -> float:
        return float(np.linalg.norm(self.vertices[edge.head] - self.vertices[edge.tail]))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([self.edge_length(e) for e in self.edges], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.edges], dtype=float)

    def segments(self) -> List[Tuple[np.ndarray, np.ndarray, float]]:
        return [(self.vertices[e.tail], self.vertices[e.head], e.weight) for e in self.edges]

    def mass_scale(self) -> float:
        return max(self.source.total_mass, self.sink.total_mass, 0.0) or 1.0


def make_graph(vertices: Sequence[Sequence[float]],
               edges: Iterable[Tuple[int, int, float]],
               source: DiscreteMeasure,
               sink: DiscreteMeasure) -> TransportGraph:
    """
    Construye un grafo canónico.

    Fusiona vértices coincidentes, descarta aristas de peso cero y vértices
    sin aristas. Las aristas paralelas se conservan por separado.

    Args:
        vertices: Lista de puntos
        edges: Ternas (cola, cabeza, peso)
        source: Medida mu+
        sink: Medida mu-

    Returns:
        TransportGraph canónico
    """
    if source.dim != sink.dim:
        raise InvalidGraph(f"Dimensiones de fuente y sumidero distintas: {source.dim} vs {sink.dim}")
    dim = source.dim
    points = [as_point(v) for v in vertices]
    merged: List[np.ndarray] = []
    by_key: Dict[Tuple[int, ...], int] = {}
    remap: List[int] = []
    for p in points:
        if len(p) != dim:
            raise InvalidGraph(f"Vértice de dimensión {len(p)} en un grafo de dimensión {dim}")
        if not np.all(np.isfinite(p)):
            raise InvalidGraph(f"Vértice no finito: {p.tolist()}")
        key = snap_key(p)
        if key not in by_key:
            by_key[key] = len(merged)
            merged.append(p)
        remap.append(by_key[key])

    kept: List[Tuple[int, int, float]] = []
    for tail, head, weight in edges:
        weight = float(weight)
        if not 0 <= tail < len(points) or not 0 <= head < len(points):
            raise InvalidGraph(f"Arista con índice fuera de rango: ({tail}, {head})")
        if not math.isfinite(weight) or weight < 0:
            raise InvalidGraph(f"Peso inválido {weight} en la arista ({tail}, {head})")
        a, b = remap[tail], remap[head]
        if a == b:
            raise InvalidGraph(f"Arista degenerada de longitud cero en {merged[a].tolist()}")
        if weight > 0.0:
            kept.append((a, b, weight))

    used = sorted({i for a, b, _ in kept for i in (a, b)})
    index = {old: new for new, old in enumerate(used)}
    verts = np.array([merged[i] for i in used], dtype=float).reshape(len(used), dim)
    verts.setflags(write=False)
    return TransportGraph(
        vertices=verts,
        edges=tuple(Edge(index[a], index[b], w) for a, b, w in kept),
        source=source,
        sink=sink,
    )


class GraphBuilder:
    """Acumula aristas por coordenadas y produce un grafo canónico."""

    def __init__(self, dim: int):
        self.dim = dim
        self.points: List[np.ndarray] = []
        self.edges: List[Tuple[int, int, float]] = []
        self._index: Dict[Tuple[int, ...], int] = {}

    def vertex(self, point: Sequence[float]) -> int:
        p = as_point(point)
        key = snap_key(p)
        if key not in self._index:
            self._index[key] = len(self.points)
            self.points.append(p)
        return self._index[key]

    def add_edge(self, tail: Sequence[float], head: Sequence[float], weight: float) -> None:
        if weight > 0:
            self.edges.append((self.vertex(tail), self.vertex(head), float(weight)))

    def build(self, source: DiscreteMeasure, sink: DiscreteMeasure) -> TransportGraph:
        return make_graph(self.points, self.edges, source, sink)


def with_weights(G: TransportGraph, weights: Sequence[float]) -> TransportGraph:
    """Mismo grafo con pesos nuevos (las aristas de peso cero se podan)."""
    return make_graph(G.vertices, [(e.tail, e.head, w) for e, w in zip(G.edges, weights)], G.source, G.sink)


def empty_graph(source: DiscreteMeasure, sink: Optional[DiscreteMeasure] = None) -> TransportGraph:
    return make_graph([], [], source, source if sink is None else sink)


# Kirchhoff

@dataclass(frozen=True)
class Violation:
    point: Tuple[float, ...]
    residual: float


def _vertex_sums(G: TransportGraph, with_measures: bool) -> Tuple[Dict[Tuple[int, ...], List[float]], Dict[Tuple[int, ...], np.ndarray]]:
    sums: Dict[Tuple[int, ...], List[float]] = defaultdict(list)
    where: Dict[Tuple[int, ...], np.ndarray] = {}
    keys = [snap_key(v) for v in G.vertices]
    for key, v in zip(keys, G.vertices):
        sums.setdefault(key, [])
        where.setdefault(key, v)
    for e in G.edges:
        # residuo = salida - entrada (divergencia de F_G)
        sums[keys[e.tail]].append(e.weight)
        sums[keys[e.head]].append(-e.weight)
    if with_measures:
        for p, w in zip(G.source.positions, G.source.masses):
            k = snap_key(p)
            sums[k].append(-float(w))
            where.setdefault(k, p)
        for p, w in zip(G.sink.positions, G.sink.masses):
            k = snap_key(p)
            sums[k].append(float(w))
            where.setdefault(k, p)
    return sums, where


def check_conservation(G: TransportGraph) -> List[Violation]:
    """
    Verifica la conservación de masa en cada vértice y átomo.

    El residuo en v es mu+({v}) + entrada - mu-({v}) - salida.

    Returns:
        Lista de violaciones (vacía si todos los residuos están dentro de
        1e-9 veces la masa total)
    """
    sums, where = _vertex_sums(G, with_measures=True)
    tol = RESIDUAL_TOLERANCE * G.mass_scale()
    violations = []
    for key in sorted(sums):
        residual = -math.fsum(sums[key])
        if abs(residual) > tol:
            violations.append(Violation(tuple(where[key].tolist()), residual))
    return violations


def require_conservation(G: TransportGraph) -> None:
    violations = check_conservation(G)
    if violations:
        worst = max(violations, key=lambda v: abs(v.residual))
        raise ConservationViolation(
            f"Conservación violada en {len(violations)} puntos (peor residuo {worst.residual:.3e})",
            point=list(worst.point), residual=worst.residual,
        )


def divergence(G: TransportGraph) -> SignedDiscreteMeasure:
    """Medida con signo salida - entrada en cada vértice."""
    sums, where = _vertex_sums(G, with_measures=False)
    return signed_measure([(where[k], math.fsum(sums[k])) for k in sorted(sums)], G.dim)


# Costo

@dataclass(frozen=True)
class CostBreakdown:
    parts: Tuple[float, ...]
    total: float

    def to_dict(self) -> Dict[str, Any]:
        return {"total": self.total, "edges": list(self.parts)}


def graph_cost(G: TransportGraph, tau: TransportCost) -> CostBreakdown:
    """Costo sum_e tau(w(e)) l(e) con desglose por arista."""
    parts = tuple(eval_tau(tau, e.weight) * G.edge_length(e) for e in G.edges)
    return CostBreakdown(parts, math.fsum(parts))


def flux_mass(G: TransportGraph) -> float:
    """Masa |F_G|(R^n) = sum_e w(e) l(e)."""
    return math.fsum(e.weight * G.edge_length(e) for e in G.edges)


# Estructura

def _multidigraph(G: TransportGraph) -> nx.MultiDiGraph:
    M = nx.MultiDiGraph()
    M.add_nodes_from(range(len(G.vertices)))
    for i, e in enumerate(G.edges):
        M.add_edge(e.tail, e.head, key=i)
    return M


def is_acyclic(G: TransportGraph) -> bool:
    return nx.is_directed_acyclic_graph(_multidigraph(G))


def loop_rank(G: TransportGraph) -> int:
    """Rango del espacio de ciclos no dirigido |E| - |V| + componentes."""
    if not G.edges:
        return 0
    M = nx.MultiGraph(_multidigraph(G))
    return M.number_of_edges() - M.number_of_nodes() + nx.number_connected_components(M)


def remove_cycles(G: TransportGraph) -> TransportGraph:
    """
    Elimina ciclos dirigidos restando el peso mínimo de cada ciclo.

    Conserva la divergencia y no aumenta el costo para ningún tau no
    decreciente. Los ciclos se buscan en orden determinista de vértices.
    """
    M = _multidigraph(G)
    weights = [e.weight for e in G.edges]
    drained = 0
    while True:
        try:
            cycle = nx.find_cycle(M, source=sorted(M.nodes))
        except nx.NetworkXNoCycle:
            break
        keys = [key for _, _, key in cycle]
        lam = min(weights[k] for k in keys)
        for u, v, key in cycle:
            weights[key] -= lam
            if weights[key] <= 0.0:
                weights[key] = 0.0
                M.remove_edge(u, v, key=key)
        drained += 1
    if drained:
        logger.debug("remove_cycles: %d ciclos drenados", drained)
    return with_weights(G, weights)


def _first_loop(G: TransportGraph, weights: List[float]) -> Optional[List[Tuple[int, int]]]:
    """Primer lazo no dirigido como lista de (índice de arista, signo de recorrido)."""
    alive = [i for i, w in enumerate(weights) if w > 0.0]
    by_pair: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for i in alive:
        e = G.edges[i]
        by_pair[(min(e.tail, e.head), max(e.tail, e.head))].append(i)
    for (u, _), group in sorted(by_pair.items()):
        if len(group) >= 2:
            first, second = group[0], group[1]
            start = G.edges[first].tail
            sign2 = 1 if G.edges[second].head == start else -1
            return [(first, 1), (second, sign2)]

    simple = nx.Graph()
    simple.add_nodes_from(range(len(G.vertices)))
    for (u, v), group in sorted(by_pair.items()):
        simple.add_edge(u, v, index=group[0])
    basis = nx.cycle_basis(simple)
    if not basis:
        return None
    cycle = min(basis, key=lambda c: (len(c), sorted(c)))
    loop = []
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        idx = simple.edges[a, b]["index"]
        loop.append((idx, 1 if G.edges[idx].tail == a else -1))
    return loop


def tree_reduce(G: TransportGraph, tau: TransportCost) -> TransportGraph:
    """
    Reduce el grafo a un bosque con la misma divergencia y costo no mayor.

    Para cada lazo no dirigido se elige la orientación con
    sum_{L+} tau'(w) l <= sum_{L-} tau'(w) l y se desplaza el flujo en
    lambda = min_{L-} w, lo que anula al menos una arista.

    Raises:
        NonConcaveCost: si tau no es cóncavo
    """
    if not tau.is_concave:
        raise NonConcaveCost(f"tree_reduce requiere un costo cóncavo (familia {tau.family})", family=tau.family)
    weights = [e.weight for e in G.edges]
    lengths = G.lengths
    shifts = 0
    while True:
        loop = _first_loop(G, weights)
        if loop is None:
            break
        slope = {i: supergradient(tau, weights[i]) * lengths[i] for i, _ in loop}
        orientation = 1
        plus = [i for i, s in loop if s == orientation]
        minus = [i for i, s in loop if s == -orientation]
        if not minus or math.fsum(slope[i] for i in plus) > math.fsum(slope[i] for i in minus):
            orientation = -1
            plus, minus = minus, plus
        lam = min(weights[i] for i in minus)
        for i in plus:
            weights[i] += lam
        for i in minus:
            weights[i] = 0.0 if weights[i] == lam else weights[i] - lam
        shifts += 1
    if shifts:
        logger.debug("tree_reduce: %d lazos desplazados", shifts)
    return with_weights(G, weights)


def max_flux_bound(G: TransportGraph) -> Tuple[float, bool]:
    """(max_e w(e), max_e w(e) <= masa de la fuente + 1e-9)."""
    if not is_acyclic(G):
        raise CyclicGraph("La cota de flujo máximo requiere un grafo acíclico")
    top = max((e.weight for e in G.edges), default=0.0)
    return top, top <= G.source.total_mass + 1e-9


# Partición temporal

def arrival_times(G: TransportGraph) -> np.ndarray:
    """
    Tiempos t_v = L_in / (L_in + L_out) con caminos geométricos más largos.

    Fuentes en 0, sumideros en 1; estrictamente crecientes a lo largo de
    cada arista.
    """
    M = _multidigraph(G)
    if not nx.is_directed_acyclic_graph(M):
        raise CyclicGraph("La partición temporal requiere un grafo acíclico")
    order = list(nx.lexicographical_topological_sort(M))
    length = G.lengths
    l_in = np.zeros(len(G.vertices))
    l_out = np.zeros(len(G.vertices))
    outgoing: Dict[int, List[int]] = defaultdict(list)
    incoming: Dict[int, List[int]] = defaultdict(list)
    for i, e in enumerate(G.edges):
        outgoing[e.tail].append(i)
        incoming[e.head].append(i)
    for v in order:
        for i in incoming[v]:
            l_in[v] = max(l_in[v], l_in[G.edges[i].tail] + length[i])
    for v in reversed(order):
        for i in outgoing[v]:
            l_out[v] = max(l_out[v], l_out[G.edges[i].head] + length[i])
    span = l_in + l_out
    return np.where(span > 0, l_in / np.where(span > 0, span, 1.0), 0.0)


def _mid_measure(source: DiscreteMeasure, div_plus: SignedDiscreteMeasure, scale: float) -> DiscreteMeasure:
    plus = dict(source.mass_by_key())
    where = {snap_key(p): p for p in source.positions}
    sums: Dict[Tuple[int, ...], List[float]] = defaultdict(list)
    for key, w in plus.items():
        sums[key].append(w)
    for p, w in zip(div_plus.positions, div_plus.masses):
        key = snap_key(p)
        sums[key].append(-float(w))
        where.setdefault(key, p)
    tol = RESIDUAL_TOLERANCE * scale
    atoms = []
    for key in sorted(sums):
        mass = math.fsum(sums[key])
        if mass < -tol:
            raise ConservationViolation(f"Masa intermedia negativa {mass} en {where[key].tolist()}")
        if mass > tol:
            atoms.append((where[key], mass))
    return validate_measure(atoms, dim=source.dim)


def split_at_time(G: TransportGraph, t: float) -> Tuple[TransportGraph, TransportGraph, DiscreteMeasure]:
    """
    Corta el grafo en el nivel temporal t.

    Las aristas que cruzan el nivel se parten en el punto interpolado. G+
    transporta mu+ a la medida intermedia y G- la transporta a mu-; los
    costos se suman exactamente al de G.

    Args:
        G: Grafo acíclico que conserva masa
        t: Tiempo en (0, 1)

    Returns:
        (G+, G-, medida intermedia)
    """
    if not 0.0 < t < 1.0:
        raise InvalidGraph(f"El tiempo de corte debe estar en (0, 1): {t}")
    times = arrival_times(G)
    require_conservation(G)
    before = GraphBuilder(G.dim)
    after = GraphBuilder(G.dim)
    for e in G.edges:
        a, b = G.vertices[e.tail], G.vertices[e.head]
        ta, tb = times[e.tail], times[e.head]
        if tb <= t:
            before.add_edge(a, b, e.weight)
        elif ta >= t:
            after.add_edge(a, b, e.weight)
        else:
            cut = a + (t - ta) / (tb - ta) * (b - a)
            if snap_key(cut) == snap_key(a):
                after.add_edge(a, b, e.weight)
            elif snap_key(cut) == snap_key(b):
                before.add_edge(a, b, e.weight)
            else:
                before.add_edge(a, cut, e.weight)
                after.add_edge(cut, b, e.weight)
    placeholder = empty_measure(G.dim)
    g_plus = before.build(G.source, placeholder)
    mid = _mid_measure(G.source, divergence(g_plus), G.mass_scale())
    g_plus = before.build(G.source, mid)
    g_minus = after.build(mid, G.sink)
    return g_plus, g_minus, mid


def bisect_midpoint(G: TransportGraph, target_fraction: float = 0.5,
                    xtol: float = 1e-13) -> Tuple[float, TransportGraph, TransportGraph, DiscreteMeasure]:
    """
    Busca por bisección t* con W1(mu+, mid(t*)) = target_fraction * W1(mu+, mu-).

    Returns:
        (t*, G+, G-, medida intermedia)
    """
    if not 0.0 < target_fraction < 1.0:
        raise InvalidGraph(f"Fracción objetivo fuera de (0, 1): {target_fraction}")
    total = wasserstein1(G.source, G.sink)
    if total == 0.0 or not G.edges:
        return (0.5,) + split_at_time(G, 0.5)
    goal = target_fraction * total

    def gap(t: float) -> float:
        if t <= 0.0:
            return -goal
        if t >= 1.0:
            return total - goal
        _, _, mid = split_at_time(G, t)
        return wasserstein1(G.source, mid) - goal

    t_star = bisect(gap, 0.0, 1.0, xtol=xtol, maxiter=200)
    t_star = min(max(t_star, 1e-15), 1.0 - 1e-15)
    return (t_star,) + split_at_time(G, t_star)


# Flujo consolidado

@dataclass(frozen=True, eq=False)
class FluxSegment:
    """Segmento orientado con peso vectorial theta paralelo a end - start."""
    start: np.ndarray
    end: np.ndarray
    theta: np.ndarray

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.theta))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))


@dataclass(frozen=True)
class ConsolidatedFlux:
    dim: int
    segments: Tuple[FluxSegment, ...]
    diffuse_mass: float = 0.0

    def divergence(self) -> SignedDiscreteMeasure:
        raw = []
        for seg in self.segments:
            raw.append((seg.start, seg.magnitude))
            raw.append((seg.end, -seg.magnitude))
        return signed_measure(raw, self.dim)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "segments": [{"a": s.start.tolist(), "b": s.end.tolist(), "theta": s.theta.tolist()}
                         for s in self.segments],
            "diffuse_mass": self.diffuse_mass,
        }


def consolidate_segments(segments: Sequence[Tuple[np.ndarray, np.ndarray, float]], dim: int,
                         scale: float = 1.0) -> ConsolidatedFlux:
    """
    Consolida segmentos ponderados orientados en un flujo con interiores disjuntos.

    Las contribuciones colineales superpuestas se suman como vectores; los
    segmentos con peso neto nulo se descartan.
    """
    pieces = build_arrangement([(a, b) for a, b, _ in segments])
    out = []
    for piece in pieces:
        net = math.fsum(sign * segments[idx][2] for idx, sign in piece.contributions)
        if abs(net) <= WEIGHT_EPSILON * scale:
            continue
        if net > 0:
            start, end = piece.start, piece.end
        else:
            start, end = piece.end, piece.start
        theta = abs(net) * (end - start) / piece.length
        out.append(FluxSegment(start.copy(), end.copy(), theta))
    return ConsolidatedFlux(dim=dim, segments=tuple(out), diffuse_mass=0.0)


def consolidate_flux(G: TransportGraph) -> ConsolidatedFlux:
    """Flujo poliédrico F = theta H^1 restringido a S del grafo (parte difusa nula)."""
    return consolidate_segments(G.segments(), G.dim, G.mass_scale())


def gilbert_energy(F: ConsolidatedFlux, tau: TransportCost) -> float:
    """sum_S tau(|theta|) H^1 + tau'(0) |F_perp| (el segundo término es nulo aquí)."""
    energy = math.fsum(eval_tau(tau, s.magnitude) * s.length for s in F.segments)
    return float(marginal_cost(tau, 0.0) * F.diffuse_mass + energy)


# Transformaciones

def reversed_graph(G: TransportGraph) -> TransportGraph:
    """-G: aristas invertidas, fuente y sumidero intercambiados."""
    return make_graph(G.vertices, [(e.head, e.tail, e.weight) for e in G.edges], G.sink, G.source)


def union(G1: TransportGraph, G2: TransportGraph) -> TransportGraph:
    """Superposición: transporta mu1+ + mu2+ a mu1- + mu2-."""
    offset = len(G1.vertices)
    vertices = list(G1.vertices) + list(G2.vertices)
    edges = [(e.tail, e.head, e.weight) for e in G1.edges]
    edges += [(e.tail + offset, e.head + offset, e.weight) for e in G2.edges]
    source = validate_measure(G1.source.atoms() + G2.source.atoms(), dim=G1.dim)
    sink = validate_measure(G1.sink.atoms() + G2.sink.atoms(), dim=G1.dim)
    return make_graph(vertices, edges, source, sink)


def concatenate(G1: TransportGraph, G2: TransportGraph) -> TransportGraph:
    """G1 seguido de G2 (el sumidero de G1 debe ser la fuente de G2)."""
    if not G1.sink.same_as(G2.source, tol=RESIDUAL_TOLERANCE * G1.mass_scale()):
        raise InvalidGraph("El sumidero del primer grafo no coincide con la fuente del segundo")
    both = union(G1, G2)
    return make_graph(both.vertices, [(e.tail, e.head, e.weight) for e in both.edges], G1.source, G2.sink)


def scaled(G: TransportGraph, mass_factor: float = 1.0, length_factor: float = 1.0) -> TransportGraph:
    """Reescala pesos y masas por m y coordenadas por s."""
    return make_graph(
        G.vertices * length_factor,
        [(e.tail, e.head, e.weight * mass_factor) for e in G.edges],
        G.source.scaled(mass_factor, length_factor),
        G.sink.scaled(mass_factor, length_factor),
    )


def divergence_matches(G: TransportGraph) -> bool:
    """True si div F_G = mu+ - mu- dentro de la tolerancia."""
    expected = signed_difference(G.source, G.sink)
    return divergence(G).close_to(expected, RESIDUAL_TOLERANCE * G.mass_scale())


# JSON

def graph_to_json(G: TransportGraph) -> Dict[str, Any]:
    return {
        "vertices": [[repr(float(c)) for c in v] for v in G.vertices.tolist()],
        "edges": [{"t": e.tail, "h": e.head, "w": repr(e.weight)} for e in G.edges],
        "source": measure_to_json(G.source),
        "sink": measure_to_json(G.sink),
    }


def graph_from_json(data: Dict[str, Any]) -> TransportGraph:
    try:
        source = measure_from_json(data["source"])
        sink = measure_from_json(data["sink"])
        vertices = [[float(c) for c in v] for v in data.get("vertices", [])]
        edges = [(int(e["t"]), int(e["h"]), float(e["w"])) for e in data.get("edges", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidGraph(f"Formato de grafo inválido: {exc}") from exc
    return make_graph(vertices, edges, source, sink)
