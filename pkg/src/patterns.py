#!/usr/bin/env python3
"""
Lado lagrangiano a escala discreta: descomposición de grafos acíclicos en
planes de irrigación ponderados, costo de patrones y el flujo de un plan.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from costs import TransportCost, eval_tau, lambda_tau
from errors import ConservationViolation, CyclicGraph, InvalidGraph
from geometry import build_arrangement, segment_distance, segments_overlap, snap_key
from measures import DiscreteMeasure, validate_measure
from settings import RESIDUAL_TOLERANCE, SNAP_TOLERANCE
from transport_graph import (ConsolidatedFlux, TransportGraph,
                             consolidate_segments, is_acyclic,
                             require_conservation)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PlanPath:
    """Trayectoria poligonal de una masa `weight` (un solo punto = estacionaria)."""
    points: np.ndarray
    weight: float

    @property
    def is_stationary(self) -> bool:
        return len(self.points) == 1

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1))) if len(self.points) > 1 else 0.0

    def segments(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.points[:-1], self.points[1:]))


@dataclass(frozen=True)
class IrrigationPlan:
    paths: Tuple[PlanPath, ...]
    dim: int

    @property
    def total_weight(self) -> float:
        return math.fsum(p.weight for p in self.paths)


def make_plan(paths: Sequence[Tuple[Sequence[Sequence[float]], float]], dim: Optional[int] = None) -> IrrigationPlan:
    """
    Construye un plan validado.

    Elimina puntos consecutivos repetidos; un camino que se reduce a un
    punto queda como trayectoria estacionaria.
    """
    out = []
    for pts, weight in paths:
        weight = float(weight)
        arr = np.asarray(pts, dtype=float)
        if arr.ndim != 2 or len(arr) == 0:
            raise InvalidGraph("Cada camino necesita al menos un punto")
        if dim is None:
            dim = arr.shape[1]
        if arr.shape[1] != dim:
            raise InvalidGraph(f"Camino de dimensión {arr.shape[1]} en un plan de dimensión {dim}")
        if not math.isfinite(weight) or weight <= 0:
            raise InvalidGraph(f"Peso de camino inválido: {weight}")
        if not np.all(np.isfinite(arr)):
            raise InvalidGraph("Coordenadas no finitas en un camino")
        kept = [arr[0]]
        for p in arr[1:]:
            if np.linalg.norm(p - kept[-1]) > SNAP_TOLERANCE:
                kept.append(p)
        points = np.array(kept)
        points.setflags(write=False)
        out.append(PlanPath(points, weight))
    if dim is None:
        raise InvalidGraph("No se puede inferir la dimensión de un plan vacío")
    return IrrigationPlan(tuple(out), dim)


def plan_endpoints(plan: IrrigationPlan) -> Tuple[DiscreteMeasure, DiscreteMeasure]:
    """Medidas irrigante (puntos iniciales) e irrigada (puntos finales)."""
    start = validate_measure([(p.points[0], p.weight) for p in plan.paths], dim=plan.dim)
    end = validate_measure([(p.points[-1], p.weight) for p in plan.paths], dim=plan.dim)
    return start, end


def decompose_paths(G: TransportGraph) -> IrrigationPlan:
    """
    Descompone un grafo acíclico en caminos fuente-sumidero ponderados.

    Extracción iterativa: desde el átomo fuente con más masa pendiente se
    sigue en cada vértice la opción de mayor residuo (el arco al sumidero
    incluido, orden de índices en empates) y se resta el cuello de botella.

    Returns:
        IrrigationPlan con w(e) = suma de los pesos de los caminos que usan e
    """
    if not is_acyclic(G):
        raise CyclicGraph("La descomposición en caminos requiere un grafo acíclico")
    require_conservation(G)

    points: List[np.ndarray] = list(G.vertices)
    index = {snap_key(p): i for i, p in enumerate(points)}
    for pos in list(G.source.positions) + list(G.sink.positions):
        key = snap_key(pos)
        if key not in index:
            index[key] = len(points)
            points.append(pos)
    supply = [0.0] * len(points)
    demand = [0.0] * len(points)
    for pos, w in zip(G.source.positions, G.source.masses.tolist()):
        supply[index[snap_key(pos)]] += w
    for pos, w in zip(G.sink.positions, G.sink.masses.tolist()):
        demand[index[snap_key(pos)]] += w

    residual = [e.weight for e in G.edges]
    outgoing: Dict[int, List[int]] = defaultdict(list)
    for i, e in enumerate(G.edges):
        outgoing[e.tail].append(i)
    # Misma tolerancia que require_conservation
    tol = RESIDUAL_TOLERANCE * G.mass_scale()
    slack = tol * max(1, len(points))
    paths: List[Tuple[List[np.ndarray], float]] = []

    for _ in range(len(G.edges) + 2 * len(points) + 1):
        start = max(range(len(points)), key=lambda v: (supply[v], -v))
        if supply[start] <= tol:
            break
        route_vertices = [start]
        route_edges: List[int] = []
        v = start
        dead_end = False
        while True:
            best_edge, best_value = None, demand[v]
            for i in outgoing[v]:
                if residual[i] > best_value:
                    best_edge, best_value = i, residual[i]
            if best_edge is None:
                dead_end = demand[v] <= tol
                break
            route_edges.append(best_edge)
            v = G.edges[best_edge].head
            route_vertices.append(v)
        if dead_end:
            leftover = min([supply[start]] + [residual[i] for i in route_edges])
            if leftover > slack:
                raise ConservationViolation(f"Camino sin salida en {points[v].tolist()}",
                                            point=points[v].tolist(), residual=leftover)
            # Residuo de redondeo: se descarta sin crear camino
            supply[start] = _drain(supply[start], leftover, slack)
            for i in route_edges:
                residual[i] = _drain(residual[i], leftover, slack)
            continue
        bottleneck = min([supply[start], demand[v]] + [residual[i] for i in route_edges])
        supply[start] = _drain(supply[start], bottleneck, tol)
        demand[v] = _drain(demand[v], bottleneck, tol)
        for i in route_edges:
            residual[i] = _drain(residual[i], bottleneck, tol)
        paths.append(([points[u] for u in route_vertices], bottleneck))

    logger.debug("decompose_paths: %d caminos", len(paths))
    return make_plan(paths, dim=G.dim)


def _drain(value: float, amount: float, tol: float) -> float:
    left = value - amount
    return 0.0 if left <= tol else left


def _traversals(plan: IrrigationPlan) -> List[Tuple[np.ndarray, np.ndarray, int]]:
    return [(a, b, p) for p, path in enumerate(plan.paths) for a, b in path.segments()]


@dataclass(frozen=True, eq=False)
class DensitySegment:
    start: np.ndarray
    end: np.ndarray
    multiplicity: float
    theta: np.ndarray

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))


@dataclass(frozen=True)
class FluxDensityField:
    dim: int
    segments: Tuple[DensitySegment, ...]

    def max_excess(self) -> float:
        """max(|theta| - m) sobre los segmentos (<= 0 si |theta| <= m en todos)."""
        return max((float(np.linalg.norm(s.theta)) - s.multiplicity for s in self.segments), default=0.0)


def flux_density(plan: IrrigationPlan) -> FluxDensityField:
    """
    Multiplicidad m (masa total de caminos que cruzan cada pieza, contada una
    vez por camino) y flujo neto theta por pieza del arreglo.
    """
    trav = _traversals(plan)
    pieces = build_arrangement([(a, b) for a, b, _ in trav])
    out = []
    for piece in pieces:
        owners = sorted({trav[i][2] for i, _ in piece.contributions})
        mult = math.fsum(plan.paths[p].weight for p in owners)
        net = math.fsum(sign * plan.paths[trav[i][2]].weight for i, sign in piece.contributions)
        out.append(DensitySegment(piece.start, piece.end, mult, net * piece.direction))
    return FluxDensityField(plan.dim, tuple(out))


def pattern_cost(plan: IrrigationPlan, tau: TransportCost) -> float:
    """
    Costo del plan en forma integral.

    Cada recorrido de un camino de peso w por una pieza de longitud l paga
    w * l * r^tau(m), con m la multiplicidad de la pieza. Para planes sin
    lazos coincide con la forma de Gilbert sum tau(m) l.
    """
    trav = _traversals(plan)
    if not trav:
        return 0.0
    pieces = build_arrangement([(a, b) for a, b, _ in trav])
    parts = []
    for piece in pieces:
        owners = {trav[i][2] for i, _ in piece.contributions}
        mult = math.fsum(plan.paths[p].weight for p in sorted(owners))
        rate = eval_tau(tau, mult) / mult
        for i, _ in piece.contributions:
            parts.append(plan.paths[trav[i][2]].weight * piece.length * rate)
    return math.fsum(parts)


def flux_of_plan(plan: IrrigationPlan) -> ConsolidatedFlux:
    """Flujo vectorial del plan: cada recorrido aporta peso por dirección."""
    segments = [(a, b, plan.paths[p].weight) for a, b, p in _traversals(plan)]
    return consolidate_segments(segments, plan.dim, max(1.0, plan.total_weight))


def check_loop_free(plan: IrrigationPlan) -> bool:
    """True si toda trayectoria es inyectiva (ningún punto revisitado)."""
    for path in plan.paths:
        segs = path.segments()
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                a1, b1 = segs[i]
                a2, b2 = segs[j]
                if j == i + 1:
                    if segments_overlap(a1, b1, a2, b2) and float(np.dot(b1 - a1, b2 - a2)) < 0:
                        return False
                elif segment_distance(a1, b1, a2, b2) <= SNAP_TOLERANCE:
                    return False
    return True


def trace_length(plan: IrrigationPlan, index: int) -> float:
    """H^1 de la imagen del camino `index` (piezas recorridas contadas una vez)."""
    path = plan.paths[index]
    if path.is_stationary:
        return 0.0
    pieces = build_arrangement(path.segments())
    return math.fsum(p.length for p in pieces)


def path_length_bound(plan: IrrigationPlan, tau: TransportCost) -> Tuple[float, float, bool]:
    """
    Comprueba costo >= lambda^tau(M) sum_p w_p H^1(traza_p).

    Returns:
        (costo del plan, cota inferior, se cumple)
    """
    cost = pattern_cost(plan, tau)
    mass = plan.total_weight
    if mass <= 0:
        return cost, 0.0, True
    lam = lambda_tau(tau, mass)
    bound = lam * math.fsum(p.weight * trace_length(plan, i) for i, p in enumerate(plan.paths))
    return cost, bound, cost >= bound - 1e-9 * max(1.0, bound)


def plan_to_json(plan: IrrigationPlan) -> Dict[str, Any]:
    return {
        "dim": plan.dim,
        "paths": [{"pts": [[repr(float(c)) for c in p] for p in path.points.tolist()], "w": repr(path.weight)}
                  for path in plan.paths],
    }


def plan_from_json(data: Dict[str, Any]) -> IrrigationPlan:
    try:
        paths = [([[float(c) for c in p] for p in item["pts"]], float(item["w"])) for item in data["paths"]]
        dim = data.get("dim")
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidGraph(f"Formato de plan inválido: {exc}") from exc
    return make_plan(paths, dim=None if dim is None else int(dim))
