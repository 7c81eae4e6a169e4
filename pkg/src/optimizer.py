#!/usr/bin/env python3
"""
Búsqueda de grafos de transporte de bajo costo entre medidas atómicas:
búsqueda local de topologías con optimización geométrica de los puntos de
ramificación, más un oráculo de fuerza bruta para instancias pequeñas.
"""

import itertools
import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import minimize_scalar

from costs import TransportCost, breakpoints, eval_tau
from errors import ConfigError, InvalidGraph, TooLarge
from geometry import snap_key
from hierarchy import coupling_graph, nadic_witness, star_graph
from measures import DiscreteMeasure, check_mass_balance, signed_difference
from settings import (ACCEPT_HYSTERESIS, ARMIJO_CONSTANT, DEFAULT_THREADS,
                      DESCENT_GRADIENT_TOLERANCE, DESCENT_MAX_ITERATIONS,
                      DESCENT_STEP, GOLDEN_SECTION_TOLERANCE, MERGE_RADIUS,
                      OPTIMIZER_MAX_ITERATIONS, OPTIMIZER_RESTARTS,
                      ORACLE_DESCENT_STARTS, ORACLE_MAX_ATOMS,
                      ORACLE_MAX_STEINER, THREADS_ENV, WEIGHT_EPSILON)
from transport_graph import (TransportGraph, graph_cost, loop_rank, make_graph,
                             remove_cycles, tree_reduce)

logger = logging.getLogger(__name__)

MOVES = ("steiner", "merge", "reroute", "loop_shift", "loop_create")

Layout = Tuple[np.ndarray, List[Tuple[int, int, float]]]


@dataclass(frozen=True)
class OptimizerConfig:
    """Parámetros de la búsqueda local (todos los topes deben ser positivos)."""
    restarts: int = OPTIMIZER_RESTARTS
    max_iterations: int = OPTIMIZER_MAX_ITERATIONS
    descent_iterations: int = DESCENT_MAX_ITERATIONS
    descent_step: float = DESCENT_STEP
    gradient_tolerance: float = DESCENT_GRADIENT_TOLERANCE
    merge_radius: float = MERGE_RADIUS
    hysteresis: float = ACCEPT_HYSTERESIS
    nadic_levels: int = 3
    moves: Tuple[str, ...] = MOVES
    seed: int = 0
    threads: Optional[int] = None

    def __post_init__(self):
        caps = (self.restarts, self.max_iterations, self.descent_iterations, self.nadic_levels)
        if any(int(c) < 1 for c in caps):
            raise ConfigError("Los topes del optimizador deben ser positivos")
        if not (self.descent_step > 0 and self.merge_radius >= 0 and self.hysteresis >= 0):
            raise ConfigError("Pasos y tolerancias del optimizador inválidos")
        unknown = set(self.moves) - set(MOVES)
        if unknown:
            raise ConfigError(f"Movimientos desconocidos: {sorted(unknown)}")

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        try:
            return max(1, int(os.environ.get(THREADS_ENV, DEFAULT_THREADS)))
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} debe ser un entero") from exc


@dataclass(frozen=True)
class OracleResult:
    graph: TransportGraph
    cost: float
    topologies: int


# Evaluación vectorizada

def _layout_cost(points: np.ndarray, tails: np.ndarray, heads: np.ndarray, coeffs: np.ndarray) -> float:
    if len(tails) == 0:
        return 0.0
    return float(np.dot(coeffs, np.linalg.norm(points[heads] - points[tails], axis=1)))


def descend(points: np.ndarray, free: Sequence[int], tails: np.ndarray, heads: np.ndarray,
            coeffs: np.ndarray, config: OptimizerConfig) -> np.ndarray:
    """
    Descenso de posiciones libres con gradiente por diferencias centrales y
    retroceso de Armijo. Los pesos (y por tanto tau(w)) quedan fijos.
    """
    free = list(free)
    if not free or len(tails) == 0:
        return points
    base = points.copy()
    z = base[free].reshape(-1)
    h = config.descent_step
    span = float(np.max(np.ptp(base, axis=0))) or 1.0

    def f(flat: np.ndarray) -> float:
        base[free] = flat.reshape(len(free), -1)
        return _layout_cost(base, tails, heads, coeffs)

    value = f(z)
    for _ in range(config.descent_iterations):
        grad = np.empty_like(z)
        for i in range(len(z)):
            bump = np.zeros_like(z)
            bump[i] = h
            grad[i] = (f(z + bump) - f(z - bump)) / (2.0 * h)
        norm2 = float(grad @ grad)
        if math.sqrt(norm2) < config.gradient_tolerance:
            break
        t = span / math.sqrt(norm2)
        accepted = False
        while t * math.sqrt(norm2) > 1e-14 * span:
            trial = z - t * grad
            trial_value = f(trial)
            if trial_value <= value - ARMIJO_CONSTANT * t * norm2:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        gain = value - trial_value
        z, value = trial, trial_value
        if gain <= 1e-15 * max(1.0, value):
            break
    base[free] = z.reshape(len(free), -1)
    return base


# Forma canónica de trabajo

class _Problem:
    """Datos fijos de una instancia: terminales, ofertas y costo."""

    def __init__(self, plus: DiscreteMeasure, minus: DiscreteMeasure, tau: TransportCost,
                 config: OptimizerConfig):
        self.plus = plus
        self.minus = minus
        self.tau = tau
        self.config = config
        self.mass = check_mass_balance(plus, minus)
        self.dim = plus.dim
        self.supply = {snap_key(p): w for p, w in signed_difference(plus, minus).atoms()}
        self.terminals: Set[Tuple[int, ...]] = set(plus.mass_by_key()) | set(minus.mass_by_key())
        self.tol = WEIGHT_EPSILON * max(1.0, self.mass)

    def canonical(self, points: np.ndarray, edges: Sequence[Tuple[int, int, float]]) -> TransportGraph:
        """Fusiona vértices, combina aristas paralelas/antiparalelas y drena ciclos."""
        keys = [snap_key(p) for p in points]
        first: Dict[Tuple[int, ...], int] = {}
        remap = []
        for i, k in enumerate(keys):
            first.setdefault(k, i)
            remap.append(first[k])
        flow: Dict[Tuple[int, int], List[float]] = defaultdict(list)
        for t, h, w in edges:
            a, b = remap[t], remap[h]
            if a == b or w <= 0:
                continue
            if a < b:
                flow[(a, b)].append(w)
            else:
                flow[(b, a)].append(-w)
        merged = []
        for (a, b), parts in sorted(flow.items()):
            net = math.fsum(parts)
            if net > self.tol:
                merged.append((a, b, net))
            elif net < -self.tol:
                merged.append((b, a, -net))
        return remove_cycles(make_graph(points, merged, self.plus, self.minus))

    def free_vertices(self, G: TransportGraph) -> List[int]:
        return [i for i, v in enumerate(G.vertices) if snap_key(v) not in self.terminals]

    def polish(self, G: TransportGraph) -> TransportGraph:
        free = self.free_vertices(G)
        if not free:
            return G
        tails = np.array([e.tail for e in G.edges], dtype=int)
        heads = np.array([e.head for e in G.edges], dtype=int)
        coeffs = np.array([eval_tau(self.tau, e.weight) for e in G.edges])
        moved = descend(np.array(G.vertices, dtype=float), free, tails, heads, coeffs, self.config)
        return self.canonical(moved, [(e.tail, e.head, e.weight) for e in G.edges])

    def cost(self, G: TransportGraph) -> float:
        return graph_cost(G, self.tau).total


def tree_flows(num_vertices: int, pairs: Sequence[Tuple[int, int]], supply: Sequence[float],
               tol: float = 1e-12) -> Optional[List[Tuple[int, int, float]]]:
    """
    Flujos de un bosque determinados por conservación.

    Returns:
        Aristas orientadas (cola, cabeza, peso), o None si alguna componente
        no está balanceada
    """
    T = nx.Graph()
    T.add_nodes_from(range(num_vertices))
    T.add_edges_from(pairs)
    if T.number_of_edges() != len(pairs) or not nx.is_forest(T):
        raise InvalidGraph("Los flujos por conservación requieren un bosque")
    sub = [float(s) for s in supply]
    out = []
    scale = max([1.0] + [abs(s) for s in sub])
    for comp in sorted(nx.connected_components(T), key=min):
        root = min(comp)
        if abs(math.fsum(sub[v] for v in comp)) > tol * scale:
            return None
        parent = nx.dfs_predecessors(T, root)
        for v in nx.dfs_postorder_nodes(T, root):
            if v == root:
                continue
            p = parent[v]
            f = sub[v]
            if f > tol * scale:
                out.append((v, p, f))
            elif f < -tol * scale:
                out.append((p, v, -f))
            sub[p] += sub[v]
    return out


# Búsqueda unidimensional del desplazamiento de un lazo

def _shift_search(cost_of: Callable[[float], float], lam_max: float, levels: Sequence[float],
                  concave: bool) -> Tuple[float, float]:
    """Mejor lambda en (0, lam_max] entre quiebres, fracciones y sección dorada."""
    candidates = {lam_max}
    if not concave:
        candidates.update(lam_max * f for f in (0.25, 0.5, 0.75))
        candidates.update(l for l in levels if 0 < l <= lam_max)
        if lam_max > GOLDEN_SECTION_TOLERANCE:
            res = minimize_scalar(cost_of, bounds=(0.0, lam_max), method="bounded",
                                  options={"xatol": GOLDEN_SECTION_TOLERANCE})
            if 0 < res.x <= lam_max:
                candidates.add(float(res.x))
    best = min(sorted(candidates), key=cost_of)
    return best, cost_of(best)


def _loop_candidates(lam_max: float, weights: Sequence[float], signs: Sequence[int],
                     tau: TransportCost) -> List[float]:
    levels = breakpoints(tau, max(weights) + lam_max if weights else lam_max)
    out = list(levels)
    for w, s in zip(weights, signs):
        for b in levels:
            out.append(b - w if s > 0 else w - b)
        if s < 0:
            out.append(w)
    return out


# Movimientos

def _incident(G: TransportGraph) -> Tuple[Dict[int, List[int]], Dict[int, List[int]]]:
    out_edges: Dict[int, List[int]] = defaultdict(list)
    in_edges: Dict[int, List[int]] = defaultdict(list)
    for i, e in enumerate(G.edges):
        out_edges[e.tail].append(i)
        in_edges[e.head].append(i)
    return out_edges, in_edges


def _edge_list(G: TransportGraph) -> List[Tuple[int, int, float]]:
    return [(e.tail, e.head, e.weight) for e in G.edges]


def move_steiner(G: TransportGraph, problem: _Problem) -> Iterator[Layout]:
    """Separa dos aristas con la misma orientación en un vértice mediante un punto de Steiner."""
    out_edges, in_edges = _incident(G)
    for v in range(len(G.vertices)):
        for group, outgoing in ((out_edges[v], True), (in_edges[v], False)):
            for i, j in itertools.combinations(group, 2):
                ei, ej = G.edges[i], G.edges[j]
                far_i = G.vertices[ei.head if outgoing else ei.tail]
                far_j = G.vertices[ej.head if outgoing else ej.tail]
                s = G.vertices[v] + (0.5 * (far_i + far_j) - G.vertices[v]) / 3.0
                points = np.vstack([G.vertices, s])
                sid = len(G.vertices)
                edges = []
                for k, e in enumerate(G.edges):
                    if k == i or k == j:
                        edges.append((sid, e.head, e.weight) if outgoing else (e.tail, sid, e.weight))
                    else:
                        edges.append((e.tail, e.head, e.weight))
                joint = ei.weight + ej.weight
                edges.append((v, sid, joint) if outgoing else (sid, v, joint))
                yield points, edges


def move_merge(G: TransportGraph, problem: _Problem) -> Iterator[Layout]:
    """Funde pares de vértices (al menos uno libre) a distancia menor que el radio."""
    free = set(problem.free_vertices(G))
    radius = problem.config.merge_radius
    for i, j in itertools.combinations(range(len(G.vertices)), 2):
        if i not in free and j not in free:
            continue
        if float(np.linalg.norm(G.vertices[i] - G.vertices[j])) > radius:
            continue
        points = np.array(G.vertices, dtype=float)
        if i in free and j in free:
            points[i] = points[j] = 0.5 * (points[i] + points[j])
        elif i in free:
            points[i] = points[j]
        else:
            points[j] = points[i]
        yield points, _edge_list(G)


def move_reroute(G: TransportGraph, problem: _Problem) -> Iterator[Layout]:
    """
    Reengancha un terminal hoja a otro vértice o a un punto interior de otra
    arista; los flujos del árbol nuevo se recalculan por conservación.
    """
    if loop_rank(G) != 0:
        return
    degree: Dict[int, int] = defaultdict(int)
    for e in G.edges:
        degree[e.tail] += 1
        degree[e.head] += 1
    pairs = [(e.tail, e.head) for e in G.edges]
    for t in range(len(G.vertices)):
        if degree[t] != 1 or snap_key(G.vertices[t]) not in problem.terminals:
            continue
        drop = next(k for k, (a, b) in enumerate(pairs) if t in (a, b))
        rest = [p for k, p in enumerate(pairs) if k != drop]
        targets: List[Tuple[np.ndarray, List[Tuple[int, int]]]] = []
        for y in range(len(G.vertices)):
            if y != t and (t, y) != pairs[drop] and (y, t) != pairs[drop]:
                targets.append((G.vertices, rest + [(t, y)]))
        for k, (a, b) in enumerate(rest):
            pa, pb = G.vertices[a], G.vertices[b]
            d = pb - pa
            u = float((G.vertices[t] - pa) @ d) / float(d @ d)
            if not 0.05 < u < 0.95:
                continue
            points = np.vstack([G.vertices, pa + u * d])
            mid = len(G.vertices)
            split = [p for q, p in enumerate(rest) if q != k] + [(a, mid), (mid, b), (t, mid)]
            targets.append((points, split))
        for points, tree in targets:
            supply = [problem.supply.get(snap_key(p), 0.0) for p in points]
            flows = tree_flows(len(points), tree, supply)
            if flows is not None:
                yield points, flows


def _loop_edges(G: TransportGraph) -> List[List[Tuple[int, int]]]:
    simple = nx.Graph()
    simple.add_nodes_from(range(len(G.vertices)))
    for i, e in enumerate(G.edges):
        simple.add_edge(e.tail, e.head, index=i)
    loops = []
    for cycle in sorted(nx.cycle_basis(simple), key=lambda c: (len(c), sorted(c))):
        loop = []
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            idx = simple.edges[a, b]["index"]
            loop.append((idx, 1 if G.edges[idx].tail == a else -1))
        loops.append(loop)
    return loops


def move_loop_shift(G: TransportGraph, problem: _Problem) -> Iterator[Layout]:
    """Desplaza flujo alrededor de lazos existentes en ambas orientaciones."""
    tau = problem.tau
    lengths = G.lengths
    for loop in _loop_edges(G):
        for orientation in (1, -1):
            plus = [i for i, s in loop if s == orientation]
            minus = [i for i, s in loop if s == -orientation]
            if not minus:
                continue
            lam_max = min(G.edges[i].weight for i in minus)
            idx = plus + minus
            signs = [1] * len(plus) + [-1] * len(minus)
            weights = [G.edges[i].weight for i in idx]

            def cost_of(lam: float, idx=idx, signs=signs, weights=weights) -> float:
                return math.fsum(eval_tau(tau, max(0.0, w + s * lam)) * lengths[i]
                                 for i, s, w in zip(idx, signs, weights))

            levels = _loop_candidates(lam_max, weights, signs, tau)
            lam, _ = _shift_search(cost_of, lam_max, levels, tau.is_concave)
            edges = _edge_list(G)
            for i, s in zip(idx, signs):
                t, h, w = edges[i]
                edges[i] = (t, h, 0.0 if s < 0 and w == lam else w + s * lam)
            yield np.array(G.vertices, dtype=float), edges


def move_loop_create(G: TransportGraph, problem: _Problem) -> Iterator[Layout]:
    """
    Crea un lazo entre dos aristas de orientación similar: añade los
    conectores entre sus colas y entre sus cabezas y desplaza lambda de una
    arista a la otra.
    """
    tau = problem.tau
    lengths = G.lengths
    for i, j in itertools.permutations(range(len(G.edges)), 2):
        ei, ej = G.edges[i], G.edges[j]
        if len({ei.tail, ei.head, ej.tail, ej.head}) < 4:
            continue
        di = G.vertices[ei.head] - G.vertices[ei.tail]
        dj = G.vertices[ej.head] - G.vertices[ej.tail]
        if float(di @ dj) <= 0:
            continue
        c_tail = float(np.linalg.norm(G.vertices[ei.tail] - G.vertices[ej.tail]))
        c_head = float(np.linalg.norm(G.vertices[ei.head] - G.vertices[ej.head]))
        wi, wj = ei.weight, ej.weight

        def cost_of(lam: float, wi=wi, wj=wj, li=lengths[i], lj=lengths[j],
                    connectors=c_tail + c_head) -> float:
            return (eval_tau(tau, lam) * connectors + eval_tau(tau, wi + lam) * li
                    + eval_tau(tau, max(0.0, wj - lam)) * lj)

        levels = _loop_candidates(wj, [0.0, wi, wj], [1, 1, -1], tau)
        lam, value = _shift_search(cost_of, wj, levels, tau.is_concave)
        if value >= cost_of(0.0):
            continue
        edges = _edge_list(G)
        edges[i] = (ei.tail, ei.head, wi + lam)
        edges[j] = (ej.tail, ej.head, 0.0 if lam == wj else wj - lam)
        edges.append((ej.tail, ei.tail, lam))
        edges.append((ei.head, ej.head, lam))
        yield np.array(G.vertices, dtype=float), edges


_MOVE_TABLE = {
    "steiner": move_steiner,
    "merge": move_merge,
    "reroute": move_reroute,
    "loop_shift": move_loop_shift,
    "loop_create": move_loop_create,
}


# Búsqueda local

def _local_search(start: TransportGraph, problem: _Problem, rng: np.random.Generator,
                  perturb: bool) -> Tuple[TransportGraph, float]:
    config = problem.config
    G = problem.canonical(np.array(start.vertices, dtype=float), _edge_list(start))
    if perturb:
        free = problem.free_vertices(G)
        if free:
            points = np.array(G.vertices, dtype=float)
            points[free] += rng.normal(scale=0.05 * max(1e-3, float(np.max(np.ptp(points, axis=0)))),
                                       size=points[free].shape)
            moved = problem.canonical(points, _edge_list(G))
            if problem.cost(moved) < problem.cost(G):
                G = moved
    polished = problem.polish(G)
    cost = problem.cost(G)
    if problem.cost(polished) < cost:
        G, cost = polished, problem.cost(polished)

    for iteration in range(config.max_iterations):
        improved = False
        for name in config.moves:
            for points, edges in _MOVE_TABLE[name](G, problem):
                try:
                    candidate = problem.polish(problem.canonical(points, edges))
                except InvalidGraph:
                    continue
                value = problem.cost(candidate)
                if value < cost - config.hysteresis * max(1.0, cost):
                    logger.debug("Movimiento %s aceptado: %.12g -> %.12g", name, cost, value)
                    G, cost = candidate, value
                    improved = True
                    break
            if improved:
                break
        if not improved:
            break
    return G, cost


def initial_candidates(plus: DiscreteMeasure, minus: DiscreteMeasure, tau: TransportCost,
                       nadic_levels: int) -> List[Tuple[str, TransportGraph]]:
    """Grafos iniciales: acoplamiento W1, estrellas y el mejor testigo n-ádico."""
    barycenter = np.average(plus.positions, axis=0, weights=plus.masses) if len(plus) else None
    out = [
        ("coupling", coupling_graph(plus, minus)),
        ("star_barycenter", star_graph(plus, minus, center=barycenter)),
        ("star_origin", star_graph(plus, minus)),
    ]
    nadic = [nadic_witness(plus, minus, k) for k in range(1, nadic_levels + 1)]
    out.append(("nadic", min(nadic, key=lambda g: graph_cost(g, tau).total)))
    return out


def optimize(plus: DiscreteMeasure, minus: DiscreteMeasure, tau: TransportCost,
             config: Optional[OptimizerConfig] = None) -> TransportGraph:
    """
    Busca un grafo de transporte de bajo costo de mu+ a mu-.

    Cada reinicio parte de un candidato inicial (los reinicios extra con
    una perturbación sembrada) y aplica movimientos aceptando solo mejoras
    estrictas. Los reinicios corren en paralelo y se reducen de forma
    determinista; el resultado se libera de ciclos y, si tau es cóncavo, se
    reduce a árbol.

    Returns:
        TransportGraph que conserva masa, acíclico
    """
    config = config or OptimizerConfig()
    problem = _Problem(plus, minus, tau, config)
    if problem.mass == 0:
        return make_graph([], [], plus, minus)
    starts = initial_candidates(plus, minus, tau, config.nadic_levels)
    runs = max(config.restarts, len(starts))

    def run(r: int) -> Tuple[float, int, TransportGraph]:
        rng = np.random.default_rng([config.seed, r])
        _, start = starts[r % len(starts)]
        G, cost = _local_search(start, problem, rng, perturb=r >= len(starts))
        return cost, r, G

    workers = min(runs, config.worker_count())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(runs)))
    else:
        results = [run(r) for r in range(runs)]
    cost, best_run, best = min(results, key=lambda item: (item[0], item[1]))
    logger.info("Optimizador: %d reinicios, mejor costo %.12g (reinicio %d, inicio %s)",
                runs, cost, best_run, starts[best_run % len(starts)][0])

    best = remove_cycles(best)
    if tau.is_concave:
        best = tree_reduce(best, tau)
    return best


# Oráculo de fuerza bruta

def _unique_trees(num_terminals: int, steiner: int) -> Iterator[List[Tuple[int, int]]]:
    total = num_terminals + steiner
    if total == 1:
        yield []
        return
    if total == 2:
        if steiner == 0:
            yield [(0, 1)]
        return
    seen = set()
    for seq in itertools.product(range(total), repeat=total - 2):
        # Cada punto de Steiner necesita grado >= 3 (aparece al menos dos veces)
        if any(seq.count(s) < 2 for s in range(num_terminals, total)):
            continue
        tree = nx.from_prufer_sequence(list(seq))
        edges = sorted(tuple(sorted(e)) for e in tree.edges)
        relabel = tuple(edges)
        if steiner == 2:
            swap = {num_terminals: num_terminals + 1, num_terminals + 1: num_terminals}
            alt = tuple(sorted(tuple(sorted((swap.get(a, a), swap.get(b, b)))) for a, b in edges))
            relabel = min(relabel, alt)
        if relabel in seen:
            continue
        seen.add(relabel)
        yield edges


def _orient(pairs: Sequence[Tuple[int, int]], signed: Sequence[float], tol: float) -> List[Tuple[int, int, float]]:
    out = []
    for (a, b), f in zip(pairs, signed):
        if f > tol:
            out.append((a, b, f))
        elif f < -tol:
            out.append((b, a, -f))
    return out


def _unicyclic_best(points: np.ndarray, tree: List[Tuple[int, int]], extra: Tuple[int, int],
                    supply: Sequence[float], tau: TransportCost, mass: float,
                    tol: float) -> Optional[Tuple[float, List[Tuple[int, int, float]]]]:
    base = tree_flows(len(points), tree, supply)
    if base is None:
        return None
    pairs = list(tree) + [extra]
    signed = []
    for a, b in pairs:
        f = 0.0
        for t, h, w in base:
            if (t, h) == (a, b):
                f = w
            elif (t, h) == (b, a):
                f = -w
        signed.append(f)
    T = nx.Graph(tree)
    path = nx.shortest_path(T, extra[1], extra[0])
    direction = [0] * len(pairs)
    direction[-1] = 1
    for u, v in zip(path, path[1:]):
        k = next(i for i, p in enumerate(pairs[:-1]) if set(p) == {u, v})
        direction[k] = 1 if pairs[k] == (u, v) else -1
    lengths = [float(np.linalg.norm(points[b] - points[a])) for a, b in pairs]
    cycle = [k for k, d in enumerate(direction) if d]

    def cost_of(lam: float) -> float:
        return math.fsum(eval_tau(tau, abs(signed[k] + direction[k] * lam)) * lengths[k] for k in cycle)

    levels = breakpoints(tau, 2.0 * mass)
    candidates = {0.0}
    for k in cycle:
        d, f = direction[k], signed[k]
        candidates.add(-f / d)
        for b in levels:
            candidates.add((b - f) / d)
            candidates.add((-b - f) / d)
    res = minimize_scalar(cost_of, bounds=(-mass, mass), method="bounded",
                          options={"xatol": GOLDEN_SECTION_TOLERANCE})
    candidates.add(float(res.x))
    lam = min(sorted(c for c in candidates if -mass <= c <= mass), key=cost_of)
    flows = [f + d * lam for f, d in zip(signed, direction)]
    total = math.fsum(eval_tau(tau, abs(f)) * l for f, l in zip(flows, lengths))
    return total, _orient(pairs, flows, tol)


def brute_force_oracle(plus: DiscreteMeasure, minus: DiscreteMeasure, tau: TransportCost,
                       max_steiner: int = ORACLE_MAX_STEINER, seed: int = 0,
                       config: Optional[OptimizerConfig] = None) -> OracleResult:
    """
    Enumera topologías pequeñas y optimiza cada una.

    Árboles sobre los terminales más hasta `max_steiner` puntos libres de
    grado >= 3 (flujos por conservación, posiciones por descenso multi-inicio
    y prueba de colapsar cada punto libre sobre un vértice), y, sin puntos
    libres, topologías con un lazo cuyo flujo se optimiza sobre lambda.

    Raises:
        TooLarge: más de 5 átomos o más de 2 puntos de Steiner
    """
    config = config or OptimizerConfig(seed=seed)
    problem = _Problem(plus, minus, tau, config)
    terminals = sorted(problem.terminals)
    if len(terminals) > ORACLE_MAX_ATOMS or max_steiner > ORACLE_MAX_STEINER or max_steiner < 0:
        raise TooLarge(f"Oráculo limitado a {ORACLE_MAX_ATOMS} átomos y {ORACLE_MAX_STEINER} puntos de Steiner",
                       atoms=len(terminals), max_steiner=max_steiner)
    where = {snap_key(p): p for p in list(plus.positions) + list(minus.positions)}
    term_points = np.array([where[k] for k in terminals], dtype=float).reshape(len(terminals), plus.dim)
    supply_t = [problem.supply.get(k, 0.0) for k in terminals]
    rng = np.random.default_rng(seed)
    spread = float(np.max(np.ptp(term_points, axis=0))) if len(term_points) > 1 else 1.0
    weights = np.full(len(terminals), 1.0 / max(1, len(terminals)))
    centroid = term_points.T @ weights

    best_cost, best_graph, count = math.inf, None, 0
    for steiner in range(max_steiner + 1):
        for tree in _unique_trees(len(terminals), steiner):
            count += 1
            supply = supply_t + [0.0] * steiner
            points0 = np.vstack([term_points] + [centroid[None, :]] * steiner) if steiner else term_points
            flows = tree_flows(len(points0), tree, supply, problem.tol)
            if flows is None:
                continue
            tails = np.array([t for t, _, _ in flows], dtype=int)
            heads = np.array([h for _, h, _ in flows], dtype=int)
            coeffs = np.array([eval_tau(tau, w) for _, _, w in flows])
            free = list(range(len(terminals), len(points0)))
            trials = []
            for start in range(ORACLE_DESCENT_STARTS if free else 1):
                points = points0.copy()
                if free:
                    jitter = 1e-3 if start == 0 else 0.25
                    points[free] += rng.normal(scale=jitter * spread, size=(len(free), plus.dim))
                trials.append(descend(points, free, tails, heads, coeffs, config))
            for points in list(trials):
                for s in free:
                    for v in range(len(points)):
                        if v != s:
                            snapped = points.copy()
                            snapped[s] = points[v]
                            trials.append(snapped)
            for points in trials:
                try:
                    G = problem.canonical(points, flows)
                except InvalidGraph:
                    continue
                value = problem.cost(G)
                if value < best_cost:
                    best_cost, best_graph = value, G
            if steiner == 0 and len(terminals) >= 3:
                present = {tuple(sorted(p)) for p in tree}
                for extra in itertools.combinations(range(len(terminals)), 2):
                    if extra in present:
                        continue
                    count += 1
                    found = _unicyclic_best(term_points, tree, extra, supply_t, tau, problem.mass, problem.tol)
                    if found is None:
                        continue
                    G = problem.canonical(term_points, found[1])
                    value = problem.cost(G)
                    if value < best_cost:
                        best_cost, best_graph = value, G
    if best_graph is None:
        best_graph = make_graph([], [], plus, minus)
        best_cost = 0.0
    logger.info("Oráculo: %d topologías, mejor costo %.12g", count, best_cost)
    return OracleResult(best_graph, best_cost, count)
