#!/usr/bin/env python3
"""
Medidas atómicas: validación, reescalado, aproximación de nivel k y la
distancia de Wasserstein-1 exacta entre medidas atómicas.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from errors import InvalidMeasure, MassImbalance, OutOfDomain
from geometry import snap_key
from settings import (MASS_BALANCE_TOLERANCE, MOLLIFIER_POINTS_PER_AXIS,
                      SNAP_TOLERANCE, WEIGHT_EPSILON)

logger = logging.getLogger(__name__)

Point = Tuple[float, ...]
RawAtoms = Iterable[Tuple[Sequence[float], float]]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Medida finita de átomos con masas positivas en R^n (forma canónica)."""
    positions: np.ndarray
    masses: np.ndarray
    dim: int

    def __len__(self) -> int:
        return len(self.masses)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses.tolist())

    def atoms(self) -> List[Tuple[Point, float]]:
        return [(tuple(p), float(w)) for p, w in zip(self.positions.tolist(), self.masses.tolist())]

    def mass_by_key(self) -> Dict[Tuple[int, ...], float]:
        return {snap_key(p): float(w) for p, w in zip(self.positions, self.masses)}

    def mass_at(self, point: Sequence[float]) -> float:
        return self.mass_by_key().get(snap_key(point), 0.0)

    def scaled(self, mass_factor: float = 1.0, length_factor: float = 1.0) -> "DiscreteMeasure":
        return validate_measure(
            [(p * length_factor, w * mass_factor) for p, w in zip(self.positions, self.masses)],
            dim=self.dim,
        )

    def same_as(self, other: "DiscreteMeasure", tol: float = 1e-12) -> bool:
        """Igualdad de formas canónicas (posiciones por clave, masas con tolerancia)."""
        if self.dim != other.dim:
            return False
        mine, theirs = self.mass_by_key(), other.mass_by_key()
        if set(mine) != set(theirs):
            return False
        return all(abs(mine[k] - theirs[k]) <= tol for k in mine)


@dataclass(frozen=True, eq=False)
class SignedDiscreteMeasure:
    """Medida atómica con signo; representa divergencias mu+ - mu-."""
    positions: np.ndarray
    masses: np.ndarray
    dim: int

    def __len__(self) -> int:
        return len(self.masses)

    def atoms(self) -> List[Tuple[Point, float]]:
        return [(tuple(p), float(w)) for p, w in zip(self.positions.tolist(), self.masses.tolist())]

    def mass_by_key(self) -> Dict[Tuple[int, ...], float]:
        return {snap_key(p): float(w) for p, w in zip(self.positions, self.masses)}

    @property
    def total_variation(self) -> float:
        return math.fsum(abs(w) for w in self.masses.tolist())

    def positive_part(self) -> DiscreteMeasure:
        return validate_measure([(p, w) for p, w in zip(self.positions, self.masses) if w > 0], dim=self.dim)

    def negative_part(self) -> DiscreteMeasure:
        return validate_measure([(p, -w) for p, w in zip(self.positions, self.masses) if w < 0], dim=self.dim)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(w) <= tol for w in self.masses.tolist())

    def close_to(self, other: "SignedDiscreteMeasure", tol: float) -> bool:
        mine, theirs = self.mass_by_key(), other.mass_by_key()
        return all(abs(mine.get(k, 0.0) - theirs.get(k, 0.0)) <= tol for k in set(mine) | set(theirs))


def _infer_dim(atoms: List[Tuple[np.ndarray, float]], dim: Optional[int]) -> int:
    if dim is not None:
        return int(dim)
    if not atoms:
        raise InvalidMeasure("No se puede inferir la dimensión de una medida vacía")
    return len(atoms[0][0])


def _accumulate(raw: Iterable[Tuple[Sequence[float], float]], dim: Optional[int],
                allow_negative: bool) -> Tuple[np.ndarray, np.ndarray, int]:
    atoms = [(np.asarray(p, dtype=float).reshape(-1), float(w)) for p, w in raw]
    dim = _infer_dim(atoms, dim)
    groups: Dict[Tuple[int, ...], List[float]] = defaultdict(list)
    where: Dict[Tuple[int, ...], np.ndarray] = {}
    for pos, mass in atoms:
        if len(pos) != dim:
            raise InvalidMeasure(f"Átomo de dimensión {len(pos)} en una medida de dimensión {dim}")
        if not np.all(np.isfinite(pos)):
            raise InvalidMeasure(f"Coordenada no finita: {pos.tolist()}")
        if not math.isfinite(mass):
            raise InvalidMeasure(f"Masa no finita en {pos.tolist()}")
        if mass < 0 and not allow_negative:
            raise InvalidMeasure(f"Masa negativa {mass} en {pos.tolist()}")
        key = snap_key(pos)
        groups[key].append(mass)
        where.setdefault(key, pos)

    keys = sorted(k for k in groups if math.fsum(groups[k]) != 0.0)
    positions = np.array([where[k] for k in keys], dtype=float).reshape(len(keys), dim)
    masses = np.array([math.fsum(groups[k]) for k in keys], dtype=float)
    return positions, masses, dim


def validate_measure(m: Union[DiscreteMeasure, RawAtoms], dim: Optional[int] = None) -> DiscreteMeasure:
    """
    Lleva una lista de átomos a forma canónica.

    Fusiona átomos coincidentes (dentro de la tolerancia de redondeo),
    descarta masas nulas y ordena los átomos por clave.

    Args:
        m: Medida o lista cruda de pares (posición, masa)
        dim: Dimensión del espacio (se infiere si se omite)

    Returns:
        DiscreteMeasure canónica
    """
    if isinstance(m, DiscreteMeasure):
        raw, dim = zip(m.positions, m.masses), m.dim
    else:
        raw = m
    positions, masses, dim = _accumulate(raw, dim, allow_negative=False)
    return DiscreteMeasure(_frozen(positions), _frozen(masses), dim)


def signed_measure(raw: RawAtoms, dim: int) -> SignedDiscreteMeasure:
    positions, masses, dim = _accumulate(raw, dim, allow_negative=True)
    return SignedDiscreteMeasure(_frozen(positions), _frozen(masses), dim)


def signed_difference(plus: DiscreteMeasure, minus: DiscreteMeasure) -> SignedDiscreteMeasure:
    raw = list(zip(plus.positions, plus.masses)) + [(p, -w) for p, w in zip(minus.positions, minus.masses)]
    return signed_measure(raw, plus.dim)


def dirac(point: Sequence[float], mass: float = 1.0) -> DiscreteMeasure:
    return validate_measure([(point, mass)])


def empty_measure(dim: int) -> DiscreteMeasure:
    return validate_measure([], dim=dim)


def support_radius(m: DiscreteMeasure) -> float:
    """Menor s con soporte en [-s, s]^n."""
    if len(m) == 0:
        return 0.0
    return float(np.max(np.abs(m.positions)))


def is_probability(m: DiscreteMeasure, tol: float = MASS_BALANCE_TOLERANCE) -> bool:
    return abs(m.total_mass - 1.0) <= tol and support_radius(m) <= 1.0 + SNAP_TOLERANCE


def check_mass_balance(plus: DiscreteMeasure, minus: DiscreteMeasure) -> float:
    """Devuelve la masa común o lanza MassImbalance."""
    if plus.dim != minus.dim:
        raise MassImbalance(f"Dimensiones distintas: {plus.dim} vs {minus.dim}")
    a, b = plus.total_mass, minus.total_mass
    if abs(a - b) > MASS_BALANCE_TOLERANCE * max(1.0, a, b):
        raise MassImbalance(f"Masas totales distintas: {a} vs {b}", plus=a, minus=b)
    return a


@dataclass(frozen=True)
class RescaledProblem:
    plus: DiscreteMeasure
    minus: DiscreteMeasure
    cost: Any
    mass_factor: float
    length_factor: float

    @property
    def cost_factor(self) -> float:
        """
        Factor que lleva un costo normalizado (con tau_bar) al costo original.

        Es s y no m s: la masa ya entra en tau_bar(w) = tau(m w) evaluado
        sobre los pesos w/m, así que sum tau_bar(w/m) l/s = (1/s) sum tau(w) l.
        """
        return self.length_factor


def rescale(plus: DiscreteMeasure, minus: DiscreteMeasure, tau: Any = None,
            length_factor: Optional[float] = None) -> RescaledProblem:
    """
    Normaliza el problema a medidas de probabilidad en [-1, 1]^n.

    Compone el reescalado de masa (tau_bar(w) = tau(m w)) con el de dominio
    (empuje por x -> x / s). Con pesos w/m, longitudes l/s y tau_bar, el costo
    normalizado de un grafo multiplicado por `cost_factor` (= s) es su costo
    original.

    Args:
        plus: Medida inicial
        minus: Medida final
        tau: TransportCost original
        length_factor: Escala s forzada (por defecto max(1, radio del soporte))

    Returns:
        RescaledProblem con medidas normalizadas, costo reescalado y factores (m, s)
    """
    from costs import scaled_cost

    mass = check_mass_balance(plus, minus)
    if mass <= 0:
        raise MassImbalance("La masa total debe ser positiva")
    s = length_factor
    if s is None:
        s = max(1.0, support_radius(plus), support_radius(minus))
    bar_plus = plus.scaled(1.0 / mass, 1.0 / s)
    bar_minus = minus.scaled(1.0 / mass, 1.0 / s)
    cost = None if tau is None else scaled_cost(tau, mass)
    return RescaledProblem(bar_plus, bar_minus, cost, mass, s)


def _robust_ceil(q: np.ndarray, cell: float) -> np.ndarray:
    nearest = np.round(q)
    on_boundary = np.abs(q - nearest) * cell <= SNAP_TOLERANCE
    return np.where(on_boundary, nearest, np.ceil(q)).astype(np.int64)


def klevel_cells(positions: np.ndarray, k: int, scale: float = 1.0,
                 center: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Celdas semiabiertas v + (-s_k, s_k]^n de nivel k para cada posición.

    Args:
        positions: Arreglo (N, n) de posiciones
        k: Nivel (k >= 0; el nivel 0 es la celda (-2s, 2s]^n)
        scale: Escala s de la jerarquía
        center: Centro de la jerarquía (origen por defecto)

    Returns:
        (índices enteros (N, n), posiciones de las hojas (N, n))
    """
    positions = np.asarray(positions, dtype=float)
    dim = positions.shape[1] if positions.ndim == 2 else 0
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    half = scale * 2.0 ** (1 - k)
    cell = 2.0 * half
    q = (positions - center + 2.0 * scale) / cell
    idx = _robust_ceil(q, cell) - 1
    if idx.size and (np.any(idx < 0) or np.any(idx >= 2 ** k)):
        bad = positions[np.any((idx < 0) | (idx >= 2 ** k), axis=1)][0]
        raise OutOfDomain(f"Punto {bad.tolist()} fuera de (-2s, 2s]^n", point=bad.tolist())
    leaves = center - 2.0 * scale + (2 * idx + 1) * half
    return idx, leaves


def project_klevel(m: DiscreteMeasure, k: int, scale: float = 1.0,
                   center: Optional[Sequence[float]] = None) -> DiscreteMeasure:
    """
    Aproximación de nivel k: masa de cada celda concentrada en su hoja.

    Args:
        m: Medida con soporte en (-2, 2]^n
        k: Nivel (entero positivo)

    Returns:
        Medida sobre la rejilla de hojas con la misma masa total
    """
    if k < 0:
        raise OutOfDomain(f"Nivel inválido: {k}")
    if len(m) == 0:
        return m
    idx, leaves = klevel_cells(m.positions, k, scale, None if center is None else np.asarray(center))
    groups: Dict[Tuple[int, ...], List[float]] = defaultdict(list)
    where: Dict[Tuple[int, ...], np.ndarray] = {}
    for cell, leaf, mass in zip(map(tuple, idx.tolist()), leaves, m.masses.tolist()):
        groups[cell].append(mass)
        where.setdefault(cell, leaf)
    return validate_measure([(where[c], math.fsum(groups[c])) for c in sorted(groups)], dim=m.dim)


def mollify(m: DiscreteMeasure, delta: float,
            points_per_axis: int = MOLLIFIER_POINTS_PER_AXIS) -> DiscreteMeasure:
    """
    Sustituto finito de K_delta * mu: cada átomo se reparte en partes
    iguales sobre una rejilla centrada dentro de la bola de radio delta/3.
    """
    if not 0 < delta:
        raise InvalidMeasure(f"Radio de suavizado inválido: {delta}")
    n = m.dim
    pitch = min(delta / 6.0, 0.99 * delta / (3.0 * math.sqrt(n) * max(1, (points_per_axis - 1) / 2)))
    steps = np.arange(points_per_axis) - (points_per_axis - 1) / 2.0
    offsets = np.array(np.meshgrid(*([steps] * n), indexing="ij")).reshape(n, -1).T * pitch
    share = 1.0 / len(offsets)
    raw = [(p + off, w * share) for p, w in zip(m.positions, m.masses) for off in offsets]
    return validate_measure(raw, dim=n)


def wasserstein_coupling(plus: DiscreteMeasure, minus: DiscreteMeasure) -> Tuple[float, np.ndarray]:
    """
    Transporte óptimo con costo euclidiano (problema de transporte exacto).

    Resuelve el programa lineal sobre el grafo bipartito completo de átomos
    con el símplex dual de HiGHS, que devuelve un vértice del politopo.

    Returns:
        (W1, matriz de acoplamiento de tamaño len(plus) x len(minus))
    """
    mass = check_mass_balance(plus, minus)
    rows, cols = len(plus), len(minus)
    if rows == 0 or cols == 0 or mass == 0:
        return 0.0, np.zeros((rows, cols))
    a = plus.masses
    b = minus.masses * (mass / minus.total_mass)
    dist = cdist(plus.positions, minus.positions)
    a_eq = np.zeros((rows + cols, rows * cols))
    for i in range(rows):
        a_eq[i, i * cols:(i + 1) * cols] = 1.0
    for j in range(cols):
        a_eq[rows + j, j::cols] = 1.0
    res = linprog(dist.reshape(-1), A_eq=a_eq, b_eq=np.concatenate([a, b]),
                  bounds=(0, None), method="highs-ds")
    if not res.success:
        raise MassImbalance(f"El problema de transporte no tiene solución: {res.message}")
    plan = res.x.reshape(rows, cols)
    plan[plan <= WEIGHT_EPSILON * mass] = 0.0
    value = math.fsum((plan * dist).reshape(-1).tolist())
    return max(0.0, value), plan


def wasserstein1(plus: DiscreteMeasure, minus: DiscreteMeasure) -> float:
    """Distancia W1 exacta entre dos medidas atómicas de igual masa."""
    value, _ = wasserstein_coupling(plus, minus)
    return value


def _real(value: Any) -> float:
    return float(value) if not isinstance(value, str) else float(value.strip())


def measure_from_json(data: Dict[str, Any]) -> DiscreteMeasure:
    """Lee {"dim": n, "atoms": [{"x": [...], "m": r}, ...]} (reales como cadenas o números)."""
    try:
        dim = int(data["dim"])
        raw = [([_real(c) for c in atom["x"]], _real(atom["m"])) for atom in data.get("atoms", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidMeasure(f"Formato de medida inválido: {exc}") from exc
    return validate_measure(raw, dim=dim)


def measure_to_json(m: Union[DiscreteMeasure, SignedDiscreteMeasure]) -> Dict[str, Any]:
    return {
        "dim": m.dim,
        "atoms": [{"x": [repr(float(c)) for c in p], "m": repr(float(w))}
                  for p, w in zip(m.positions.tolist(), m.masses.tolist())],
    }


def uniform_grid(dim: int, per_axis: int, mass: float = 1.0, radius: float = 1.0) -> DiscreteMeasure:
    """Discretización uniforme de [-r, r]^n: centros de per_axis^n celdas iguales."""
    if dim < 1 or per_axis < 1:
        raise InvalidMeasure(f"Rejilla inválida: dim={dim}, per_axis={per_axis}")
    axis = -radius + (2 * np.arange(per_axis) + 1) * radius / per_axis
    grid = np.array(np.meshgrid(*([axis] * dim), indexing="ij")).reshape(dim, -1).T
    share = mass / len(grid)
    return validate_measure([(p, share) for p in grid], dim=dim)
