"""
Utilidades geométricas: claves de redondeo, predicados entre segmentos y
arreglo de segmentos en R^n.

El arreglo corta cada segmento en los extremos de los solapamientos
colineales y en los cruces con otros segmentos, y agrupa las piezas que
coinciden geométricamente. Lo usan tanto la consolidación de flujos de
grafos como el cálculo de multiplicidades de planes de irrigación.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from settings import COLLINEAR_TOLERANCE, SNAP_TOLERANCE

Key = Tuple[int, ...]


def as_point(coords: Sequence[float]) -> np.ndarray:
    return np.asarray(coords, dtype=float).reshape(-1)


def snap_key(point: Sequence[float], tol: float = SNAP_TOLERANCE) -> Key:
    """Clave entera de un punto redondeado a la rejilla de tolerancia."""
    return tuple(int(round(float(x) / tol)) for x in point)


def wedge_norm(u: np.ndarray, v: np.ndarray) -> float:
    """
    Norma del producto exterior u ∧ v (|u x v| en 3D, |det| en 2D).

    Se calcula por componentes para no perder precisión con vectores casi
    paralelos.
    """
    n = len(u)
    if n == 1:
        return 0.0
    if n == 2:
        return abs(u[0] * v[1] - u[1] * v[0])
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            c = u[i] * v[j] - u[j] * v[i]
            total += c * c
    return float(np.sqrt(total))


def are_parallel(d1: np.ndarray, d2: np.ndarray) -> bool:
    n1 = float(np.linalg.norm(d1))
    n2 = float(np.linalg.norm(d2))
    if n1 == 0.0 or n2 == 0.0:
        return True
    return wedge_norm(d1, d2) < COLLINEAR_TOLERANCE * n1 * n2


def point_line_distance(p: np.ndarray, a: np.ndarray, d: np.ndarray) -> float:
    length = float(np.linalg.norm(d))
    return wedge_norm(p - a, d) / length


def point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ d) / dd))
    return float(np.linalg.norm(p - (a + t * d)))


def line_closest_params(a1: np.ndarray, d1: np.ndarray,
                        a2: np.ndarray, d2: np.ndarray) -> Tuple[float, float]:
    """Parámetros (s, t) de los puntos más cercanos de dos rectas no paralelas."""
    w0 = a1 - a2
    a = float(d1 @ d1)
    b = float(d1 @ d2)
    c = float(d2 @ d2)
    d = float(d1 @ w0)
    e = float(d2 @ w0)
    denom = a * c - b * b
    s = (b * e - c * d) / denom
    t = (a * e - b * d) / denom
    return s, t


def segment_distance(a1: np.ndarray, b1: np.ndarray,
                     a2: np.ndarray, b2: np.ndarray) -> float:
    """Distancia entre dos segmentos cerrados."""
    best = min(point_segment_distance(a1, a2, b2),
               point_segment_distance(b1, a2, b2),
               point_segment_distance(a2, a1, b1),
               point_segment_distance(b2, a1, b1))
    d1 = b1 - a1
    d2 = b2 - a2
    if not are_parallel(d1, d2):
        s, t = line_closest_params(a1, d1, a2, d2)
        if 0.0 <= s <= 1.0 and 0.0 <= t <= 1.0:
            gap = float(np.linalg.norm((a1 + s * d1) - (a2 + t * d2)))
            best = min(best, gap)
    return best


def segments_overlap(a1: np.ndarray, b1: np.ndarray,
                     a2: np.ndarray, b2: np.ndarray) -> bool:
    """True si los segmentos son colineales y comparten longitud positiva."""
    d1 = b1 - a1
    if not are_parallel(d1, b2 - a2):
        return False
    if point_line_distance(a2, a1, d1) >= SNAP_TOLERANCE:
        return False
    dd = float(d1 @ d1)
    t0 = float((a2 - a1) @ d1) / dd
    t1 = float((b2 - a1) @ d1) / dd
    lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
    return (hi - lo) * np.sqrt(dd) > SNAP_TOLERANCE


def _split_params(a1: np.ndarray, b1: np.ndarray,
                  a2: np.ndarray, b2: np.ndarray) -> Tuple[List[float], List[float]]:
    """Parámetros interiores donde cada segmento debe cortarse por el otro."""
    d1 = b1 - a1
    d2 = b2 - a2
    len1 = float(np.linalg.norm(d1))
    len2 = float(np.linalg.norm(d2))
    cut1: List[float] = []
    cut2: List[float] = []
    eps1 = SNAP_TOLERANCE / len1
    eps2 = SNAP_TOLERANCE / len2

    if are_parallel(d1, d2):
        if point_line_distance(a2, a1, d1) >= SNAP_TOLERANCE:
            return cut1, cut2
        for p in (a2, b2):
            t = float((p - a1) @ d1) / (len1 * len1)
            if eps1 < t < 1.0 - eps1:
                cut1.append(t)
        for p in (a1, b1):
            t = float((p - a2) @ d2) / (len2 * len2)
            if eps2 < t < 1.0 - eps2:
                cut2.append(t)
        return cut1, cut2

    s, t = line_closest_params(a1, d1, a2, d2)
    if not (-eps1 <= s <= 1.0 + eps1 and -eps2 <= t <= 1.0 + eps2):
        return cut1, cut2
    gap = float(np.linalg.norm((a1 + s * d1) - (a2 + t * d2)))
    if gap >= SNAP_TOLERANCE:
        return cut1, cut2
    if eps1 < s < 1.0 - eps1:
        cut1.append(s)
    if eps2 < t < 1.0 - eps2:
        cut2.append(t)
    return cut1, cut2


@dataclass
class ArrangementPiece:
    """Pieza elemental del arreglo, orientada de `start` a `end` (orden de claves)."""
    start: np.ndarray
    end: np.ndarray
    key: Tuple[Key, Key]
    # (índice del segmento original, +1 si lo recorre de start a end, -1 si no)
    contributions: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def direction(self) -> np.ndarray:
        return (self.end - self.start) / self.length


def build_arrangement(segments: Sequence[Tuple[Sequence[float], Sequence[float]]]) -> List[ArrangementPiece]:
    """
    Construye el arreglo de una lista de segmentos.

    Args:
        segments: Lista de pares (a, b) de puntos en R^n

    Returns:
        Piezas con interiores relativos disjuntos, ordenadas por clave
    """
    pts = [(as_point(a), as_point(b)) for a, b in segments]
    cuts: List[List[float]] = [[0.0, 1.0] for _ in pts]

    for i in range(len(pts)):
        a1, b1 = pts[i]
        for j in range(i + 1, len(pts)):
            a2, b2 = pts[j]
            # Descarte rápido por cajas envolventes
            lo1, hi1 = np.minimum(a1, b1), np.maximum(a1, b1)
            lo2, hi2 = np.minimum(a2, b2), np.maximum(a2, b2)
            if np.any(hi1 < lo2 - SNAP_TOLERANCE) or np.any(hi2 < lo1 - SNAP_TOLERANCE):
                continue
            c1, c2 = _split_params(a1, b1, a2, b2)
            cuts[i].extend(c1)
            cuts[j].extend(c2)

    pieces: Dict[Tuple[Key, Key], ArrangementPiece] = {}
    for idx, (a, b) in enumerate(pts):
        d = b - a
        length = float(np.linalg.norm(d))
        params = sorted(cuts[idx])
        merged = [params[0]]
        for t in params[1:]:
            if (t - merged[-1]) * length > SNAP_TOLERANCE:
                merged.append(t)
        merged[-1] = 1.0
        for t0, t1 in zip(merged[:-1], merged[1:]):
            p = a + t0 * d
            q = a + t1 * d
            if float(np.linalg.norm(q - p)) <= SNAP_TOLERANCE:
                continue
            kp, kq = snap_key(p), snap_key(q)
            if kp <= kq:
                key, sign, start, end = (kp, kq), 1, p, q
            else:
                key, sign, start, end = (kq, kp), -1, q, p
            piece = pieces.get(key)
            if piece is None:
                piece = ArrangementPiece(start=start, end=end, key=key)
                pieces[key] = piece
            piece.contributions.append((idx, sign))

    return [pieces[k] for k in sorted(pieces)]
