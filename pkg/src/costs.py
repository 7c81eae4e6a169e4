#!/usr/bin/env python3
"""
Familias de costos de transporte subaditivos tau y magnitudes derivadas:
lambda^tau, costo marginal r^tau, supergradiente, mayorante cóncavo y la
serie de admisibilidad S^beta.
"""

import functools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad

from errors import DomainError, InvalidCost, NonConcaveCost
from settings import (ADMISSIBILITY_RATIO_MARGIN, ADMISSIBILITY_SERIES_CUTOFF,
                      PROPERTY_GRID_MAX, PROPERTY_GRID_MIN, PROPERTY_GRID_POINTS)

logger = logging.getLogger(__name__)

FAMILIES = ("wasserstein", "branched", "urban", "discrete", "step", "tabulated")
CONCAVE_FAMILIES = ("wasserstein", "branched", "urban", "discrete", "tabulated")

# Cociente w/delta a menos de esto de un entero se trata como ese entero
_CEIL_SNAP = 1e-9


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class ExtendedReal:
    """Real extendido no negativo: un valor finito o +infinito explícito."""
    value: float = 0.0
    infinite: bool = False

    @classmethod
    def inf(cls) -> "ExtendedReal":
        return cls(0.0, True)

    @classmethod
    def of(cls, x: float) -> "ExtendedReal":
        if not math.isfinite(x):
            raise DomainError(f"Valor no finito: {x}")
        return cls(float(x), False)

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def _key(self, other: Any) -> Tuple[float, float]:
        return float(self), float(other)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, (ExtendedReal, int, float)):
            return NotImplemented
        a, b = self._key(other)
        return a == b

    def __lt__(self, other: Any) -> bool:
        if not isinstance(other, (ExtendedReal, int, float)):
            return NotImplemented
        a, b = self._key(other)
        return a < b

    def __hash__(self) -> int:
        return hash(float(self))

    def __mul__(self, k: float) -> "ExtendedReal":
        # Convención de teoría de la medida: 0 * inf = 0
        if k == 0:
            return ExtendedReal(0.0)
        if k < 0:
            raise DomainError("Un real extendido no negativo solo se escala por k >= 0")
        if self.infinite:
            return ExtendedReal.inf()
        return ExtendedReal.of(self.value * k)

    __rmul__ = __mul__

    def __add__(self, other: Union["ExtendedReal", float]) -> "ExtendedReal":
        other = other if isinstance(other, ExtendedReal) else ExtendedReal.of(other)
        if self.infinite or other.infinite:
            return ExtendedReal.inf()
        return ExtendedReal.of(self.value + other.value)

    __radd__ = __add__

    def to_json(self) -> str:
        return "inf" if self.infinite else repr(self.value)

    def __repr__(self) -> str:
        return "ExtendedReal(inf)" if self.infinite else f"ExtendedReal({self.value!r})"


def robust_ceil(q: float) -> int:
    """Techo de q, tratando como entero cualquier cociente a 1e-9 de uno."""
    nearest = round(q)
    if abs(q - nearest) <= _CEIL_SNAP * max(1.0, abs(q)):
        return int(nearest)
    return int(math.ceil(q))


def robust_floor(q: float) -> int:
    nearest = round(q)
    if abs(q - nearest) <= _CEIL_SNAP * max(1.0, abs(q)):
        return int(nearest)
    return int(math.floor(q))


def _upper_concave_envelope(points: Sequence[Tuple[float, float]]) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    pts = sorted((float(w), float(v)) for w, v in points)
    hull: List[Tuple[float, float]] = [(0.0, 0.0)]
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # Se descarta el punto medio si queda por debajo de la cuerda
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return tuple(x for x, _ in hull), tuple(y for _, y in hull)


@dataclass(frozen=True)
class TransportCost:
    """
    Costo de transporte tau de una familia paramétrica.

    `mass_scale` implementa tau_bar(w) = tau(m w) del reescalado de masa sin
    salir de la familia.
    """
    family: str
    a: Optional[float] = None
    alpha: Optional[float] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    height: Optional[float] = None
    knots_w: Tuple[float, ...] = field(default=())
    knots_v: Tuple[float, ...] = field(default=())
    mass_scale: float = 1.0

    def __post_init__(self):
        _check_parameters(self)

    def __call__(self, w: float) -> float:
        return eval_tau(self, w)

    @property
    def is_concave(self) -> bool:
        return self.family in CONCAVE_FAMILIES

    @property
    def step_height(self) -> float:
        return self.delta if self.height is None else self.height

    def describe(self) -> str:
        return json_label(self)


def _check_parameters(tau: TransportCost) -> None:
    fam = tau.family
    if fam not in FAMILIES:
        raise InvalidCost(f"Familia de costo desconocida: {fam}", family=fam)
    if not (tau.mass_scale > 0 and math.isfinite(tau.mass_scale)):
        raise InvalidCost(f"Escala de masa inválida: {tau.mass_scale}")
    if fam == "wasserstein" and not (tau.a is not None and tau.a > 0):
        raise InvalidCost("wasserstein requiere a > 0")
    if fam == "branched" and not (tau.alpha is not None and 0 < tau.alpha < 1):
        raise InvalidCost("branched requiere alpha en (0, 1)")
    if fam == "urban" and not (tau.a is not None and tau.a > 1 and tau.eps is not None and tau.eps > 0):
        raise InvalidCost("urban requiere a > 1 y eps > 0")
    if fam == "step":
        if not (tau.delta is not None and tau.delta > 0):
            raise InvalidCost("step requiere delta > 0")
        if tau.height is not None and not tau.height > 0:
            raise InvalidCost("step requiere height > 0")
    if fam == "tabulated":
        ws, vs = tau.knots_w, tau.knots_v
        if len(ws) < 2 or len(ws) != len(vs) or ws[0] != 0.0 or vs[0] != 0.0:
            raise InvalidCost("tabulated requiere al menos un punto (w, tau) con w > 0")
        if any(b <= a for a, b in zip(ws, ws[1:])):
            raise InvalidCost("Abscisas de la tabla no estrictamente crecientes")
        if vs[1] <= 0 or any(b < a for a, b in zip(vs, vs[1:])):
            raise InvalidCost("La envolvente tabulada debe ser positiva y no decreciente")


# Constructores de familias

def wasserstein(a: float = 1.0) -> TransportCost:
    return TransportCost("wasserstein", a=float(a))


def branched(alpha: float) -> TransportCost:
    return TransportCost("branched", alpha=float(alpha))


def urban(a: float, eps: float) -> TransportCost:
    return TransportCost("urban", a=float(a), eps=float(eps))


def discrete() -> TransportCost:
    return TransportCost("discrete")


def step(delta: float, height: Optional[float] = None) -> TransportCost:
    return TransportCost("step", delta=float(delta), height=None if height is None else float(height))


def tabulated(points: Sequence[Tuple[float, float]]) -> TransportCost:
    """Envolvente cóncava lineal a trozos de los puntos dados (plana tras el último)."""
    if not points:
        raise InvalidCost("tabulated requiere al menos un punto")
    if any(float(w) <= 0 or float(v) < 0 for w, v in points):
        raise InvalidCost("Los puntos tabulados requieren w > 0 y tau >= 0")
    ws, vs = _upper_concave_envelope(points)
    return TransportCost("tabulated", knots_w=ws, knots_v=vs)


def scaled_cost(tau: TransportCost, m: float) -> TransportCost:
    """tau_bar(w) = tau(m w)."""
    if not m > 0:
        raise DomainError(f"Factor de masa inválido: {m}")
    return replace(tau, mass_scale=tau.mass_scale * float(m))


# Evaluación

def _base_value(tau: TransportCost, w: float) -> float:
    fam = tau.family
    if w == 0.0:
        return 0.0
    if fam == "wasserstein":
        return tau.a * w
    if fam == "branched":
        return w ** tau.alpha
    if fam == "urban":
        return min(tau.a * w, w + tau.eps)
    if fam == "discrete":
        return 1.0
    if fam == "step":
        return tau.step_height * robust_ceil(w / tau.delta)
    return float(np.interp(w, tau.knots_w, tau.knots_v, right=tau.knots_v[-1]))


def eval_tau(tau: TransportCost, w: float) -> float:
    """
    Evalúa tau(w) con la fórmula exacta de la familia.

    Args:
        tau: Costo de transporte
        w: Masa transportada (w >= 0)

    Returns:
        tau(w); tau(0) = 0 siempre
    """
    w = float(w)
    if w < 0 or math.isnan(w):
        raise DomainError(f"tau solo está definido para w >= 0 (w={w})", w=w)
    return _base_value(tau, w * tau.mass_scale)


def eval_many(tau: TransportCost, ws: Sequence[float]) -> np.ndarray:
    return np.array([eval_tau(tau, w) for w in ws], dtype=float)


def _step_candidates(tau: TransportCost, m: float) -> List[float]:
    # Extremos derechos j*delta en (m/2, m], en unidades originales de w
    delta = tau.delta / tau.mass_scale
    q = m / delta
    first = robust_floor(q / 2.0) + 1
    last = robust_floor(q)
    return [min(j * delta, m) for j in range(first, last + 1)] + [m]


def lambda_tau(tau: TransportCost, m: float) -> float:
    """
    inf { tau(w)/w : w en (m/2, m] }, cota lineal tau(w) >= lambda w en [0, m].

    Para familias cóncavas es tau(m)/m; para la familia escalón se minimiza
    sobre los extremos derechos de los escalones en (m/2, m] y el propio m.
    """
    m = float(m)
    if not m > 0:
        raise DomainError(f"lambda_tau requiere m > 0 (m={m})", m=m)
    if tau.is_concave:
        return eval_tau(tau, m) / m
    return min(eval_tau(tau, w) / w for w in _step_candidates(tau, m))


def marginal_cost(tau: TransportCost, w: float) -> ExtendedReal:
    """
    Costo marginal por partícula r^tau(w) = tau(w)/w, extendido en 0 por tau'(0).
    """
    w = float(w)
    if w < 0:
        raise DomainError(f"r^tau solo está definido para w >= 0 (w={w})", w=w)
    if w > 0:
        return ExtendedReal.of(eval_tau(tau, w) / w)
    fam = tau.family
    if fam in ("wasserstein", "urban"):
        return ExtendedReal.of(tau.a * tau.mass_scale)
    if fam == "tabulated":
        return ExtendedReal.of(tau.knots_v[1] / tau.knots_w[1] * tau.mass_scale)
    return ExtendedReal.inf()


def supergradient(tau: TransportCost, w: float) -> float:
    """
    Elemento del supergradiente de tau en w > 0 (derivada por la derecha en
    los quiebres).
    """
    if not tau.is_concave:
        raise NonConcaveCost(f"La familia {tau.family} no es cóncava", family=tau.family)
    w = float(w)
    if not w > 0:
        raise DomainError(f"El supergradiente se evalúa en w > 0 (w={w})", w=w)
    s = tau.mass_scale
    x = w * s
    fam = tau.family
    if fam == "wasserstein":
        return tau.a * s
    if fam == "branched":
        return tau.alpha * x ** (tau.alpha - 1.0) * s
    if fam == "urban":
        kink = tau.eps / (tau.a - 1.0)
        return (tau.a if x < kink else 1.0) * s
    if fam == "discrete":
        return 0.0
    ws, vs = tau.knots_w, tau.knots_v
    i = int(np.searchsorted(ws, x, side="right")) - 1
    if i >= len(ws) - 1:
        return 0.0
    return (vs[i + 1] - vs[i]) / (ws[i + 1] - ws[i]) * s


@dataclass(frozen=True)
class Majorant:
    """Cota superior cóncava beta de tau (beta = tau, o beta(w) = slope*w + offset)."""
    cost: Optional[TransportCost] = None
    slope: float = 0.0
    offset: float = 0.0

    def __call__(self, w: float) -> float:
        if self.cost is not None:
            return eval_tau(self.cost, w)
        return self.slope * float(w) + self.offset

    def describe(self) -> str:
        if self.cost is not None:
            return f"beta = tau ({self.cost.family})"
        return f"beta(w) = {self.slope!r} w + {self.offset!r}"


def majorant(tau: TransportCost) -> Majorant:
    """
    Mayorante cóncavo beta de tau.

    Para la familia escalón tau(w) = h ceil(w/delta) <= h w/delta + h.
    """
    if tau.is_concave:
        return Majorant(cost=tau)
    h = tau.step_height
    return Majorant(slope=h * tau.mass_scale / tau.delta, offset=h)


def _as_beta(obj: Union[TransportCost, Majorant]) -> Majorant:
    return majorant(obj) if isinstance(obj, TransportCost) else obj


def series_term(beta: Union[TransportCost, Majorant], n: int, k: int) -> float:
    """Término 2^{(n-1)k} beta(2^{-nk}) de la serie S^beta(n)."""
    beta = _as_beta(beta)
    return 2.0 ** ((n - 1) * k) * beta(2.0 ** (-n * k))


def series_sum(beta: Union[TransportCost, Majorant], n: int,
               k_max: int = ADMISSIBILITY_SERIES_CUTOFF, k_min: int = 1) -> float:
    """Suma parcial sum_{k=k_min}^{k_max} de S^beta(n)."""
    return math.fsum(series_term(beta, n, k) for k in range(k_min, k_max + 1))


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: Optional[bool]
    dimension: int
    majorant: str
    terms: Tuple[float, ...]
    partial_sums: Tuple[float, ...]
    tail_bound: Optional[float]
    series_converges: bool
    integral_estimate: float
    integral_converges: bool
    reason: str = ""

    @property
    def total_bound(self) -> Optional[float]:
        """Cota superior certificada de S^beta(n) (None si diverge)."""
        if self.tail_bound is None:
            return None
        return self.partial_sums[-1] + self.tail_bound

    def to_dict(self) -> Dict[str, Any]:
        return {
            "admissible": "unknown" if self.admissible is None else self.admissible,
            "dimension": self.dimension,
            "majorant": self.majorant,
            "partial_sums": list(self.partial_sums),
            "tail_bound": self.tail_bound,
            "series_converges": self.series_converges,
            "integral_estimate": self.integral_estimate,
            "integral_converges": self.integral_converges,
            "reason": self.reason,
        }


def _integral_test(beta: Majorant, n: int, cutoff: int) -> Tuple[float, bool]:
    # Con w = e^{-u}: int_0^1 beta(w) w^{1/n - 2} dw = int_0^inf beta(e^{-u}) e^{u (1 - 1/n)} du
    expo = 1.0 - 1.0 / n

    def integrand(u: float) -> float:
        return beta(math.exp(-u)) * math.exp(u * expo)

    upper = cutoff * n * math.log(2.0)
    pieces = [0.0, upper / 4.0, upper / 2.0, upper]
    parts = [quad(integrand, lo, hi, limit=200)[0] for lo, hi in zip(pieces, pieces[1:])]
    early = parts[1] / (pieces[2] - pieces[1])
    late = parts[2] / (pieces[3] - pieces[2])
    return math.fsum(parts), late <= 0.5 * early


def check_admissible(tau: TransportCost, n: int,
                     k_max: int = ADMISSIBILITY_SERIES_CUTOFF) -> AdmissibilityReport:
    """
    Verifica la admisibilidad de tau en dimensión n.

    Suma S^beta(n, k) para k = 1..K, certifica una cola geométrica cuando los
    cocientes de términos quedan acotados por debajo de 1 y contrasta con la
    prueba integral. Si ambos criterios discrepan el veredicto es "unknown".

    Args:
        tau: Costo de transporte
        n: Dimensión del espacio
        k_max: Corte K de la serie

    Returns:
        AdmissibilityReport
    """
    if n < 1 or k_max < 4:
        raise DomainError(f"Parámetros de admisibilidad inválidos: n={n}, K={k_max}")
    beta = majorant(tau)
    terms = [series_term(beta, n, k) for k in range(1, k_max + 1)]
    partial = []
    acc: List[float] = []
    for t in terms:
        acc.append(t)
        partial.append(math.fsum(acc))

    tail_window = terms[-max(2, k_max // 4):]
    ratios = [b / a for a, b in zip(tail_window, tail_window[1:]) if a > 0]
    worst = max(ratios) if ratios else math.inf
    series_ok = worst < 1.0 - ADMISSIBILITY_RATIO_MARGIN
    tail = terms[-1] * worst / (1.0 - worst) if series_ok else None

    integral, integral_ok = _integral_test(beta, n, k_max)
    if series_ok == integral_ok:
        verdict: Optional[bool] = series_ok
        reason = "serie e integral coinciden"
    else:
        verdict = None
        reason = "la serie y la prueba integral no coinciden dentro del corte"
    logger.debug("Admisibilidad %s n=%d: serie=%s integral=%s", tau.family, n, series_ok, integral_ok)
    return AdmissibilityReport(
        admissible=verdict, dimension=n, majorant=beta.describe(),
        terms=tuple(terms), partial_sums=tuple(partial), tail_bound=tail,
        series_converges=series_ok, integral_estimate=integral,
        integral_converges=integral_ok, reason=reason,
    )


def property_grid(points: int = PROPERTY_GRID_POINTS) -> np.ndarray:
    return np.geomspace(PROPERTY_GRID_MIN, PROPERTY_GRID_MAX, points)


def check_monotone(tau: TransportCost, grid: Optional[np.ndarray] = None) -> List[Tuple[float, float]]:
    """Pares consecutivos (u, v) de la rejilla con tau(v) < tau(u)."""
    grid = property_grid() if grid is None else grid
    values = eval_many(tau, grid)
    return [(float(grid[i]), float(grid[i + 1])) for i in range(len(grid) - 1) if values[i + 1] < values[i]]


def check_subadditive(tau: TransportCost, grid: Optional[np.ndarray] = None,
                      tol: float = 1e-12) -> List[Tuple[float, float]]:
    """Pares (u, v) de la rejilla con tau(u + v) > tau(u) + tau(v)."""
    grid = property_grid() if grid is None else grid
    values = eval_many(tau, grid)
    violations = []
    for i, u in enumerate(grid):
        for j in range(i, len(grid)):
            v = grid[j]
            lhs = eval_tau(tau, u + v)
            rhs = values[i] + values[j]
            if lhs > rhs + tol * max(1.0, rhs):
                violations.append((float(u), float(v)))
    return violations


def validate_cost(tau: TransportCost) -> TransportCost:
    """Comprueba por muestreo monotonía y subaditividad; lanza InvalidCost si fallan."""
    for name, check in (("monotonía", check_monotone), ("subaditividad", check_subadditive)):
        bad = check(tau)
        if bad:
            raise InvalidCost(f"Falla la {name} de {tau.family} en {len(bad)} pares", example=list(bad[0]))
    return tau


def cost_from_json(data: Dict[str, Any]) -> TransportCost:
    """Lee {"family": "branched", "alpha": 0.75} y análogos."""
    if not isinstance(data, dict) or "family" not in data:
        raise InvalidCost("Especificación de costo sin 'family'")
    fam = data["family"]
    try:
        if fam == "wasserstein":
            tau = wasserstein(float(data.get("a", 1.0)))
        elif fam == "branched":
            tau = branched(float(data["alpha"]))
        elif fam == "urban":
            tau = urban(float(data["a"]), float(data["eps"]))
        elif fam == "discrete":
            tau = discrete()
        elif fam == "step":
            height = data.get("height")
            tau = step(float(data["delta"]), None if height is None else float(height))
        elif fam == "tabulated":
            tau = tabulated([(float(w), float(v)) for w, v in data["points"]])
        else:
            raise InvalidCost(f"Familia de costo desconocida: {fam}", family=fam)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidCost(f"Parámetros de costo inválidos para {fam}: {exc}") from exc
    if "mass_scale" in data:
        tau = scaled_cost(tau, float(data["mass_scale"]))
    return tau


def cost_to_json(tau: TransportCost) -> Dict[str, Any]:
    data: Dict[str, Any] = {"family": tau.family}
    if tau.family in ("wasserstein", "urban"):
        data["a"] = tau.a
    if tau.family == "branched":
        data["alpha"] = tau.alpha
    if tau.family == "urban":
        data["eps"] = tau.eps
    if tau.family == "step":
        data["delta"] = tau.delta
        if tau.height is not None:
            data["height"] = tau.height
    if tau.family == "tabulated":
        data["points"] = [[w, v] for w, v in zip(tau.knots_w[1:], tau.knots_v[1:])]
    if tau.mass_scale != 1.0:
        data["mass_scale"] = tau.mass_scale
    return data


def json_label(tau: TransportCost) -> str:
    params = ", ".join(f"{k}={v}" for k, v in cost_to_json(tau).items() if k != "family")
    return f"{tau.family}({params})"


def breakpoints(tau: TransportCost, upto: float, limit: int = 256) -> List[float]:
    """Niveles w en (0, upto] donde tau tiene saltos o quiebres."""
    s = tau.mass_scale
    if tau.family == "step":
        count = min(limit, robust_floor(upto * s / tau.delta))
        return [j * tau.delta / s for j in range(1, count + 1)]
    if tau.family == "tabulated":
        return [w / s for w in tau.knots_w[1:] if w / s <= upto][:limit]
    if tau.family == "urban":
        kink = tau.eps / (tau.a - 1.0) / s
        return [kink] if kink <= upto else []
    return []
