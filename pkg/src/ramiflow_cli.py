#!/usr/bin/env python3
"""
Ramiflow - línea de comandos.

Lee una configuración de experimento (JSON), despacha la tarea a los
módulos de transporte ramificado y escribe los resultados en JSON (o SVG
para `render`).

Uso:
    python src/ramiflow_cli.py cost --config experimento.json --out outputs/costo.json
    python src/ramiflow_cli.py repro --config repro_nontree.json
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Optional

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'config'))

from costs import (TransportCost, branched, check_admissible, cost_from_json,
                   cost_to_json, json_label, step, validate_cost)
from distance import DistanceBudget, dtau_bounds, metric_probe
from errors import ConfigError, NonConcaveCost, RamiflowError, ReproMismatch
from hierarchy import nadic_cost_bound, nadic_graph, nadic_total_bound
from measures import measure_from_json, measure_to_json, uniform_grid
from optimizer import OptimizerConfig, optimize
from patterns import (decompose_paths, flux_of_plan, make_plan, pattern_cost,
                      plan_from_json, plan_to_json)
from settings import (DEFAULT_NADIC_LEVEL, DEFAULT_OUTPUT_DIR,
                      DEFAULT_OUTPUT_FORMAT, LOG_FORMAT, LOG_LEVEL)
from svg_renderer import RenderStyle, render_svg
from transport_graph import (ConsolidatedFlux, FluxSegment, bisect_midpoint,
                             check_conservation, consolidate_flux,
                             flux_mass, gilbert_energy, graph_cost,
                             graph_from_json, graph_to_json, is_acyclic,
                             loop_rank, make_graph, remove_cycles,
                             split_at_time, tree_reduce)

logger = logging.getLogger(__name__)

TASKS = ("validate", "cost", "reduce", "nadic", "decompose", "distance",
         "optimize", "split", "render", "repro")
REPRO_NAMES = ("nontree", "lsc", "nadic")

REQUIRED_INPUTS = {
    "cost": ("graph",),
    "reduce": ("graph",),
    "nadic": ("measure",),
    "decompose": ("graph",),
    "distance": ("plus", "minus"),
    "optimize": ("plus", "minus"),
    "split": ("graph",),
}
NEEDS_COST = {"cost", "reduce", "nadic", "distance", "optimize"}


@dataclass
class ExperimentConfig:
    """Configuración de una ejecución: tarea, entradas, costo, parámetros y salida."""
    task: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    cost: Optional[Dict[str, Any]] = None
    params: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None
    seed: int = 0
    base_dir: str = "."

    def validate(self) -> "ExperimentConfig":
        if self.task not in TASKS:
            raise ConfigError(f"Tarea desconocida: {self.task}", task=self.task)
        missing = [k for k in REQUIRED_INPUTS.get(self.task, ()) if k not in self.inputs]
        if missing:
            raise ConfigError(f"Faltan entradas para '{self.task}': {', '.join(missing)}", missing=missing)
        if self.task in NEEDS_COST and self.cost is None:
            raise ConfigError(f"La tarea '{self.task}' requiere 'cost'")
        if self.task == "validate" and not self.inputs and self.cost is None:
            raise ConfigError("Nada que validar: indique entradas o un costo")
        if self.task == "render" and not {"graph", "plan", "flux"} & set(self.inputs):
            raise ConfigError("La tarea 'render' requiere 'graph', 'plan' o 'flux'")
        if self.task == "repro" and self.params.get("name") not in REPRO_NAMES:
            raise ConfigError(f"repro requiere params.name en {list(REPRO_NAMES)}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"La semilla debe ser entera: {self.seed!r}")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: str = ".") -> "ExperimentConfig":
        if not isinstance(data, dict) or "task" not in data:
            raise ConfigError("La configuración debe ser un objeto con 'task'")
        known = {"task", "inputs", "cost", "params", "output", "seed"}
        extra = sorted(set(data) - known)
        if extra:
            raise ConfigError(f"Campos desconocidos en la configuración: {extra}")
        return cls(
            task=data["task"],
            inputs=dict(data.get("inputs") or {}),
            cost=data.get("cost"),
            params=dict(data.get("params") or {}),
            output=data.get("output"),
            seed=data.get("seed", 0),
            base_dir=base_dir,
        )


def _read_json(path: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON inválido en {path}: {e.msg} (línea {e.lineno}, columna {e.colno})",
                          path=path, line=e.lineno, column=e.colno) from e
    except OSError as e:
        raise ConfigError(f"No se puede leer {path}: {e.strerror}", path=path) from e


def load_config(path: str) -> ExperimentConfig:
    """Carga un ExperimentConfig desde un archivo JSON."""
    return ExperimentConfig.from_dict(_read_json(path), base_dir=os.path.dirname(os.path.abspath(path)))


def _input(config: ExperimentConfig, key: str) -> Any:
    value = config.inputs[key]
    if isinstance(value, str):
        path = value if os.path.isabs(value) else os.path.join(config.base_dir, value)
        return _read_json(path)
    return value


def _cost(config: ExperimentConfig) -> TransportCost:
    return validate_cost(cost_from_json(config.cost))


def _optimizer_config(config: ExperimentConfig) -> OptimizerConfig:
    opts = dict(config.params.get("optimizer") or {})
    if "moves" in opts:
        opts["moves"] = tuple(opts["moves"])
    try:
        return OptimizerConfig(seed=config.seed, **opts)
    except TypeError as e:
        raise ConfigError(f"Parámetros de optimizador inválidos: {e}") from e


# Tareas

def task_validate(config: ExperimentConfig) -> Dict[str, Any]:
    report: Dict[str, Any] = {}
    for key in ("measure", "plus", "minus"):
        if key in config.inputs:
            m = measure_from_json(_input(config, key))
            report[key] = {"atoms": len(m), "total_mass": m.total_mass, "canonical": measure_to_json(m)}
    if "graph" in config.inputs:
        G = graph_from_json(_input(config, "graph"))
        violations = check_conservation(G)
        report["graph"] = {
            "vertices": len(G.vertices),
            "edges": G.num_edges,
            "acyclic": is_acyclic(G),
            "loop_rank": loop_rank(G),
            "violations": [{"point": list(v.point), "residual": v.residual} for v in violations],
            "valid": not violations,
        }
    if "plan" in config.inputs:
        plan = plan_from_json(_input(config, "plan"))
        report["plan"] = {"paths": len(plan.paths), "total_weight": plan.total_weight}
    if config.cost is not None:
        tau = _cost(config)
        dim = int(config.params.get("dim", 2))
        report["cost"] = {"label": json_label(tau), "concave": tau.is_concave,
                          "admissibility": check_admissible(tau, dim).to_dict()}
    return report


def task_cost(config: ExperimentConfig) -> Dict[str, Any]:
    G = graph_from_json(_input(config, "graph"))
    tau = _cost(config)
    breakdown = graph_cost(G, tau)
    return {"cost": cost_to_json(tau), **breakdown.to_dict(), "flux_mass": flux_mass(G),
            "conservation_violations": len(check_conservation(G))}


def task_reduce(config: ExperimentConfig) -> Dict[str, Any]:
    G = graph_from_json(_input(config, "graph"))
    tau = _cost(config)
    acyclic = remove_cycles(G)
    result = {"cost_before": graph_cost(G, tau).total, "cost_acyclic": graph_cost(acyclic, tau).total}
    final = acyclic
    if config.params.get("tree", tau.is_concave):
        final = tree_reduce(acyclic, tau)
        result["cost_tree"] = graph_cost(final, tau).total
    result["graph"] = graph_to_json(final)
    return result


def task_nadic(config: ExperimentConfig) -> Dict[str, Any]:
    m = measure_from_json(_input(config, "measure"))
    tau = _cost(config)
    k = int(config.params.get("k", DEFAULT_NADIC_LEVEL))
    N = nadic_graph(m, k)
    levels = []
    for j in range(1, k + 1):
        actual, bound = nadic_cost_bound(m, j, tau, nadic=N)
        levels.append({"k": j, "cost": actual, "bound": bound})
    return {"levels": levels, "total_cost": graph_cost(N.graph, tau).total,
            "total_bound": nadic_total_bound(tau, m.dim), "graph": N.to_dict()}


def task_decompose(config: ExperimentConfig) -> Dict[str, Any]:
    G = graph_from_json(_input(config, "graph"))
    plan = decompose_paths(G)
    result: Dict[str, Any] = {"plan": plan_to_json(plan)}
    if config.cost is not None:
        tau = _cost(config)
        result["pattern_cost"] = pattern_cost(plan, tau)
        result["graph_cost"] = graph_cost(G, tau).total
        result["gilbert_energy"] = gilbert_energy(flux_of_plan(plan), tau)
    return result


def _budget(config: ExperimentConfig) -> DistanceBudget:
    p = config.params
    return DistanceBudget(
        nadic_levels=int(p.get("nadic_levels", DEFAULT_NADIC_LEVEL)),
        use_optimizer=bool(p.get("use_optimizer", True)),
        optimizer=_optimizer_config(config),
        refinement_levels=int(p.get("refinement_levels", DEFAULT_NADIC_LEVEL)),
    )


def task_distance(config: ExperimentConfig) -> Dict[str, Any]:
    plus = measure_from_json(_input(config, "plus"))
    minus = measure_from_json(_input(config, "minus"))
    tau = _cost(config)
    budget = _budget(config)
    result = dtau_bounds(plus, minus, tau, budget).to_dict()
    if "samples" in config.inputs:
        samples = [measure_from_json(_read_json(os.path.join(config.base_dir, s)) if isinstance(s, str) else s)
                   for s in _input(config, "samples")]
        result["metric_probe"] = metric_probe(samples, tau, budget).to_dict()
    return result


def task_optimize(config: ExperimentConfig) -> Dict[str, Any]:
    plus = measure_from_json(_input(config, "plus"))
    minus = measure_from_json(_input(config, "minus"))
    tau = _cost(config)
    G = optimize(plus, minus, tau, _optimizer_config(config))
    result = {"cost": graph_cost(G, tau).total, "graph": graph_to_json(G)}
    if G.dim == 2:
        result["svg"] = render_svg(G)
    return result


def task_split(config: ExperimentConfig) -> Dict[str, Any]:
    G = graph_from_json(_input(config, "graph"))
    if "t" in config.params:
        t = float(config.params["t"])
        g_plus, g_minus, mid = split_at_time(G, t)
    else:
        t, g_plus, g_minus, mid = bisect_midpoint(G, float(config.params.get("target_fraction", 0.5)))
    result: Dict[str, Any] = {"t": t, "mid": measure_to_json(mid),
                              "g_plus": graph_to_json(g_plus), "g_minus": graph_to_json(g_minus)}
    if config.cost is not None:
        tau = _cost(config)
        result["costs"] = {"g": graph_cost(G, tau).total, "g_plus": graph_cost(g_plus, tau).total,
                           "g_minus": graph_cost(g_minus, tau).total}
    return result


def _flux_from_json(data: Dict[str, Any]) -> ConsolidatedFlux:
    segments = tuple(FluxSegment(np.asarray(s["a"], dtype=float), np.asarray(s["b"], dtype=float),
                                 np.asarray(s["theta"], dtype=float)) for s in data["segments"])
    return ConsolidatedFlux(int(data["dim"]), segments, float(data.get("diffuse_mass", 0.0)))


def task_render(config: ExperimentConfig) -> Dict[str, Any]:
    style = RenderStyle(project=bool(config.params.get("project", False)))
    if "graph" in config.inputs:
        obj = graph_from_json(_input(config, "graph"))
        if config.params.get("as_flux"):
            obj = consolidate_flux(obj)
    elif "plan" in config.inputs:
        obj = plan_from_json(_input(config, "plan"))
        if config.params.get("as_flux"):
            obj = flux_of_plan(obj)
    else:
        obj = _flux_from_json(_input(config, "flux"))
    return {"svg": render_svg(obj, style)}


# Reproducciones

def _expect(label: str, value: float, expected: float, tol: float = 1e-12) -> Dict[str, Any]:
    ok = abs(value - expected) <= tol * max(1.0, abs(expected))
    if not ok:
        raise ReproMismatch(f"{label}: obtenido {value!r}, esperado {expected!r}",
                            value=value, expected=expected)
    return {"value": value, "expected": expected}


def nontree_graphs(a: float = 0.35, eps: float = 0.1, length: float = 3.0):
    """Grafos G1 (dos horizontales) y G3 (con los dos travesaños de peso eps)."""
    plus = measure_from_json({"dim": 2, "atoms": [{"x": [0, 0], "m": a}, {"x": [0, 1], "m": 1 - a}]})
    minus = measure_from_json({"dim": 2, "atoms": [{"x": [length, 0], "m": a}, {"x": [length, 1], "m": 1 - a}]})
    corners = [(0.0, 0.0), (0.0, 1.0), (length, 0.0), (length, 1.0)]
    g1 = make_graph(corners, [(0, 2, a), (1, 3, 1 - a)], plus, minus)
    g3 = make_graph(corners, [(1, 0, eps), (0, 2, a + eps), (1, 3, 1 - a - eps), (2, 3, eps)], plus, minus)
    return g1, g3


def repro_nontree(config: ExperimentConfig) -> Dict[str, Any]:
    tau = step(0.3)
    g1, g3 = nontree_graphs()
    for G in (g1, g3):
        if check_conservation(G):
            raise ReproMismatch("Un grafo del contraejemplo no conserva masa")
    c1, c3 = graph_cost(g1, tau).total, graph_cost(g3, tau).total
    try:
        tree_reduce(g3, tau)
        raise ReproMismatch("tree_reduce aceptó un costo no cóncavo")
    except NonConcaveCost:
        pass
    report = {
        "cost": cost_to_json(tau),
        "g1": _expect("costo G1", c1, 4.5),
        "g3": _expect("costo G3", c3, 4.2),
        "verdict": "non-tree strictly cheaper" if c3 < c1 else "tree not beaten",
        "tree_reduce": "NonConcaveCost",
    }
    if config.params.get("optimize"):
        G = optimize(g1.source, g1.sink, tau, _optimizer_config(config))
        report["optimizer_cost"] = graph_cost(G, tau).total
    return report


def lsc_plans(a: float = 0.45, offset: float = 0.1):
    """Plan con lazo sobre un mismo segmento y la configuración separada en otra pista."""
    looping = make_plan([([(0, 0), (1, 0), (0, 0), (1, 0)], a), ([(0, 0), (1, 0)], 1 - a)], dim=2)
    separated = make_plan([([(0, offset), (1, offset), (0, offset), (1, offset)], a),
                           ([(0, 0), (1, 0)], 1 - a)], dim=2)
    return looping, separated


def repro_lsc(config: ExperimentConfig) -> Dict[str, Any]:
    a = 0.45
    tau = step(a, height=1.0)
    looping, separated = lsc_plans(a)
    return {
        "cost": cost_to_json(tau),
        "looping": _expect("costo del plan con lazo", pattern_cost(looping, tau), (1 + 2 * a) * 3.0),
        "separated": _expect("costo separado", pattern_cost(separated, tau), 5.0),
        "gilbert_energy": _expect("energía de Gilbert", gilbert_energy(flux_of_plan(looping), tau), 3.0),
        "verdict": "pattern cost jumps above its flux energy",
    }


def repro_nadic(config: ExperimentConfig) -> Dict[str, Any]:
    tau = branched(0.75)
    levels = int(config.params.get("k", 8))
    m = uniform_grid(2, int(config.params.get("per_axis", 16)))
    N = nadic_graph(m, levels)
    rows = []
    for j in range(1, levels + 1):
        actual, bound = nadic_cost_bound(m, j, tau, nadic=N)
        rows.append({"k": j, "cost": actual, "bound": bound})
    _expect("nivel 1", rows[0]["cost"], 2.0, 1e-9)
    _expect("cota del nivel 1", rows[0]["bound"], 2.0, 1e-9)
    total = graph_cost(N.graph, tau).total
    limit = nadic_total_bound(tau, 2)
    if limit is None or total > limit + 1e-9:
        raise ReproMismatch(f"Costo acumulado {total} supera 2 sqrt(n) S^beta(n) = {limit}")
    return {"cost": cost_to_json(tau), "levels": rows, "total_cost": total, "total_bound": limit}


REPRO: Dict[str, Callable[[ExperimentConfig], Dict[str, Any]]] = {
    "nontree": repro_nontree,
    "lsc": repro_lsc,
    "nadic": repro_nadic,
}


def task_repro(config: ExperimentConfig) -> Dict[str, Any]:
    name = config.params["name"]
    return {"name": name, **REPRO[name](config)}


TASK_TABLE: Dict[str, Callable[[ExperimentConfig], Dict[str, Any]]] = {
    "validate": task_validate,
    "cost": task_cost,
    "reduce": task_reduce,
    "nadic": task_nadic,
    "decompose": task_decompose,
    "distance": task_distance,
    "optimize": task_optimize,
    "split": task_split,
    "render": task_render,
    "repro": task_repro,
}


def _default_output(config: ExperimentConfig) -> str:
    ext = "svg" if config.task == "render" else DEFAULT_OUTPUT_FORMAT
    return os.path.join(DEFAULT_OUTPUT_DIR, f"{config.task}.{ext}")


def _write(path: str, content: str) -> None:
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(content)


def _dump(data: Dict[str, Any]) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True,
                      default=lambda o: o.to_json() if hasattr(o, "to_json") else str(o)) + "\n"


def run(config: ExperimentConfig) -> int:
    """
    Ejecuta una tarea y escribe su resultado.

    Returns:
        0 si todo fue bien, 2 ante fallos de validación, 1 ante otros errores
    """
    output = config.output or _default_output(config)
    try:
        config.validate()
        result = TASK_TABLE[config.task](config)
    except RamiflowError as e:
        print(f"❌ Error: {e.message}")
        _write(output if not output.endswith(".svg") else output[:-4] + ".json", _dump(e.to_dict()))
        return e.exit_status
    except Exception as e:
        logger.exception("Fallo inesperado en la tarea %s", config.task)
        print(f"❌ Error: {e}")
        return 1

    svg = result.pop("svg", None) if config.task in ("render", "optimize") else None
    if config.task == "render":
        _write(output, svg)
        print(f"🖼️  SVG guardado en: {output}")
        return 0
    _write(output, _dump(result))
    print(f"💾 Resultados guardados en: {output}")
    if svg is not None:
        svg_path = os.path.splitext(output)[0] + ".svg"
        _write(svg_path, svg)
        print(f"🖼️  SVG guardado en: {svg_path}")
    return 0


def _summary(task: str, output: str) -> None:
    if task == "render" or not os.path.exists(output) or not output.endswith(".json"):
        return
    with open(output, 'r', encoding='utf-8') as f:
        data = json.load(f)
    for key in ("total", "lower", "upper", "gap", "cost", "verdict"):
        value = data.get(key)
        if isinstance(value, (int, float, str)) and not isinstance(value, bool):
            print(f"   {key}: {value}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Ramiflow - transporte ramificado sobre grafos discretos")
    parser.add_argument("task", nargs="?", choices=TASKS, help="Tarea (sobrescribe 'task' de la configuración)")
    parser.add_argument("--config", "-c", help="Archivo JSON de configuración del experimento")
    parser.add_argument("--seed", type=int, help="Semilla (por defecto 0)")
    parser.add_argument("--out", "-o", help="Ruta de salida (por defecto outputs/<tarea>.json)")
    parser.add_argument("--name", choices=REPRO_NAMES, help="Nombre de la reproducción para 'repro'")
    parser.add_argument("--verbose", "-v", action="store_true", help="Registro detallado (DEBUG)")
    return parser


def main(argv=None) -> int:
    """Función principal del script."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else getattr(logging, LOG_LEVEL),
                        format=LOG_FORMAT)

    print("=" * 60)
    print("🌿 RAMIFLOW - TRANSPORTE RAMIFICADO")
    print("=" * 60)
    try:
        config = load_config(args.config) if args.config else ExperimentConfig(task=args.task or "")
    except RamiflowError as e:
        print(f"❌ Error: {e.message}")
        return e.exit_status
    overrides: Dict[str, Any] = {}
    if args.task:
        overrides["task"] = args.task
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out:
        overrides["output"] = args.out
    config = replace(config, **overrides)
    if args.name:
        config.params["name"] = args.name

    print(f"🚀 Tarea: {config.task} (semilla {config.seed})")
    status = run(config)
    if status == 0:
        _summary(config.task, config.output or _default_output(config))
        print("✅ Completado")
    return status


if __name__ == "__main__":
    sys.exit(main())
