#!/usr/bin/env python3
"""
Dibujo SVG determinista de grafos de transporte, planes de irrigación y
flujos consolidados (instancias planas).

El documento se arma como lista de fragmentos de texto con coordenadas
formateadas a 4 decimales, de modo que la misma entrada produce siempre
los mismos bytes.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import UnsupportedDimension
from measures import DiscreteMeasure
from patterns import IrrigationPlan
from settings import (SVG_MARGIN, SVG_MAX_DISC, SVG_MAX_STROKE, SVG_MIN_STROKE,
                      SVG_SIZE)
from transport_graph import ConsolidatedFlux, TransportGraph

logger = logging.getLogger(__name__)

Renderable = Union[TransportGraph, IrrigationPlan, ConsolidatedFlux]


@dataclass(frozen=True)
class RenderStyle:
    size: Tuple[int, int] = SVG_SIZE
    margin: int = SVG_MARGIN
    max_stroke: float = SVG_MAX_STROKE
    min_stroke: float = SVG_MIN_STROKE
    max_disc: float = SVG_MAX_DISC
    edge_color: str = "#1f4e79"
    source_color: str = "#c0392b"
    sink_color: str = "#27ae60"
    project: bool = False


def _fmt(x: float) -> str:
    text = "%.4f" % x
    return "0.0000" if text == "-0.0000" else text


def _planar(points: np.ndarray, dim: int, project: bool) -> np.ndarray:
    if dim == 2:
        return np.asarray(points, dtype=float).reshape(-1, 2)
    if not project:
        raise UnsupportedDimension(f"Solo se dibujan instancias planas (n={dim}); use la proyección",
                                   dim=dim)
    arr = np.asarray(points, dtype=float).reshape(-1, dim)
    if dim == 1:
        return np.hstack([arr, np.zeros((len(arr), 1))])
    return arr[:, :2]


class _Canvas:
    """Transformación afín de la caja de datos al lienzo (eje y hacia arriba)."""

    def __init__(self, points: np.ndarray, style: RenderStyle):
        self.style = style
        width, height = style.size
        if len(points):
            lo, hi = points.min(axis=0), points.max(axis=0)
        else:
            lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
        span = np.where(hi - lo > 0, hi - lo, 2.0)
        center = 0.5 * (lo + hi)
        self.lo = center - 0.5 * span
        self.hi = center + 0.5 * span
        self.scale = min((width - 2 * style.margin) / span[0], (height - 2 * style.margin) / span[1])
        self.width, self.height = width, height

    def xy(self, p: Sequence[float]) -> Tuple[str, str]:
        cx = 0.5 * self.width + (p[0] - 0.5 * (self.lo[0] + self.hi[0])) * self.scale
        cy = 0.5 * self.height - (p[1] - 0.5 * (self.lo[1] + self.hi[1])) * self.scale
        return _fmt(cx), _fmt(cy)


def _stroke(weight: float, top: float, style: RenderStyle) -> float:
    return style.max_stroke * weight / top if top > 0 else style.min_stroke


def _header(style: RenderStyle) -> List[str]:
    width, height = style.size
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="4" '
        'markerHeight="4" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" '
        f'fill="{style.edge_color}" /></marker></defs>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white" />',
    ]


def _axes(canvas: _Canvas, parts: List[str]) -> None:
    y0 = min(max(0.0, canvas.lo[1]), canvas.hi[1])
    x0 = min(max(0.0, canvas.lo[0]), canvas.hi[0])
    for a, b in (((canvas.lo[0], y0), (canvas.hi[0], y0)), ((x0, canvas.lo[1]), (x0, canvas.hi[1]))):
        (x1, y1), (x2, y2) = canvas.xy(a), canvas.xy(b)
        parts.append(f'<line class="axis" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                     'stroke="#999999" stroke-width="1" />')


def _discs(canvas: _Canvas, m: Optional[DiscreteMeasure], color: str, kind: str,
           top: float, parts: List[str]) -> None:
    if m is None or len(m) == 0 or top <= 0:
        return
    points = _planar(m.positions, m.dim, canvas.style.project)
    for p, w in zip(points, m.masses.tolist()):
        x, y = canvas.xy(p)
        r = canvas.style.max_disc * np.sqrt(w / top)
        parts.append(f'<circle class="{kind}" cx="{x}" cy="{y}" r="{_fmt(r)}" fill="{color}" '
                     f'fill-opacity="0.6" data-mass="{w!r}" />')


def _line(canvas: _Canvas, a, b, width: float, color: str, kind: str, weight: float, parts: List[str]) -> None:
    (x1, y1), (x2, y2) = canvas.xy(a), canvas.xy(b)
    parts.append(f'<line class="{kind}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{color}" '
                 f'stroke-width="{_fmt(width)}" stroke-linecap="round" marker-end="url(#arrow)" '
                 f'data-weight="{weight!r}" />')


def render_svg(obj: Renderable, style: Optional[RenderStyle] = None) -> str:
    """
    Documento SVG de un grafo, un plan o un flujo consolidado.

    El grosor de trazo es proporcional al peso: w(e) en un grafo, el peso
    de cada camino en un plan (sin sumar tramos compartidos; para ver la
    carga por tramo se dibuja flux_of_plan(plan)) y |theta| en un flujo.
    Las flechas marcan la orientación y los átomos son discos de área
    proporcional a la masa.

    Raises:
        UnsupportedDimension: n != 2 sin `style.project`
    """
    style = style or RenderStyle()
    parts = _header(style)
    body: List[str] = []
    if not isinstance(obj, (TransportGraph, IrrigationPlan, ConsolidatedFlux)):
        raise TypeError(f"No se puede dibujar un objeto de tipo {type(obj).__name__}")
    dim = obj.dim
    _planar(np.zeros((0, dim)), dim, style.project)

    if isinstance(obj, TransportGraph):
        verts = _planar(obj.vertices, dim, style.project) if len(obj.vertices) else np.zeros((0, 2))
        atoms = [_planar(m.positions, dim, style.project) for m in (obj.source, obj.sink) if len(m)]
        canvas = _Canvas(np.vstack([verts] + atoms), style)
        top = max([e.weight for e in obj.edges], default=0.0)
        for e in obj.edges:
            _line(canvas, verts[e.tail], verts[e.head], _stroke(e.weight, top, style),
                  style.edge_color, "edge", e.weight, body)
        mass_top = max([0.0] + obj.source.masses.tolist() + obj.sink.masses.tolist())
        _discs(canvas, obj.source, style.source_color, "source", mass_top, body)
        _discs(canvas, obj.sink, style.sink_color, "sink", mass_top, body)
    elif isinstance(obj, IrrigationPlan):
        paths = [_planar(p.points, dim, style.project) for p in obj.paths]
        canvas = _Canvas(np.vstack(paths) if paths else np.zeros((0, 2)), style)
        top = max([p.weight for p in obj.paths], default=0.0)
        for pts, path in zip(paths, obj.paths):
            if path.is_stationary:
                x, y = canvas.xy(pts[0])
                body.append(f'<circle class="stationary" cx="{x}" cy="{y}" r="{_fmt(style.max_disc / 2)}" '
                            f'fill="{style.edge_color}" data-weight="{path.weight!r}" />')
                continue
            coords = " ".join(",".join(canvas.xy(p)) for p in pts)
            body.append(f'<polyline class="path" points="{coords}" fill="none" stroke="{style.edge_color}" '
                        f'stroke-opacity="0.7" stroke-width="{_fmt(_stroke(path.weight, top, style))}" '
                        f'marker-end="url(#arrow)" data-weight="{path.weight!r}" />')
    else:
        ends = [_planar(np.array([s.start, s.end]), dim, style.project) for s in obj.segments]
        canvas = _Canvas(np.vstack(ends) if ends else np.zeros((0, 2)), style)
        top = max([s.magnitude for s in obj.segments], default=0.0)
        for (a, b), s in zip(ends, obj.segments):
            _line(canvas, a, b, _stroke(s.magnitude, top, style), style.edge_color, "flux", s.magnitude, body)

    _axes(canvas, parts)
    parts.extend(body)
    parts.append("</svg>")
    logger.debug("SVG con %d elementos", len(body))
    return "\n".join(parts) + "\n"
