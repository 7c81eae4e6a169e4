#!/usr/bin/env python3
"""
Pruebas del dibujo SVG de grafos, planes y flujos.
"""

import sys
import os

import pytest

# Agregar los directorios src y config al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'config'))

from errors import UnsupportedDimension
from measures import dirac, validate_measure
from patterns import make_plan
from svg_renderer import RenderStyle, render_svg
from transport_graph import consolidate_flux, make_graph


def y_graph():
    source = validate_measure([((-1, 1), 0.5), ((1, 1), 0.5)], dim=2)
    vertices = [(-1, 1), (1, 1), (0, 0), (0, -1)]
    return make_graph(vertices, [(0, 2, 0.5), (1, 2, 0.5), (2, 3, 1.0)], source, dirac((0, -1)))


def test_graph_document_structure():
    svg = render_svg(y_graph())
    assert svg.startswith("<svg")
    assert svg.endswith("</svg>\n")
    assert svg.count('class="edge"') == 3
    assert svg.count('class="source"') == 2
    assert svg.count('class="sink"') == 1
    assert svg.count('class="axis"') == 2
    assert 'marker-end="url(#arrow)"' in svg


def test_rendering_is_deterministic():
    assert render_svg(y_graph()) == render_svg(y_graph())


def test_stroke_width_proportional_to_weight():
    svg = render_svg(y_graph(), RenderStyle(max_stroke=10.0))
    assert 'stroke-width="10.0000"' in svg
    assert 'stroke-width="5.0000"' in svg


def test_plan_and_flux():
    plan = make_plan([([(0, 0), (1, 0), (1, 1)], 0.4), ([(2, 2)], 0.6)])
    svg = render_svg(plan)
    assert svg.count('class="path"') == 1
    assert svg.count('class="stationary"') == 1
    flux_svg = render_svg(consolidate_flux(y_graph()))
    assert flux_svg.count('class="flux"') == 3


def test_higher_dimensions_need_projection():
    m3 = dirac((0, 0, 0))
    G = make_graph([(0, 0, 0), (1, 1, 1)], [(0, 1, 1.0)], m3, dirac((1, 1, 1)))
    with pytest.raises(UnsupportedDimension):
        render_svg(G)
    svg = render_svg(G, RenderStyle(project=True))
    assert svg.count('class="edge"') == 1


def test_one_dimensional_projection():
    G = make_graph([(0,), (2,)], [(0, 1, 1.0)], dirac((0,)), dirac((2,)))
    svg = render_svg(G, RenderStyle(project=True))
    assert svg.count('class="edge"') == 1


def test_rejects_other_objects():
    with pytest.raises(TypeError):
        render_svg({"edges": []})
