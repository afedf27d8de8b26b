"""
The bundled dumbbell graph and its two closed-form ground states.

A center O joined by unit edges to the boundary leaf V0 and to V+1, V-1;
each V+-1 carries a unit edge to the leaf V+-2 and an edge of length 3 to
the leaf V+-3. The inradius is 2, attained at P+- = (e+-3, t=1), so the
principal eigenvalue is 1/2.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from inflap.io import parse_graph
from inflap.metric_graph import MetricGraph
from inflap.pl_calculus import PLFunction

GRAPH_FILE = Path(__file__).parent / "data" / "dumbbell_graph.json"

Q = Fraction


def dumbbell_graph() -> MetricGraph:
    with open(GRAPH_FILE, "r", encoding="utf-8") as f:
        return parse_graph(json.load(f))


def _side(sign: str, center: Fraction, joint: Fraction, peak: Fraction) -> dict[str, list[tuple[Fraction, Fraction]]]:
    return {
        f"e{sign}1": [(Q(0), center), (Q(1), joint)],
        f"e{sign}2": [(Q(0), joint), (Q(1), Q(0))],
        f"e{sign}3": [(Q(0), joint), (Q(1), peak), (Q(3), Q(0))],
    }


def u_inf(g: MetricGraph | None = None) -> PLFunction:
    """Ground state with u = 1 on both incenters."""
    g = g or dumbbell_graph()
    quarter, half = Q(1, 4), Q(1, 2)
    pieces = {"e0": [(Q(0), quarter), (Q(1), Q(0))]}
    pieces.update(_side("+", quarter, half, Q(1)))
    pieces.update(_side("-", quarter, half, Q(1)))
    return PLFunction(g, pieces)


def u_inf_plus(g: MetricGraph | None = None) -> PLFunction:
    """Minimal ground state with u = 1 only at P+; the other half sinks to height 1/4."""
    g = g or dumbbell_graph()
    quarter = Q(1, 4)
    pieces = {"e0": [(Q(0), quarter), (Q(1), Q(0))]}
    pieces.update(_side("+", quarter, Q(1, 2), Q(1)))
    pieces.update(_side("-", quarter, Q(1, 8), quarter))
    return PLFunction(g, pieces)
