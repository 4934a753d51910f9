"""Graphviz DOT rendering of a point's network."""

from __future__ import annotations

from .goi_engine import ANNIHILATE, CORET, IN, OUT, RET, SIGMA, SYM, Network
from .rel_model import format_point

_SHAPES = {SYM: "box", "id": "circle", RET: "triangle", CORET: "invtriangle",
           SIGMA: "doubleoctagon", IN: "plaintext", OUT: "plaintext"}


def to_dot(net: Network, eps: dict | None = None, name: str = "box") -> str:
    """Generators as nodes, wires as edges; feedback through cuts is dashed.

    Annihilated retraction groups are filled black, the way a zero arrowhead
    would be drawn by hand.
    """
    eps = eps or {}
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [fontname=Helvetica];"]
    for i, node in enumerate(net.nodes):
        attrs = [f'label="{node.label or node.kind}"', f"shape={_SHAPES.get(node.kind, 'box')}"]
        if node.kind == SIGMA:
            attrs.append('color="black"' if node.matched else 'color="red"')
            attrs[0] = f'label="{node.label} {"s" if node.matched else "0"}"'
        if node.group >= 0 and eps.get(node.group) == ANNIHILATE:
            attrs += ["style=filled", "fillcolor=black", "fontcolor=white"]
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for (src, sp), (dst, dp) in sorted(net.fwd.items()):
        pt = format_point(net.wire_point[(src, sp)])
        style = ", style=dashed" if SIGMA in (net.nodes[src].kind, net.nodes[dst].kind) else ""
        lines.append(f'  n{src} -> n{dst} [taillabel="{sp}", headlabel="{dp}", label="{pt}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
