"""
DOT rendering of nets (boxes as nested clusters) and of box relations.
"""
import logging

from graphviz import Digraph

from .criteria import COARSE, DC, NEST, STRAT
from .formula import format_formula

logger = logging.getLogger(__name__)

SYMBOLS = {
    "Ax": "ax", "Cut": "cut", "Tensor": "⊗", "Par": "⅋", "Forall": "∀", "Exists": "∃",
    "Der": "?d", "Weak": "?w", "Cont": "?c", "Dig": "?n", "BoxPrincipal": "!P",
    "BoxAux": "?P", "Paragraph": "§",
}

COLOURS = {STRAT: "red", DC: "blue", NEST: "darkgreen", COARSE: "grey"}


def _fill(graph, net, box, children, members):
    for node_id in members.get(box, []):
        node = net.nodes[node_id]
        label = SYMBOLS[node.kind]
        if node.var is not None:
            label += f" {node.var}"
        graph.node(node_id, label=label, tooltip=node_id)
    for child in children.get(box, []):
        with graph.subgraph(name=f"cluster_{child}") as cluster:
            cluster.attr(label=child, style="rounded")
            _fill(cluster, net, child, children, members)


def net_to_dot(net, name="net"):
    """
    Returns:
        ``graphviz.Digraph`` of ``net``; doors are drawn inside their box,
        open conclusions end on point nodes.
    """
    graph = Digraph(name)
    graph.attr(rankdir="TB")
    children, members = {}, {}
    for box in sorted(net.boxes.values(), key=lambda b: b.id):
        children.setdefault(box.parent, []).append(box.id)
    for node in net.nodes.values():
        members.setdefault(node.box, []).append(node.id)
    _fill(graph, net, None, children, members)
    for edge in net.edges.values():
        label = "" if edge.label is None else format_formula(edge.label)
        if edge.head is None:
            out = f"out_{edge.id}"
            graph.node(out, shape="point")
            graph.edge(edge.tail[0], out, label=label, tooltip=edge.id)
        else:
            graph.edge(edge.tail[0], edge.head[0], label=label, tooltip=edge.id)
    logger.debug("rendered %d nodes in %d boxes", len(net.nodes), len(net.boxes))
    return graph


def relations_to_dot(rels, name="relations"):
    """One node per box, one edge per related pair, coloured by relation kind."""
    graph = Digraph(name)
    boxes = set()
    for relation in rels.values():
        boxes |= set(relation.stratum)
    for box in sorted(boxes):
        graph.node(box, shape="box")
    for kind, relation in sorted(rels.items()):
        for source, target in relation.edges:
            graph.edge(source, target, label=kind, color=COLOURS.get(kind, "black"))
    return graph
