"""
Cut-elimination: redex classification, the eight rewrite rules, strategies,
exhaustive exploration and isomorphism of small nets.
"""
import logging
import math
import random
from dataclasses import dataclass, field

import networkx as nx
from django.conf import settings

from .exceptions import (
    CycleDetected, MixedIndexing, SizeLimit, StepBudgetExceeded, UnclassifiableCut,
)
from .formula import (
    Bang, ExpIndex, Quest, alpha_equal, dual, rename_free, subtype_leq, substitute,
)
from .proofnet import depth, net_size

logger = logging.getLogger(__name__)

RULES = ("AxCut", "TensPar", "ForallExists", "BangDer", "BangBang", "BangWeak", "BangDig", "BangCont")

_BANG_RULES = {
    "Der": "BangDer",
    "Weak": "BangWeak",
    "Cont": "BangCont",
    "Dig": "BangDig",
    "BoxAux": "BangBang",
}

STRATEGIES = ("leftmost-innermost", "leftmost-outermost", "random")


@dataclass(frozen=True)
class CutRedex:
    cut: str
    rule: str
    depth: int = 0
    order: int = 0
    # index of the first net conclusion in the cut's connected component
    conclusion: float = math.inf


@dataclass
class ReductionLog:
    steps: list = field(default_factory=list)
    sizes: list = field(default_factory=list)
    net: object = None

    def __len__(self):
        return len(self.steps)


# ============================================================
# REDEX DETECTION
# ============================================================

def classify_cut(net, cut_id):
    e0, e1 = net.premise(cut_id, 0), net.premise(cut_id, 1)
    n0, n1 = net.edges[e0].tail[0], net.edges[e1].tail[0]
    k0, k1 = net.nodes[n0].kind, net.nodes[n1].kind
    if n0 == n1:
        raise UnclassifiableCut(f"both premises of {cut_id} come from {n0}")
    kinds = {k0, k1}
    if "Ax" in kinds:
        return "AxCut"
    if kinds == {"Tensor", "Par"}:
        return "TensPar"
    if kinds == {"Forall", "Exists"}:
        return "ForallExists"
    if "BoxPrincipal" in kinds:
        other = k1 if k0 == "BoxPrincipal" else k0
        if other in _BANG_RULES:
            return _BANG_RULES[other]
    raise UnclassifiableCut(f"cut {cut_id} between {k0} and {k1}")


def conclusion_indices(net):
    """
    Node id -> smallest index in ``net.conclusions`` of a conclusion wired
    to the node's connected component; ``math.inf`` when there is none.
    """
    graph = nx.Graph()
    graph.add_nodes_from(net.nodes)
    graph.add_edges_from(
        (edge.tail[0], edge.head[0]) for edge in net.edges.values() if edge.head is not None
    )
    first = {}
    for i, edge_id in enumerate(net.conclusions):
        first.setdefault(net.edges[edge_id].tail[0], i)
    out = {}
    for component in nx.connected_components(graph):
        index = min((first[n] for n in component if n in first), default=math.inf)
        out.update(dict.fromkeys(component, index))
    return out


def find_redexes(net):
    """Every cut of the net with its rule; file order is kept."""
    redexes = []
    indices = conclusion_indices(net)
    for order, node in enumerate(net.nodes.values()):
        if node.kind == "Cut":
            redexes.append(CutRedex(
                node.id, classify_cut(net, node.id), depth(net, node.id), order, indices[node.id],
            ))
    return redexes


def _sides(net, cut_id, kind):
    """(edge from a node of ``kind``, the other premise)."""
    e0, e1 = net.premise(cut_id, 0), net.premise(cut_id, 1)
    if net.nodes[net.edges[e0].tail[0]].kind == kind:
        return e0, e1
    return e1, e0


# ============================================================
# LABEL TRANSPORT
# ============================================================

def _leq(a, b):
    try:
        return subtype_leq(a, b)
    except MixedIndexing:
        return alpha_equal(a, b)


def _align(net, u, v):
    """
    Make the labels of a fresh cut dual. The edge whose label can be raised
    to the dual of the other one is relabelled; the other keeps its label.
    """
    lu, lv = net.edges[u].label, net.edges[v].label
    if lu is None or lv is None or alpha_equal(lv, dual(lu)):
        return
    if _leq(lv, dual(lu)):
        net.edges[v].label = dual(lu)
    elif _leq(lu, dual(lv)):
        net.edges[u].label = dual(lv)
    else:
        logger.debug("labels of %s and %s stay apart", u, v)


def _new_cut(net, base, box, left, right):
    cut_id = net.fresh_id(base)
    net.add_node(cut_id, "Cut", box)
    net.set_head(left, (cut_id, "p0"))
    net.set_head(right, (cut_id, "p1"))
    _align(net, left, right)
    return cut_id


def _replace_conclusion(net, old, new):
    if old in net.conclusions:
        net.conclusions[net.conclusions.index(old)] = new


def _box_contents(net, box_id):
    """(nodes, interior edges, nested boxes including ``box_id``)."""
    nodes = set(net.nodes_in(box_id, deep=True))
    outer = {net.principal_edge(box_id), *net.aux_edges(box_id)}
    edges = [e for e, edge in net.edges.items() if edge.tail[0] in nodes and e not in outer]
    boxes = [b for b in net.boxes if box_id in net.box_chain(b)]
    return nodes, edges, boxes


# ============================================================
# RULES
# ============================================================

def _ax_cut(net, cut_id):
    ax_edge, other = _sides(net, cut_id, "Ax")
    if net.nodes[net.edges[net.premise(cut_id, 1)].tail[0]].kind == "Ax":
        ax_edge = net.premise(cut_id, 1)
        other = net.premise(cut_id, 0)
    ax = net.edges[ax_edge].tail[0]
    far = net.conclusion(ax, 1 if net.edges[ax_edge].tail[1] == "c0" else 0)
    far_edge = net.edges[far]
    head, label, level = far_edge.head, far_edge.label, far_edge.level
    _replace_conclusion(net, far, other)
    net.remove_edge(far)
    net.remove_edge(ax_edge)
    net.remove_node(ax)
    net.remove_node(cut_id)
    net.set_head(other, head)
    if label is not None:
        net.edges[other].label = label
    net.edges[other].level = level


def _tens_par(net, cut_id):
    t_edge, p_edge = _sides(net, cut_id, "Tensor")
    tensor, par = net.edges[t_edge].tail[0], net.edges[p_edge].tail[0]
    box = net.nodes[cut_id].box
    t0, t1 = net.premise(tensor, 0), net.premise(tensor, 1)
    q0, q1 = net.premise(par, 0), net.premise(par, 1)
    for e in (t_edge, p_edge):
        net.remove_edge(e)
    for n in (tensor, par, cut_id):
        net.remove_node(n)
    _new_cut(net, f"{cut_id}l", box, q0, t0)
    _new_cut(net, f"{cut_id}r", box, q1, t1)


def _forall_exists(net, cut_id):
    f_edge, x_edge = _sides(net, cut_id, "Forall")
    forall, exists = net.edges[f_edge].tail[0], net.edges[x_edge].tail[0]
    var = net.nodes[forall].var
    witness = net.nodes[exists].witness
    box = net.nodes[cut_id].box
    a, b = net.premise(forall, 0), net.premise(exists, 0)
    for e in (f_edge, x_edge):
        net.remove_edge(e)
    for n in (forall, exists, cut_id):
        net.remove_node(n)
    if witness is not None:
        for edge in net.edges.values():
            if edge.label is not None:
                edge.label = substitute(edge.label, var, witness)
        for node in net.nodes.values():
            if node.witness is not None:
                node.witness = substitute(node.witness, var, witness)
    _new_cut(net, cut_id, box, a, b)


def _bang_der(net, cut_id):
    p_edge, d_edge = _sides(net, cut_id, "BoxPrincipal")
    principal, der = net.edges[p_edge].tail[0], net.edges[d_edge].tail[0]
    box_id = net.nodes[principal].box
    box = net.boxes[box_id]
    parent = box.parent
    inner = net.premise(principal, 0)
    outer = net.premise(der, 0)
    for e in (p_edge, d_edge):
        net.remove_edge(e)
    for n in (principal, der, cut_id):
        net.remove_node(n)
    for node in net.nodes.values():
        if node.box == box_id:
            node.box = parent
    for door in box.aux:
        net.nodes[door].kind = "Der"
    for other in net.boxes.values():
        if other.parent == box_id:
            other.parent = parent
    del net.boxes[box_id]
    _new_cut(net, cut_id, parent, inner, outer)


def _bang_weak(net, cut_id):
    p_edge, w_edge = _sides(net, cut_id, "BoxPrincipal")
    principal, weak = net.edges[p_edge].tail[0], net.edges[w_edge].tail[0]
    box_id = net.nodes[principal].box
    box = net.boxes[box_id]
    nodes, edges, boxes = _box_contents(net, box_id)
    for e in edges + [p_edge, w_edge]:
        net.remove_edge(e)
    doors = set(box.aux)
    for n in nodes - doors:
        net.remove_node(n)
    for n in (weak, cut_id):
        net.remove_node(n)
    for door in box.aux:
        net.nodes[door].kind = "Weak"
        net.nodes[door].box = box.parent
    for b in boxes:
        del net.boxes[b]


def _bang_cont(net, cut_id):
    p_edge, k_edge = _sides(net, cut_id, "BoxPrincipal")
    principal, cont = net.edges[p_edge].tail[0], net.edges[k_edge].tail[0]
    box_id = net.nodes[principal].box
    box = net.boxes[box_id]
    parent = box.parent
    left_in, right_in = net.premise(cont, 0), net.premise(cont, 1)
    nodes, edges, boxes = _box_contents(net, box_id)
    aux_out = net.aux_edges(box_id)
    snapshot = {
        "nodes": {n: net.nodes[n] for n in nodes},
        "edges": {e: net.edges[e] for e in edges},
        "boxes": {b: net.boxes[b] for b in boxes},
        "principal_label": net.edges[p_edge].label,
    }
    eigen = [node.var for node in snapshot["nodes"].values() if node.kind == "Forall" and node.var]

    for e in edges + [p_edge, k_edge]:
        net.remove_edge(e)
    for n in nodes | {cont, cut_id}:
        net.remove_node(n)
    for b in boxes:
        del net.boxes[b]

    doors = {}
    for suffix, incoming in (("l", left_in), ("r", right_in)):
        doors[suffix] = _paste_copy(net, snapshot, box_id, suffix, eigen)
        copy_principal = doors[suffix][box.principal]
        edge_id = net.fresh_id(f"{p_edge}{suffix}")
        net.add_edge(edge_id, (copy_principal, "c0"), None, snapshot["principal_label"], conclusion=False)
        _new_cut(net, f"{cut_id}{suffix}", parent, edge_id, incoming)

    for door, out_edge in zip(box.aux, aux_out):
        merge = net.fresh_id(f"{door}c")
        net.add_node(merge, "Cont", parent)
        label = net.edges[out_edge].label
        for port, suffix in (("p0", "l"), ("p1", "r")):
            edge_id = net.fresh_id(f"{out_edge}{suffix}")
            net.add_edge(edge_id, (doors[suffix][door], "c0"), (merge, port), label)
        net.set_tail(out_edge, (merge, "c0"))


def _paste_copy(net, snapshot, box_id, suffix, eigen):
    """Insert one suffixed copy of a removed box; returns the node id map."""
    reserved = set()
    node_map, box_map = {}, {}
    for names, mapping in ((snapshot["nodes"], node_map), (snapshot["boxes"], box_map)):
        for name in names:
            mapping[name] = net.fresh_id(f"{name}{suffix}", reserved)
            reserved.add(mapping[name])

    def rename(formula):
        if formula is None:
            return None
        for var in eigen:
            formula = rename_free(formula, var, f"{var}{suffix}")
        return formula

    for old, node in snapshot["nodes"].items():
        var = f"{node.var}{suffix}" if node.kind == "Forall" and node.var else node.var
        net.add_node(node_map[old], node.kind, box_map.get(node.box, node.box), var,
                     node.level, rename(node.witness))
    for old, b in snapshot["boxes"].items():
        parent = b.parent if old == box_id else box_map.get(b.parent, b.parent)
        net.add_box(box_map[old], node_map[b.principal], [node_map[a] for a in b.aux], parent)
    for old, edge in snapshot["edges"].items():
        tail = (node_map[edge.tail[0]], edge.tail[1])
        head = (node_map[edge.head[0]], edge.head[1])
        net.add_edge(net.fresh_id(f"{old}{suffix}"), tail, head, rename(edge.label), edge.level)
    return node_map


def _bang_bang(net, cut_id):
    p_edge, a_edge = _sides(net, cut_id, "BoxPrincipal")
    principal, door = net.edges[p_edge].tail[0], net.edges[a_edge].tail[0]
    inner_box = net.nodes[principal].box
    host_box = net.nodes[door].box
    entering = net.boxes[inner_box]
    host = net.boxes[host_box]
    inner = net.premise(principal, 0)
    target = net.premise(door, 0)
    for e in (p_edge, a_edge):
        net.remove_edge(e)
    for n in (principal, door, cut_id):
        net.remove_node(n)
    for node in net.nodes.values():
        if node.box == inner_box:
            node.box = host_box
    for other in net.boxes.values():
        if other.parent == inner_box:
            other.parent = host_box
    host.aux = [d for d in host.aux if d != door] + list(entering.aux)
    del net.boxes[inner_box]
    _new_cut(net, cut_id, host_box, inner, target)


def _deepen(label):
    """?_{s,d,n}B -> ?_{s,d,n+1}B; plain labels are kept."""
    if isinstance(label, Quest) and label.idx is not None:
        return Quest(ExpIndex(label.idx.s, label.idx.d, label.idx.n + 1), label.body)
    return label


def _bang_dig(net, cut_id):
    p_edge, g_edge = _sides(net, cut_id, "BoxPrincipal")
    principal, dig = net.edges[p_edge].tail[0], net.edges[g_edge].tail[0]
    box_id = net.nodes[principal].box
    box = net.boxes[box_id]
    cut_port = net.edges[p_edge].head
    dig_port = net.edges[g_edge].head
    feed = net.premise(dig, 0)
    feed_label = net.edges[feed].label
    inner_label = net.edges[net.premise(principal, 0)].label

    inner_id = net.fresh_id(f"{box_id}i")
    outer_id = net.fresh_id(f"{box_id}e")
    for node in net.nodes.values():
        if node.box == box_id:
            node.box = inner_id
    for other in net.boxes.values():
        if other.parent == box_id:
            other.parent = inner_id
    del net.boxes[box_id]
    net.add_box(outer_id, net.fresh_id(f"{principal}e"), [], box.parent)
    net.add_box(inner_id, principal, box.aux, outer_id)
    outer = net.boxes[outer_id]

    if isinstance(feed_label, Quest) and isinstance(feed_label.body, Quest):
        outer_label = dual(feed_label)
        inner_concl = outer_label.body
    elif inner_label is not None:
        inner_concl = Bang(None, inner_label)
        outer_label = Bang(None, inner_concl)
    else:
        inner_concl = outer_label = None

    net.remove_edge(g_edge)
    net.remove_node(dig)
    net.add_node(outer.principal, "BoxPrincipal", outer_id)
    net.set_head(p_edge, (outer.principal, "p0"))
    net.edges[p_edge].label = inner_concl
    new_principal = net.fresh_id(f"{p_edge}e")
    net.add_edge(new_principal, (outer.principal, "c0"), cut_port, outer_label)
    net.set_head(feed, dig_port)

    for door in box.aux:
        out_edge = net.conclusion(door)
        label = net.edges[out_edge].label
        outer_door = net.fresh_id(f"{door}e")
        digger = net.fresh_id(f"{door}g")
        net.add_node(outer_door, "BoxAux", outer_id)
        net.add_node(digger, "Dig", box.parent)
        outer.aux.append(outer_door)
        net.set_tail(out_edge, (digger, "c0"))
        inner_edge = net.fresh_id(f"{out_edge}i")
        net.add_edge(inner_edge, (door, "c0"), (outer_door, "p0"), _deepen(label))
        through = None
        if label is not None:
            through = Quest(label.idx, _deepen(label)) if isinstance(label, Quest) else Quest(None, label)
        net.add_edge(net.fresh_id(f"{out_edge}e"), (outer_door, "c0"), (digger, "p0"), through)


_REWRITES = {
    "AxCut": _ax_cut,
    "TensPar": _tens_par,
    "ForallExists": _forall_exists,
    "BangDer": _bang_der,
    "BangWeak": _bang_weak,
    "BangCont": _bang_cont,
    "BangBang": _bang_bang,
    "BangDig": _bang_dig,
}


def reduce(net, redex):
    """Fire one redex; the input net is left untouched."""
    out = net.copy()
    rule = redex.rule if isinstance(redex, CutRedex) else classify_cut(net, redex)
    cut_id = redex.cut if isinstance(redex, CutRedex) else redex
    _REWRITES[rule](out, cut_id)
    out.reindex()
    logger.debug("%s on %s: %d -> %d edges", rule, cut_id, net_size(net), net_size(out))
    return out


# ============================================================
# STRATEGIES
# ============================================================

def pick_redex(redexes, strategy, rng=None):
    """
    Leftmost strategies order by conclusion index, then depth (deepest
    first for innermost, shallowest first for outermost), then file order.
    """
    if strategy == "leftmost-innermost":
        return min(redexes, key=lambda r: (r.conclusion, -r.depth, r.order))
    if strategy == "leftmost-outermost":
        return min(redexes, key=lambda r: (r.conclusion, r.depth, r.order))
    if strategy == "random":
        return (rng or random).choice(redexes)
    raise ValueError(f"unknown strategy {strategy!r}")


def normalize(net, strategy="leftmost-innermost", max_steps=None, seed=None, on_step=None):
    """
    Reduce until no cut is left.

    Returns:
        ReductionLog with the fired (rule, cut) pairs, the size before the
        first step and after every step, and the final net.
    """
    if max_steps is None:
        max_steps = getattr(settings, "PNET_MAX_STEPS", 10_000)
    rng = random.Random(seed)
    log = ReductionLog(sizes=[net_size(net)], net=net)
    current = net
    while True:
        redexes = find_redexes(current)
        if not redexes:
            break
        if len(log.steps) >= max_steps:
            log.net = current
            logger.warning("normalize stopped after %d steps", max_steps)
            raise StepBudgetExceeded(f"no normal form within {max_steps} steps", log=log)
        redex = pick_redex(redexes, strategy, rng)
        current = reduce(current, redex)
        log.steps.append((redex.rule, redex.cut))
        log.sizes.append(net_size(current))
        if on_step is not None:
            on_step(len(log.steps), current)
    log.net = current
    logger.info("normal form after %d steps (%s)", len(log.steps), strategy)
    return log


# ============================================================
# ISOMORPHISM AND EXHAUSTIVE EXPLORATION
# ============================================================

def to_digraph(net):
    """
    Graph view used for isomorphism: net nodes, one node per box, one
    anonymous node per open conclusion. Parallel net edges are merged and
    keep their sorted ports.
    """
    graph = nx.DiGraph()
    for node in net.nodes.values():
        graph.add_node(("n", node.id), kind=node.kind)
    for box in net.boxes.values():
        graph.add_node(("b", box.id), kind="Box")
        graph.add_edge(("b", box.id), ("n", box.principal), ports=(("principal",),))
        for i, door in enumerate(box.aux):
            graph.add_edge(("b", box.id), ("n", door), ports=(("aux", i),))
        if box.parent is not None:
            graph.add_edge(("b", box.id), ("b", box.parent), ports=(("sub",),))
    for node in net.nodes.values():
        if node.box is not None and node.kind not in ("BoxPrincipal", "BoxAux"):
            graph.add_edge(("n", node.id), ("b", node.box), ports=(("in",),))
    for edge in net.edges.values():
        tail = ("n", edge.tail[0])
        if edge.head is None:
            head = ("o", edge.id)
            graph.add_node(head, kind="OUT")
            ports = (edge.tail[1], "OUT")
        else:
            head = ("n", edge.head[0])
            ports = (edge.tail[1], edge.head[1])
        if graph.has_edge(tail, head):
            merged = tuple(sorted(graph.edges[tail, head]["ports"] + (ports,)))
            graph.edges[tail, head]["ports"] = merged
        else:
            graph.add_edge(tail, head, ports=(ports,))
    return graph


def _node_match(a, b):
    return a["kind"] == b["kind"]


def _edge_match(a, b):
    return a["ports"] == b["ports"]


def iso_equal(a, b, limit=None):
    """Kind-, box- and wiring-preserving isomorphism; labels and ids are ignored."""
    if limit is None:
        limit = getattr(settings, "PNET_ISO_NODE_LIMIT", 200)
    ga, gb = to_digraph(a), to_digraph(b)
    if max(ga.number_of_nodes(), gb.number_of_nodes()) > limit:
        raise SizeLimit(f"iso_equal is limited to {limit} graph nodes")
    if ga.number_of_nodes() != gb.number_of_nodes() or ga.number_of_edges() != gb.number_of_edges():
        return False
    return nx.is_isomorphic(ga, gb, node_match=_node_match, edge_match=_edge_match)


def graph_hash(net):
    graph = to_digraph(net)
    for u, v, data in graph.edges(data=True):
        data["key"] = repr(data["ports"])
    return nx.weisfeiler_lehman_graph_hash(graph, node_attr="kind", edge_attr="key")


def reduction_graph(net, budget=None):
    """
    All nets reachable by any sequence of cut-elimination steps, up to
    isomorphism, as a DiGraph whose nodes carry ``net``.
    """
    if budget is None:
        budget = getattr(settings, "PNET_STEP_BUDGET", 10**6)
    graph = nx.DiGraph()
    buckets = {}

    def intern(candidate):
        key = graph_hash(candidate)
        for index in buckets.get(key, []):
            if iso_equal(graph.nodes[index]["net"], candidate):
                return index, False
        index = graph.number_of_nodes()
        graph.add_node(index, net=candidate)
        buckets.setdefault(key, []).append(index)
        return index, True

    root, _ = intern(net)
    stack = [root]
    while stack:
        if graph.number_of_nodes() > budget:
            raise StepBudgetExceeded(f"more than {budget} reducts")
        index = stack.pop()
        current = graph.nodes[index]["net"]
        for redex in find_redexes(current):
            target, new = intern(reduce(current, redex))
            graph.add_edge(index, target, rule=redex.rule, cut=redex.cut)
            if new:
                stack.append(target)
    return graph


def longest_reduction(net, budget=None):
    """
    Returns:
        (length of the longest reduction sequence, largest size met).
    """
    graph = reduction_graph(net, budget)
    if not nx.is_directed_acyclic_graph(graph):
        raise CycleDetected("a reduct is isomorphic to one of its ancestors")
    longest = nx.dag_longest_path_length(graph) if graph.number_of_edges() else 0
    largest = max(net_size(data["net"]) for _, data in graph.nodes(data=True))
    return longest, largest
