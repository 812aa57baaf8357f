"""
Box relations (stratification ↠, dependence control ⋉, nesting ≺), their
strata, and the complexity bounds computed from them.
"""
import logging
import math
from dataclasses import dataclass, field

import networkx as nx

from .ctxsem import FULL, NOJUMP, Context, Explorer, bang, run_path, weight
from .exceptions import CycleDetected
from .formula import Bang
from .proofnet import net_size
from .rewrite import STRATEGIES, normalize
from .signatures import E, is_standard, signatures_of_depth, simplifications

logger = logging.getLogger(__name__)

STRAT, DC, NEST, COARSE = "strat", "dc", "nest", "coarse"
KINDS = (STRAT, DC, NEST)

# results above this many bits are rendered symbolically
MAX_BITS = 1 << 20


@dataclass
class BoxRelation:
    kind: str
    edges: list = field(default_factory=list)
    acyclic: bool = True
    stratum: dict = field(default_factory=dict)
    depth: object = 0
    cycle: list = field(default_factory=list)

    def graph(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(self.stratum)
        graph.add_edges_from(self.edges)
        return graph


@dataclass
class BoundReport:
    x: int
    partial: int
    S: object
    D: object
    N: object
    elementary: object = None
    polynomial: object = None
    box_copies: object = None
    measured_steps: object = None


# ============================================================
# STRATA
# ============================================================

def strata(graph):
    """
    stratum(B) = number of boxes on the longest chain starting at B; boxes
    from which a cycle is reachable get ``math.inf``.

    Returns:
        (stratum map, depth of the relation, cycle witness or []).
    """
    cyclic = set()
    cycle = []
    for component in nx.strongly_connected_components(graph):
        node = next(iter(component))
        if len(component) > 1 or graph.has_edge(node, node):
            cyclic |= component
    if cyclic:
        cycle = [u for u, _ in nx.find_cycle(graph)]
        for node in list(cyclic):
            cyclic |= nx.ancestors(graph, node)
    stratum = {node: math.inf for node in cyclic}
    rest = graph.subgraph(set(graph) - cyclic)
    for node in reversed(list(nx.topological_sort(rest))):
        stratum[node] = 1 + max((stratum[s] for s in rest.successors(node)), default=0)
    depth = max(stratum.values(), default=0)
    return stratum, depth, cycle


def _relation(kind, boxes, pairs):
    graph = nx.DiGraph()
    graph.add_nodes_from(sorted(boxes))
    graph.add_edges_from(pairs)
    stratum, depth, cycle = strata(graph)
    return BoxRelation(
        kind=kind,
        edges=sorted(graph.edges()),
        acyclic=not cycle,
        stratum=dict(sorted(stratum.items())),
        depth=depth,
        cycle=cycle,
    )


# ============================================================
# HARVEST
# ============================================================

def _starts(net, explorer, all_potentials_depth=None):
    """
    (box, potential, signature) triples the relations quantify over:
    canonical potentials and the copies with their simplifications, or every
    signature up to a depth when ``all_potentials_depth`` is set.
    """
    for box in sorted(net.boxes):
        if all_potentials_depth is not None:
            sigs = signatures_of_depth(all_potentials_depth)
            potentials = [()]
            for _ in net.box_chain(box)[:-1]:
                potentials = [p + (t,) for p in potentials for t in sigs]
            for potential in potentials:
                for t in sigs:
                    yield box, potential, t
            continue
        for potential in explorer.canonical_potentials(box):
            domain = set()
            for t in explorer.copies(box, potential):
                domain |= simplifications(t)
            for t in sorted(domain, key=str):
                yield box, potential, t


def _door_of(net, edge_id):
    """(box, kind, aux index) of the door emitting ``edge_id``, or None."""
    node = net.nodes[net.edges[edge_id].tail[0]]
    if node.kind == "BoxPrincipal":
        return node.box, "principal", None
    if node.kind == "BoxAux":
        return node.box, "aux", net.boxes[node.box].aux.index(node.id)
    return None


def harvest(net, explorer=None, all_potentials_depth=None):
    """
    Walk every start context once under ↦ and once under ⇝ and collect the
    pairs of the four relations.

    Returns:
        dict kind -> set of (B, C) pairs.
    """
    explorer = explorer or Explorer(net)
    pairs = {STRAT: set(), DC: set(), NEST: set(), COARSE: set()}
    arrivals = {}
    empty = (bang(E),)
    for box, potential, t in _starts(net, explorer, all_potentials_depth):
        start = Context(net.principal_edge(box), False, potential, (bang(t),))
        local = run_path(net, start, NOJUMP, budget=explorer.budget)
        for i, (c, _) in enumerate(local):
            door = _door_of(net, c.edge)
            if c.rev and door and door[1] == "principal":
                pairs[COARSE].add((box, door[0]))
                if i > 0:
                    pairs[STRAT].add((box, door[0]))
            for inner in net.edge_chain(c.edge):
                pairs[COARSE].add((box, inner))
        full = run_path(net, start, FULL, budget=explorer.budget)
        for c, _ in full[1:]:
            if c.trace != empty:
                continue
            door = _door_of(net, c.edge)
            if door is None:
                continue
            if c.rev and door[1] == "aux":
                arrivals.setdefault((box, potential), set()).add((door[0], door[2]))
            elif not c.rev and door[1] == "principal" and not is_standard(t):
                pairs[NEST].add((box, door[0]))
    for (box, _), found in arrivals.items():
        doors = {}
        for target, index in found:
            doors.setdefault(target, set()).add(index)
        pairs[DC] |= {(box, target) for target, indices in doors.items() if len(indices) >= 2}
    logger.info("relations: %s", {k: len(v) for k, v in pairs.items()})
    return pairs


def _build(net, kind, explorer=None, all_potentials_depth=None):
    pairs = harvest(net, explorer, all_potentials_depth)
    return _relation(kind, net.boxes, pairs[kind])


def strat_relation(net, explorer=None, all_potentials_depth=None):
    return _build(net, STRAT, explorer, all_potentials_depth)


def dc_relation(net, explorer=None, all_potentials_depth=None):
    return _build(net, DC, explorer, all_potentials_depth)


def nest_relation(net, explorer=None, all_potentials_depth=None):
    return _build(net, NEST, explorer, all_potentials_depth)


def coarse_relation(net, explorer=None, all_potentials_depth=None):
    """B enters C anywhere: the ↦-path from σ(B) touches σ̄(C) or an edge inside C."""
    return _build(net, COARSE, explorer, all_potentials_depth)


def relations(net, explorer=None, all_potentials_depth=None):
    pairs = harvest(net, explorer, all_potentials_depth)
    return {kind: _relation(kind, net.boxes, pairs[kind]) for kind in (*KINDS, COARSE)}


# ============================================================
# BOUNDS
# ============================================================

def _symbolic(text):
    logger.warning("bound too large to materialise, rendered as %s", text)
    return text


def power(base, exponent):
    """base**exponent, or a string when the result would be too large."""
    if isinstance(exponent, str):
        return _symbolic(f"{base}^({exponent})")
    if base <= 1 or exponent == 0:
        return base ** exponent
    if exponent * math.log2(base) > MAX_BITS:
        return _symbolic(f"{base}^({exponent})")
    return base ** exponent


def tower(x, n):
    """2^x_0 = x and 2^x_{n+1} = 2^(2^x_n)."""
    value = x
    for level in range(n):
        if value > MAX_BITS:
            return _symbolic("2^" * (n - level) + f"({value})")
        value = 2 ** value
    return value


def elem_bound(x, strata_count):
    return tower(x, 3 * strata_count)


def poly_bound(x, S, D, N, partial):
    """x^(D^S · ∂^((N+1)·(S+1)))"""
    return power(x, D ** S * partial ** ((N + 1) * (S + 1)))


def box_copy_bound(x, S, D, N, partial):
    """x^(D^S · ∂^(N·S+N+S) - 1)"""
    return power(x, D ** S * partial ** (N * S + N + S) - 1)


def sdnll_parameters(net):
    """(S, D, N) read from the indices of the principal-door conclusions."""
    found = []
    for box in net.boxes:
        label = net.edges[net.principal_edge(box)].label
        if isinstance(label, Bang) and label.idx is not None:
            found.append(label.idx)
    if not found:
        return 1, 1, 1
    return (
        1 + max(i.s for i in found),
        max(1, max(i.d for i in found)),
        1 + max(i.n for i in found),
    )


def sdnll_bound(net):
    """x^(1 + D^S · ∂^(N·S)) for an SDNLL-labelled net."""
    S, D, N = sdnll_parameters(net)
    x = 2 * net_size(net)
    partial = 1 + net.max_depth()
    return power(x, 1 + D ** S * partial ** (N * S))


def bound_report(net, rels):
    x = 2 * net_size(net)
    partial = 1 + net.max_depth()
    S, D, N = (rels[k].depth for k in KINDS)
    report = BoundReport(x=x, partial=partial, S=S, D=D, N=N)
    if rels[STRAT].acyclic:
        report.elementary = elem_bound(x, S)
    if all(rels[k].acyclic for k in KINDS):
        report.polynomial = poly_bound(x, S, D, N, partial)
        report.box_copies = box_copy_bound(x, S, D, N, partial)
    return report


def analyze(net, measure=False, all_potentials_depth=None):
    """
    Relations, strata, bounds and weight of one net.

    Returns:
        dict with ``relations``, ``bounds``, ``weight`` and ``errors``.
    """
    errors = []
    rels = None
    try:
        rels = relations(net, all_potentials_depth=all_potentials_depth)
    except CycleDetected as exc:
        errors.append(exc.as_dict())
    report = {"relations": rels, "bounds": None, "weight": None, "errors": errors}
    if rels is not None:
        report["bounds"] = bound_report(net, rels)
    report["weight"] = weight(net)
    if measure and report["bounds"] is not None and report["weight"] != math.inf:
        steps = [len(normalize(net, strategy, seed=0)) for strategy in STRATEGIES]
        report["bounds"].measured_steps = max(steps)
    return report
