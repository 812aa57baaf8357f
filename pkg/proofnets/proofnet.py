"""
Proof-nets: typed nodes, directed edges between node ports, and a forest
of boxes with ordered doors.

An edge goes from a conclusion port (``c0``, ``c1``) of its tail node to a
premise port (``p0``, ``p1``) of its head node, or to ``OUT`` when it is a
conclusion of the whole net.
"""
import copy
import logging
import shlex
from dataclasses import dataclass, field
from typing import Optional

from .exceptions import FormulaSyntaxError, NetSyntaxError, UnknownElement
from .formula import (
    Bang, Exists, Forall, Paragraph, Par, Quest, Tensor, alpha_equal, dual,
    erase_indices, format_formula, free_vars, parse_formula, substitute,
)

logger = logging.getLogger(__name__)

# premises / conclusions
ARITY = {
    "Ax": (0, 2),
    "Cut": (2, 0),
    "Tensor": (2, 1),
    "Par": (2, 1),
    "Forall": (1, 1),
    "Exists": (1, 1),
    "Der": (1, 1),
    "Weak": (0, 1),
    "Cont": (2, 1),
    "Dig": (1, 1),
    "BoxPrincipal": (1, 1),
    "BoxAux": (1, 1),
    "Paragraph": (1, 1),
}

DOOR_KINDS = ("BoxPrincipal", "BoxAux")


# ============================================================
# DATA TYPES
# ============================================================

@dataclass
class Node:
    id: str
    kind: str
    box: Optional[str] = None
    var: Optional[str] = None
    level: Optional[int] = None
    witness: Optional[object] = None


@dataclass
class Edge:
    id: str
    tail: tuple
    head: Optional[tuple] = None
    label: Optional[object] = None
    level: Optional[int] = None


@dataclass
class Box:
    id: str
    principal: str
    aux: list = field(default_factory=list)
    parent: Optional[str] = None


@dataclass(frozen=True)
class Violation:
    element: str
    rule: str
    message: str
    expected: Optional[str] = None
    found: Optional[str] = None

    def as_dict(self):
        return {
            "element": self.element, "rule": self.rule, "message": self.message,
            "expected": self.expected, "found": self.found,
        }


class ProofNet:
    """
    Mutable while being built or rewritten; analyses treat it as a snapshot.
    ``copy()`` before rewriting.
    """

    def __init__(self):
        self.nodes = {}
        self.edges = {}
        self.boxes = {}
        self.conclusions = []
        self._premise_of = {}
        self._conclusion_of = {}
        self._counter = 0

    # ---------------- construction ----------------

    def fresh_id(self, base, reserved=()):
        taken = self.nodes.keys() | self.edges.keys() | self.boxes.keys() | set(reserved)
        if base not in taken:
            return base
        while True:
            self._counter += 1
            candidate = f"{base}_{self._counter}"
            if candidate not in taken:
                return candidate

    def add_node(self, id, kind, box=None, var=None, level=None, witness=None):
        if kind not in ARITY:
            raise NetSyntaxError(f"unknown node kind {kind!r}")
        node = Node(id, kind, box, var, level, witness)
        self.nodes[id] = node
        return node

    def add_box(self, id, principal, aux=(), parent=None):
        box = Box(id, principal, list(aux), parent)
        self.boxes[id] = box
        return box

    def add_edge(self, id, tail, head=None, label=None, level=None, conclusion=True):
        """
        ``tail``/``head`` are (node, port) pairs; ``head=None`` makes the edge
        an open conclusion, appended to ``conclusions`` unless told otherwise.
        """
        edge = Edge(id, tuple(tail), tuple(head) if head else None, label, level)
        self.edges[id] = edge
        self._conclusion_of[edge.tail] = id
        if edge.head is None:
            if conclusion:
                self.conclusions.append(id)
        else:
            self._premise_of[edge.head] = id
        return edge

    def remove_edge(self, id):
        edge = self.edges.pop(id)
        if self._conclusion_of.get(edge.tail) == id:
            del self._conclusion_of[edge.tail]
        if edge.head is not None and self._premise_of.get(edge.head) == id:
            del self._premise_of[edge.head]
        if id in self.conclusions:
            self.conclusions.remove(id)
        return edge

    def remove_node(self, id):
        return self.nodes.pop(id)

    def set_head(self, id, head):
        edge = self.edges[id]
        if edge.head is not None and self._premise_of.get(edge.head) == id:
            del self._premise_of[edge.head]
        edge.head = tuple(head) if head else None
        if edge.head is not None:
            self._premise_of[edge.head] = id

    def set_tail(self, id, tail):
        edge = self.edges[id]
        if self._conclusion_of.get(edge.tail) == id:
            del self._conclusion_of[edge.tail]
        edge.tail = tuple(tail)
        self._conclusion_of[edge.tail] = id

    def reindex(self):
        self._premise_of = {e.head: e.id for e in self.edges.values() if e.head is not None}
        self._conclusion_of = {e.tail: e.id for e in self.edges.values()}

    def copy(self):
        return copy.deepcopy(self)

    # ---------------- queries ----------------

    def premise(self, node_id, i):
        """Edge id entering ``node_id`` at port p<i>."""
        try:
            return self._premise_of[(node_id, f"p{i}")]
        except KeyError:
            raise UnknownElement(f"{node_id}.p{i} is not bound") from None

    def conclusion(self, node_id, i=0):
        """Edge id leaving ``node_id`` at port c<i>."""
        try:
            return self._conclusion_of[(node_id, f"c{i}")]
        except KeyError:
            raise UnknownElement(f"{node_id}.c{i} is not bound") from None

    def is_door(self, node_id):
        return self.nodes[node_id].kind in DOOR_KINDS

    def edge_box(self, edge_id):
        """Innermost box containing the edge, or None at root."""
        node = self.nodes[self.edges[edge_id].tail[0]]
        if node.kind in DOOR_KINDS:
            return self.boxes[node.box].parent
        return node.box

    def box_chain(self, box_id):
        """Boxes from outermost to ``box_id`` itself."""
        chain = []
        seen = set()
        while box_id is not None:
            if box_id in seen:
                raise UnknownElement(f"box nesting cycle through {box_id}")
            seen.add(box_id)
            chain.append(box_id)
            box_id = self.boxes[box_id].parent
        return list(reversed(chain))

    def edge_chain(self, edge_id):
        return self.box_chain(self.edge_box(edge_id))

    def principal_edge(self, box_id):
        return self.conclusion(self.boxes[box_id].principal)

    def aux_edges(self, box_id):
        return [self.conclusion(door) for door in self.boxes[box_id].aux]

    def nodes_in(self, box_id, deep=True):
        """Interior nodes of a box, doors of nested boxes included when ``deep``."""
        out = []
        for node in self.nodes.values():
            if node.box is None:
                continue
            chain = self.box_chain(node.box)
            if (deep and box_id in chain) or node.box == box_id:
                out.append(node.id)
        return out

    def edges_in(self, box_id):
        return [e for e in self.edges if box_id in self.edge_chain(e)]

    def max_depth(self):
        return max((depth(self, e) for e in self.edges), default=0)

    def __len__(self):
        return len(self.edges)


def net_size(net):
    return len(net.edges)


def depth(net, elem):
    """Number of boxes strictly containing a node, edge or box."""
    if elem in net.edges:
        return len(net.edge_chain(elem))
    if elem in net.nodes:
        return len(net.box_chain(net.nodes[elem].box))
    if elem in net.boxes:
        return len(net.box_chain(elem)) - 1
    raise UnknownElement(f"no node, edge or box named {elem!r}")


# ============================================================
# VALIDATION
# ============================================================

def validate(net, mode="untyped"):
    """
    Local structural checks, plus label constraints in ``ll-typed`` mode.

    Returns:
        A list of ``Violation``; empty when the net is well formed.
    """
    violations = []
    violations += _check_ports(net)
    violations += _check_boxes(net)
    if not violations:
        violations += _check_placement(net)
    if mode == "ll-typed" and not violations:
        violations += _check_ll_labels(net)
    return violations


def _check_ports(net):
    out = []
    heads, tails = {}, {}
    for edge in net.edges.values():
        tail_node, tail_port = edge.tail
        if tail_node not in net.nodes:
            out.append(Violation(edge.id, "dangling", f"unknown tail node {tail_node}"))
            continue
        tails.setdefault(edge.tail, []).append(edge.id)
        if edge.head is not None:
            if edge.head[0] not in net.nodes:
                out.append(Violation(edge.id, "dangling", f"unknown head node {edge.head[0]}"))
                continue
            heads.setdefault(edge.head, []).append(edge.id)
    for node in net.nodes.values():
        n_prem, n_concl = ARITY[node.kind]
        expected = {f"p{i}" for i in range(n_prem)}
        found = {port for (nid, port) in heads if nid == node.id}
        expected_c = {f"c{i}" for i in range(n_concl)}
        found_c = {port for (nid, port) in tails if nid == node.id}
        if found != expected or found_c != expected_c:
            out.append(Violation(
                node.id, "arity", f"{node.kind} needs {n_prem} premises and {n_concl} conclusions",
                expected=f"{n_prem}/{n_concl}", found=f"{len(found)}/{len(found_c)}",
            ))
    for port, ids in list(heads.items()) + list(tails.items()):
        if len(ids) > 1:
            out.append(Violation(ids[1], "arity", f"port {port[0]}.{port[1]} bound twice"))
    out_edges = [e.id for e in net.edges.values() if e.head is None]
    if sorted(out_edges) != sorted(net.conclusions) or len(set(net.conclusions)) != len(net.conclusions):
        out.append(Violation("conclusions", "conclusions", "conclusion list differs from open edges",
                             expected=" ".join(out_edges), found=" ".join(net.conclusions)))
    return out


def _check_boxes(net):
    out = []
    for box in net.boxes.values():
        if box.parent is not None and box.parent not in net.boxes:
            out.append(Violation(box.id, "box-forest", f"unknown parent {box.parent}"))
            continue
        try:
            net.box_chain(box.id)
        except UnknownElement as exc:
            out.append(Violation(box.id, "box-forest", str(exc)))
            continue
        principal = net.nodes.get(box.principal)
        if principal is None or principal.kind != "BoxPrincipal" or principal.box != box.id:
            out.append(Violation(box.id, "doors", "principal door missing or misplaced"))
        for door in box.aux:
            node = net.nodes.get(door)
            if node is None or node.kind != "BoxAux" or node.box != box.id:
                out.append(Violation(box.id, "doors", f"auxiliary door {door} missing or misplaced"))
    listed = {}
    for box in net.boxes.values():
        for door in [box.principal, *box.aux]:
            listed.setdefault(door, []).append(box.id)
    for node in net.nodes.values():
        if node.box is not None and node.box not in net.boxes:
            out.append(Violation(node.id, "box-forest", f"unknown box {node.box}"))
        if node.kind in DOOR_KINDS and len(listed.get(node.id, [])) != 1:
            out.append(Violation(node.id, "doors", "door must belong to exactly one box"))
    return out


def _check_placement(net):
    out = []
    for edge in net.edges.values():
        where = net.edge_box(edge.id)
        target = None if edge.head is None else net.nodes[edge.head[0]].box
        if where != target:
            out.append(Violation(edge.id, "box-placement", "edge crosses a box border outside a door",
                                 expected=str(where), found=str(target)))
    return out


def _label(net, edge_id):
    label = net.edges[edge_id].label
    return None if label is None else erase_indices(label)


def _check_ll_labels(net):
    out = []
    if any(e.label is None for e in net.edges.values()):
        return [Violation(e.id, "label", "edge is not labelled")
                for e in net.edges.values() if e.label is None]

    def mismatch(elem, rule, expected, found):
        if not alpha_equal(expected, found):
            out.append(Violation(elem, rule, f"{rule} constraint violated",
                                 expected=format_formula(expected), found=format_formula(found)))

    for node in net.nodes.values():
        k = node.kind
        prem = [_label(net, net.premise(node.id, i)) for i in range(ARITY[k][0])]
        concl = [_label(net, net.conclusion(node.id, i)) for i in range(ARITY[k][1])]
        if k == "Ax":
            mismatch(node.id, "ax", dual(concl[0]), concl[1])
        elif k == "Cut":
            mismatch(node.id, "cut", dual(prem[0]), prem[1])
        elif k == "Tensor":
            mismatch(node.id, "tensor", Tensor(prem[0], prem[1]), concl[0])
        elif k == "Par":
            mismatch(node.id, "par", Par(prem[0], prem[1]), concl[0])
        elif k == "Forall":
            mismatch(node.id, "forall", Forall(node.var, None, prem[0]), concl[0])
            out += check_eigenvariable(net, node)
        elif k == "Exists":
            c = concl[0]
            if not isinstance(c, Exists) or node.witness is None:
                out.append(Violation(node.id, "exists", "conclusion must be an existential with a witness",
                                     found=format_formula(c)))
            else:
                mismatch(node.id, "exists", substitute(c.body, c.var, erase_indices(node.witness)), prem[0])
        elif k in ("Der", "BoxAux"):
            mismatch(node.id, k.lower(), Quest(None, prem[0]), concl[0])
        elif k == "Weak":
            if not isinstance(concl[0], Quest):
                out.append(Violation(node.id, "weak", "conclusion must be a ?-formula",
                                     found=format_formula(concl[0])))
        elif k == "Cont":
            mismatch(node.id, "cont", prem[0], prem[1])
            mismatch(node.id, "cont", prem[0], concl[0])
            if not isinstance(concl[0], Quest):
                out.append(Violation(node.id, "cont", "conclusion must be a ?-formula",
                                     found=format_formula(concl[0])))
        elif k == "Dig":
            mismatch(node.id, "dig", Quest(None, concl[0]), prem[0])
            if not isinstance(concl[0], Quest):
                out.append(Violation(node.id, "dig", "conclusion must be a ?-formula",
                                     found=format_formula(concl[0])))
        elif k == "BoxPrincipal":
            mismatch(node.id, "box", Bang(None, prem[0]), concl[0])
        elif k == "Paragraph":
            mismatch(node.id, "paragraph", Paragraph(prem[0]), concl[0])
    return out


def check_eigenvariable(net, node):
    """The variable of a ∀ node may not be free in the other conclusions."""
    out = []
    own = net.conclusion(node.id)
    others = [e for e in net.conclusions if e != own]
    if node.box is not None:
        for box_id in net.box_chain(node.box):
            others += [e for e in net.aux_edges(box_id) if e != own]
    for edge_id in others:
        label = net.edges[edge_id].label
        if label is not None and node.var in free_vars(label):
            out.append(Violation(node.id, "eigenvariable",
                                 f"{node.var} is free in conclusion {edge_id}",
                                 found=format_formula(label)))
    return out


# ============================================================
# TEXT FORMAT
# ============================================================

def _attrs(tokens, line_no):
    attrs = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise NetSyntaxError(f"expected key=value, got {tok!r}", line_no)
        attrs[key] = value
    return attrs


def _formula(text, line_no):
    try:
        return parse_formula(text)
    except FormulaSyntaxError as exc:
        raise NetSyntaxError(str(exc.detail), line_no) from exc


def _port(text, line_no):
    node, sep, port = text.partition(".")
    if not sep or port not in ("p0", "p1", "c0", "c1"):
        raise NetSyntaxError(f"bad port reference {text!r}", line_no)
    return node, port


def parse_net(text):
    """
    Parse the line-based net format::

        node <id> <kind> [var=X_3] [witness="<formula>"] [box=<boxid>]
        box <id> principal=<nodeid> aux=[<nodeid>,...] [parent=<boxid>]
        edge <id> <tail>.<port> -> <head>.<port>|OUT [type="<formula>"] [level=<n>]
        conclusions <edgeid> ...
    """
    net = ProofNet()
    declared_conclusions = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise NetSyntaxError(str(exc), line_no) from exc
        if not tokens:
            continue
        keyword = tokens[0]
        if keyword == "node":
            if len(tokens) < 3:
                raise NetSyntaxError("node needs an id and a kind", line_no)
            _, node_id, kind, *rest = tokens
            if kind not in ARITY:
                raise NetSyntaxError(f"unknown node kind {kind!r}", line_no)
            if node_id in net.nodes:
                raise NetSyntaxError(f"duplicate node {node_id}", line_no)
            attrs = _attrs(rest, line_no)
            var, level = None, None
            if "var" in attrs:
                var, _, lvl = attrs["var"].partition("_")
                level = int(lvl) if lvl else None
            witness = _formula(attrs["witness"], line_no) if "witness" in attrs else None
            net.add_node(node_id, kind, attrs.get("box"), var, level, witness)
        elif keyword == "box":
            if len(tokens) < 2:
                raise NetSyntaxError("box needs an id", line_no)
            attrs = _attrs(tokens[2:], line_no)
            if "principal" not in attrs:
                raise NetSyntaxError("box needs principal=<node>", line_no)
            aux = [a for a in attrs.get("aux", "[]").strip("[]").split(",") if a]
            net.add_box(tokens[1], attrs["principal"], aux, attrs.get("parent"))
        elif keyword == "edge":
            if len(tokens) < 5 or tokens[3] != "->":
                raise NetSyntaxError("edge syntax is: edge <id> <tail>.<port> -> <head>.<port>|OUT", line_no)
            edge_id = tokens[1]
            if edge_id in net.edges:
                raise NetSyntaxError(f"duplicate edge {edge_id}", line_no)
            tail = _port(tokens[2], line_no)
            head = None if tokens[4] == "OUT" else _port(tokens[4], line_no)
            if not tail[1].startswith("c") or (head and not head[1].startswith("p")):
                raise NetSyntaxError("edges go from a conclusion port to a premise port", line_no)
            attrs = _attrs(tokens[5:], line_no)
            label = _formula(attrs["type"], line_no) if "type" in attrs else None
            level = int(attrs["level"]) if "level" in attrs else None
            net.add_edge(edge_id, tail, head, label, level)
        elif keyword == "conclusions":
            declared_conclusions = tokens[1:]
        else:
            raise NetSyntaxError(f"unknown statement {keyword!r}", line_no)
    if declared_conclusions is not None:
        if sorted(declared_conclusions) != sorted(net.conclusions):
            raise NetSyntaxError("conclusions line must list every OUT edge once")
        net.conclusions = list(declared_conclusions)
    logger.debug("parsed net: %d nodes, %d edges, %d boxes",
                 len(net.nodes), len(net.edges), len(net.boxes))
    return net


def serialize_net(net):
    lines = []
    for node in net.nodes.values():
        parts = ["node", node.id, node.kind]
        if node.var is not None:
            parts.append(f"var={node.var}" + ("" if node.level is None else f"_{node.level}"))
        if node.witness is not None:
            parts.append(shlex.quote(f"witness={format_formula(node.witness)}"))
        if node.box is not None:
            parts.append(f"box={node.box}")
        lines.append(" ".join(parts))
    for box in net.boxes.values():
        parts = ["box", box.id, f"principal={box.principal}", f"aux=[{','.join(box.aux)}]"]
        if box.parent is not None:
            parts.append(f"parent={box.parent}")
        lines.append(" ".join(parts))
    for edge in net.edges.values():
        head = "OUT" if edge.head is None else f"{edge.head[0]}.{edge.head[1]}"
        parts = ["edge", edge.id, f"{edge.tail[0]}.{edge.tail[1]}", "->", head]
        if edge.label is not None:
            parts.append(shlex.quote(f"type={format_formula(edge.label)}"))
        if edge.level is not None:
            parts.append(f"level={edge.level}")
        lines.append(" ".join(parts))
    if net.conclusions:
        lines.append("conclusions " + " ".join(net.conclusions))
    return "\n".join(lines) + "\n"


def load_net(path):
    with open(path, encoding="utf-8") as handle:
        return parse_net(handle.read())
