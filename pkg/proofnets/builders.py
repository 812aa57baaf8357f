"""
Nets from the literature on context semantics, written in code.

``NetBuilder`` is the small helper every constructor here (and the encoders
of the ``sdnll`` and ``lambda_calculus`` modules) uses to assemble a net.
"""
import logging

from .exceptions import NetSyntaxError
from .formula import (
    Atom, Bang, Quest, Tensor, all_names, dual, indexing, parse_formula,
)
from .proofnet import ProofNet, validate

logger = logging.getLogger(__name__)


# ============================================================
# BUILDER
# ============================================================

class NetBuilder:
    """
    Ports are written ``"node.c0"``; an edge without a head is an open
    conclusion of the net.
    """

    def __init__(self):
        self.net = ProofNet()

    def node(self, id, kind, box=None, var=None, level=None, witness=None):
        self.net.add_node(id, kind, box, var, level, witness)
        return id

    def box(self, id, principal, aux=(), parent=None):
        self.net.add_box(id, principal, aux, parent)
        return id

    def edge(self, tail, head=None, label=None, id=None, level=None):
        tail = _port(tail)
        if id is None:
            id = self.net.fresh_id(f"{tail[0]}_{tail[1]}")
        if isinstance(label, str):
            label = parse_formula(label)
        self.net.add_edge(id, tail, _port(head) if head else None, label, level)
        return id

    def build(self):
        """
        Returns:
            The net, after a structural check.
        """
        violations = validate(self.net)
        if violations:
            first = violations[0]
            raise NetSyntaxError(f"builder produced an ill-formed net: {first.element}: {first.message}")
        return self.net


def _port(text):
    if isinstance(text, tuple):
        return text
    node, _, port = text.rpartition(".")
    return node, port


def graft(target, source, prefix):
    """
    Copy every element of ``source`` into ``target`` under prefixed ids.

    Returns:
        dict old edge id -> new edge id.
    """
    edges = {}
    for node in source.nodes.values():
        box = None if node.box is None else prefix + node.box
        target.add_node(prefix + node.id, node.kind, box, node.var, node.level, node.witness)
    for box in source.boxes.values():
        parent = None if box.parent is None else prefix + box.parent
        target.add_box(prefix + box.id, prefix + box.principal, [prefix + a for a in box.aux], parent)
    for edge in source.edges.values():
        head = None if edge.head is None else (prefix + edge.head[0], edge.head[1])
        edges[edge.id] = prefix + edge.id
        target.add_edge(prefix + edge.id, (prefix + edge.tail[0], edge.tail[1]), head,
                        edge.label, edge.level, conclusion=False)
    for concl in source.conclusions:
        target.conclusions.append(edges[concl])
    return edges


def strip_labels(net):
    for edge in net.edges.values():
        edge.label = None
    for node in net.nodes.values():
        node.witness = None
    return net


# ============================================================
# APPLICATION
# ============================================================

def apply_net(g, h):
    """
    (G)H: the single conclusion of ``g`` is cut against ``h ⊗ Y⊥`` where Y⊥
    comes from a fresh axiom whose other conclusion stays open.

    Labels are kept only when both nets are fully labelled.
    """
    if len(g.conclusions) != 1 or len(h.conclusions) != 1:
        raise NetSyntaxError("application needs two nets with one conclusion each")
    net = ProofNet()
    g_out = graft(net, g, "g_")[g.conclusions[0]]
    h_out = graft(net, h, "h_")[h.conclusions[0]]
    net.conclusions = [c for c in net.conclusions if c not in (g_out, h_out)]

    labelled = all(e.label is not None for e in net.edges.values())
    arg_label = app_label = None
    if labelled:
        h_label = net.edges[h_out].label
        used = set()
        for edge in net.edges.values():
            used |= all_names(edge.label)
        name = next(f"Y{i}" for i in range(len(used) + 1) if f"Y{i}" not in used)
        level = 0 if indexing(h_label) == "indexed" else None
        arg_label = Atom(name, level)
        app_label = Tensor(h_label, dual(arg_label))

    net.add_node("app", "Tensor")
    net.add_node("arg", "Ax")
    net.add_node("apply", "Cut")
    net.set_head(h_out, ("app", "p0"))
    net.add_edge("arg_in", ("arg", "c0"), ("app", "p1"), None if arg_label is None else dual(arg_label))
    net.add_edge("arg_out", ("arg", "c1"), None, arg_label)
    net.add_edge("app_out", ("app", "c0"), ("apply", "p1"), app_label)
    net.set_head(g_out, ("apply", "p0"))
    if not labelled:
        strip_labels(net)
    logger.debug("applied net of %d edges to net of %d edges", len(g.edges), len(h.edges))
    return net


# ============================================================
# NETS OF THE LITERATURE
# ============================================================

def duplication_net():
    """
    The duplication example: box C nested in B, B cut against a
    contraction of a weakening and a door of D. C's interior edge is ``e``.
    """
    b = NetBuilder()
    b.box("D", "pD", aux=["dD"])
    b.box("B", "pB")
    b.box("C", "pC", parent="B")
    for node, kind, box in (
        ("axC", "Ax", "C"), ("parC", "Par", "C"), ("pC", "BoxPrincipal", "C"),
        ("pB", "BoxPrincipal", "B"), ("cut", "Cut", None), ("cont", "Cont", None),
        ("weak", "Weak", None), ("dD", "BoxAux", "D"), ("contD", "Cont", "D"),
        ("axb", "Ax", "D"), ("axh", "Ax", "D"), ("tens", "Tensor", "D"),
        ("pD", "BoxPrincipal", "D"),
    ):
        b.node(node, kind, box)
    b.edge("axC.c0", "parC.p0", "X^")
    b.edge("axC.c1", "parC.p1", "X")
    b.edge("parC.c0", "pC.p0", "X^ | X", id="e")
    b.edge("pC.c0", "pB.p0", "!(X^ | X)", id="a")
    b.edge("pB.c0", "cut.p0", "!!(X^ | X)", id="b")
    b.edge("cont.c0", "cut.p1", "??(X * X^)", id="c")
    b.edge("weak.c0", "cont.p0", "??(X * X^)", id="j")
    b.edge("dD.c0", "cont.p1", "??(X * X^)", id="d")
    b.edge("contD.c0", "dD.p0", "?(X * X^)", id="f")
    b.edge("axh.c0", "contD.p0", "?(X * X^)", id="g")
    b.edge("axb.c0", "contD.p1", "?(X * X^)")
    b.edge("axb.c1", "tens.p0", "!(X^ | X)")
    b.edge("axh.c1", "tens.p1", "!(X^ | X)", id="h")
    b.edge("tens.c0", "pD.p0", "!(X^ | X) * !(X^ | X)", id="i")
    b.edge("pD.c0", None, "!(!(X^ | X) * !(X^ | X))", id="k")
    return b.build()


def principal_net():
    """
    Boxes A, B (inside A), C and D (inside C): D reaches B's principal door,
    and B reaches C's, but nothing from D enters A.
    """
    b = NetBuilder()
    b.box("A", "pA", aux=["a1", "a2"])
    b.box("B", "pB", aux=["bAux"], parent="A")
    b.box("C", "pC")
    b.box("D", "pD", parent="C")
    for node, kind, box in (
        ("bWeak", "Weak", "B"), ("bWeak2", "Weak", "B"), ("pB", "BoxPrincipal", "B"),
        ("bAux", "BoxAux", "B"), ("bCut", "Cut", "A"), ("bCont", "Cont", "A"),
        ("bAx1", "Ax", "A"), ("bAx2", "Ax", "A"), ("a1", "BoxAux", "A"),
        ("a2", "BoxAux", "A"), ("pA", "BoxPrincipal", "A"), ("cCont", "Cont", None),
        ("cCut", "Cut", None), ("dWeak", "Weak", "D"), ("pD", "BoxPrincipal", "D"),
        ("cDer", "Der", "C"), ("pC", "BoxPrincipal", "C"), ("extCut", "Cut", None),
        ("extCont", "Cont", None), ("extDer", "Der", None), ("extWeak", "Weak", None),
        ("extAx", "Ax", None),
    ):
        b.node(node, kind, box)
    b.edge("bWeak.c0", "pB.p0", "?!X^", id="w")
    b.edge("bWeak2.c0", "bAux.p0", "?Y")
    b.edge("pB.c0", "bCut.p0", "!?!X^")
    b.edge("bCont.c0", "bCut.p1", "?!?X")
    b.edge("bAx1.c0", "bCont.p1", "?!?X")
    b.edge("bAx2.c0", "bCont.p0", "?!?X")
    b.edge("bAx1.c1", "a1.p0", "!?!X^")
    b.edge("bAx2.c1", "a2.p0", "!?!X^")
    b.edge("bAux.c0", "pA.p0", "??Y")
    b.edge("a1.c0", "cCont.p0", "?!?!X^", id="g")
    b.edge("a2.c0", "cCont.p1", "?!?!X^", id="h")
    b.edge("cCont.c0", "cCut.p0", "?!?!X^", id="f")
    b.edge("dWeak.c0", "pD.p0", "?X")
    b.edge("pD.c0", "cDer.p0", "!?X")
    b.edge("cDer.c0", "pC.p0", "?!?X", id="d")
    b.edge("pC.c0", "cCut.p1", "!?!?X")
    b.edge("pA.c0", "extCut.p0", "!??Y")
    b.edge("extCont.c0", "extCut.p1", "?!!Y^")
    b.edge("extDer.c0", "extCont.p0", "?!!Y^")
    b.edge("extWeak.c0", "extCont.p1", "?!!Y^")
    b.edge("extAx.c0", "extDer.p0", "!!Y^")
    b.edge("extAx.c1", None, "??Y")
    return b.build()


def _chain_types(n, base, step):
    """A_{n-1} = base, A_i = step(A_{i+1})."""
    types = [None] * n
    types[n - 1] = base
    for i in range(n - 2, -1, -1):
        types[i] = step(types[i + 1])
    return types


def _chain_box(b, i, name, a, door_premises):
    """
    Box ``name``{i} with two axioms of type ``a`` whose right conclusions
    meet in a tensor behind the principal door. Returns the two left
    conclusion ports (``ah``, ``ab``).
    """
    box = f"{name}{i}"
    b.box(box, f"p{i}", aux=door_premises)
    b.node(f"ah{i}", "Ax", box)
    b.node(f"ab{i}", "Ax", box)
    b.node(f"t{i}", "Tensor", box)
    b.node(f"p{i}", "BoxPrincipal", box)
    b.edge(f"ab{i}.c1", f"t{i}.p0", a)
    b.edge(f"ah{i}.c1", f"t{i}.p1", a)
    b.edge(f"t{i}.c0", f"p{i}.p0", Tensor(a, a))
    return f"ah{i}.c0", f"ab{i}.c0"


def exp_net(n):
    """
    n boxes B_{n-1} ... B_0 in a row; each principal door is cut against
    the contraction of the two doors of the next box. Reduces in O(2^n).
    """
    if n < 1:
        raise ValueError("exp_net needs at least one box")
    b = NetBuilder()
    types = _chain_types(n, Atom("X"), lambda a: Tensor(a, a))
    for i in range(n):
        a = types[i]
        left, right = _chain_box(b, i, "B", a, [f"l{i}", f"r{i}"])
        b.node(f"l{i}", "BoxAux", f"B{i}")
        b.node(f"r{i}", "BoxAux", f"B{i}")
        b.node(f"c{i}", "Cont")
        b.edge(left, f"l{i}.p0", dual(a))
        b.edge(right, f"r{i}.p0", dual(a))
        b.edge(f"l{i}.c0", f"c{i}.p0", Quest(None, dual(a)))
        b.edge(f"r{i}.c0", f"c{i}.p1", Quest(None, dual(a)))
    _chain_cuts(b, n, types, lambda i: f"c{i}.c0")
    b.edge(f"c{n - 1}.c0", None, Quest(None, dual(types[n - 1])))
    return b.build()


def expb_net(n):
    """
    Same chain as ``exp_net`` but each contraction merges one door with a
    weakening; the other door stays a conclusion. Reduces in O(n).
    """
    if n < 1:
        raise ValueError("expb_net needs at least one box")
    b = NetBuilder()
    types = _chain_types(n, Atom("X"), lambda a: Tensor(a, a))
    for i in range(n):
        a = types[i]
        left, right = _chain_box(b, i, "C", a, [f"l{i}", f"r{i}"])
        b.node(f"l{i}", "BoxAux", f"C{i}")
        b.node(f"r{i}", "BoxAux", f"C{i}")
        b.node(f"w{i}", "Weak")
        b.node(f"c{i}", "Cont")
        b.edge(left, f"l{i}.p0", dual(a))
        b.edge(right, f"r{i}.p0", dual(a))
        b.edge(f"l{i}.c0", f"c{i}.p0", Quest(None, dual(a)))
        b.edge(f"w{i}.c0", f"c{i}.p1", Quest(None, dual(a)))
        b.edge(f"r{i}.c0", None, Quest(None, dual(a)))
    _chain_cuts(b, n, types, lambda i: f"c{i}.c0")
    b.edge(f"c{n - 1}.c0", None, Quest(None, dual(types[n - 1])))
    return b.build()


def dig_chain_net(n):
    """
    n boxes with one door each; the door goes through a dig node before
    being cut against the principal door of the previous box.
    """
    if n < 1:
        raise ValueError("dig_chain_net needs at least one box")
    b = NetBuilder()
    types = _chain_types(n, Bang(None, Atom("X")), lambda a: Bang(None, Tensor(a, a)))
    for i in range(n):
        a = types[i]
        left, right = _chain_box(b, i, "B", a, [f"u{i}"])
        b.node(f"k{i}", "Cont", f"B{i}")
        b.node(f"u{i}", "BoxAux", f"B{i}")
        b.node(f"g{i}", "Dig")
        b.edge(left, f"k{i}.p0", dual(a))
        b.edge(right, f"k{i}.p1", dual(a))
        b.edge(f"k{i}.c0", f"u{i}.p0", dual(a))
        b.edge(f"u{i}.c0", f"g{i}.p0", Quest(None, dual(a)))
    _chain_cuts(b, n, types, lambda i: f"g{i}.c0")
    b.edge(f"g{n - 1}.c0", None, dual(types[n - 1]))
    return b.build()


def _chain_cuts(b, n, types, left_of):
    """Cut p{i+1} against ``left_of(i)``; p0 stays open."""
    for i in range(n - 1):
        b.node(f"cut{i}", "Cut")
        b.edge(f"p{i + 1}.c0", f"cut{i}.p0", Bang(None, Tensor(types[i + 1], types[i + 1])))
        b.edge(left_of(i), f"cut{i}.p1", dual(Bang(None, Tensor(types[i + 1], types[i + 1]))))
    b.edge("p0.c0", None, Bang(None, Tensor(types[0], types[0])))


def not_polynomial_net(k=3):
    """
    An untyped function G applied to the numeral k. Its inner box B depends
    on two doors of itself, so G is not polynomial.
    """
    # local import: sdnll builds its encoders on this module
    from .sdnll import encode_nat

    b = NetBuilder()
    b.box("F", "pF")
    b.box("B", "pB", aux=["a1", "a2"], parent="F")
    for node, kind, box in (
        ("axh", "Ax", "B"), ("axb", "Ax", "B"), ("tens", "Tensor", "B"),
        ("pB", "BoxPrincipal", "B"), ("a1", "BoxAux", "B"), ("a2", "BoxAux", "B"),
        ("cont", "Cont", "F"), ("fa", "Forall", "F"), ("ex", "Exists", "F"),
        ("par", "Par", "F"), ("pF", "BoxPrincipal", "F"), ("tensf", "Tensor", None),
        ("derf", "Der", None), ("tensfx", "Tensor", None), ("exx", "Exists", None),
        ("parx", "Par", None), ("axx", "Ax", None), ("axfx", "Ax", None),
        ("exf", "Exists", None), ("parf", "Par", None),
    ):
        b.node(node, kind, box, var="Y" if kind == "Forall" else None)
    b.edge("axb.c1", "tens.p0")
    b.edge("axh.c1", "tens.p1")
    b.edge("axh.c0", "a1.p0")
    b.edge("axb.c0", "a2.p0")
    b.edge("tens.c0", "pB.p0")
    b.edge("a1.c0", "cont.p0")
    b.edge("a2.c0", "cont.p1")
    b.edge("cont.c0", "fa.p0")
    b.edge("pB.c0", "ex.p0")
    b.edge("fa.c0", "par.p0")
    b.edge("ex.c0", "par.p1")
    b.edge("par.c0", "pF.p0")
    b.edge("pF.c0", "tensf.p0")
    b.edge("derf.c0", "tensf.p1")
    b.edge("tensfx.c0", "derf.p0")
    b.edge("exx.c0", "tensfx.p0")
    b.edge("axfx.c0", "tensfx.p1")
    b.edge("axx.c0", "parx.p0")
    b.edge("axx.c1", "parx.p1")
    b.edge("parx.c0", "exx.p0")
    b.edge("tensf.c0", "exf.p0")
    b.edge("exf.c0", "parf.p0")
    b.edge("axfx.c1", "parf.p1")
    b.edge("parf.c0", None, id="G")
    return apply_net(b.build(), strip_labels(encode_nat(k, 0, 0, 0)))
