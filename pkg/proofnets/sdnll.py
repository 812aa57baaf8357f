"""
SDNLL: proof-nets whose exponentials carry (s, d, n) indices.

Checking modulo subtyping, the encoders of integers and binary lists, and
the embedding of level-annotated light nets (mL⁴).
"""
import logging

from .builders import NetBuilder
from .exceptions import MixedNodes, PnetInputError
from .formula import (
    Atom, Bang, ExpIndex, Exists, Forall, Par, Paragraph, Quest, Tensor, alpha_equal, dual,
    format_formula, in_Fs, indexing, s_min, subformulas, substitute, subtype_leq,
)
from .proofnet import ARITY, Violation, check_eigenvariable, validate

logger = logging.getLogger(__name__)


# ============================================================
# SDNLL CHECK
# ============================================================

def _fmt(f):
    return None if f is None else format_formula(f)


class _Checker:
    def __init__(self, net):
        self.net = net
        self.out = []

    def label(self, edge_id):
        return self.net.edges[edge_id].label

    def fail(self, element, rule, message, expected=None, found=None):
        self.out.append(Violation(element, rule, message, _fmt(expected), _fmt(found)))

    def leq(self, element, rule, instance, actual):
        """The rule instance's conclusion must be a subtype of the actual one."""
        if not subtype_leq(instance, actual):
            self.fail(element, rule, f"{rule} conclusion is not a supertype of the rule instance",
                      expected=instance, found=actual)
            return False
        return True

    def exact(self, element, rule, expected, found):
        if not alpha_equal(expected, found):
            self.fail(element, rule, f"{rule} premise does not match", expected=expected, found=found)
            return False
        return True

    def quest(self, element, rule, f):
        if isinstance(f, Quest):
            return True
        self.fail(element, rule, f"{rule} conclusion must be a ?-formula", found=f)
        return False

    # ---------------- nodes ----------------

    def node(self, node):
        k = node.kind
        prem = [self.label(self.net.premise(node.id, i)) for i in range(ARITY[k][0])]
        concl = [self.label(self.net.conclusion(node.id, i)) for i in range(ARITY[k][1])]
        if k == "Ax":
            self.leq(node.id, "ax", dual(concl[1]), concl[0])
        elif k == "Cut":
            self.exact(node.id, "cut", dual(prem[0]), prem[1])
        elif k == "Tensor":
            self.leq(node.id, "tensor", Tensor(prem[0], prem[1]), concl[0])
        elif k == "Par":
            self.leq(node.id, "par", Par(prem[0], prem[1]), concl[0])
        elif k == "Forall":
            if node.level is None:
                self.fail(node.id, "forall", f"variable {node.var} has no level")
            else:
                self.leq(node.id, "forall", Forall(node.var, node.level, prem[0]), concl[0])
            self.out.extend(check_eigenvariable(self.net, node))
        elif k == "Exists":
            self.exists(node, prem[0], concl[0])
        elif k == "Weak":
            self.quest(node.id, "weak", concl[0])
        elif k == "Der":
            if self.quest(node.id, "der", concl[0]):
                self.leq(node.id, "der", prem[0], concl[0].body)
        elif k == "Cont":
            if self.quest(node.id, "cont", prem[0]) and self.exact(node.id, "cont", prem[0], prem[1]):
                self.leq(node.id, "cont", prem[0], concl[0])
        elif k == "Dig":
            self.dig(node, prem[0], concl[0])
        elif k == "Paragraph":
            self.fail(node.id, "paragraph", "paragraph nodes only exist in mL⁴ nets")

    def exists(self, node, prem, concl):
        if not isinstance(concl, Exists) or node.witness is None:
            self.fail(node.id, "exists", "conclusion must be an existential with a witness", found=concl)
            return
        witness = node.witness
        self.leq(node.id, "exists", prem, substitute(concl.body, concl.var, witness))
        low = s_min(witness)
        if low is not None and low < concl.level:
            self.fail(node.id, "exists", f"witness has an exponential of level {low} below {concl.level}",
                      found=witness)

    def dig(self, node, prem, concl):
        if not (isinstance(prem, Quest) and isinstance(prem.body, Quest)):
            self.fail(node.id, "dig", "premise must be of the shape ??A", found=prem)
            return
        i = prem.idx
        expected = ExpIndex(i.s, i.d, i.n + 1)
        if prem.body.idx != expected:
            self.fail(node.id, "dig", f"inner index must be ({expected})", found=prem)
            return
        self.leq(node.id, "dig", prem.body, concl)

    # ---------------- boxes ----------------

    def box(self, box):
        net = self.net
        principal = net.boxes[box.id].principal
        inner = self.label(net.premise(principal, 0))
        outer = self.label(net.conclusion(principal))
        if not isinstance(outer, Bang):
            self.fail(principal, "box", "principal door conclusion must be a !-formula", found=outer)
            return
        idx = outer.idx
        if not in_Fs(inner, idx.s + 1):
            self.fail(principal, "box", f"principal premise is not a formula of level {idx.s + 1}",
                      found=inner)
        self.leq(principal, "box", Bang(idx, inner), outer)
        same_d = []
        for door in box.aux:
            premise = self.label(net.premise(door, 0))
            concl = self.label(net.conclusion(door))
            if not self.quest(door, "box", concl):
                continue
            self.leq(door, "box", premise, concl.body)
            if concl.idx.n < idx.n:
                self.fail(door, "box", f"door third index below {idx.n}", found=concl)
            if concl.idx.d < idx.d:
                self.fail(door, "box", f"door second index below {idx.d}", found=concl)
            elif concl.idx.d == idx.d:
                same_d.append(door)
        if len(same_d) > 1:
            self.fail(box.id, "box", f"only one door may share the second index {idx.d}",
                      found=", ".join(same_d))

    def digging_view(self, edge, f):
        """A Dig premise ?_{s,d,n}?_{s,d,n+1}A is read as ?_{s,d,n}A."""
        head = edge.head
        if head is None or self.net.nodes[head[0]].kind != "Dig":
            return f
        if isinstance(f, Quest) and isinstance(f.body, Quest) and f.idx is not None:
            inner = f.body.idx
            if inner is not None and (inner.s, inner.d) == (f.idx.s, f.idx.d):
                return Quest(f.idx, f.body.body)
        return f

    def run(self):
        net = self.net
        for edge in net.edges.values():
            f = edge.label
            if f is None:
                self.fail(edge.id, "label", "edge is not labelled")
            elif indexing(f) != "indexed":
                self.fail(edge.id, "label", "label carries no indices", found=f)
            elif not in_Fs(self.digging_view(edge, f), 0):
                self.fail(edge.id, "label", "label is not an SDNLL formula", found=f)
        for node in net.nodes.values():
            if node.witness is not None and indexing(node.witness) == "plain":
                self.fail(node.id, "label", "witness carries no indices", found=node.witness)
        if self.out:
            return self.out
        for node in net.nodes.values():
            if node.kind not in ("BoxPrincipal", "BoxAux"):
                self.node(node)
        for box in net.boxes.values():
            self.box(box)
        return self.out


def check_sdnll(net):
    """
    Is ``net`` an SDNLL proof-net? Every node must be an instance of its
    rule whose conclusions are subtypes of the actual labels; premises must
    match exactly.

    Returns:
        A list of ``Violation``; empty for members of SDNLL.
    """
    structural = validate(net)
    if structural:
        return structural
    out = _Checker(net).run()
    logger.info("check_sdnll: %d violations", len(out))
    return out


# ============================================================
# ENCODERS
# ============================================================

def nat_type(s, d, n, var="X"):
    """N_{s,d,n} = ∀X_{s+1}. ?_{s,d+1,n}(X ⊗ X⊥) ⅋ !_{s,d,n}(X⊥ ⅋ X)"""
    x = Atom(var, s + 1)
    step = Quest(ExpIndex(s, d + 1, n), Tensor(x, dual(x)))
    return Forall(var, s + 1, Par(step, Bang(ExpIndex(s, d, n), Par(dual(x), x))))


def binlist_type(s, d, n, var="X"):
    """B_{s,d,n}: one ?-argument per letter, zeros first."""
    x = Atom(var, s + 1)
    step = Quest(ExpIndex(s, d + 1, n), Tensor(x, dual(x)))
    return Forall(var, s + 1, Par(step, Par(step, Bang(ExpIndex(s, d, n), Par(dual(x), x)))))


def _check_indices(*values):
    if any(v < 0 for v in values):
        raise PnetInputError("indices and lengths must be non-negative")


def _contract(b, ports, label, name):
    """Merge ``ports`` with a left comb of contractions; a weakening when empty."""
    if not ports:
        weak = b.node(f"{name}w", "Weak")
        return f"{weak}.c0"
    current = ports[0]
    for i, port in enumerate(ports[1:], start=1):
        cont = b.node(f"{name}{i}", "Cont")
        b.edge(current, f"{cont}.p0", label)
        b.edge(port, f"{cont}.p1", label)
        current = f"{cont}.c0"
    return current


def _iterator_box(b, letters, s, d, n):
    """
    The single box of an encoding: a chain of ``len(letters) + 1`` axioms,
    one tensor per letter behind its own door, closed by a par behind the
    principal door. Returns the door conclusion ports.
    """
    x = Atom("X", s + 1)
    b.box("B", "prin", aux=[f"aux{i}" for i in range(1, len(letters) + 1)])
    for i in range(1, len(letters) + 2):
        b.node(f"ax{i}", "Ax", "B")
    b.node("parx", "Par", "B")
    b.node("prin", "BoxPrincipal", "B")
    b.edge("ax1.c0", "parx.p0", dual(x))
    for i in range(1, len(letters) + 1):
        b.node(f"tens{i}", "Tensor", "B")
        b.node(f"aux{i}", "BoxAux", "B")
        b.edge(f"ax{i}.c1", f"tens{i}.p0", x)
        b.edge(f"ax{i + 1}.c0", f"tens{i}.p1", dual(x))
        b.edge(f"tens{i}.c0", f"aux{i}.p0", Tensor(x, dual(x)))
    b.edge(f"ax{len(letters) + 1}.c1", "parx.p1", x)
    b.edge("parx.c0", "prin.p0", Par(dual(x), x))
    return [f"aux{i}.c0" for i in range(1, len(letters) + 1)]


def encode_nat(k, s=0, d=0, n=0):
    """
    The integer ``k`` as an SDNLL net of type N_{s,d,n}: exactly one box,
    k doors merged by k-1 contractions (a weakening for 0).
    """
    _check_indices(k, s, d, n)
    b = NetBuilder()
    typ = nat_type(s, d, n)
    step, bang = typ.body.left, typ.body.right
    doors = _iterator_box(b, range(k), s, d, n)
    steps = _contract(b, doors, step, "cont")
    b.node("parg", "Par")
    b.node("all", "Forall", var="X", level=s + 1)
    b.edge(steps, "parg.p0", step)
    b.edge("prin.c0", "parg.p1", bang)
    b.edge("parg.c0", "all.p0", typ.body)
    b.edge("all.c0", None, typ, id="out")
    net = b.build()
    logger.debug("encoded %d as a net of %d edges", k, len(net.edges))
    return net


def encode_binlist(bits, s=0, d=0, n=0):
    """
    A word over {0, 1} as an SDNLL net of type B_{s,d,n}. Each letter owns a
    door of the single box; doors of 0-letters feed the first argument,
    doors of 1-letters the second.
    """
    bits = [int(c) for c in str(bits)] if not isinstance(bits, (list, tuple)) else list(bits)
    if any(c not in (0, 1) for c in bits):
        raise PnetInputError("binary lists only contain 0 and 1")
    _check_indices(s, d, n)
    b = NetBuilder()
    typ = binlist_type(s, d, n)
    step = typ.body.left
    rest = typ.body.right
    doors = _iterator_box(b, bits, s, d, n)
    zeros = _contract(b, [p for p, c in zip(doors, bits) if c == 0], step, "zero")
    ones = _contract(b, [p for p, c in zip(doors, bits) if c == 1], step, "one")
    b.node("parg", "Par")
    b.node("parl", "Par")
    b.node("all", "Forall", var="X", level=s + 1)
    b.edge(ones, "parl.p0", step)
    b.edge("prin.c0", "parl.p1", rest.right)
    b.edge(zeros, "parg.p0", step)
    b.edge("parl.c0", "parg.p1", rest)
    b.edge("parg.c0", "all.p0", typ.body)
    b.edge("all.c0", None, typ, id="out")
    return b.build()


# ============================================================
# mL⁴
# ============================================================

# nodes whose conclusion lives one level below their premise
_DROP = ("Der", "BoxAux", "BoxPrincipal", "Paragraph")


def ml4_check(net):
    """
    Level discipline of mL⁴ nets: doors, dereliction and paragraph lower
    the level by one, every other node keeps it.

    Returns:
        A list of ``Violation``.

    Raises:
        MixedNodes when the net contains dig nodes.
    """
    digs = [node.id for node in net.nodes.values() if node.kind == "Dig"]
    if digs:
        raise MixedNodes(f"mL⁴ nets have no dig node: {', '.join(digs)}")
    out = validate(net, "ll-typed")
    if out:
        return out
    for edge in net.edges.values():
        if indexing(edge.label) == "indexed":
            out.append(Violation(edge.id, "label", "mL⁴ labels carry no indices",
                                 found=format_formula(edge.label)))
        if edge.level is None or edge.level < 0:
            out.append(Violation(edge.id, "level", "edge needs a level >= 0", found=str(edge.level)))
    for box in net.boxes.values():
        if len(box.aux) > 1:
            out.append(Violation(box.id, "doors", "mL⁴ boxes have at most one auxiliary door",
                                 found=str(len(box.aux))))
    if out:
        return out
    for node in net.nodes.values():
        k = node.kind
        levels = [net.edges[net.premise(node.id, i)].level for i in range(ARITY[k][0])]
        levels += [net.edges[net.conclusion(node.id, i)].level for i in range(ARITY[k][1])]
        if k in _DROP:
            expected = [levels[0], levels[0] - 1]
        else:
            expected = [levels[0]] * len(levels)
        if levels != expected:
            out.append(Violation(node.id, "level", f"levels around {k} do not match",
                                 expected=str(expected), found=str(levels)))
    logger.info("ml4_check: %d violations", len(out))
    return out


def _modal_depths(f, depth, found):
    """Record, per variable name, the modal depths of its occurrences."""
    if isinstance(f, Atom):
        found.setdefault(f.name, []).append(depth)
    elif isinstance(f, (Tensor, Par)):
        _modal_depths(f.left, depth, found)
        _modal_depths(f.right, depth, found)
    elif isinstance(f, (Forall, Exists)):
        found.setdefault(f.var, []).append(depth)
        _modal_depths(f.body, depth, found)
    else:
        _modal_depths(f.body, depth + 1, found)


def variable_levels(net):
    """M_X: the largest s + ‖H‖ over occurrences of X in a level-s label."""
    found = {}
    for edge in net.edges.values():
        _modal_depths(edge.label, edge.level, found)
    return {name: max(depths) for name, depths in found.items()}


def translate_formula(f, depth, levels):
    """!/? under ‖H‖ modalities of a level-s label get index (s + ‖H‖, 1, 0); § disappears."""
    if isinstance(f, Atom):
        return Atom(f.name, levels[f.name], f.positive)
    if isinstance(f, (Tensor, Par)):
        return type(f)(translate_formula(f.left, depth, levels), translate_formula(f.right, depth, levels))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, levels[f.var], translate_formula(f.body, depth, levels))
    if isinstance(f, Paragraph):
        return translate_formula(f.body, depth + 1, levels)
    return type(f)(ExpIndex(depth, 1, 0), translate_formula(f.body, depth + 1, levels))


def _occurrence_depth(f, var, depth=0):
    """Modal depth of the first free occurrence of ``var`` in ``f``."""
    if isinstance(f, Atom):
        return depth if f.name == var else None
    if isinstance(f, (Tensor, Par)):
        left = _occurrence_depth(f.left, var, depth)
        return left if left is not None else _occurrence_depth(f.right, var, depth)
    if isinstance(f, (Forall, Exists)):
        return None if f.var == var else _occurrence_depth(f.body, var, depth)
    return _occurrence_depth(f.body, var, depth + 1)


def ml4_to_sdnll(net):
    """
    Translate an mL⁴ net into SDNLL. Variables become X_{M_X}, exponentials
    get index (s + ‖H‖, 1, 0) and paragraph nodes are spliced out. The input
    is expected to pass ``ml4_check``.
    """
    if any(edge.level is None or edge.label is None for edge in net.edges.values()):
        raise PnetInputError("mL⁴ translation needs a label and a level on every edge")
    if any(node.kind == "Dig" for node in net.nodes.values()):
        raise MixedNodes("mL⁴ nets have no dig node")
    levels = variable_levels(net)
    for node in net.nodes.values():
        if node.witness is not None:
            for sub in subformulas(node.witness):
                name = sub.name if isinstance(sub, Atom) else getattr(sub, "var", None)
                if name is not None:
                    levels.setdefault(name, 0)
    out = net.copy()
    for node in out.nodes.values():
        if node.kind == "Forall":
            node.level = levels.get(node.var, 0)
        elif node.kind == "Exists" and node.witness is not None:
            concl = net.edges[net.conclusion(node.id)]
            where = _occurrence_depth(concl.label.body, concl.label.var)
            depth = concl.level + (where if where is not None else 0)
            node.witness = translate_formula(node.witness, depth, levels)
    for edge in out.edges.values():
        edge.label = translate_formula(edge.label, edge.level, levels)
        edge.level = None
    for node in [n for n in out.nodes.values() if n.kind == "Paragraph"]:
        premise = out.premise(node.id, 0)
        conclusion = out.conclusion(node.id, 0)
        head = out.edges[conclusion].head
        if conclusion in out.conclusions:
            out.conclusions[out.conclusions.index(conclusion)] = premise
        out.remove_edge(conclusion)
        out.remove_node(node.id)
        out.set_head(premise, head)
    out.reindex()
    logger.info("translated mL⁴ net: %d variables, %d edges", len(levels), len(out.edges))
    return out


def ml4_nat(k, boxed=False):
    """
    The integer ``k`` as an mL⁴ net of type ∀X. !(X⊸X) ⊸ §(X⊸X): its steps
    are derelictions merged by contractions and its result goes through a
    paragraph. With ``boxed`` the whole iterator sits in a box with one
    door.
    """
    _check_indices(k)
    b = NetBuilder()
    x = Atom("X")
    step = Tensor(x, dual(x))
    box = "B" if boxed else None
    top = 2 if boxed else 1
    for i in range(1, k + 2):
        b.node(f"ax{i}", "Ax", box)
    b.node("parx", "Par", box)
    b.node("para", "Paragraph", box)
    b.edge("ax1.c0", "parx.p0", dual(x), level=top)
    ports = []
    for i in range(1, k + 1):
        b.node(f"tens{i}", "Tensor", box)
        b.node(f"der{i}", "Der", box)
        b.edge(f"ax{i}.c1", f"tens{i}.p0", x, level=top)
        b.edge(f"ax{i + 1}.c0", f"tens{i}.p1", dual(x), level=top)
        b.edge(f"tens{i}.c0", f"der{i}.p0", step, level=top)
        ports.append(f"der{i}.c0")
    b.edge(f"ax{k + 1}.c1", "parx.p1", x, level=top)
    b.edge("parx.c0", "para.p0", Par(dual(x), x), level=top)
    steps = _contract_levelled(b, ports, Quest(None, step), top - 1, box)
    result = Paragraph(Par(dual(x), x))
    if boxed:
        b.box("B", "prin", aux=["aux"])
        b.node("aux", "BoxAux", "B")
        b.node("prin", "BoxPrincipal", "B")
        b.edge(steps, "aux.p0", Quest(None, step), level=1)
        b.edge("para.c0", "prin.p0", result, level=1)
        steps, step_label = "aux.c0", Quest(None, Quest(None, step))
        result_port, result = "prin.c0", Bang(None, result)
    else:
        step_label, result_port = Quest(None, step), "para.c0"
    b.node("parg", "Par")
    b.node("all", "Forall", var="X")
    b.edge(steps, "parg.p0", step_label, level=0)
    b.edge(result_port, "parg.p1", result, level=0)
    b.edge("parg.c0", "all.p0", Par(step_label, result), level=0)
    b.edge("all.c0", None, Forall("X", None, Par(step_label, result)), id="out", level=0)
    return b.build()


def _contract_levelled(b, ports, label, level, box):
    if not ports:
        return f"{b.node('weak', 'Weak', box)}.c0"
    current = ports[0]
    for i, port in enumerate(ports[1:], start=1):
        cont = b.node(f"cont{i}", "Cont", box)
        b.edge(current, f"{cont}.p0", label, level=level)
        b.edge(port, f"{cont}.p1", label, level=level)
        current = f"{cont}.c0"
    return current
