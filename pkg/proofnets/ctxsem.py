"""
Context semantics: a token travelling over directed edges of a net with a
potential (one signature per enclosing box) and a trace (the connectives it
crossed, newest last).

The token relation ``⇝`` is the union of the local steps ``↦`` (with their
duals on reversed edges) and the jump ``↪`` from a reversed auxiliary door
back to the principal door of the same box. Both can be restricted to a set
of boxes ``S``.
"""
import itertools
import logging
import math
from dataclasses import dataclass, replace

from django.conf import settings

from .exceptions import CycleDetected, IllFormedContext, StepBudgetExceeded, UnknownElement
from .formula import TraceElem, dual_trace
from .proofnet import depth
from .signatures import (
    E, Hole, SigL, SigN, SigP, SigR, close, fill, format_potential, is_quasi_standard_sig,
    is_standard, prunec_max, simplifications, truncations,
)

logger = logging.getLogger(__name__)

FULL = "full"        # ⇝ : local steps and jumps
NOJUMP = "nojump"    # ↦ : local steps only

PLAIN, JUMP = "plain", "jump"


def bang(t):
    return TraceElem("bang", t)


def quest(t):
    return TraceElem("quest", t)


@dataclass(frozen=True)
class Context:
    """((e, P), T); ``rev`` marks the reversed orientation ē of the edge."""
    edge: str
    rev: bool
    potential: tuple
    trace: tuple

    def __str__(self):
        return format_context(self)

    def dual(self):
        return Context(self.edge, not self.rev, self.potential, dual_trace(self.trace))

    def refine(self, binding):
        return Context(
            self.edge, self.rev,
            tuple(fill(t, binding) for t in self.potential),
            tuple(TraceElem(x.mark, fill(x.sig, binding) if x.sig is not None else None)
                  for x in self.trace),
        )


def format_edge(edge, rev):
    return f"~{edge}" if rev else edge


def format_trace(trace):
    return "[" + ";".join(str(x) for x in trace) + "]"


def format_context(c):
    return f"(({format_edge(c.edge, c.rev)},{format_potential(c.potential)}),{format_trace(c.trace)})"


def is_quasi_standard(c):
    """[!t]@T with t quasi-standard and every other signature standard."""
    if not c.trace or c.trace[0].mark != "bang" or not is_quasi_standard_sig(c.trace[0].sig):
        return False
    if not all(is_standard(t) for t in c.potential):
        return False
    return all(x.sig is None or is_standard(x.sig) for x in c.trace[1:])


class _Undetermined(Exception):
    """A rule needs to look inside a hole signature."""

    def __init__(self, hole, site):
        self.hole = hole
        self.site = site
        super().__init__(f"{site} on {hole}")


# ============================================================
# ONE STEP
# ============================================================

def _principal_box(net, edge_id):
    """Box B when ``edge_id`` is σ(B), else None."""
    node = net.nodes[net.edges[edge_id].tail[0]]
    return node.box if node.kind == "BoxPrincipal" else None


def _natural(net, c):
    edge = net.edges[c.edge]
    if edge.head is None:
        return None
    node_id, port = edge.head
    node = net.nodes[node_id]
    kind, P, T = node.kind, c.potential, c.trace
    if not T:
        return None
    left = port == "p0"

    def down(trace, potential=P):
        return Context(net.conclusion(node_id), False, potential, trace), PLAIN

    if kind == "Cut":
        other = net.premise(node_id, 1 if left else 0)
        return Context(other, True, P, T), PLAIN
    if kind == "Par":
        return down(T + (TraceElem("par_l" if left else "par_r"),))
    if kind == "Tensor":
        return down(T + (TraceElem("tens_l" if left else "tens_r"),))
    if kind == "Forall":
        return down(T + (TraceElem("forall"),))
    if kind == "Exists":
        return down(T + (TraceElem("exists"),))
    if kind == "Paragraph":
        return down(T)
    if kind == "Der":
        return down(T + (quest(E),))
    if kind == "Cont":
        if T[-1].mark != "quest":
            return None
        wrap = SigL if left else SigR
        return down(T[:-1] + (quest(wrap(T[-1].sig)),))
    if kind == "Dig":
        if len(T) >= 2 and T[-1].mark == "quest" and T[-2].mark == "quest":
            return down(T[:-2] + (quest(SigN(T[-2].sig, T[-1].sig)),))
        if len(T) == 1 and T[0].mark == "quest":
            return down((quest(SigP(T[0].sig)),))
        return None
    if kind == "BoxAux":
        if not P:
            raise IllFormedContext(f"{c.edge} needs a non-empty potential")
        return down(T + (quest(P[-1]),), P[:-1])
    if kind == "BoxPrincipal":
        if not P:
            raise IllFormedContext(f"{c.edge} needs a non-empty potential")
        return down(T + (bang(P[-1]),), P[:-1])
    return None


_POP = {
    "Par": {"tens_l": 0, "tens_r": 1},
    "Tensor": {"par_l": 0, "par_r": 1},
    "Forall": {"exists": 0},
    "Exists": {"forall": 0},
}


def _reversed(net, c):
    edge = net.edges[c.edge]
    node_id, port = edge.tail
    node = net.nodes[node_id]
    kind, P, T = node.kind, c.potential, c.trace
    if not T:
        return None
    top = T[-1]

    def up(i, trace, potential=P):
        # traces never become empty
        if not trace:
            return None
        return Context(net.premise(node_id, i), True, potential, trace), PLAIN

    if kind == "Ax":
        other = net.conclusion(node_id, 1 if port == "c0" else 0)
        return Context(other, False, P, T), PLAIN
    if kind in _POP:
        i = _POP[kind].get(top.mark)
        return None if i is None else up(i, T[:-1])
    if kind == "Paragraph":
        return up(0, T)
    if top.mark != "bang":
        if kind == "BoxPrincipal" and top.mark == "quest" and len(T) >= 2:
            return up(0, T[:-1], P + (top.sig,))
        return None
    sig = top.sig
    if kind == "Der":
        if isinstance(sig, Hole):
            raise _Undetermined(sig, "der")
        return up(0, T[:-1]) if sig == E else None
    if kind == "Cont":
        if isinstance(sig, Hole):
            raise _Undetermined(sig, "cont")
        if isinstance(sig, SigL):
            return up(0, T[:-1] + (bang(sig.t),))
        if isinstance(sig, SigR):
            return up(1, T[:-1] + (bang(sig.t),))
        return None
    if kind == "Dig":
        if isinstance(sig, Hole):
            raise _Undetermined(sig, "dig")
        if isinstance(sig, SigN):
            return up(0, T[:-1] + (bang(sig.t1), bang(sig.t2)))
        if isinstance(sig, SigP) and len(T) == 1:
            return up(0, (bang(sig.t),))
        return None
    if kind == "BoxAux":
        if len(T) == 1:
            principal = net.principal_edge(node.box)
            return Context(principal, False, P, T), JUMP
        return up(0, T[:-1], P + (sig,))
    return None


def _step(net, c, restriction=None, mode=FULL):
    if restriction is not None and not c.rev and len(c.trace) == 1 and c.trace[0].mark == "bang":
        box = _principal_box(net, c.edge)
        if box is not None and box not in restriction and mode == FULL:
            return None
    result = _reversed(net, c) if c.rev else _natural(net, c)
    if result is None:
        return None
    target, kind = result
    if kind == JUMP:
        if mode == NOJUMP:
            return None
        if restriction is not None and _principal_box(net, target.edge) not in restriction:
            return None
    if mode == NOJUMP and restriction is not None and target.rev and target.trace[-1].mark == "quest":
        box = _principal_box(net, target.edge)
        if box is not None and box not in restriction:
            return None
    return result


def check_context(net, c):
    if c.edge not in net.edges:
        raise UnknownElement(f"no edge named {c.edge!r}")
    if not c.trace:
        raise IllFormedContext("trace must be non-empty")
    if len(c.potential) != depth(net, c.edge):
        raise IllFormedContext(
            f"potential of {c.edge} has {len(c.potential)} signatures, depth is {depth(net, c.edge)}"
        )


def step(net, c):
    """
    The unique ⇝-successor of ``c`` with the kind of step, or None.
    """
    check_context(net, c)
    return _step(net, c)


def step_restricted(net, c, restriction, mode=FULL):
    """⇝_S (``mode="full"``) or ↦_S (``mode="nojump"``)."""
    check_context(net, c)
    return _step(net, c, frozenset(restriction), mode)


def _budget(budget):
    if budget is None:
        return getattr(settings, "PNET_STEP_BUDGET", 10**6)
    return budget


def run_path(net, c, mode=FULL, restriction=None, budget=None):
    """
    The whole deterministic path from ``c`` until no rule applies.

    Returns:
        list of (Context, step kind); the first entry has kind None.
    """
    check_context(net, c)
    budget = _budget(budget)
    restriction = None if restriction is None else frozenset(restriction)
    path = [(c, None)]
    seen = {c}
    while True:
        result = _step(net, path[-1][0], restriction, mode)
        if result is None:
            return path
        if len(path) > budget:
            raise StepBudgetExceeded(f"path from {c} is longer than {budget} steps")
        if result[0] in seen:
            raise CycleDetected(f"path from {c} revisits {result[0]}")
        seen.add(result[0])
        path.append(result)


# ============================================================
# COPIES AND CANONICAL POTENTIALS
# ============================================================

class Explorer:
    """
    Copy enumeration for one net under one relation. Results are cached per
    (box, potential), so keep one explorer per analysis and drop it when the
    net changes.
    """

    def __init__(self, net, restriction=None, budget=None):
        self.net = net
        self.restriction = None if restriction is None else frozenset(restriction)
        self.budget = _budget(budget)
        self._copies = {}
        self._canonical = {}

    def step(self, c):
        return _step(self.net, c, self.restriction, FULL)

    def reaches_empty_bang(self, c):
        """Does the path from ``c`` meet a context whose trace is exactly [!e]?"""
        seen = set()
        steps = 0
        while True:
            if len(c.trace) == 1 and c.trace[0] == bang(E):
                return True
            if c in seen:
                raise CycleDetected(f"token revisits {c}")
            seen.add(c)
            steps += 1
            if steps > self.budget:
                raise StepBudgetExceeded(f"exploration exceeded {self.budget} contexts")
            result = self.step(c)
            if result is None:
                return False
            c = result[0]

    def is_copy_context(self, c):
        """Every simplification of the bottom signature reaches [!e]."""
        if not c.trace or c.trace[0].mark != "bang":
            raise IllFormedContext(f"{c} does not start with a !-element")
        rest = c.trace[1:]
        return all(
            self.reaches_empty_bang(replace(c, trace=(bang(u),) + rest))
            for u in simplifications(c.trace[0].sig)
        )

    def candidates(self, box, potential):
        """Symbolic exploration: standard signatures that may be copies."""
        counter = itertools.count(1)
        root = Hole(0)
        start = Context(self.net.principal_edge(box), False, tuple(potential), (bang(root),))
        stack = [(start, {}, frozenset(), set())]
        found = set()
        steps = 0
        while stack:
            c, binding, not_e, seen = stack.pop()
            while True:
                steps += 1
                if steps > self.budget:
                    raise StepBudgetExceeded(f"copy exploration of {box} exceeded {self.budget} contexts")
                if c in seen:
                    raise CycleDetected(f"token revisits {c}")
                seen.add(c)
                if len(c.trace) == 1 and c.trace[0].mark == "bang":
                    sig = c.trace[0].sig
                    if sig == E:
                        found.add(close(fill(root, binding)))
                        break
                    if isinstance(sig, Hole) and sig not in not_e:
                        found.add(close(fill(root, {**binding, sig: E})))
                        not_e = not_e | {sig}
                try:
                    result = self.step(c)
                except _Undetermined as und:
                    for value in self._choices(und, not_e, counter):
                        refined = {und.hole: value}
                        stack.append((c.refine(refined), {**binding, **refined}, not_e, set(seen)))
                    break
                if result is None:
                    break
                c = result[0]
        logger.debug("%s%s: %d candidates in %d steps", box, format_potential(potential), len(found), steps)
        return found

    @staticmethod
    def _choices(und, not_e, counter):
        if und.site == "cont":
            return [SigL(Hole(next(counter))), SigR(Hole(next(counter)))]
        if und.site == "der":
            return [] if und.hole in not_e else [E]
        return [SigN(Hole(next(counter)), Hole(next(counter)))]

    def copies(self, box, potential=()):
        key = (box, tuple(potential))
        if key not in self._copies:
            if box not in self.net.boxes:
                raise UnknownElement(f"no box named {box!r}")
            expected = depth(self.net, box)
            if len(potential) != expected:
                raise IllFormedContext(f"box {box} needs a potential of length {expected}")
            start = self.net.principal_edge(box)
            self._copies[key] = frozenset(
                t for t in self.candidates(box, potential)
                if self.is_copy_context(Context(start, False, tuple(potential), (bang(t),)))
            )
        return self._copies[key]

    def canonical_for_chain(self, chain):
        chain = tuple(chain)
        if chain not in self._canonical:
            potentials = [()]
            for box in chain:
                potentials = [
                    p + (t,)
                    for p in potentials
                    for t in sorted(self.copies(box, p), key=str)
                ]
            self._canonical[chain] = potentials
        return self._canonical[chain]

    def canonical_potentials(self, elem):
        net = self.net
        if elem in net.edges:
            chain = net.edge_chain(elem)
        elif elem in net.nodes:
            chain = net.box_chain(net.nodes[elem].box)
        elif elem in net.boxes:
            chain = net.box_chain(elem)[:-1]
        else:
            raise UnknownElement(f"no node, edge or box named {elem!r}")
        return self.canonical_for_chain(chain)


def copies(net, box, potential=(), restriction=None, budget=None):
    """
    Standard signatures t such that ((σ(B),P),[!t]) is a copy context under
    ⇝, or ⇝_S when ``restriction`` is given.
    """
    return Explorer(net, restriction, budget).copies(box, tuple(potential))


def canonical_potentials(net, elem, restriction=None, budget=None):
    return Explorer(net, restriction, budget).canonical_potentials(elem)


def weight(net, budget=None):
    """
    W_G: canonical potentials summed over both orientations of every edge.
    A revisited context makes the weight infinite.
    """
    explorer = Explorer(net, budget=budget)
    try:
        total = sum(2 * len(explorer.canonical_potentials(e)) for e in net.edges)
    except CycleDetected as exc:
        logger.info("infinite weight: %s", exc.detail)
        return math.inf
    return total


# ============================================================
# RESTRICTIONS
# ============================================================

def restr_sig(net, c, restriction=None, budget=None, explorer=None):
    """
    The ⪯-maximal truncation u of the bottom signature t of ``c`` such that
    ((e,P),[!u]@T) is still a copy context.
    """
    explorer = explorer or Explorer(net, restriction, budget)
    check_context(net, c)
    if c.trace[0].mark != "bang":
        raise IllFormedContext(f"{c} does not start with a !-element")
    rest = c.trace[1:]
    good = [
        u for u in truncations(c.trace[0].sig)
        if explorer.is_copy_context(replace(c, trace=(bang(u),) + rest))
    ]
    return prunec_max(good)


def restr_pot(net, edge, potential, restriction=None, budget=None, explorer=None):
    explorer = explorer or Explorer(net, restriction, budget)
    potential = tuple(potential)
    if len(potential) != depth(net, edge):
        raise IllFormedContext(f"potential of {edge} must have {depth(net, edge)} signatures")
    if not potential:
        return ()
    box = net.edge_chain(edge)[-1]
    principal = net.principal_edge(box)
    head = restr_pot(net, principal, potential[:-1], explorer=explorer)
    last = restr_sig(net, Context(principal, False, head, (bang(potential[-1]),)), explorer=explorer)
    return head + (last,)


def restr_cont(net, c, restriction=None, budget=None, explorer=None):
    """
    Restrict the potential, then the trace from its newest element back to
    its oldest, dualising the remainder at every ?-element.
    """
    explorer = explorer or Explorer(net, restriction, budget)
    check_context(net, c)
    potential = restr_pot(net, c.edge, c.potential, explorer=explorer)
    done = ()
    for elem in reversed(c.trace):
        if elem.mark == "bang":
            lookup = Context(c.edge, c.rev, potential, (bang(elem.sig),) + done)
            elem = bang(restr_sig(net, lookup, explorer=explorer))
        elif elem.mark == "quest":
            lookup = Context(c.edge, not c.rev, potential, (bang(elem.sig),) + dual_trace(done))
            elem = quest(restr_sig(net, lookup, explorer=explorer))
        done = (elem,) + done
    return Context(c.edge, c.rev, potential, done)
