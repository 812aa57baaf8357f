"""
Formulas of linear logic and of its indexed refinement.

One ``Formula`` type covers plain LL labels (no levels, no indices), indexed
labels where every variable carries a level and every exponential an
``ExpIndex``, and the level-free labels used by the light embedding (which
adds the paragraph modality).
"""
import logging
import re
from dataclasses import dataclass
from typing import Optional, Union

from .exceptions import FormulaSyntaxError, MixedIndexing, TraceMismatch

logger = logging.getLogger(__name__)


# ============================================================
# DATA TYPES
# ============================================================

@dataclass(frozen=True, order=True)
class ExpIndex:
    s: int
    d: int
    n: int

    def __str__(self):
        return f"{self.s},{self.d},{self.n}"

    def geq(self, other):
        return self.s >= other.s and self.d >= other.d and self.n >= other.n


@dataclass(frozen=True)
class Atom:
    name: str
    level: Optional[int] = None
    positive: bool = True


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    level: Optional[int]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    level: Optional[int]
    body: "Formula"


@dataclass(frozen=True)
class Bang:
    idx: Optional[ExpIndex]
    body: "Formula"


@dataclass(frozen=True)
class Quest:
    idx: Optional[ExpIndex]
    body: "Formula"


@dataclass(frozen=True)
class Paragraph:
    body: "Formula"


Formula = Union[Atom, Tensor, Par, Forall, Exists, Bang, Quest, Paragraph]

BINARY = (Tensor, Par)
BINDERS = (Forall, Exists)
MODALITIES = (Bang, Quest)


@dataclass(frozen=True)
class TraceElem:
    """
    One mark of a trace. ``mark`` is one of par_l, par_r, tens_l, tens_r,
    forall, exists, bang, quest; the last two carry a signature.
    """
    mark: str
    sig: object = None

    def __str__(self):
        symbols = {
            "par_l": "⅋l", "par_r": "⅋r", "tens_l": "⊗l", "tens_r": "⊗r",
            "forall": "∀", "exists": "∃",
        }
        if self.mark == "bang":
            return f"!{self.sig}"
        if self.mark == "quest":
            return f"?{self.sig}"
        return symbols[self.mark]


_DUAL_MARK = {
    "par_l": "tens_l", "par_r": "tens_r", "tens_l": "par_l", "tens_r": "par_r",
    "forall": "exists", "exists": "forall", "bang": "quest", "quest": "bang",
}


def dual_elem(elem):
    return TraceElem(_DUAL_MARK[elem.mark], elem.sig)


def dual_trace(trace):
    return tuple(dual_elem(e) for e in trace)


# ============================================================
# DUALITY AND TRAVERSALS
# ============================================================

def dual(f):
    """Linear negation; exponential indices are kept across the swap."""
    if isinstance(f, Atom):
        return Atom(f.name, f.level, not f.positive)
    if isinstance(f, Tensor):
        return Par(dual(f.left), dual(f.right))
    if isinstance(f, Par):
        return Tensor(dual(f.left), dual(f.right))
    if isinstance(f, Forall):
        return Exists(f.var, f.level, dual(f.body))
    if isinstance(f, Exists):
        return Forall(f.var, f.level, dual(f.body))
    if isinstance(f, Bang):
        return Quest(f.idx, dual(f.body))
    if isinstance(f, Quest):
        return Bang(f.idx, dual(f.body))
    if isinstance(f, Paragraph):
        return Paragraph(dual(f.body))
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f):
    yield f
    if isinstance(f, BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Forall, Exists, Bang, Quest, Paragraph)):
        yield from subformulas(f.body)


def free_vars(f):
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, BINARY):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, BINDERS):
        return free_vars(f.body) - {f.var}
    return free_vars(f.body)


def all_names(f):
    names = set()
    for sub in subformulas(f):
        if isinstance(sub, Atom):
            names.add(sub.name)
        elif isinstance(sub, BINDERS):
            names.add(sub.var)
    return names


def indices(f):
    """Every exponential index of ``f``, outermost first."""
    return [sub.idx for sub in subformulas(f)
            if isinstance(sub, MODALITIES) and sub.idx is not None]


def indexing(f):
    """
    Returns "indexed", "plain" or "neutral" (nothing to annotate).

    Raises MixedIndexing when annotated and bare positions are mixed.
    """
    annotated, bare = False, False
    for sub in subformulas(f):
        if isinstance(sub, (Atom, Forall, Exists)):
            slot = sub.level
        elif isinstance(sub, MODALITIES):
            slot = sub.idx
        else:
            continue
        if slot is None:
            bare = True
        else:
            annotated = True
    if annotated and bare:
        raise MixedIndexing(f"mixed indexing in {format_formula(f)}")
    if annotated:
        return "indexed"
    return "plain" if bare else "neutral"


def erase_indices(f):
    if isinstance(f, Atom):
        return Atom(f.name, None, f.positive)
    if isinstance(f, Tensor):
        return Tensor(erase_indices(f.left), erase_indices(f.right))
    if isinstance(f, Par):
        return Par(erase_indices(f.left), erase_indices(f.right))
    if isinstance(f, Forall):
        return Forall(f.var, None, erase_indices(f.body))
    if isinstance(f, Exists):
        return Exists(f.var, None, erase_indices(f.body))
    if isinstance(f, Bang):
        return Bang(None, erase_indices(f.body))
    if isinstance(f, Quest):
        return Quest(None, erase_indices(f.body))
    return Paragraph(erase_indices(f.body))


def _rebuild(f, body):
    return type(f)(f.var, f.level, body) if isinstance(f, BINDERS) else type(f)(f.idx, body)


def _fresh(base, used):
    stem = base.rstrip("0123456789") or "X"
    i = 1
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


# ============================================================
# SUBSTITUTION AND ALPHA-EQUIVALENCE
# ============================================================

def rename_free(f, old, new):
    """Rename free occurrences of ``old``; levels are kept."""
    if isinstance(f, Atom):
        return Atom(new, f.level, f.positive) if f.name == old else f
    if isinstance(f, Tensor):
        return Tensor(rename_free(f.left, old, new), rename_free(f.right, old, new))
    if isinstance(f, Par):
        return Par(rename_free(f.left, old, new), rename_free(f.right, old, new))
    if isinstance(f, BINDERS):
        if f.var == old:
            return f
        if f.var == new:
            fresh = _fresh(f.var, all_names(f) | {old, new})
            f = type(f)(fresh, f.level, rename_free(f.body, f.var, fresh))
        return type(f)(f.var, f.level, rename_free(f.body, old, new))
    if isinstance(f, MODALITIES):
        return type(f)(f.idx, rename_free(f.body, old, new))
    return Paragraph(rename_free(f.body, old, new))


def substitute(f, var, b):
    """Capture-avoiding ``f[b/var]``; negative occurrences receive ``dual(b)``."""
    if isinstance(f, Atom):
        if f.name != var:
            return f
        return b if f.positive else dual(b)
    if isinstance(f, Tensor):
        return Tensor(substitute(f.left, var, b), substitute(f.right, var, b))
    if isinstance(f, Par):
        return Par(substitute(f.left, var, b), substitute(f.right, var, b))
    if isinstance(f, BINDERS):
        if f.var == var or var not in free_vars(f.body):
            return f
        if f.var in free_vars(b):
            fresh = _fresh(f.var, all_names(f) | all_names(b) | {var})
            f = type(f)(fresh, f.level, rename_free(f.body, f.var, fresh))
        return type(f)(f.var, f.level, substitute(f.body, var, b))
    if isinstance(f, MODALITIES):
        return type(f)(f.idx, substitute(f.body, var, b))
    return Paragraph(substitute(f.body, var, b))


def alpha_normalize(f):
    """Rename binders so that bound names differ from free names and from each other."""
    used = set(free_vars(f))

    def walk(g):
        if isinstance(g, Atom):
            return g
        if isinstance(g, BINARY):
            return type(g)(walk(g.left), walk(g.right))
        if isinstance(g, BINDERS):
            var, body = g.var, g.body
            if var in used:
                fresh = _fresh(var, used | all_names(f))
                body = rename_free(body, var, fresh)
                var = fresh
            used.add(var)
            return type(g)(var, g.level, walk(body))
        if isinstance(g, MODALITIES):
            return type(g)(g.idx, walk(g.body))
        return Paragraph(walk(g.body))

    return walk(f)


def canonical(f, env=None, depth=0):
    """Binders renamed to their binding depth; equal results mean alpha-equal formulas."""
    env = env or {}
    if isinstance(f, Atom):
        return Atom(env.get(f.name, f.name), f.level, f.positive)
    if isinstance(f, BINARY):
        return type(f)(canonical(f.left, env, depth), canonical(f.right, env, depth))
    if isinstance(f, BINDERS):
        name = f"#{depth}"
        return type(f)(name, f.level, canonical(f.body, {**env, f.var: name}, depth + 1))
    if isinstance(f, MODALITIES):
        return type(f)(f.idx, canonical(f.body, env, depth))
    return Paragraph(canonical(f.body, env, depth))


def alpha_equal(a, b):
    return canonical(a) == canonical(b)


# ============================================================
# SUBTYPING AND GRAMMAR MEMBERSHIP
# ============================================================

def _leq(a, b):
    if type(a) is not type(b):
        return False
    if isinstance(a, Atom):
        return a == b
    if isinstance(a, BINARY):
        return _leq(a.left, b.left) and _leq(a.right, b.right)
    if isinstance(a, BINDERS):
        return a.var == b.var and a.level == b.level and _leq(a.body, b.body)
    if isinstance(a, Bang):
        return a.idx.geq(b.idx) and _leq(a.body, b.body)
    if isinstance(a, Quest):
        return b.idx.geq(a.idx) and _leq(a.body, b.body)
    return _leq(a.body, b.body)


def subtype_leq(a, b):
    """
    a ≤ b: same skeleton, bang indices of ``a`` componentwise greater or
    equal, why-not indices componentwise smaller or equal.
    """
    for f in (a, b):
        if indexing(f) == "plain":
            raise MixedIndexing(f"subtyping needs indexed formulas: {format_formula(f)}")
    return _leq(canonical(a), canonical(b))


def in_Fs(f, s):
    if isinstance(f, Atom):
        return f.level is not None and f.level >= s
    if isinstance(f, BINARY):
        return in_Fs(f.left, s) and in_Fs(f.right, s)
    if isinstance(f, BINDERS):
        return f.level is not None and f.level >= s and in_Fs(f.body, s)
    if isinstance(f, MODALITIES):
        return f.idx is not None and f.idx.s >= s and in_Fs(f.body, f.idx.s + 1)
    return in_Fs(f.body, s)


def s_min(f):
    found = [sub.idx.s for sub in subformulas(f)
             if isinstance(sub, Bang) and sub.idx is not None]
    return min(found) if found else None


def restrict_by_trace(f, trace):
    """
    The subformula addressed by ``trace``. The last element of the trace
    matches the outermost connective.
    """
    expected = {
        "tens_l": (Tensor, "left"), "tens_r": (Tensor, "right"),
        "par_l": (Par, "left"), "par_r": (Par, "right"),
        "forall": (Forall, "body"), "exists": (Exists, "body"),
        "bang": (Bang, "body"), "quest": (Quest, "body"),
    }
    for elem in reversed(tuple(trace)):
        kind, field = expected[elem.mark]
        if not isinstance(f, kind):
            raise TraceMismatch(f"{elem} does not match {format_formula(f)}")
        f = getattr(f, field)
    return f


# ============================================================
# PARSING AND PRINTING
# ============================================================

_TOKEN = re.compile(
    r"\s*(?:(?P<impl>-o)|(?P<idx>\{\s*\d+\s*,\s*\d+\s*,\s*\d+\s*\})"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9']*(?:_\d+)?)|(?P<sym>[*|!?$^().]))"
)


def _tokenize(text):
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise FormulaSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = match.lastgroup
        tokens.append((kind, match.group(kind)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, value=None):
        kind, tok = self.peek()
        if tok is None or (value is not None and tok != value):
            raise FormulaSyntaxError(f"expected {value or 'a token'} in {self.text!r}")
        self.pos += 1
        return kind, tok

    def parse(self):
        f = self.implication()
        if self.pos != len(self.tokens):
            raise FormulaSyntaxError(f"trailing input in {self.text!r}")
        return f

    def implication(self):
        left = self.par()
        if self.peek()[1] == "-o":
            self.take("-o")
            return Par(dual(left), self.implication())
        return left

    def par(self):
        left = self.tensor()
        if self.peek()[1] == "|":
            self.take("|")
            return Par(left, self.par())
        return left

    def tensor(self):
        left = self.unary()
        if self.peek()[1] == "*":
            self.take("*")
            return Tensor(left, self.tensor())
        return left

    def unary(self):
        kind, tok = self.peek()
        if tok in ("!", "?"):
            self.take()
            idx = None
            if self.peek()[0] == "idx":
                s, d, n = (int(x) for x in self.take()[1].strip("{}").split(","))
                idx = ExpIndex(s, d, n)
            body = self.unary()
            return Bang(idx, body) if tok == "!" else Quest(idx, body)
        if tok == "$":
            self.take()
            return Paragraph(self.unary())
        if kind == "ident" and tok in ("all", "ex"):
            self.take()
            name, level = _split_ident(self.take()[1])
            self.take(".")
            body = self.implication()
            return Forall(name, level, body) if tok == "all" else Exists(name, level, body)
        return self.postfix()

    def postfix(self):
        kind, tok = self.peek()
        if tok == "(":
            self.take("(")
            f = self.implication()
            self.take(")")
        elif kind == "ident":
            self.take()
            name, level = _split_ident(tok)
            f = Atom(name, level, True)
        else:
            raise FormulaSyntaxError(f"unexpected {tok!r} in {self.text!r}")
        while self.peek()[1] == "^":
            self.take("^")
            f = dual(f)
        return f


def _split_ident(tok):
    if tok in ("all", "ex"):
        raise FormulaSyntaxError(f"{tok!r} is reserved")
    name, _, level = tok.partition("_")
    return name, (int(level) if level else None)


def parse_formula(text):
    """
    Parse the ASCII syntax: ``X_3``, ``X_3^``, ``*``, ``|``, ``all X_3. A``,
    ``ex X_3. A``, ``!{s,d,n} A``, ``?{s,d,n} A``, ``$ A`` and ``A -o B``.

    Returns:
        An alpha-normalized formula. Mixed indexing is rejected.
    """
    f = _Parser(text).parse()
    indexing(f)
    return alpha_normalize(f)


def _wrap(f):
    text = format_formula(f)
    return f"({text})" if isinstance(f, BINARY + BINDERS) else text


def format_formula(f):
    if isinstance(f, Atom):
        level = "" if f.level is None else f"_{f.level}"
        return f"{f.name}{level}{'' if f.positive else '^'}"
    if isinstance(f, Tensor):
        return f"{_wrap(f.left)} * {_wrap(f.right)}"
    if isinstance(f, Par):
        return f"{_wrap(f.left)} | {_wrap(f.right)}"
    if isinstance(f, BINDERS):
        level = "" if f.level is None else f"_{f.level}"
        keyword = "all" if isinstance(f, Forall) else "ex"
        return f"{keyword} {f.var}{level}. {format_formula(f.body)}"
    if isinstance(f, MODALITIES):
        symbol = "!" if isinstance(f, Bang) else "?"
        idx = "" if f.idx is None else f"{{{f.idx}}}"
        return f"{symbol}{idx} {_wrap(f.body)}"
    return f"$ {_wrap(f.body)}"
