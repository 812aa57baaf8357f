"""
Signatures: the trees of duplication choices carried by the token.

    t ::= e | l(t) | r(t) | p(t) | n(t, t)

plus ``Hole`` placeholders used only while copies are being explored.
"""
import itertools
import re
from dataclasses import dataclass
from typing import Union

from .exceptions import PnetInputError


@dataclass(frozen=True)
class SigE:
    def __str__(self):
        return "e"


@dataclass(frozen=True)
class SigL:
    t: "Signature"

    def __str__(self):
        return f"l({self.t})"


@dataclass(frozen=True)
class SigR:
    t: "Signature"

    def __str__(self):
        return f"r({self.t})"


@dataclass(frozen=True)
class SigP:
    t: "Signature"

    def __str__(self):
        return f"p({self.t})"


@dataclass(frozen=True)
class SigN:
    t1: "Signature"
    t2: "Signature"

    def __str__(self):
        return f"n({self.t1},{self.t2})"


@dataclass(frozen=True)
class Hole:
    """Unknown part of a signature during symbolic exploration."""
    key: int

    def __str__(self):
        return f"?{self.key}"


Signature = Union[SigE, SigL, SigR, SigP, SigN, Hole]

E = SigE()
UNARY = (SigL, SigR, SigP)


# ============================================================
# PREDICATES
# ============================================================

def is_standard(t):
    """No p(_) anywhere."""
    if isinstance(t, SigP):
        return False
    if isinstance(t, (SigL, SigR)):
        return is_standard(t.t)
    if isinstance(t, SigN):
        return is_standard(t.t1) and is_standard(t.t2)
    return True


def is_quasi_standard_sig(t):
    """For every n(t1, t2) inside ``t``, t2 is standard."""
    if isinstance(t, UNARY):
        return is_quasi_standard_sig(t.t)
    if isinstance(t, SigN):
        return is_standard(t.t2) and is_quasi_standard_sig(t.t1)
    return True


def sig_depth(t):
    if isinstance(t, UNARY):
        return 1 + sig_depth(t.t)
    if isinstance(t, SigN):
        return 1 + max(sig_depth(t.t1), sig_depth(t.t2))
    return 0


def sig_size(t):
    if isinstance(t, UNARY):
        return 1 + sig_size(t.t)
    if isinstance(t, SigN):
        return 1 + sig_size(t.t1) + sig_size(t.t2)
    return 1


def holes(t):
    if isinstance(t, Hole):
        return {t}
    if isinstance(t, UNARY):
        return holes(t.t)
    if isinstance(t, SigN):
        return holes(t.t1) | holes(t.t2)
    return set()


def fill(t, binding):
    """Replace holes by their binding; unbound holes stay."""
    if isinstance(t, Hole):
        return fill(binding[t], binding) if t in binding else t
    if isinstance(t, UNARY):
        return type(t)(fill(t.t, binding))
    if isinstance(t, SigN):
        return SigN(fill(t.t1, binding), fill(t.t2, binding))
    return t


def close(t):
    """Unresolved holes become e."""
    if isinstance(t, Hole):
        return E
    if isinstance(t, UNARY):
        return type(t)(close(t.t))
    if isinstance(t, SigN):
        return SigN(close(t.t1), close(t.t2))
    return t


# ============================================================
# SIMPLIFICATION, TRUNCATION AND THE PRUNING ORDER
# ============================================================

def simplifications(t):
    """All u with t ⊑ u: n(a, b) may turn into p(b') for any simplification b' of b."""
    if isinstance(t, UNARY):
        return {type(t)(u) for u in simplifications(t.t)}
    if isinstance(t, SigN):
        out = {SigN(a, t.t2) for a in simplifications(t.t1)}
        out |= {SigP(b) for b in simplifications(t.t2)}
        return out
    return {t}


def simpl_leq(t, u):
    return u in simplifications(t)


def truncations(t):
    """All u with u ≼ t."""
    out = {E}
    if isinstance(t, UNARY):
        out |= {type(t)(u) for u in truncations(t.t)}
    elif isinstance(t, SigN):
        out |= {SigN(a, b) for a in truncations(t.t1) for b in truncations(t.t2)}
    return out


def prune_leq(u, t):
    return u in truncations(t)


def prunec_lt(t, u):
    """The strict order ≺c: rightmost branch first."""
    if isinstance(t, SigE):
        return not isinstance(u, SigE)
    if isinstance(t, UNARY):
        return type(u) is type(t) and prunec_lt(t.t, u.t)
    if isinstance(t, SigN) and isinstance(u, SigN):
        if prunec_lt(t.t2, u.t2):
            return True
        return t.t2 == u.t2 and prunec_lt(t.t1, u.t1)
    return False


def prunec_leq(t, u):
    return t == u or prunec_lt(t, u)


def prunec_max(candidates):
    """Maximum for ⪯ of a set it totally orders."""
    best = None
    for c in candidates:
        if best is None or prunec_lt(best, c):
            best = c
    return best


def signatures_of_depth(d):
    """Every signature of depth at most ``d``."""
    level = [E]
    for _ in range(d):
        previous = level
        level = [E]
        level += [cls(t) for cls in UNARY for t in previous]
        level += [SigN(a, b) for a, b in itertools.product(previous, repeat=2)]
    return level


# ============================================================
# PARSING AND PRINTING
# ============================================================

_SIG_TOKEN = re.compile(r"\s*([elrpn(),])")


def parse_signature(text):
    """Parse ``e``, ``l(t)``, ``r(t)``, ``p(t)``, ``n(t,u)``."""
    tokens = _SIG_TOKEN.findall(text)
    if "".join(tokens) != re.sub(r"\s", "", text):
        raise PnetInputError(f"invalid signature {text!r}")
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            raise PnetInputError(f"invalid signature {text!r}")
        pos += 1

    def walk():
        nonlocal pos
        if pos >= len(tokens):
            raise PnetInputError(f"invalid signature {text!r}")
        head = tokens[pos]
        pos += 1
        if head == "e":
            return E
        if head in "lrp":
            expect("(")
            inner = walk()
            expect(")")
            return {"l": SigL, "r": SigR, "p": SigP}[head](inner)
        if head == "n":
            expect("(")
            left = walk()
            expect(",")
            right = walk()
            expect(")")
            return SigN(left, right)
        raise PnetInputError(f"invalid signature {text!r}")

    sig = walk()
    if pos != len(tokens):
        raise PnetInputError(f"invalid signature {text!r}")
    return sig


def parse_potential(text):
    text = text.strip().strip("[]").strip()
    if not text:
        return ()
    return tuple(parse_signature(part) for part in _split_top(text, ";"))


def _split_top(text, sep):
    parts, depth, current = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += ch
    parts.append(current)
    return parts


def format_signature(t):
    return str(t)


def format_potential(p):
    return "[" + ";".join(str(t) for t in p) + "]"
