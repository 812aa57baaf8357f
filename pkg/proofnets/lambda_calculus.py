"""
The indexed λ-calculus: terms, explicit type derivations, their translation
to SDNLL proof-nets, β-reduction and the subject-reduction harness that
replays every β-step as cut-elimination on the translated nets.

Types are ordinary ``Formula`` values: ``A -o B`` is ``Par(dual(A), B)`` and
``!{s,d,n} A -o B`` is ``Par(Quest(idx, dual(A)), B)``.
"""
import logging
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from django.conf import settings

from .builders import NetBuilder
from .criteria import power
from .exceptions import (
    DerivationSyntaxError, FormulaSyntaxError, InvalidDerivation, ReductionMismatch,
    StepBudgetExceeded,
)
from .formula import (
    Atom, Bang, ExpIndex, Forall, Par, Quest, Tensor, alpha_equal, all_names, dual,
    format_formula, free_vars, indices, parse_formula, s_min, substitute,
)
from .proofnet import Violation, net_size
from .rewrite import find_redexes, graph_hash, iso_equal, normalize, reduce

logger = logging.getLogger(__name__)

TERM_STRATEGIES = ("leftmost-outermost", "leftmost-innermost")

RULES = {
    "ax": 0, "forall-i": 1, "forall-e": 1, "der": 1, "weak": 1, "cont": 1,
    "lin-i": 1, "imp-i": 1, "lin-e": 2, "imp-e": 2,
}


# ============================================================
# TERMS
# ============================================================

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Abs:
    var: str
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


Term = (Var, Abs, App)


def free_term_vars(t):
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        return free_term_vars(t.fun) | free_term_vars(t.arg)
    return free_term_vars(t.body) - {t.var}


def term_names(t):
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        return term_names(t.fun) | term_names(t.arg)
    return {t.var} | term_names(t.body)


def occurrences(t, name):
    """Free occurrences of ``name`` in ``t``."""
    if isinstance(t, Var):
        return int(t.name == name)
    if isinstance(t, App):
        return occurrences(t.fun, name) + occurrences(t.arg, name)
    return 0 if t.var == name else occurrences(t.body, name)


def _fresh_name(base, used):
    stem = base.rstrip("0123456789'") or "v"
    i = 1
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


def subst(t, name, u):
    """Capture-avoiding t[u/name]."""
    if isinstance(t, Var):
        return u if t.name == name else t
    if isinstance(t, App):
        return App(subst(t.fun, name, u), subst(t.arg, name, u))
    if t.var == name or name not in free_term_vars(t.body):
        return t
    if t.var in free_term_vars(u):
        fresh = _fresh_name(t.var, free_term_vars(u) | term_names(t.body) | {name})
        return Abs(fresh, subst(subst(t.body, t.var, Var(fresh)), name, u))
    return Abs(t.var, subst(t.body, name, u))


def _nameless(t, env=()):
    if isinstance(t, Var):
        return ("bound", env.index(t.name)) if t.name in env else ("free", t.name)
    if isinstance(t, App):
        return ("app", _nameless(t.fun, env), _nameless(t.arg, env))
    return ("abs", _nameless(t.body, (t.var,) + env))


def term_alpha_equal(a, b):
    return _nameless(a) == _nameless(b)


# ---------------- parsing and printing ----------------

_TERM_TOKEN = re.compile(r"\s*(?:(?P<lam>\\|λ)|(?P<sym>[().])|(?P<ident>[A-Za-z_][A-Za-z0-9_']*))")


def _term_tokens(text):
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        match = _TERM_TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise DerivationSyntaxError(f"unexpected character in term at {pos}: {text[pos:pos + 10]!r}")
        kind = match.lastgroup
        tokens.append((kind, match.group(kind)))
        pos = match.end()
    return tokens


class _TermParser:
    def __init__(self, text):
        self.text = text
        self.tokens = _term_tokens(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok_kind, tok = self.peek()
        if tok is None or (kind and tok_kind != kind) or (value and tok != value):
            raise DerivationSyntaxError(f"expected {value or kind or 'a token'} in term {self.text!r}")
        self.pos += 1
        return tok

    def parse(self):
        t = self.term()
        if self.pos != len(self.tokens):
            raise DerivationSyntaxError(f"trailing input in term {self.text!r}")
        return t

    def term(self):
        if self.peek()[0] == "lam":
            return self.abstraction()
        return self.application()

    def abstraction(self):
        self.take("lam")
        names = [self.take("ident")]
        while self.peek()[0] == "ident":
            names.append(self.take("ident"))
        self.take("sym", ".")
        body = self.term()
        for name in reversed(names):
            body = Abs(name, body)
        return body

    def application(self):
        t = self.atom()
        while True:
            kind, tok = self.peek()
            if kind == "lam":
                return App(t, self.abstraction())
            if kind == "ident" or tok == "(":
                t = App(t, self.atom())
            else:
                return t

    def atom(self):
        kind, tok = self.peek()
        if kind == "ident":
            self.take()
            return Var(tok)
        if tok == "(":
            self.take("sym", "(")
            t = self.term()
            self.take("sym", ")")
            return t
        raise DerivationSyntaxError(f"unexpected {tok!r} in term {self.text!r}")


def parse_term(text):
    """``\\x. t`` (or ``λx. t``) abstracts, juxtaposition applies to the left."""
    return _TermParser(text).parse()


def format_term(t):
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        return f"\\{t.var}. {format_term(t.body)}"
    fun = format_term(t.fun)
    if isinstance(t.fun, Abs):
        fun = f"({fun})"
    arg = format_term(t.arg)
    if isinstance(t.arg, (App, Abs)):
        arg = f"({arg})"
    return f"{fun} {arg}"


# ============================================================
# BETA REDUCTION
# ============================================================

def _outermost(t, path=()):
    if isinstance(t, App):
        if isinstance(t.fun, Abs):
            return path
        found = _outermost(t.fun, path + ("fun",))
        return found if found is not None else _outermost(t.arg, path + ("arg",))
    if isinstance(t, Abs):
        return _outermost(t.body, path + ("body",))
    return None


def _innermost(t, path=()):
    if isinstance(t, App):
        for side in ("fun", "arg"):
            found = _innermost(getattr(t, side), path + (side,))
            if found is not None:
                return found
        return path if isinstance(t.fun, Abs) else None
    if isinstance(t, Abs):
        return _innermost(t.body, path + ("body",))
    return None


def find_redex(t, strategy="leftmost-outermost"):
    """
    Returns:
        The position of the chosen redex as a tuple of ``fun``/``arg``/``body``
        steps, or None when ``t`` is normal.
    """
    if strategy == "leftmost-outermost":
        return _outermost(t)
    if strategy == "leftmost-innermost":
        return _innermost(t)
    raise ValueError(f"unknown strategy {strategy!r}")


def contract(t, path):
    if not path:
        if not (isinstance(t, App) and isinstance(t.fun, Abs)):
            raise ValueError("no redex at this position")
        return subst(t.fun.body, t.fun.var, t.arg)
    step, rest = path[0], path[1:]
    if step == "body":
        return Abs(t.var, contract(t.body, rest))
    if step == "fun":
        return App(contract(t.fun, rest), t.arg)
    return App(t.fun, contract(t.arg, rest))


def beta_step(t, strategy="leftmost-outermost"):
    path = find_redex(t, strategy)
    return None if path is None else contract(t, path)


def normalize_term(t, strategy="leftmost-outermost", max_steps=None):
    """
    Returns:
        (normal form, number of β-steps).
    """
    if max_steps is None:
        max_steps = getattr(settings, "PNET_MAX_STEPS", 10_000)
    steps = 0
    while True:
        path = find_redex(t, strategy)
        if path is None:
            return t, steps
        if steps >= max_steps:
            raise StepBudgetExceeded(f"no β-normal form within {max_steps} steps")
        t = contract(t, path)
        steps += 1


# ============================================================
# TYPES
# ============================================================

def is_lambda_type(f, s=0):
    """Membership in the λ-types of level ``s``: variables, ⊸, !-implications and ∀."""
    if isinstance(f, Atom):
        return f.positive and f.level is not None and f.level >= s
    if isinstance(f, Forall):
        return f.level is not None and f.level >= s and is_lambda_type(f.body, s)
    if isinstance(f, Par):
        antecedent = dual(f.left)
        if isinstance(antecedent, Bang):
            idx = antecedent.idx
            return (idx is not None and idx.s >= s and is_lambda_type(antecedent.body, idx.s + 1)
                    and is_lambda_type(f.right, s))
        return is_lambda_type(antecedent, s) and is_lambda_type(f.right, s)
    return False


def format_type(f):
    if isinstance(f, Par):
        antecedent = dual(f.left)
        left = format_type(antecedent)
        if isinstance(antecedent, (Par, Forall)):
            left = f"({left})"
        return f"{left} -o {format_type(f.right)}"
    if isinstance(f, Forall):
        level = "" if f.level is None else f"_{f.level}"
        return f"all {f.var}{level}. {format_type(f.body)}"
    if isinstance(f, Bang):
        body = format_type(f.body)
        if isinstance(f.body, (Par, Forall)):
            body = f"({body})"
        return f"!{{{f.idx}}} {body}"
    return format_formula(f)


def _type(value):
    return parse_formula(value) if isinstance(value, str) else value


def nat_lambda_type(s, d, n, var="X"):
    """∀X_s. !_{s-1,d,n}(X_s ⊸ X_s) ⊸ X_s ⊸ X_s; needs s ≥ 1."""
    if s < 1:
        raise ValueError("Church numerals need a first index of at least 1")
    x = f"{var}_{s}"
    return parse_formula(f"all {x}. !{{{s - 1},{d},{n}}} ({x} -o {x}) -o {x} -o {x}")


# ============================================================
# DERIVATIONS
# ============================================================

@dataclass(frozen=True)
class Derivation:
    """
    One rule application. Payload by rule: ``var`` for ax/der/weak/cont/lin-i/
    imp-i, ``names`` = (y, z) for cont, ``formula`` for ax, weak and the
    witness of forall-e, ``binder`` = (X, s) for forall-i, ``index`` for der
    and weak, ``sigma`` = ((x, index), ...) labelling the linear variables
    promoted by imp-e.
    """
    rule: str
    premises: tuple = ()
    var: Optional[str] = None
    names: tuple = ()
    formula: Optional[object] = None
    binder: Optional[tuple] = None
    index: Optional[ExpIndex] = None
    sigma: tuple = ()


@dataclass
class Judgement:
    context: dict
    term: object
    type: object

    def __str__(self):
        parts = []
        for name, (f, label) in sorted(self.context.items()):
            mark = "" if label is None else f"^{{{label}}}"
            parts.append(f"{name} : ({format_type(f)}){mark}")
        return f"{', '.join(parts)} |- {format_term(self.term)} : {format_type(self.type)}"


def _index(value):
    if isinstance(value, ExpIndex):
        return value
    if isinstance(value, tuple):
        return ExpIndex(*value)
    match = re.fullmatch(r"\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*", str(value))
    if not match:
        raise DerivationSyntaxError(f"expected an index s,d,n, got {value!r}")
    return ExpIndex(*(int(g) for g in match.groups()))


def ax(x, a):
    return Derivation("ax", var=x, formula=_type(a))


def forall_i(var, level, d):
    return Derivation("forall-i", (d,), binder=(var, level))


def forall_e(b, d):
    return Derivation("forall-e", (d,), formula=_type(b))


def der(x, idx, d):
    return Derivation("der", (d,), var=x, index=_index(idx))


def weak(x, a, idx, d):
    return Derivation("weak", (d,), var=x, formula=_type(a), index=_index(idx))


def cont(x, y, z, d):
    return Derivation("cont", (d,), var=x, names=(y, z))


def lin_i(x, d):
    return Derivation("lin-i", (d,), var=x)


def imp_i(x, d):
    return Derivation("imp-i", (d,), var=x)


def lin_e(f, e):
    return Derivation("lin-e", (f, e))


def imp_e(f, e, sigma=()):
    items = sigma.items() if isinstance(sigma, dict) else sigma
    return Derivation("imp-e", (f, e), sigma=tuple(sorted((x, _index(i)) for x, i in items)))


def derivation_size(d):
    return 1 + sum(derivation_size(p) for p in d.premises)


def promotion_depth(d):
    """Largest number of imp-e rules met on one branch of ``d``."""
    below = max((promotion_depth(p) for p in d.premises), default=0)
    return below + (d.rule == "imp-e")


# ============================================================
# CHECKING
# ============================================================

def _fmt(f):
    return None if f is None else format_type(f)


class _Typer:
    def __init__(self):
        self.out = []
        self.judgements = {}
        self.reported = set()

    def fail(self, path, rule, message, expected=None, found=None):
        self.out.append(Violation(path, rule, message, _fmt(expected), _fmt(found)))

    def grammar(self, path, rule, f, s):
        if not is_lambda_type(f, s):
            self.fail(path, rule, f"not a λ-type of level {s}", found=f)

    def judge(self, d, path="root"):
        if d.rule not in RULES:
            self.fail(path, d.rule, f"unknown rule {d.rule!r}")
            return None
        if len(d.premises) != RULES[d.rule]:
            self.fail(path, d.rule, f"{d.rule} takes {RULES[d.rule]} premises")
            return None
        premises = [self.judge(p, f"{path}.{i}") for i, p in enumerate(d.premises)]
        if any(p is None for p in premises):
            return None
        j = getattr(self, "rule_" + d.rule.replace("-", "_"))(d, path, *premises)
        if j is not None:
            self.scope(path, d.rule, j)
            self.judgements[path] = j
        return j

    def scope(self, path, rule, j):
        for name in sorted(free_term_vars(j.term) - j.context.keys()):
            self.fail(path, rule, f"{name} is free in the term but not in the context")
        for name, (_, label) in sorted(j.context.items()):
            if label is None and occurrences(j.term, name) != 1 and name not in self.reported:
                self.reported.add(name)
                self.fail(path, rule, f"linear variable {name} must occur exactly once")

    # ---------------- rules ----------------

    def rule_ax(self, d, path):
        self.grammar(path, "ax", d.formula, 0)
        return Judgement({d.var: (d.formula, None)}, Var(d.var), d.formula)

    def rule_forall_i(self, d, path, j):
        var, level = d.binder
        for name, (f, _) in sorted(j.context.items()):
            if var in free_vars(f):
                self.fail(path, "forall-i", f"{var} is free in the type of {name}", found=f)
        return Judgement(dict(j.context), j.term, Forall(var, level, j.type))

    def rule_forall_e(self, d, path, j):
        if not isinstance(j.type, Forall):
            self.fail(path, "forall-e", "premise type is not universal", found=j.type)
            return None
        low = s_min(d.formula)
        if low is not None and low < j.type.level:
            self.fail(path, "forall-e", f"witness has an exponential of level {low} below {j.type.level}",
                      found=d.formula)
        result = substitute(j.type.body, j.type.var, d.formula)
        self.grammar(path, "forall-e", result, 0)
        return Judgement(dict(j.context), j.term, result)

    def rule_der(self, d, path, j):
        entry = j.context.get(d.var)
        if entry is None or entry[1] is not None:
            self.fail(path, "der", f"{d.var} is not a linear variable of the premise")
            return None
        self.grammar(path, "der", entry[0], d.index.s + 1)
        return Judgement({**j.context, d.var: (entry[0], d.index)}, j.term, j.type)

    def rule_weak(self, d, path, j):
        if d.var in j.context:
            self.fail(path, "weak", f"{d.var} is already in the context")
            return None
        self.grammar(path, "weak", d.formula, d.index.s + 1)
        return Judgement({**j.context, d.var: (d.formula, d.index)}, j.term, j.type)

    def rule_cont(self, d, path, j):
        y, z = d.names
        a, b = j.context.get(y), j.context.get(z)
        if y == z or a is None or b is None:
            self.fail(path, "cont", f"{y} and {z} must be two variables of the premise")
            return None
        if a[1] is None or b[1] is None:
            self.fail(path, "cont", "only exponential variables can be contracted")
            return None
        if not alpha_equal(a[0], b[0]) or a[1] != b[1]:
            self.fail(path, "cont", f"{y} and {z} have different types", expected=a[0], found=b[0])
        for name in (y, z):
            if occurrences(j.term, name) == 0:
                self.fail(path, "cont", f"{name} does not occur; weaken instead")
        context = {k: v for k, v in j.context.items() if k not in (y, z)}
        if d.var in context:
            self.fail(path, "cont", f"{d.var} is already in the context")
            return None
        context[d.var] = a
        term = subst(subst(j.term, y, Var(d.var)), z, Var(d.var))
        return Judgement(context, term, j.type)

    def _bind(self, d, path, j, exponential):
        entry = j.context.get(d.var)
        if entry is None or (entry[1] is not None) != exponential:
            kind = "an exponential" if exponential else "a linear"
            self.fail(path, d.rule, f"{d.var} is not {kind} variable of the premise")
            return None
        context = {k: v for k, v in j.context.items() if k != d.var}
        hyp = Quest(entry[1], dual(entry[0])) if exponential else dual(entry[0])
        return Judgement(context, Abs(d.var, j.term), Par(hyp, j.type))

    def rule_lin_i(self, d, path, j):
        return self._bind(d, path, j, exponential=False)

    def rule_imp_i(self, d, path, j):
        return self._bind(d, path, j, exponential=True)

    def arrow(self, path, rule, f):
        if not isinstance(f, Par):
            self.fail(path, rule, "function type is not an implication", found=f)
            return None
        antecedent = dual(f.left)
        if isinstance(antecedent, Bang):
            return antecedent.idx, antecedent.body, f.right
        return None, antecedent, f.right

    def join(self, path, rule, left, right):
        clash = sorted(left.keys() & right.keys())
        if clash:
            self.fail(path, rule, f"{', '.join(clash)} occur in both premises")
        return {**left, **right}

    def rule_lin_e(self, d, path, f, e):
        arrow = self.arrow(path, "lin-e", f.type)
        if arrow is None:
            return None
        idx, a, b = arrow
        if idx is not None:
            self.fail(path, "lin-e", "a !-implication is eliminated by imp-e", found=f.type)
            return None
        if not alpha_equal(a, e.type):
            self.fail(path, "lin-e", "argument type does not match", expected=a, found=e.type)
        context = self.join(path, "lin-e", f.context, e.context)
        return Judgement(context, App(f.term, e.term), b)

    def rule_imp_e(self, d, path, f, e):
        arrow = self.arrow(path, "imp-e", f.type)
        if arrow is None:
            return None
        idx, a, b = arrow
        if idx is None:
            self.fail(path, "imp-e", "a linear implication is eliminated by lin-e", found=f.type)
            return None
        if not alpha_equal(a, e.type):
            self.fail(path, "imp-e", "argument type does not match", expected=a, found=e.type)
        delta = {k: v for k, v in e.context.items() if v[1] is not None}
        linear = sorted(k for k, v in e.context.items() if v[1] is None)
        labels = dict(d.sigma)
        if sorted(labels) != linear:
            self.fail(path, "imp-e", f"the linear variables {linear} of the argument need one label each")
            return None
        ds = [label.d for _, label in delta.values()] + [labels[k].d for k in linear]
        if any(x < idx.d for x in ds):
            self.fail(path, "imp-e", f"a context variable has a second index below {idx.d}")
        if ds.count(idx.d) > 1:
            self.fail(path, "imp-e", f"at most one context variable may have second index {idx.d}")
        for k in linear:
            if labels[k].n < idx.n:
                self.fail(path, "imp-e", f"promoted variable {k} has a third index below {idx.n}")
            self.grammar(path, "imp-e", e.context[k][0], labels[k].s + 1)
        for k, (_, label) in sorted(delta.items()):
            if label.n <= idx.n:
                self.fail(path, "imp-e", f"exponential variable {k} needs a third index above {idx.n}")
        promoted = dict(delta)
        promoted.update({k: (e.context[k][0], labels[k]) for k in linear})
        context = self.join(path, "imp-e", f.context, promoted)
        return Judgement(context, App(f.term, e.term), b)


def infer(d):
    """
    Returns:
        (conclusion judgement or None, list of ``Violation``). Elements of
        the violations are paths such as ``root.1.0`` (premise indices).
    """
    typer = _Typer()
    j = typer.judge(d)
    return j, typer.out


def check_derivation(d):
    j, out = infer(d)
    logger.info("check_derivation: %d violations", len(out))
    return out


def conclusion(d):
    j, out = infer(d)
    if out or j is None:
        raise InvalidDerivation(violations=out)
    return j


# ============================================================
# SCRIPT FORMAT
# ============================================================

class _Quoted(str):
    pass


_SEXP_TOKEN = re.compile(r'\s*(?:(?P<open>\()|(?P<close>\))|"(?P<quoted>[^"]*)"|(?P<atom>[^\s()"]+))')


def _read_sexp(text):
    text = re.sub(r";[^\n]*", "", text)
    stack, pos = [[]], 0
    text = text.rstrip()
    while pos < len(text):
        match = _SEXP_TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise DerivationSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = match.end()
        if match.group("open"):
            stack.append([])
        elif match.group("close"):
            if len(stack) == 1:
                raise DerivationSyntaxError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        elif match.group("quoted") is not None:
            stack[-1].append(_Quoted(match.group("quoted")))
        else:
            stack[-1].append(match.group("atom"))
    if len(stack) != 1:
        raise DerivationSyntaxError("unbalanced '('")
    if len(stack[0]) != 1:
        raise DerivationSyntaxError("a derivation script holds exactly one derivation")
    return stack[0][0]


def _name(value):
    if not isinstance(value, str) or isinstance(value, _Quoted):
        raise DerivationSyntaxError(f"expected a variable name, got {value!r}")
    return value


def _formula_arg(value):
    if isinstance(value, list):
        raise DerivationSyntaxError(f"expected a formula, got {value!r}")
    try:
        return parse_formula(value)
    except FormulaSyntaxError as exc:
        raise DerivationSyntaxError(f"bad formula {value!r}: {exc.detail}") from None


def _binder(value):
    match = re.fullmatch(r"([A-Za-z][A-Za-z0-9']*)_(\d+)", _name(value))
    if not match:
        raise DerivationSyntaxError(f"expected a levelled type variable such as X_1, got {value!r}")
    return match.group(1), int(match.group(2))


def _to_derivation(sexp):
    if not isinstance(sexp, list) or not sexp or isinstance(sexp[0], list):
        raise DerivationSyntaxError(f"expected (rule ...), got {sexp!r}")
    rule, *args = sexp
    if rule not in RULES:
        raise DerivationSyntaxError(f"unknown rule {rule!r}")
    shapes = {
        "ax": 2, "forall-i": 2, "forall-e": 2, "der": 3, "weak": 4, "cont": 4,
        "lin-i": 2, "imp-i": 2, "lin-e": 2,
    }
    if rule == "imp-e":
        if len(args) < 2:
            raise DerivationSyntaxError("imp-e takes two premises and labels")
        sigma = []
        for entry in args[2:]:
            if not isinstance(entry, list) or len(entry) != 2:
                raise DerivationSyntaxError(f"imp-e label must read (x s,d,n), got {entry!r}")
            sigma.append((_name(entry[0]), _index(entry[1])))
        return imp_e(_to_derivation(args[0]), _to_derivation(args[1]), sigma)
    if len(args) != shapes[rule]:
        raise DerivationSyntaxError(f"{rule} takes {shapes[rule]} arguments")
    if rule == "ax":
        return ax(_name(args[0]), _formula_arg(args[1]))
    if rule == "forall-i":
        var, level = _binder(args[0])
        return forall_i(var, level, _to_derivation(args[1]))
    if rule == "forall-e":
        return forall_e(_formula_arg(args[0]), _to_derivation(args[1]))
    if rule == "der":
        return der(_name(args[0]), _index(args[1]), _to_derivation(args[2]))
    if rule == "weak":
        return weak(_name(args[0]), _formula_arg(args[1]), _index(args[2]), _to_derivation(args[3]))
    if rule == "cont":
        return cont(_name(args[0]), _name(args[1]), _name(args[2]), _to_derivation(args[3]))
    if rule == "lin-i":
        return lin_i(_name(args[0]), _to_derivation(args[1]))
    if rule == "imp-i":
        return imp_i(_name(args[0]), _to_derivation(args[1]))
    return lin_e(_to_derivation(args[0]), _to_derivation(args[1]))


def parse_derivation(text):
    """
    Read a derivation script: one s-expression per rule application, e.g.
    ``(lin-i x (ax x "X_1"))``. Formulas are quoted, indices read ``s,d,n``,
    imp-e lists its promotions as ``(x s,d,n)`` after the two premises.
    Judgements are not part of the script; ``infer`` recomputes them.
    """
    return _to_derivation(_read_sexp(text))


def load_derivation(path):
    with open(path, encoding="utf-8") as handle:
        return parse_derivation(handle.read())


def _payload(d):
    if d.rule == "ax":
        return [d.var, f'"{format_type(d.formula)}"']
    if d.rule == "forall-i":
        return [f"{d.binder[0]}_{d.binder[1]}"]
    if d.rule == "forall-e":
        return [f'"{format_type(d.formula)}"']
    if d.rule == "der":
        return [d.var, str(d.index)]
    if d.rule == "weak":
        return [d.var, f'"{format_type(d.formula)}"', str(d.index)]
    if d.rule == "cont":
        return [d.var, *d.names]
    if d.rule in ("lin-i", "imp-i"):
        return [d.var]
    return []


def format_derivation(d, indent=0):
    pad = "  " * indent
    head = " ".join([d.rule, *_payload(d)])
    if not d.premises:
        return f"{pad}({head})"
    lines = [f"{pad}({head}"]
    lines += [format_derivation(p, indent + 1) for p in d.premises]
    lines += [f"{pad}  ({x} {i})" for x, i in d.sigma]
    return "\n".join(lines) + ")"


# ============================================================
# TRANSLATION TO PROOF-NETS
# ============================================================

def _slug(name):
    return re.sub(r"[^A-Za-z0-9_]", "_", name)


class _Translator:
    def __init__(self, judgements):
        self.judgements = judgements
        self.builder = NetBuilder()
        self.net = self.builder.net

    def node(self, base, kind, box, **attrs):
        return self.builder.node(self.net.fresh_id(base), kind, box, **attrs)

    def edge(self, node, port, label):
        return self.builder.edge(f"{node}.{port}", None, label)

    def plug(self, edge_id, node, port):
        self.net.set_head(edge_id, (node, port))

    def run(self, d, path="root", box=None):
        """Returns (variable -> open edge, edge of the term's type)."""
        handler = getattr(self, "tr_" + d.rule.replace("-", "_"))
        return handler(d, path, box, self.judgements[path])

    def premise(self, path, i=0):
        return self.judgements[f"{path}.{i}"]

    def tr_ax(self, d, path, box, j):
        node = self.node(f"ax_{_slug(d.var)}", "Ax", box)
        return {d.var: self.edge(node, "c0", dual(d.formula))}, self.edge(node, "c1", d.formula)

    def tr_forall_i(self, d, path, box, j):
        ctx, out = self.run(d.premises[0], f"{path}.0", box)
        var, level = d.binder
        node = self.node("all", "Forall", box, var=var, level=level)
        self.plug(out, node, "p0")
        return ctx, self.edge(node, "c0", j.type)

    def tr_forall_e(self, d, path, box, j):
        ctx, out = self.run(d.premises[0], f"{path}.0", box)
        axiom = self.node("ax", "Ax", box)
        back = self.edge(axiom, "c0", dual(j.type))
        result = self.edge(axiom, "c1", j.type)
        exists = self.node("ex", "Exists", box, witness=d.formula)
        self.plug(back, exists, "p0")
        packed = self.edge(exists, "c0", dual(self.premise(path).type))
        cut = self.node("cut", "Cut", box)
        self.plug(out, cut, "p0")
        self.plug(packed, cut, "p1")
        return ctx, result

    def tr_der(self, d, path, box, j):
        ctx, out = self.run(d.premises[0], f"{path}.0", box)
        node = self.node(f"der_{_slug(d.var)}", "Der", box)
        self.plug(ctx[d.var], node, "p0")
        ctx[d.var] = self.edge(node, "c0", Quest(d.index, dual(j.context[d.var][0])))
        return ctx, out

    def tr_weak(self, d, path, box, j):
        ctx, out = self.run(d.premises[0], f"{path}.0", box)
        node = self.node(f"weak_{_slug(d.var)}", "Weak", box)
        ctx[d.var] = self.edge(node, "c0", Quest(d.index, dual(d.formula)))
        return ctx, out

    def tr_cont(self, d, path, box, j):
        ctx, out = self.run(d.premises[0], f"{path}.0", box)
        y, z = d.names
        node = self.node(f"cont_{_slug(d.var)}", "Cont", box)
        self.plug(ctx.pop(y), node, "p0")
        self.plug(ctx.pop(z), node, "p1")
        formula, label = j.context[d.var]
        ctx[d.var] = self.edge(node, "c0", Quest(label, dual(formula)))
        return ctx, out

    def _abstraction(self, d, path, box, j):
        ctx, out = self.run(d.premises[0], f"{path}.0", box)
        node = self.node(f"par_{_slug(d.var)}", "Par", box)
        self.plug(ctx.pop(d.var), node, "p0")
        self.plug(out, node, "p1")
        return ctx, self.edge(node, "c0", j.type)

    tr_lin_i = _abstraction
    tr_imp_i = _abstraction

    def apply(self, box, fun, arg, arg_label, result):
        axiom = self.node("ax", "Ax", box)
        back = self.edge(axiom, "c0", dual(result))
        out = self.edge(axiom, "c1", result)
        tensor = self.node("tens", "Tensor", box)
        self.plug(arg, tensor, "p0")
        self.plug(back, tensor, "p1")
        pair = self.edge(tensor, "c0", Tensor(arg_label, dual(result)))
        cut = self.node("cut", "Cut", box)
        self.plug(fun, cut, "p0")
        self.plug(pair, cut, "p1")
        return out

    def tr_lin_e(self, d, path, box, j):
        ctx, fun = self.run(d.premises[0], f"{path}.0", box)
        inner, arg = self.run(d.premises[1], f"{path}.1", box)
        ctx.update(inner)
        return ctx, self.apply(box, fun, arg, self.premise(path, 1).type, j.type)

    def tr_imp_e(self, d, path, box, j):
        ctx, fun = self.run(d.premises[0], f"{path}.0", box)
        box_id = self.net.fresh_id("box")
        self.net.add_box(box_id, None, (), box)
        inner, arg = self.run(d.premises[1], f"{path}.1", box_id)
        argument = self.premise(path, 1)
        bang = Bang(dual(self.premise(path, 0).type.left).idx, argument.type)
        principal = self.node(f"{box_id}_principal", "BoxPrincipal", box_id)
        self.plug(arg, principal, "p0")
        promoted = self.edge(principal, "c0", bang)
        labels = dict(d.sigma)
        doors = []
        for name in sorted(inner):
            formula, label = argument.context[name]
            door = self.node(f"{box_id}_{_slug(name)}", "BoxAux", box_id)
            doors.append(door)
            self.plug(inner[name], door, "p0")
            if label is None:
                ctx[name] = self.edge(door, "c0", Quest(labels[name], dual(formula)))
                continue
            lowered = ExpIndex(label.s, label.d, label.n - 1)
            digging = self.edge(door, "c0", Quest(lowered, Quest(label, dual(formula))))
            dig = self.node(f"dig_{_slug(name)}", "Dig", box)
            self.plug(digging, dig, "p0")
            ctx[name] = self.edge(dig, "c0", Quest(label, dual(formula)))
        self.net.boxes[box_id].principal = principal
        self.net.boxes[box_id].aux = doors
        return ctx, self.apply(box, fun, promoted, bang, j.type)


def derivation_to_net(d):
    """
    The SDNLL proof-net of a valid derivation of Γ ⊢ t : C. Conclusions are
    A⊥ for each linear variable, ?B⊥ for each exponential one (both sorted
    by name) and C last.

    Raises:
        InvalidDerivation when ``d`` does not check.
    """
    typer = _Typer()
    j = typer.judge(d)
    if typer.out or j is None:
        raise InvalidDerivation(violations=typer.out)
    translator = _Translator(typer.judgements)
    ctx, out = translator.run(d)
    linear = sorted(k for k, (_, label) in j.context.items() if label is None)
    exponential = sorted(k for k, (_, label) in j.context.items() if label is not None)
    translator.net.conclusions = [ctx[k] for k in linear + exponential] + [out]
    net = translator.builder.build()
    logger.debug("translated derivation of %d rules into %d edges", derivation_size(d), net_size(net))
    return net


# ============================================================
# DERIVATION SURGERY
# ============================================================

def context_names(d):
    """Variables of the conclusion's context, computed from the rule shapes only."""
    if d.rule == "ax":
        return {d.var}
    if d.rule in ("lin-e", "imp-e"):
        return context_names(d.premises[0]) | context_names(d.premises[1])
    below = context_names(d.premises[0])
    if d.rule == "weak":
        return below | {d.var}
    if d.rule == "cont":
        return (below - set(d.names)) | {d.var}
    if d.rule in ("lin-i", "imp-i"):
        return below - {d.var}
    return below


def variable_names(d):
    names = {d.var} if d.var else set()
    names |= set(d.names) | {x for x, _ in d.sigma}
    for p in d.premises:
        names |= variable_names(p)
    return names


def rename_variables(d, mapping):
    return replace(
        d,
        var=mapping.get(d.var, d.var),
        names=tuple(mapping.get(n, n) for n in d.names),
        sigma=tuple(sorted((mapping.get(x, x), i) for x, i in d.sigma)),
        premises=tuple(rename_variables(p, mapping) for p in d.premises),
    )


def substitute_type(d, var, b):
    """Replace the type variable ``var`` by ``b`` in every formula of ``d``."""
    if d.rule == "forall-i" and d.binder[0] == var:
        return d
    formula = d.formula if d.formula is None else substitute(d.formula, var, b)
    return replace(d, formula=formula, premises=tuple(substitute_type(p, var, b) for p in d.premises))


def _fresh_map(names, used):
    mapping = {}
    taken = set(used)
    for name in sorted(names):
        fresh = _fresh_name(name, taken)
        taken.add(fresh)
        mapping[name] = fresh
    return mapping


def _avoid(e, d):
    """Rename variables bound inside ``e`` that are free in ``d``."""
    clash = (variable_names(e) - context_names(e)) & context_names(d)
    if not clash:
        return e
    return rename_variables(e, _fresh_map(clash, variable_names(e) | variable_names(d)))


def linear_substitute(e, x, d):
    """
    ``e`` derives Γ, x:A ⊢ v : B with x linear, ``d`` derives Δ ⊢ u : A.

    Returns:
        A derivation of Γ, Δ ⊢ v[u/x] : B, ``d`` replacing the axiom on x.
    """
    if x not in context_names(e):
        return e
    if e.rule == "ax":
        return d
    premises = tuple(linear_substitute(p, x, d) if x in context_names(p) else p for p in e.premises)
    return replace(e, premises=premises)


def exponential_substitute(e, x, d, labels):
    """
    ``e`` derives Γ, x:A^{s,d,n} ⊢ v : B and ``d`` derives Δ, Σ ⊢ u : A with
    Σ linear; ``labels`` gives the index each Σ variable is promoted to.

    Returns:
        A derivation of Γ, Δ, Σ ⊢ v[u/x] : B with Σ promoted.
    """
    if x not in context_names(e):
        return e
    if e.rule == "der" and e.var == x:
        out = linear_substitute(e.premises[0], x, d)
        for name, idx in sorted(labels.items()):
            out = der(name, idx, out)
        return out
    if e.rule == "weak" and e.var == x:
        out = e.premises[0]
        for name, (formula, label) in sorted(conclusion(d).context.items()):
            out = weak(name, formula, label or labels[name], out)
        return out
    if e.rule == "cont" and e.var == x:
        y, z = e.names
        free = context_names(d)
        mapping = _fresh_map(free, variable_names(e) | variable_names(d))
        twin = rename_variables(d, mapping)
        twin_labels = {mapping[k]: v for k, v in labels.items()}
        out = exponential_substitute(e.premises[0], y, d, labels)
        out = exponential_substitute(out, z, twin, twin_labels)
        for name in sorted(free):
            out = cont(name, name, mapping[name], out)
        return out
    premises = tuple(
        exponential_substitute(p, x, d, labels) if x in context_names(p) else p for p in e.premises
    )
    return replace(e, premises=premises)


def forall_elim_normalize(d):
    """
    Rewrite a derivation of an abstraction so that its last rule introduces
    the top connective of the type: der/weak/cont rules are pushed above the
    introduction, and a forall-i directly eliminated by forall-e is replaced
    by the substitution of the witness.
    """
    if d.rule in ("lin-i", "imp-i", "forall-i"):
        return d
    if d.rule in ("der", "weak", "cont"):
        inner = forall_elim_normalize(d.premises[0])
        return replace(inner, premises=(replace(d, premises=inner.premises),))
    if d.rule == "forall-e":
        inner = forall_elim_normalize(d.premises[0])
        if inner.rule != "forall-i":
            raise ReductionMismatch("forall-e premise does not end with forall-i")
        return forall_elim_normalize(substitute_type(inner.premises[0], inner.binder[0], d.formula))
    raise ReductionMismatch(f"a {d.rule} rule cannot derive an abstraction")


def _contract_derivation(d):
    function, argument = d.premises
    f = forall_elim_normalize(function)
    expected = "lin-i" if d.rule == "lin-e" else "imp-i"
    if f.rule != expected:
        raise ReductionMismatch(f"{d.rule} redex has a {f.rule} function")
    body = _avoid(f.premises[0], argument)
    if d.rule == "lin-e":
        return linear_substitute(body, f.var, argument)
    return exponential_substitute(body, f.var, argument, dict(d.sigma))


def reduce_derivation(d, path):
    """
    Derivation of the β-reduct of the redex at ``path`` of the derived term,
    built by the substitution constructions.
    """
    if d.rule == "ax":
        raise ReductionMismatch("no redex inside an axiom")
    if d.rule in ("lin-i", "imp-i"):
        if not path or path[0] != "body":
            raise ReductionMismatch("redex path does not match an abstraction")
        return replace(d, premises=(reduce_derivation(d.premises[0], path[1:]),))
    if d.rule in ("lin-e", "imp-e"):
        if not path:
            return _contract_derivation(d)
        side = 0 if path[0] == "fun" else 1
        premises = list(d.premises)
        premises[side] = reduce_derivation(premises[side], path[1:])
        return replace(d, premises=tuple(premises))
    return replace(d, premises=(reduce_derivation(d.premises[0], path),))


# ============================================================
# SUBJECT REDUCTION
# ============================================================

@dataclass
class BetaSimulation:
    path: tuple
    term: str
    cut_steps: Optional[int]
    method: str


@dataclass
class SubjectReductionReport:
    term: str
    type: str
    normal_form: str = ""
    beta_steps: int = 0
    bound: object = None
    steps: list = field(default_factory=list)


def _iso(a, b):
    limit = max(getattr(settings, "PNET_ISO_NODE_LIMIT", 200), 8 * (net_size(a) + net_size(b)))
    return iso_equal(a, b, limit=limit)


def _reaches(source, target, budget):
    """Breadth-first search for ``target`` among the reducts of ``source``."""
    seen = {graph_hash(source)}
    frontier, distance, explored = [source], 0, 0
    while frontier:
        distance += 1
        following = []
        for net in frontier:
            for redex in find_redexes(net):
                candidate = reduce(net, redex)
                explored += 1
                if _iso(candidate, target):
                    return distance
                key = graph_hash(candidate)
                if key not in seen:
                    seen.add(key)
                    following.append(candidate)
                if explored >= budget:
                    return None
        frontier = following
    return None


def _same_judgement(a, b):
    if a.context.keys() != b.context.keys() or not alpha_equal(a.type, b.type):
        return False
    return all(
        alpha_equal(a.context[k][0], b.context[k][0]) and a.context[k][1] == b.context[k][1]
        for k in a.context
    )


def subject_reduction_check(d, strategy="leftmost-outermost", search_budget=128, max_steps=None):
    """
    β-reduce the term derived by ``d`` to normal form. At every step the
    reduct gets its own derivation, which must check with the same context
    and type, and the net of the old derivation must reduce to the net of
    the new one: found directly within ``search_budget`` reducts, or else
    through isomorphic cut-free forms.

    Raises:
        ReductionMismatch when a step cannot be simulated.
    """
    if max_steps is None:
        max_steps = getattr(settings, "PNET_MAX_STEPS", 10_000)
    start = conclusion(d)
    net = derivation_to_net(d)
    normal_net = None
    report = SubjectReductionReport(term=format_term(start.term), type=format_type(start.type))
    report.bound = lambda_bound(d)
    term = start.term
    while True:
        path = find_redex(term, strategy)
        if path is None:
            break
        if report.beta_steps >= max_steps:
            raise StepBudgetExceeded(f"no β-normal form within {max_steps} steps")
        reduct = contract(term, path)
        d = reduce_derivation(d, path)
        j, violations = infer(d)
        if violations or j is None:
            first = violations[0] if violations else None
            detail = f"{first.element}: {first.message}" if first else "reduct does not check"
            raise ReductionMismatch(f"derivation of the reduct is invalid: {detail}")
        if not term_alpha_equal(j.term, reduct) or not _same_judgement(start, replace(j, term=start.term)):
            raise ReductionMismatch(f"reduct derivation proves {j} instead of the expected judgement")
        target = derivation_to_net(d)
        if not find_redexes(net):
            raise ReductionMismatch("β-step on a cut-free net")
        distance = _reaches(net, target, search_budget)
        method = "reached"
        if distance is None:
            method = "normal-form"
            if normal_net is None:
                normal_net = normalize(net).net
            if not _iso(normal_net, normalize(target).net):
                raise ReductionMismatch(f"nets diverge after reducing {format_term(term)}")
        report.steps.append(BetaSimulation(path, format_term(reduct), distance, method))
        report.beta_steps += 1
        term = reduct
        net = target
        logger.debug("β-step %d simulated (%s)", report.beta_steps, method)
    report.normal_form = format_term(term)
    logger.info("subject reduction: %d β-steps simulated", report.beta_steps)
    return report


# ============================================================
# CHURCH FAMILY
# ============================================================

def nat_derivation(k, s=1, d=0, n=0):
    """Derivation of k : ∀X_s. !_{s-1,d,n}(X_s ⊸ X_s) ⊸ X_s ⊸ X_s."""
    if k < 0:
        raise ValueError("k must be non-negative")
    nat_lambda_type(s, d, n)
    x = f"X_{s}"
    step = parse_formula(f"{x} -o {x}")
    idx = ExpIndex(s - 1, d, n)
    names = ["f"] if k == 1 else [f"f{i}" for i in range(1, k + 1)]
    body = ax("a", x)
    for name in reversed(names):
        body = lin_e(ax(name, step), body)
    for name in names:
        body = der(name, idx, body)
    if k == 0:
        body = weak("f", step, idx, body)
    elif k > 1:
        current = names[0]
        for i, name in enumerate(names[1:], start=2):
            merged = "f" if i == k else f"c{i}"
            body = cont(merged, current, name, body)
            current = merged
    return forall_i("X", s, imp_i("f", lin_i("a", body)))


def add_derivation(s=1, d=0, n=0):
    """add = \\m n f x. m f (n f x) : N ⊸ N ⊸ N."""
    nat = nat_lambda_type(s, d, n)
    x = f"X_{s}"
    step = parse_formula(f"{x} -o {x}")
    idx = ExpIndex(s - 1, d, n)
    mg = imp_e(forall_e(x, ax("m", nat)), ax("g", step), {"g": idx})
    nh = imp_e(forall_e(x, ax("n", nat)), ax("h", step), {"h": idx})
    body = lin_e(mg, lin_e(nh, ax("x", x)))
    body = cont("f", "g", "h", body)
    return lin_i("m", lin_i("n", forall_i("X", s, imp_i("f", lin_i("x", body)))))


def pair_derivation(left, right, level=0, var="X", name="p"):
    """<t, u> = \\p. p t u : ∀X. (A ⊸ B ⊸ X) ⊸ X."""
    a, b = conclusion(left), conclusion(right)
    used = set()
    for f in [a.type, b.type] + [entry[0] for entry in (*a.context.values(), *b.context.values())]:
        used |= all_names(f)
    if var in used:
        var = _fresh_name(var, used)
    taken = context_names(left) | context_names(right)
    if name in taken:
        name = _fresh_name(name, taken)
    result = Atom(var, level)
    selector = Par(dual(a.type), Par(dual(b.type), result))
    body = lin_e(lin_e(ax(name, selector), left), right)
    return forall_i(var, level, lin_i(name, body))


def apply_derivation(function, argument, sigma=None):
    """Apply with lin-e, or with imp-e when the function expects a !-argument."""
    f = conclusion(function)
    if isinstance(f.type, Par) and isinstance(dual(f.type.left), Bang):
        return imp_e(function, argument, sigma or {})
    return lin_e(function, argument)


def lambda_bound(d):
    """
    x^(1 + D^S · ∂^(1 + N·S)) where x is the size of ``d``, S-1, D-1 and N-1
    its largest indices and ∂ its promotion depth.
    """
    typer = _Typer()
    typer.judge(d)
    found = []
    for j in typer.judgements.values():
        found += indices(j.type)
        for formula, label in j.context.values():
            found += indices(formula)
            if label is not None:
                found.append(label)
    S = 1 + max((i.s for i in found), default=0)
    D = 1 + max((i.d for i in found), default=0)
    N = 1 + max((i.n for i in found), default=0)
    return power(derivation_size(d), 1 + D ** S * promotion_depth(d) ** (1 + N * S))
