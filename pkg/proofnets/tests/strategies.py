"""Hypothesis strategies shared by the test modules."""
from hypothesis import strategies as st

from proofnets.formula import Atom, Bang, Exists, ExpIndex, Forall, Par, Paragraph, Quest, Tensor
from proofnets.signatures import E, SigL, SigN, SigP, SigR

NAMES = ("X", "Y", "Z")


def plain_formulas(max_leaves=8):
    """Formulas without levels or indices."""
    atoms = st.builds(Atom, st.sampled_from(NAMES), st.none(), st.booleans())
    return st.recursive(
        atoms,
        lambda inner: st.one_of(
            st.builds(Tensor, inner, inner),
            st.builds(Par, inner, inner),
            st.builds(Forall, st.sampled_from(NAMES), st.none(), inner),
            st.builds(Exists, st.sampled_from(NAMES), st.none(), inner),
            st.builds(Bang, st.none(), inner),
            st.builds(Quest, st.none(), inner),
            st.builds(Paragraph, inner),
        ),
        max_leaves=max_leaves,
    )


def signatures(max_leaves=6, standard=False):
    unary = (SigL, SigR) if standard else (SigL, SigR, SigP)
    return st.recursive(
        st.just(E),
        lambda inner: st.one_of(
            *(st.builds(cls, inner) for cls in unary),
            st.builds(SigN, inner, inner),
        ),
        max_leaves=max_leaves,
    )


def _indices():
    small = st.integers(min_value=0, max_value=2)
    return st.builds(ExpIndex, small, small, small)


def _raised(idx, extra):
    return ExpIndex(idx.s + extra.s, idx.d + extra.d, idx.n + extra.n)


def subtype_pairs(max_leaves=6):
    """Pairs (a, b) of indexed formulas of one skeleton with a ≤ b."""
    levels = st.integers(min_value=0, max_value=3)
    atoms = st.builds(Atom, st.sampled_from(NAMES), levels, st.booleans()).map(lambda a: (a, a))

    def binary(cls, inner):
        return st.tuples(inner, inner).map(lambda p: (cls(p[0][0], p[1][0]), cls(p[0][1], p[1][1])))

    def binder(cls, inner):
        return st.tuples(st.sampled_from(NAMES), levels, inner).map(
            lambda p: (cls(p[0], p[1], p[2][0]), cls(p[0], p[1], p[2][1]))
        )

    def modality(cls, inner):
        def build(p):
            low, high = p[0], _raised(p[0], p[1])
            # bangs of the smaller side carry larger indices
            left, right = (high, low) if cls is Bang else (low, high)
            return cls(left, p[2][0]), cls(right, p[2][1])
        return st.tuples(_indices(), _indices(), inner).map(build)

    return st.recursive(
        atoms,
        lambda inner: st.one_of(
            binary(Tensor, inner),
            binary(Par, inner),
            binder(Forall, inner),
            binder(Exists, inner),
            modality(Bang, inner),
            modality(Quest, inner),
            inner.map(lambda p: (Paragraph(p[0]), Paragraph(p[1]))),
        ),
        max_leaves=max_leaves,
    )
