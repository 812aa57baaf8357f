from django.test import SimpleTestCase
from hypothesis import given

from proofnets.exceptions import FormulaSyntaxError, MixedIndexing
from proofnets.formula import (
    Atom, Bang, ExpIndex, Par, alpha_equal, dual, format_formula, free_vars, in_Fs,
    indexing, parse_formula, subtype_leq,
)
from proofnets.sdnll import nat_type

from .strategies import plain_formulas, subtype_pairs


class ParseFormulaTests(SimpleTestCase):

    def test_linear_implication_is_a_par(self):
        f = parse_formula("X -o Y")
        self.assertEqual(f, Par(Atom("X", None, False), Atom("Y")))

    def test_indices_and_levels(self):
        f = parse_formula("!{1,2,3} X_4")
        self.assertEqual(f, Bang(ExpIndex(1, 2, 3), Atom("X", 4)))
        self.assertEqual(indexing(f), "indexed")

    def test_trailing_operator_is_rejected(self):
        with self.assertRaises(FormulaSyntaxError):
            parse_formula("X *")

    def test_mixed_indexing_is_rejected(self):
        with self.assertRaises(MixedIndexing):
            parse_formula("X_1 * Y")

    def test_bound_name_clashing_with_free_name_is_renamed(self):
        f = parse_formula("X * all X. X")
        self.assertEqual(free_vars(f), {"X"})
        self.assertNotEqual(f.right.var, "X")

    @given(plain_formulas())
    def test_printed_formula_reads_back(self, f):
        self.assertTrue(alpha_equal(parse_formula(format_formula(f)), f))

    @given(plain_formulas())
    def test_dual_is_involutive(self, f):
        self.assertEqual(dual(dual(f)), f)


class SubtypingTests(SimpleTestCase):

    def test_bang_indices_go_down(self):
        big = parse_formula("!{1,1,1} X_0")
        small = parse_formula("!{0,0,0} X_0")
        self.assertTrue(subtype_leq(big, small))
        self.assertFalse(subtype_leq(small, big))

    def test_quest_indices_go_up(self):
        self.assertTrue(subtype_leq(parse_formula("?{0,0,0} X_0"), parse_formula("?{0,1,0} X_0")))

    def test_plain_formulas_have_no_subtyping(self):
        with self.assertRaises(MixedIndexing):
            subtype_leq(parse_formula("!X"), parse_formula("!X"))

    def test_integer_type_lives_at_its_level(self):
        self.assertTrue(in_Fs(nat_type(1, 0, 0), 1))
        self.assertFalse(in_Fs(nat_type(1, 0, 0), 2))

    @given(subtype_pairs())
    def test_subtyping_reverses_under_duality(self, pair):
        a, b = pair
        self.assertTrue(subtype_leq(a, b))
        self.assertTrue(subtype_leq(dual(b), dual(a)))
        self.assertTrue(subtype_leq(a, a))
