from django.test import SimpleTestCase
from hypothesis import given

from proofnets.exceptions import PnetInputError
from proofnets.signatures import (
    E, SigL, SigN, SigP, SigR, format_potential, is_standard, parse_potential,
    parse_signature, prune_leq, prunec_leq, signatures_of_depth, simpl_leq,
    simplifications, truncations,
)

from .strategies import signatures


class SignatureSyntaxTests(SimpleTestCase):

    def test_parse(self):
        self.assertEqual(parse_signature("n(l(e), r(e))"), SigN(SigL(E), SigR(E)))

    def test_potential(self):
        p = parse_potential("[r(e);l(e)]")
        self.assertEqual(p, (SigR(E), SigL(E)))
        self.assertEqual(format_potential(p), "[r(e);l(e)]")
        self.assertEqual(parse_potential(""), ())

    def test_invalid_signature(self):
        for text in ("x", "l(e", "n(e)", "e e"):
            with self.subTest(text=text):
                with self.assertRaises(PnetInputError):
                    parse_signature(text)


class SignatureOrderTests(SimpleTestCase):

    def test_digging_pair_simplifies_to_p(self):
        t1, t2 = SigL(E), SigR(E)
        self.assertTrue(simpl_leq(SigN(t2, t1), SigP(t1)))
        self.assertFalse(is_standard(SigP(t1)))

    def test_depth_enumeration(self):
        self.assertEqual(len(signatures_of_depth(0)), 1)
        self.assertEqual(len(signatures_of_depth(1)), 5)
        self.assertEqual(len(signatures_of_depth(2)), 1 + 3 * 5 + 25)

    def test_depth_bound(self):
        for d in range(3):
            self.assertLessEqual(len(signatures_of_depth(d)), 2 ** (2 ** (2 * d)))

    @given(signatures())
    def test_e_is_a_truncation_of_everything(self, t):
        self.assertTrue(prune_leq(E, t))
        self.assertIn(t, truncations(t))

    @given(signatures())
    def test_pruning_order_is_total_on_truncations(self, t):
        found = sorted(truncations(t), key=str)
        for a in found:
            for b in found:
                self.assertTrue(prunec_leq(a, b) or prunec_leq(b, a))

    @given(signatures())
    def test_signature_simplifies_to_itself(self, t):
        self.assertIn(t, simplifications(t))

    @given(signatures())
    def test_simplification_is_transitive(self, t):
        for u in simplifications(t):
            self.assertTrue(simpl_leq(t, u))
            for w in simplifications(u):
                self.assertTrue(simpl_leq(t, w))

    @given(signatures(standard=True))
    def test_standard_signatures_simplify_through_p(self, t):
        for u in simplifications(t):
            self.assertEqual(is_standard(u), u == t)
