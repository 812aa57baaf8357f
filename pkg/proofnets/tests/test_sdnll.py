from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from proofnets.builders import dig_chain_net, duplication_net
from proofnets.exceptions import MixedNodes, PnetInputError
from proofnets.formula import ExpIndex, Quest, alpha_equal
from proofnets.lambda_calculus import add_derivation, apply_derivation, derivation_to_net, nat_derivation
from proofnets.proofnet import validate
from proofnets.rewrite import normalize
from proofnets.sdnll import (
    binlist_type, check_sdnll, encode_binlist, encode_nat, ml4_check, ml4_nat, ml4_to_sdnll,
    nat_type, variable_levels,
)


class EncoderTests(SimpleTestCase):

    def test_integers(self):
        for k in range(6):
            with self.subTest(k=k):
                net = encode_nat(k)
                self.assertEqual(check_sdnll(net), [])
                self.assertEqual(len(net.boxes), 1)
                self.assertTrue(alpha_equal(net.edges["out"].label, nat_type(0, 0, 0)))

    def test_indices_are_carried(self):
        net = encode_nat(2, 1, 2, 3)
        self.assertEqual(check_sdnll(net), [])
        self.assertEqual(net.edges["out"].label, nat_type(1, 2, 3))

    def test_zero_has_no_contraction(self):
        kinds = [node.kind for node in encode_nat(0).nodes.values()]
        self.assertNotIn("Cont", kinds)
        self.assertIn("Weak", kinds)

    @hypothesis_settings(max_examples=30, deadline=None)
    @given(st.lists(st.sampled_from([0, 1]), max_size=6))
    def test_binary_lists(self, bits):
        net = encode_binlist(bits)
        self.assertEqual(check_sdnll(net), [])
        self.assertEqual(len(net.boxes), 1)
        self.assertTrue(alpha_equal(net.edges["out"].label, binlist_type(0, 0, 0)))

    def test_bad_input(self):
        with self.assertRaises(PnetInputError):
            encode_nat(-1)
        with self.assertRaises(PnetInputError):
            encode_binlist("012")


class CheckTests(SimpleTestCase):

    def test_two_doors_with_the_same_second_index(self):
        net = encode_nat(2)
        for edge in ("aux1_c0", "aux2_c0"):
            label = net.edges[edge].label
            net.edges[edge].label = Quest(ExpIndex(0, 0, 0), label.body)
        found = check_sdnll(net)
        self.assertIn(("B", "box"), [(v.element, v.rule) for v in found])

    def test_plain_labels_are_rejected(self):
        found = check_sdnll(duplication_net())
        self.assertTrue(found)
        self.assertEqual({v.rule for v in found}, {"label"})

    def test_cut_elimination_keeps_nets_sdnll(self):
        for m, n in ((2, 2), (3, 0), (1, 1)):
            d = apply_derivation(apply_derivation(add_derivation(), nat_derivation(m)), nat_derivation(n))
            states = [derivation_to_net(d)]
            normalize(states[0], on_step=lambda i, current: states.append(current))
            self.assertGreater(len(states), 1)
            for i, state in enumerate(states):
                with self.subTest(m=m, n=n, step=i):
                    self.assertEqual(check_sdnll(state), [])

    def test_structural_errors_come_first(self):
        net = encode_nat(1)
        net.remove_edge("out")
        self.assertEqual(check_sdnll(net), validate(net))


class ML4Tests(SimpleTestCase):

    def test_integer(self):
        for boxed in (False, True):
            with self.subTest(boxed=boxed):
                self.assertEqual(ml4_check(ml4_nat(2, boxed)), [])

    def test_levels_must_drop_at_doors(self):
        net = ml4_nat(2, boxed=True)
        net.edges["aux_c0"].level = 1
        found = ml4_check(net)
        self.assertIn("aux", [v.element for v in found])

    def test_dig_nodes_are_refused(self):
        with self.assertRaises(MixedNodes):
            ml4_check(dig_chain_net(1))

    def test_translation_is_sdnll(self):
        for k in range(4):
            with self.subTest(k=k):
                translated = ml4_to_sdnll(ml4_nat(k, boxed=True))
                self.assertEqual(check_sdnll(translated), [])
                self.assertNotIn("Paragraph", [n.kind for n in translated.nodes.values()])

    def test_doors_keep_the_inner_index(self):
        translated = ml4_to_sdnll(ml4_nat(2, boxed=True))
        for box in translated.boxes.values():
            for door in [box.principal, *box.aux]:
                premise = translated.edges[translated.premise(door, 0)].label
                conclusion = translated.edges[translated.conclusion(door)].label
                self.assertEqual(conclusion.body, premise)

    def test_variable_levels(self):
        self.assertEqual(variable_levels(ml4_nat(1)), {"X": 1})
