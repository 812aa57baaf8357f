import math

import networkx as nx
from django.conf import settings
from django.test import SimpleTestCase

from proofnets.builders import dig_chain_net, exp_net, expb_net, not_polynomial_net, principal_net
from proofnets.criteria import (
    COARSE, DC, NEST, STRAT, analyze, box_copy_bound, elem_bound, poly_bound, power,
    relations, sdnll_bound, strata, tower,
)
from proofnets.lambda_calculus import add_derivation, apply_derivation, derivation_to_net, nat_derivation
from proofnets.proofnet import load_net
from proofnets.rewrite import normalize
from proofnets.sdnll import encode_binlist, encode_nat


class StrataTests(SimpleTestCase):

    def test_chain(self):
        graph = nx.DiGraph([("A", "B"), ("B", "C")])
        stratum, depth, cycle = strata(graph)
        self.assertEqual(stratum, {"A": 3, "B": 2, "C": 1})
        self.assertEqual(depth, 3)
        self.assertEqual(cycle, [])

    def test_cycle_makes_ancestors_infinite(self):
        graph = nx.DiGraph([("A", "B"), ("B", "B"), ("C", "D")])
        stratum, depth, cycle = strata(graph)
        self.assertEqual(stratum["A"], math.inf)
        self.assertEqual(stratum["B"], math.inf)
        self.assertEqual(stratum["C"], 2)
        self.assertEqual(depth, math.inf)
        self.assertEqual(cycle, ["B"])


class RelationTests(SimpleTestCase):

    def test_principal_door_net(self):
        rels = relations(principal_net())
        self.assertEqual(rels[STRAT].edges, [("B", "C"), ("D", "B")])
        self.assertTrue(rels[STRAT].acyclic)
        self.assertEqual(rels[STRAT].stratum["D"], 3)

    def test_exponential_chain_is_dependence_controlled_in_a_chain(self):
        rels = relations(exp_net(3))
        self.assertIn(("B1", "B0"), rels[DC].edges)
        self.assertIn(("B2", "B1"), rels[DC].edges)
        self.assertTrue(rels[DC].acyclic)
        self.assertEqual(rels[DC].depth, 3)
        self.assertEqual(rels[STRAT].edges, [])

    def test_weakened_chain_has_no_dependence(self):
        rels = relations(expb_net(3))
        self.assertEqual(rels[DC].edges, [])
        self.assertTrue(all(rels[k].acyclic for k in (STRAT, DC, NEST)))

    def test_self_dependence(self):
        rels = relations(not_polynomial_net(2))
        self.assertIn(("g_B", "g_B"), rels[DC].edges)
        self.assertFalse(rels[DC].acyclic)
        self.assertEqual(rels[DC].stratum["g_B"], math.inf)

    def test_digging_chain_nests(self):
        rels = relations(dig_chain_net(3))
        self.assertEqual(rels[NEST].edges, [("B1", "B0"), ("B2", "B1")])
        self.assertTrue(rels[NEST].acyclic)

    def test_integer_encoding_is_stratified(self):
        rels = relations(encode_nat(3))
        for kind in (STRAT, DC, NEST):
            self.assertTrue(rels[kind].acyclic)
        self.assertEqual(set(rels), {STRAT, DC, NEST, COARSE})

    def test_every_potential_up_to_a_depth(self):
        rels = relations(exp_net(2), all_potentials_depth=1)
        self.assertIn(("B1", "B0"), rels[DC].edges)


class BoundTests(SimpleTestCase):

    def test_tower(self):
        self.assertEqual(tower(3, 0), 3)
        self.assertEqual(tower(2, 2), 16)
        self.assertEqual(elem_bound(7, 0), 7)

    def test_poly_bound(self):
        self.assertEqual(poly_bound(10, 1, 1, 1, 1), 10)
        self.assertEqual(poly_bound(2, 1, 2, 1, 2), 2 ** 32)
        self.assertEqual(box_copy_bound(10, 1, 1, 1, 1), 1)

    def test_huge_results_are_symbolic(self):
        self.assertIsInstance(power(10, 10 ** 9), str)
        self.assertIsInstance(tower(2, 6), str)

    def test_measured_steps_fit_the_polynomial_bound(self):
        for net in (expb_net(2), expb_net(3), exp_net(2), dig_chain_net(2)):
            report = analyze(net, measure=True)
            bounds = report["bounds"]
            self.assertIsNotNone(bounds.polynomial)
            self.assertLessEqual(bounds.measured_steps, bounds.polynomial)
            self.assertLessEqual(bounds.measured_steps, report["weight"])

    def test_not_polynomial_has_no_polynomial_bound(self):
        report = analyze(not_polynomial_net(2))
        self.assertIsNone(report["bounds"].polynomial)

    def test_sdnll_bound_of_an_integer(self):
        self.assertIsInstance(sdnll_bound(encode_nat(2)), int)


def add_net(m, n):
    d = apply_derivation(apply_derivation(add_derivation(), nat_derivation(m)), nat_derivation(n))
    return derivation_to_net(d)


class DerelictionTests(SimpleTestCase):

    def setUp(self):
        self.net = load_net(settings.PNET_FIXTURES_DIR / "box_der.pn")

    def test_box_against_a_dereliction(self):
        rels = relations(self.net)
        for kind in (STRAT, DC, NEST):
            self.assertEqual(rels[kind].edges, [])
            self.assertTrue(rels[kind].acyclic)

    def test_analyze_box_against_a_dereliction(self):
        report = analyze(self.net, measure=True)
        self.assertEqual(report["errors"], [])
        self.assertIsNotNone(report["bounds"].polynomial)
        self.assertEqual(report["bounds"].measured_steps, 2)

    def test_addition_net(self):
        rels = relations(add_net(2, 2))
        for kind in (STRAT, DC, NEST):
            self.assertTrue(rels[kind].acyclic)
        self.assertIsNotNone(analyze(add_net(2, 2))["bounds"].polynomial)


class DominanceTests(SimpleTestCase):
    """Relation edges go from larger to smaller exponential indices."""

    def assertDominates(self, net):
        rels = relations(net)
        for kind, field in ((STRAT, "s"), (DC, "d"), (NEST, "n")):
            self.assertTrue(rels[kind].acyclic)
            for b, c in rels[kind].edges:
                above = net.edges[net.principal_edge(b)].label.idx
                below = net.edges[net.principal_edge(c)].label.idx
                self.assertGreater(getattr(above, field), getattr(below, field), (kind, b, c))

    def test_every_state_of_an_addition(self):
        for m, n in ((2, 2), (3, 0)):
            states = [add_net(m, n)]
            normalize(states[0], on_step=lambda i, current: states.append(current))
            for i, state in enumerate(states):
                with self.subTest(m=m, n=n, step=i):
                    self.assertDominates(state)

    def test_encoders(self):
        for net in (encode_nat(3), encode_nat(0, 2, 1, 1), encode_binlist("101")):
            self.assertDominates(net)
