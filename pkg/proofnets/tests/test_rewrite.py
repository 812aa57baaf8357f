from django.conf import settings
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from proofnets.builders import exp_net, expb_net
from proofnets.exceptions import StepBudgetExceeded
from proofnets.proofnet import load_net, parse_net, validate
from proofnets.rewrite import (
    STRATEGIES, find_redexes, iso_equal, longest_reduction, normalize, pick_redex, reduce,
)


def ax_cut():
    return load_net(settings.PNET_FIXTURES_DIR / "ax_cut.pn")


class NormalizeTests(SimpleTestCase):

    def test_axiom_cut(self):
        log = normalize(ax_cut())
        self.assertEqual(log.steps, [("AxCut", "k")])
        self.assertEqual(log.sizes, [4, 2])
        self.assertEqual(list(log.net.nodes), ["a1"])
        self.assertEqual(sorted(log.net.conclusions), ["e1", "e2"])
        self.assertEqual(validate(log.net, "ll-typed"), [])

    def test_input_net_is_untouched(self):
        net = ax_cut()
        normalize(net)
        self.assertIn("k", net.nodes)

    def test_step_budget(self):
        with self.assertRaises(StepBudgetExceeded) as ctx:
            normalize(ax_cut(), max_steps=0)
        self.assertEqual(len(ctx.exception.log), 0)
        self.assertIn("k", ctx.exception.log.net.nodes)

    def test_every_step_keeps_the_net_well_formed(self):
        for strategy in ("leftmost-innermost", "leftmost-outermost"):
            with self.subTest(strategy=strategy):
                states = []
                normalize(exp_net(2), strategy, on_step=lambda i, current: states.append(current))
                self.assertTrue(states)
                for current in states:
                    self.assertEqual(validate(current), [])

    def test_exp_chain_terminates(self):
        log = normalize(exp_net(2), "leftmost-innermost")
        self.assertFalse(find_redexes(log.net))
        self.assertEqual(len(log.sizes), len(log) + 1)

    def test_expb_chain_is_linear(self):
        lengths = [len(normalize(expb_net(n), "leftmost-outermost")) for n in range(1, 7)]
        deltas = {b - a for a, b in zip(lengths, lengths[1:])}
        self.assertEqual(len(deltas), 1)


class StrategyTests(SimpleTestCase):

    def test_leftmost_orders(self):
        redexes = find_redexes(exp_net(3))
        inner = pick_redex(redexes, "leftmost-innermost")
        outer = pick_redex(redexes, "leftmost-outermost")
        self.assertEqual(inner.depth, max(r.depth for r in redexes))
        self.assertEqual(outer.depth, min(r.depth for r in redexes))

    def test_leftmost_follows_the_conclusions(self):
        net = parse_net(
            "node a1 Ax\nnode a2 Ax\nnode k1 Cut\nnode b1 Ax\nnode b2 Ax\nnode k2 Cut\n"
            "edge e1 a1.c0 -> OUT\nedge e2 a1.c1 -> k1.p0\nedge e3 a2.c0 -> k1.p1\nedge e4 a2.c1 -> OUT\n"
            "edge f1 b1.c0 -> OUT\nedge f2 b1.c1 -> k2.p0\nedge f3 b2.c0 -> k2.p1\nedge f4 b2.c1 -> OUT\n"
            "conclusions f1 f4 e1 e4\n"
        )
        redexes = find_redexes(net)
        self.assertEqual([r.cut for r in redexes], ["k1", "k2"])
        self.assertEqual({r.cut: r.conclusion for r in redexes}, {"k1": 2, "k2": 0})
        for strategy in ("leftmost-innermost", "leftmost-outermost"):
            with self.subTest(strategy=strategy):
                self.assertEqual(pick_redex(redexes, strategy).cut, "k2")
                self.assertEqual(normalize(net, strategy).steps[0], ("AxCut", "k2"))

    def test_unknown_strategy(self):
        with self.assertRaises(ValueError):
            pick_redex(find_redexes(ax_cut()), "rightmost")

    def test_strategies_reach_isomorphic_normal_forms(self):
        forms = [normalize(expb_net(2), s, seed=1).net for s in STRATEGIES]
        for other in forms[1:]:
            self.assertTrue(iso_equal(forms[0], other))

    @hypothesis_settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_random_strategy_is_confluent(self, seed):
        reference = normalize(exp_net(2), "leftmost-innermost").net
        self.assertTrue(iso_equal(normalize(exp_net(2), "random", seed=seed).net, reference))


class IsomorphismTests(SimpleTestCase):

    def test_ids_do_not_matter(self):
        renamed = parse_net(
            "node x Ax\nnode y Ax\nnode z Cut\n"
            "edge q y.c1 -> OUT\nedge r y.c0 -> z.p1\nedge s x.c1 -> z.p0\nedge t x.c0 -> OUT\n"
        )
        self.assertTrue(iso_equal(ax_cut(), renamed))

    def test_wiring_matters(self):
        one_step = reduce(ax_cut(), find_redexes(ax_cut())[0])
        self.assertFalse(iso_equal(ax_cut(), one_step))

    def test_longest_reduction(self):
        self.assertEqual(longest_reduction(ax_cut()), (1, 4))
