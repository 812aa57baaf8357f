import math

from django.conf import settings
from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings as hypothesis_settings, strategies as st

from proofnets.builders import dig_chain_net, duplication_net, exp_net, expb_net, principal_net
from proofnets.ctxsem import (
    FULL, NOJUMP, Context, Explorer, bang, canonical_potentials, copies, format_context,
    is_quasi_standard, restr_cont, restr_pot, restr_sig, run_path, step, step_restricted, weight,
)
from proofnets.exceptions import IllFormedContext, StepBudgetExceeded
from proofnets.formula import TraceElem
from proofnets.proofnet import depth, load_net
from proofnets.rewrite import find_redexes, longest_reduction, normalize, reduce
from proofnets.signatures import E, SigL, SigR, parse_potential, parse_signature


def sigs(*texts):
    return {parse_signature(t) for t in texts}


class StepTests(SimpleTestCase):

    def setUp(self):
        self.net = duplication_net()

    def test_crossing_a_principal_door(self):
        c = Context("e", False, (SigR(E), SigL(E)), (TraceElem("par_r"),))
        target, kind = step(self.net, c)
        self.assertEqual(target, Context("a", False, (SigR(E),), (TraceElem("par_r"), bang(SigL(E)))))
        self.assertEqual(format_context(target), "((a,[r(e)]),[⅋r;!l(e)])")

    def test_entering_a_tensor(self):
        c = Context("h", False, (E,), (TraceElem("par_r"), bang(E)))
        target, _ = step(self.net, c)
        self.assertEqual(target, Context("i", False, (E,), (TraceElem("par_r"), bang(E), TraceElem("tens_r"))))

    def test_open_conclusion_has_no_successor(self):
        self.assertIsNone(step(self.net, Context("k", False, (), (bang(E),))))

    def test_dereliction_keeps_the_trace_non_empty(self):
        net = load_net(settings.PNET_FIXTURES_DIR / "box_der.pn")
        self.assertIsNone(step(net, Context("y2", True, (), (bang(E),))))
        self.assertEqual(copies(net, "B"), sigs("e"))

    def test_potential_must_match_depth(self):
        with self.assertRaises(IllFormedContext):
            step(self.net, Context("e", False, (E,), (bang(E),)))

    def test_empty_restriction_blocks_jumps(self):
        c = Context("d", True, (), (bang(E),))
        self.assertIsNotNone(step(self.net, c))
        self.assertIsNone(step_restricted(self.net, c, set()))

    def test_full_restriction_is_the_plain_relation(self):
        net = principal_net()
        everything = set(net.boxes)
        for box in sorted(net.boxes):
            start = Context(net.principal_edge(box), False, (E,) * depth(net, box), (bang(E),))
            self.assertEqual(run_path(net, start), run_path(net, start, FULL, everything))

    def test_local_steps_are_injective(self):
        net = duplication_net()
        explorer = Explorer(net)
        seen = {}
        for box in sorted(net.boxes):
            for potential in explorer.canonical_potentials(box):
                for t in explorer.copies(box, potential):
                    start = Context(net.principal_edge(box), False, potential, (bang(t),))
                    path = run_path(net, start, NOJUMP)
                    for (before, _), (after, _) in zip(path, path[1:]):
                        self.assertEqual(seen.setdefault(after, before), before)
                        self.assertEqual(len(after.potential), depth(net, after.edge))


class CopiesTests(SimpleTestCase):

    def test_duplication_net(self):
        net = duplication_net()
        self.assertEqual(copies(net, "B"), sigs("e", "l(e)", "r(e)"))
        self.assertEqual(copies(net, "C", parse_potential("[l(e)]")), sigs("e"))
        self.assertEqual(copies(net, "C", parse_potential("[r(e)]")), sigs("e", "l(e)", "r(e)"))

    def test_canonical_potentials(self):
        net = duplication_net()
        self.assertEqual(len(canonical_potentials(net, "e")), 5)
        self.assertEqual(canonical_potentials(net, "b"), [()])

    def test_canonical_potentials_after_one_step(self):
        net = duplication_net()
        middle = reduce(net, find_redexes(net)[0])
        inner = [e for e in middle.edges if depth(middle, e) == 2]
        explorer = Explorer(middle)
        total = sum(len(explorer.canonical_potentials(e)) for e in inner
                    if middle.edges[e].tail[0].startswith("parC"))
        self.assertEqual(total, 4)

    def test_restricted_copies(self):
        net = principal_net()
        self.assertEqual(copies(net, "C", restriction={"C"}), sigs("e", "l(e)", "r(e)"))
        self.assertEqual(len(copies(net, "C", restriction={"A", "C"})), 7)

    def test_copies_are_quasi_standard_contexts(self):
        net = duplication_net()
        for t in copies(net, "B"):
            self.assertTrue(is_quasi_standard(Context(net.principal_edge("B"), False, (), (bang(t),))))

    def test_digging_pairs_signatures(self):
        self.assertEqual(copies(dig_chain_net(2), "B1"), sigs("e", "n(e,e)", "n(l(e),e)", "n(r(e),e)"))

    def test_digging_chain_triples(self):
        for n in range(1, 5):
            with self.subTest(n=n):
                self.assertGreaterEqual(len(copies(dig_chain_net(n + 1), f"B{n}")), 3 ** n)

    def test_exponential_chain(self):
        for n in range(1, 6):
            with self.subTest(n=n):
                self.assertGreaterEqual(len(copies(exp_net(n + 1), f"B{n}")), 2 ** n)

    def test_copies_stay_quasi_standard_along_paths(self):
        net = duplication_net()
        for t in copies(net, "B"):
            start = Context(net.principal_edge("B"), False, (), (bang(t),))
            for c, _ in run_path(net, start, FULL):
                self.assertTrue(is_quasi_standard(c), format_context(c))

    @override_settings(PNET_STEP_BUDGET=3)
    def test_budget(self):
        with self.assertRaises(StepBudgetExceeded):
            copies(duplication_net(), "B")


class RestrictionTests(SimpleTestCase):

    def test_restricted_signature(self):
        net = principal_net()
        c = Context(net.principal_edge("C"), False, (), (bang(parse_signature("l(r(e))")),))
        self.assertEqual(restr_sig(net, c, {"C"}), SigL(E))

    def test_restricted_signature_of_e(self):
        net = principal_net()
        c = Context(net.principal_edge("C"), False, (), (bang(E),))
        self.assertEqual(restr_sig(net, c, {"C"}), E)

    def test_restricted_potential(self):
        net = principal_net()
        self.assertEqual(restr_pot(net, "w", parse_potential("[r(e);l(e)]"), {"B"}), parse_potential("[e;l(e)]"))
        self.assertEqual(restr_pot(net, "extAx_c1", ()), ())

    def test_context_restriction(self):
        net = principal_net()
        c = Context(net.principal_edge("C"), False, (), (bang(parse_signature("l(r(e))")),))
        once = restr_cont(net, c, {"C"})
        self.assertEqual(once.trace, (bang(SigL(E)),))
        self.assertEqual(restr_cont(net, once, {"C"}), once)


class WeightTests(SimpleTestCase):

    def test_box_free_net(self):
        net = load_net(settings.PNET_FIXTURES_DIR / "ax_cut.pn")
        self.assertEqual(weight(net), 2 * len(net.edges))

    def test_weight_bounds_every_strategy(self):
        net = exp_net(2)
        w = weight(net)
        self.assertNotEqual(w, math.inf)
        for strategy in ("leftmost-innermost", "leftmost-outermost"):
            log = normalize(net, strategy)
            self.assertLessEqual(len(log), w)
            self.assertLessEqual(max(log.sizes), w)

    def test_weight_bounds_every_reduction_sequence(self):
        nets = {
            "ax_cut": load_net(settings.PNET_FIXTURES_DIR / "ax_cut.pn"),
            "box_der": load_net(settings.PNET_FIXTURES_DIR / "box_der.pn"),
            "duplication": duplication_net(),
            "principal": principal_net(),
        }
        for n in (1, 2, 3):
            nets[f"exp_{n}"] = exp_net(n)
            nets[f"expb_{n}"] = expb_net(n)
            nets[f"dig_chain_{n}"] = dig_chain_net(n)
        for name, net in nets.items():
            if len(find_redexes(net)) > 4:
                continue
            with self.subTest(net=name):
                w = weight(net)
                self.assertNotEqual(w, math.inf)
                longest, largest = longest_reduction(net)
                self.assertLessEqual(longest, w)
                self.assertLessEqual(largest, w)

    @hypothesis_settings(max_examples=8, deadline=None)
    @given(st.integers(min_value=0, max_value=1000))
    def test_weight_decreases_along_reduction(self, seed):
        states = [exp_net(2)]
        normalize(states[0], "random", seed=seed, on_step=lambda i, current: states.append(current))
        weights = [weight(s) for s in states]
        for before, after in zip(weights, weights[1:]):
            self.assertGreaterEqual(before, after + 1)
