from django.conf import settings
from django.test import SimpleTestCase

from proofnets.builders import NetBuilder, duplication_net, exp_net
from proofnets.exceptions import NetSyntaxError, UnknownElement
from proofnets.proofnet import depth, load_net, net_size, parse_net, serialize_net, validate


def fixture(name):
    return settings.PNET_FIXTURES_DIR / name


class NetFormatTests(SimpleTestCase):

    def test_load_fixture(self):
        net = load_net(fixture("ax_cut.pn"))
        self.assertEqual(len(net.nodes), 3)
        self.assertEqual(net.conclusions, ["e1", "e4"])
        self.assertEqual(validate(net, "ll-typed"), [])

    def test_serialized_net_reads_back(self):
        net = duplication_net()
        again = parse_net(serialize_net(net))
        self.assertEqual(net.nodes, again.nodes)
        self.assertEqual(net.boxes, again.boxes)
        self.assertEqual(net.edges, again.edges)

    def test_unknown_kind(self):
        with self.assertRaises(NetSyntaxError) as ctx:
            parse_net("node a Lollipop\n")
        self.assertEqual(ctx.exception.line, 1)

    def test_conclusion_line_must_match_open_edges(self):
        text = fixture("ax_cut.pn").read_text(encoding="utf-8").replace("conclusions e1 e4", "conclusions e1")
        with self.assertRaises(NetSyntaxError):
            parse_net(text)


class ValidationTests(SimpleTestCase):

    def test_arity(self):
        found = validate(load_net(fixture("bad_arity.pn")))
        self.assertEqual([v.rule for v in found], ["arity"])
        self.assertEqual(found[0].element, "t")

    def test_edge_leaving_a_box_without_a_door(self):
        b = NetBuilder()
        b.box("B", "p")
        b.node("a", "Ax", "B")
        b.node("p", "BoxPrincipal", "B")
        b.edge("a.c0", "p.p0", id="inside")
        b.edge("a.c1", None, id="leak")
        b.edge("p.c0", None, id="out")
        found = validate(b.net)
        self.assertIn(("leak", "box-placement"), [(v.element, v.rule) for v in found])

    def test_ll_typed_mode_checks_labels(self):
        net = load_net(fixture("ax_cut.pn"))
        net.edges["e3"].label = net.edges["e2"].label
        found = validate(net, "ll-typed")
        self.assertEqual([(v.element, v.rule) for v in found], [("a2", "ax"), ("k", "cut")])

    def test_literature_nets_are_well_formed(self):
        self.assertEqual(validate(duplication_net(), "ll-typed"), [])
        self.assertEqual(validate(exp_net(3), "ll-typed"), [])


class DepthTests(SimpleTestCase):

    def test_depths(self):
        net = duplication_net()
        self.assertEqual(depth(net, "e"), 2)
        self.assertEqual(depth(net, "b"), 0)
        self.assertEqual(depth(net, "C"), 1)
        self.assertEqual(net.max_depth(), 2)
        self.assertEqual(net_size(net), len(net.edges))

    def test_unknown_element(self):
        with self.assertRaises(UnknownElement):
            depth(duplication_net(), "nowhere")
