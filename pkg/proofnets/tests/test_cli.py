import json
from io import StringIO
from pathlib import Path
from tempfile import TemporaryDirectory

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from proofnets.builders import duplication_net
from proofnets.corpus import corpus_nets, write_corpus
from proofnets.dot import net_to_dot
from proofnets.formula import ExpIndex
from proofnets.lambda_calculus import conclusion, parse_derivation, parse_term, term_alpha_equal
from proofnets.proofnet import load_net, parse_net
from proofnets.rewrite import iso_equal
from proofnets.sdnll import check_sdnll
from proofnets.serializers import OptionsSerializer


def fixture(name):
    return str(settings.PNET_FIXTURES_DIR / name)


def pnet(*args):
    out, err = StringIO(), StringIO()
    call_command("pnet", *args, stdout=out, stderr=err)
    return out.getvalue()


# ============ EXIT CODES ============

class ExitCodeTests(SimpleTestCase):

    def test_valid_net(self):
        self.assertIn("✅ validate", pnet("validate", fixture("ax_cut.pn")))

    def test_findings(self):
        with self.assertRaises(CommandError) as ctx:
            pnet("validate", fixture("bad_arity.pn"))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_file(self):
        with self.assertRaises(CommandError) as ctx:
            pnet("validate", fixture("missing.pn"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_bad_option(self):
        with self.assertRaises(CommandError) as ctx:
            pnet("encode", "nat", "--k", "2", "--sdn", "1,x,0")
        self.assertEqual(ctx.exception.returncode, 2)


# ============ SUBCOMMANDS ============

class SubcommandTests(SimpleTestCase):

    def test_normalize_report(self):
        report = json.loads(pnet("normalize", fixture("ax_cut.pn"), "--json"))
        self.assertEqual(report["command"], "normalize")
        self.assertEqual(report["inputs"], [fixture("ax_cut.pn")])
        self.assertTrue(report["results"]["complete"])
        self.assertEqual(report["results"]["log"]["steps"], [{"rule": "AxCut", "cut": "k"}])
        self.assertEqual(report["results"]["log"]["sizes"], [4, 2])

    def test_weight(self):
        report = json.loads(pnet("weight", fixture("ax_cut.pn"), "--json"))
        self.assertEqual(report["results"]["weight"], 8)

    def test_encode(self):
        net = parse_net(pnet("encode", "nat", "--k", "2"))
        self.assertEqual(check_sdnll(net), [])
        self.assertEqual(len(net.boxes), 1)

    def test_church(self):
        d = parse_derivation(pnet("lambda", "church", "--k", "3"))
        self.assertTrue(term_alpha_equal(conclusion(d).term, parse_term("\\f a. f (f (f a))")))

    def test_lambda_check(self):
        report = json.loads(pnet("lambda", "check", fixture("two.drv"), "--json"))
        self.assertTrue(report["results"]["valid"])
        with self.assertRaises(CommandError) as ctx:
            pnet("lambda", "check", fixture("bad_linear.drv"))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_export_dot(self):
        with TemporaryDirectory() as folder:
            target = Path(folder) / "net.dot"
            pnet("export-dot", fixture("ax_cut.pn"), "--output", str(target))
            self.assertIn("digraph", target.read_text(encoding="utf-8"))

    def test_relations_of_a_box_against_a_dereliction(self):
        report = json.loads(pnet("relations", fixture("box_der.pn"), "--json"))
        self.assertEqual(report["command"], "relations")
        bound = json.loads(pnet("bound", fixture("box_der.pn"), "--measure", "--json"))
        self.assertEqual(bound["command"], "bound")


# ============ GENERATED CORPUS ============

class CorpusTests(SimpleTestCase):

    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.folder = Path(self.tmp.name)
        self.counts = write_corpus(self.folder)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return str(self.folder / name)

    def test_every_file_is_written(self):
        self.assertEqual(self.counts, (20, 3))
        for name in ("exp_n3.pn", "expb_n4.pn", "duplication.pn", "nat_3.pn", "ml4_nat_2.pn", "add_two_two.drv"):
            self.assertTrue((self.folder / name).exists(), name)

    def test_documented_commands(self):
        commands = [
            ("normalize", self.path("exp_n3.pn"), "--strategy", "random", "--seed", "1", "--json"),
            ("weight", self.path("duplication.pn")),
            ("copies", self.path("duplication.pn"), "--box", "C", "--potential", "r(e)"),
            ("relations", self.path("exp_n3.pn"), "--dot", self.path("rel.dot")),
            ("bound", self.path("expb_n4.pn"), "--measure"),
            ("check-sdnll", self.path("nat_3.pn")),
            ("ml4", "to-sdnll", self.path("ml4_nat_2.pn")),
            ("lambda", "reduce", self.path("add_two_two.drv"), "--json"),
            ("export-dot", self.path("duplication.pn"), "--output", self.path("net.dot")),
        ]
        for args in commands:
            with self.subTest(command=args[0]):
                pnet(*args)
        for name in ("rel.dot", "net.dot"):
            self.assertIn("digraph", (self.folder / name).read_text(encoding="utf-8"))

    def test_written_nets_read_back(self):
        for name, net in corpus_nets().items():
            with self.subTest(net=name):
                self.assertTrue(iso_equal(load_net(self.folder / f"{name}.pn"), net))


# ============ SERIALIZERS ============

class OptionsTests(SimpleTestCase):

    def test_indices(self):
        serializer = OptionsSerializer(data={"sdn": "2, 1, 3"})
        self.assertTrue(serializer.is_valid())
        self.assertEqual(serializer.validated_data["sdn"], ExpIndex(2, 1, 3))

    def test_rejected_values(self):
        serializer = OptionsSerializer(data={"sdn": "1,0", "bits": "102", "k": -1})
        self.assertFalse(serializer.is_valid())
        self.assertEqual(set(serializer.errors), {"sdn", "bits", "k"})


class DotTests(SimpleTestCase):

    def test_boxes_are_clusters(self):
        source = net_to_dot(duplication_net()).source
        self.assertIn("cluster_B", source)
        self.assertIn("cluster_C", source)
