"""
``python manage.py pnet <subcommand>``: the command-line surface of the
proofnets app.

Exit codes: 0 on success, 1 when the analysis reports findings (violations,
cyclic relations, infinite weight, budget exhaustion), 2 on input errors.
"""
import json
import logging
import math
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from proofnets import criteria, ctxsem, lambda_calculus as lam, rewrite, sdnll
from proofnets.dot import net_to_dot, relations_to_dot
from proofnets.exceptions import PnetFinding, PnetInputError, StepBudgetExceeded
from proofnets.formula import format_formula
from proofnets.proofnet import load_net, net_size, serialize_net, validate
from proofnets.serializers import (
    BoundReportSerializer, BoxRelationSerializer, CopiesReportSerializer, OptionsSerializer,
    QuantityField, ReductionLogSerializer, ReportSerializer, SubjectReductionSerializer,
    ViolationSerializer,
)

logger = logging.getLogger(__name__)


def _violations(items):
    return ViolationSerializer(items, many=True).data


def _summary(net):
    return {
        "edges": net_size(net),
        "nodes": len(net.nodes),
        "boxes": len(net.boxes),
        "conclusions": [
            None if net.edges[e].label is None else format_formula(net.edges[e].label)
            for e in net.conclusions
        ],
    }


class Command(BaseCommand):
    help = "Analyse proof-nets: cut-elimination, context semantics, box relations, SDNLL and its λ-calculus."

    # ============================================================
    # ARGUMENTS
    # ============================================================

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest="subcommand", required=True)

        def analysis(name, help_text, with_file=True):
            p = sub.add_parser(name, help=help_text)
            if with_file:
                p.add_argument("file", help="net in the .pn format")
            p.add_argument("--json", action="store_true", help="emit the JSON report")
            p.add_argument("--dot", metavar="PATH", help="also write a DOT rendering")
            return p

        p = analysis("validate", "structural checks")
        p.add_argument("--mode", choices=("untyped", "ll-typed"), default="untyped")

        p = analysis("normalize", "cut-elimination to normal form")
        p.add_argument("--strategy", default="leftmost-innermost")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-steps", type=int)
        p.add_argument("--output", metavar="PATH", help="write the normal form as .pn")
        p.add_argument("--dot-dir", metavar="DIR", help="write one DOT file per step")

        analysis("weight", "W_G, the bound on reduction length and size")

        p = analysis("copies", "copies of a box under a potential")
        p.add_argument("--box", required=True)
        p.add_argument("--potential", default="")
        p.add_argument("--restrict")

        p = analysis("relations", "stratification, dependence control and nesting")
        p.add_argument("--all-potentials-depth", type=int)

        p = analysis("bound", "elementary and polynomial bounds")
        p.add_argument("--measure", action="store_true", help="also normalize and count steps")

        analysis("check-sdnll", "SDNLL membership")

        p = analysis("encode", "SDNLL encodings of integers and binary lists", with_file=False)
        p.add_argument("kind", choices=("nat", "list"))
        p.add_argument("--k", type=int, default=0)
        p.add_argument("--bits", default="")
        p.add_argument("--sdn", default="0,0,0")
        p.add_argument("--output", metavar="PATH")

        p = analysis("ml4", "mL⁴ level check and translation", with_file=False)
        p.add_argument("action", choices=("check", "to-sdnll"))
        p.add_argument("file")
        p.add_argument("--output", metavar="PATH")

        p = analysis("lambda", "derivations of the indexed λ-calculus", with_file=False)
        p.add_argument("action", choices=("check", "to-net", "church", "reduce"))
        p.add_argument("file", nargs="?")
        p.add_argument("--k", type=int, default=2)
        p.add_argument("--sdn", default="1,0,0")
        p.add_argument("--add", action="store_true", help="church: emit the addition instead")
        p.add_argument("--strategy", dest="term_strategy", default="leftmost-outermost")
        p.add_argument("--search-budget", type=int, default=128)
        p.add_argument("--output", metavar="PATH")

        p = sub.add_parser("export-dot", help="DOT source of a net or of its box relations")
        p.add_argument("file")
        p.add_argument("--relations", action="store_true")
        p.add_argument("--output", metavar="PATH")

    # ============================================================
    # PLUMBING
    # ============================================================

    def handle(self, *args, **options):
        handler = getattr(self, "handle_" + options["subcommand"].replace("-", "_"))
        self.inputs = [options[k] for k in ("file",) if options.get(k)]
        try:
            handler(options)
        except serializers.ValidationError as exc:
            raise CommandError(f"invalid option: {exc.detail}", returncode=2)
        except (PnetInputError, OSError) as exc:
            detail = exc.detail if isinstance(exc, PnetInputError) else str(exc)
            raise CommandError(detail, returncode=2)
        except PnetFinding as exc:
            self.emit(options, {"error": exc.as_dict()}, findings=1)

    def parse_options(self, **values):
        serializer = OptionsSerializer(data={k: v for k, v in values.items() if v is not None})
        serializer.is_valid(raise_exception=True)
        return serializer.validated_data

    def emit(self, options, results, findings=0, warnings=()):
        report = ReportSerializer({
            "command": options["subcommand"],
            "inputs": self.inputs,
            "results": results,
            "warnings": list(warnings),
        }).data
        if options.get("json"):
            self.stdout.write(json.dumps(report, sort_keys=True, indent=2, default=str))
        else:
            mark = "❌" if findings else "✅"
            self.stdout.write(f"{mark} {options['subcommand']}")
            for key, value in sorted(report["results"].items()):
                self.stdout.write(f"{key}: {json.dumps(value, sort_keys=True, default=str)}")
            for warning in report["warnings"]:
                self.stderr.write(f"warning: {warning}")
        if findings:
            raise CommandError(f"{findings} finding(s)", returncode=1)

    def write_text(self, text, path=None):
        if path:
            Path(path).write_text(text, encoding="utf-8")
        else:
            self.stdout.write(text, ending="" if text.endswith("\n") else "\n")

    def write_dot(self, graph, path):
        if path:
            Path(path).write_text(graph.source, encoding="utf-8")

    # ============================================================
    # NETS
    # ============================================================

    def handle_validate(self, options):
        net = load_net(options["file"])
        found = validate(net, options["mode"])
        self.write_dot(net_to_dot(net), options["dot"])
        self.emit(options, {"valid": not found, "violations": _violations(found)}, findings=len(found))

    def handle_normalize(self, options):
        values = self.parse_options(strategy=options["strategy"], seed=options["seed"],
                                    max_steps=options["max_steps"])
        net = load_net(options["file"])
        on_step = None
        if options["dot_dir"]:
            folder = Path(options["dot_dir"])
            folder.mkdir(parents=True, exist_ok=True)

            def on_step(index, current):
                (folder / f"step_{index:04d}.dot").write_text(net_to_dot(current).source, encoding="utf-8")

        complete = True
        try:
            log = rewrite.normalize(net, values.get("strategy", "leftmost-innermost"),
                                    values.get("max_steps"), values.get("seed"), on_step=on_step)
        except StepBudgetExceeded as exc:
            log, complete = exc.log, False
        if options["output"]:
            Path(options["output"]).write_text(serialize_net(log.net), encoding="utf-8")
        self.write_dot(net_to_dot(log.net), options["dot"])
        results = {
            "complete": complete,
            "log": ReductionLogSerializer(log).data,
            "normal_form": _summary(log.net),
        }
        self.emit(options, results, findings=0 if complete else 1)

    def handle_weight(self, options):
        net = load_net(options["file"])
        w = ctxsem.weight(net)
        self.write_dot(net_to_dot(net), options["dot"])
        self.emit(options, {"weight": QuantityField().to_representation(w), "size": net_size(net)},
                  findings=int(w == math.inf))

    def handle_copies(self, options):
        values = self.parse_options(potential=options["potential"], restrict=options["restrict"])
        net = load_net(options["file"])
        restriction = values.get("restrict")
        potential = values.get("potential", ())
        found = ctxsem.copies(net, options["box"], potential, restriction)
        report = {
            "box": options["box"],
            "potential": potential,
            "restriction": None if restriction is None else sorted(restriction),
            "copies": found,
        }
        self.write_dot(net_to_dot(net), options["dot"])
        self.emit(options, CopiesReportSerializer(report).data)

    def handle_relations(self, options):
        net = load_net(options["file"])
        rels = criteria.relations(net, all_potentials_depth=options["all_potentials_depth"])
        self.write_dot(relations_to_dot(rels), options["dot"])
        cyclic = [kind for kind in criteria.KINDS if not rels[kind].acyclic]
        results = {kind: BoxRelationSerializer(rel).data for kind, rel in rels.items()}
        self.emit(options, results, findings=len(cyclic))

    def handle_bound(self, options):
        net = load_net(options["file"])
        report = criteria.analyze(net, measure=options["measure"])
        bounds = report["bounds"]
        results = {
            "bounds": None if bounds is None else BoundReportSerializer(bounds).data,
            "weight": QuantityField().to_representation(report["weight"]),
            "errors": report["errors"],
        }
        warnings = []
        if bounds is not None:
            for name in ("elementary", "polynomial", "box_copies"):
                if isinstance(getattr(bounds, name), str):
                    warnings.append(f"{name} bound is too large and is given symbolically")
        self.write_dot(net_to_dot(net), options["dot"])
        unbounded = bounds is None or bounds.polynomial is None
        self.emit(options, results, findings=int(unbounded), warnings=warnings)

    def handle_export_dot(self, options):
        net = load_net(options["file"])
        graph = relations_to_dot(criteria.relations(net)) if options["relations"] else net_to_dot(net)
        self.write_text(graph.source, options["output"])

    # ============================================================
    # SDNLL
    # ============================================================

    def handle_check_sdnll(self, options):
        net = load_net(options["file"])
        found = sdnll.check_sdnll(net)
        results = {"member": not found, "violations": _violations(found)}
        if not found:
            results["bound"] = QuantityField().to_representation(criteria.sdnll_bound(net))
        self.write_dot(net_to_dot(net), options["dot"])
        self.emit(options, results, findings=len(found))

    def handle_encode(self, options):
        values = self.parse_options(sdn=options["sdn"], k=options["k"], bits=options["bits"])
        idx = values["sdn"]
        if options["kind"] == "nat":
            net = sdnll.encode_nat(values.get("k", 0), idx.s, idx.d, idx.n)
        else:
            net = sdnll.encode_binlist(values.get("bits", ""), idx.s, idx.d, idx.n)
        self.write_dot(net_to_dot(net), options["dot"])
        if options["json"]:
            found = sdnll.check_sdnll(net)
            self.emit(options, {**_summary(net), "violations": _violations(found)}, findings=len(found))
        else:
            self.write_text(serialize_net(net), options["output"])

    def handle_ml4(self, options):
        self.inputs = [options["file"]]
        net = load_net(options["file"])
        if options["action"] == "check":
            found = sdnll.ml4_check(net)
            self.write_dot(net_to_dot(net), options["dot"])
            self.emit(options, {"valid": not found, "violations": _violations(found)}, findings=len(found))
            return
        found = sdnll.ml4_check(net)
        if found:
            self.emit(options, {"valid": False, "violations": _violations(found)}, findings=len(found))
        translated = sdnll.ml4_to_sdnll(net)
        self.write_dot(net_to_dot(translated), options["dot"])
        if options["json"]:
            checked = sdnll.check_sdnll(translated)
            self.emit(options, {**_summary(translated), "violations": _violations(checked)},
                      findings=len(checked))
        else:
            self.write_text(serialize_net(translated), options["output"])

    # ============================================================
    # LAMBDA CALCULUS
    # ============================================================

    def handle_lambda(self, options):
        action = options["action"]
        if action == "church":
            values = self.parse_options(sdn=options["sdn"], k=options["k"])
            idx = values["sdn"]
            if idx.s < 1:
                raise CommandError("Church numerals need a first index of at least 1", returncode=2)
            if options["add"]:
                d = lam.add_derivation(idx.s, idx.d, idx.n)
            else:
                d = lam.nat_derivation(values.get("k", 0), idx.s, idx.d, idx.n)
            self.write_text(lam.format_derivation(d) + "\n", options["output"])
            return
        if not options["file"]:
            raise CommandError(f"lambda {action} needs a derivation file", returncode=2)
        self.inputs = [options["file"]]
        d = lam.load_derivation(options["file"])
        if action == "check":
            j, found = lam.infer(d)
            results = {"valid": not found, "violations": _violations(found)}
            if j is not None:
                results["judgement"] = str(j)
            self.emit(options, results, findings=len(found))
        elif action == "to-net":
            net = lam.derivation_to_net(d)
            self.write_dot(net_to_dot(net), options["dot"])
            if options["json"]:
                checked = sdnll.check_sdnll(net)
                self.emit(options, {**_summary(net), "violations": _violations(checked)},
                          findings=len(checked))
            else:
                self.write_text(serialize_net(net), options["output"])
        else:
            values = self.parse_options(term_strategy=options["term_strategy"])
            report = lam.subject_reduction_check(
                d, values.get("term_strategy", "leftmost-outermost"), options["search_budget"],
            )
            self.emit(options, SubjectReductionSerializer(report).data)
