from django.conf import settings
from django.test import SimpleTestCase

from proofnets.exceptions import InvalidDerivation, StepBudgetExceeded
from proofnets.formula import alpha_equal, parse_formula
from proofnets.lambda_calculus import (
    Abs, App, Var, add_derivation, apply_derivation, ax, check_derivation, conclusion,
    derivation_to_net, forall_e, format_derivation, format_term, free_term_vars, imp_e,
    lambda_bound, load_derivation, nat_derivation, nat_lambda_type, normalize_term,
    pair_derivation, parse_derivation, parse_term, subject_reduction_check, subst,
    term_alpha_equal,
)
from proofnets.sdnll import check_sdnll


def church(k):
    body = "a"
    for _ in range(k):
        body = f"f ({body})"
    return parse_term(f"\\f a. {body}")


# ============ TERMS ============

class TermTests(SimpleTestCase):

    def test_parse(self):
        self.assertEqual(
            parse_term("\\x y. x y z"),
            Abs("x", Abs("y", App(App(Var("x"), Var("y")), Var("z")))),
        )

    def test_format(self):
        text = "(\\x. x) (\\y. y y)"
        self.assertEqual(format_term(parse_term(text)), text)

    def test_substitution_avoids_capture(self):
        result = subst(parse_term("\\y. x y"), "x", Var("y"))
        self.assertTrue(term_alpha_equal(result, parse_term("\\z. y z")))
        self.assertEqual(free_term_vars(result), {"y"})

    def test_normalize(self):
        nf, steps = normalize_term(parse_term("(\\x. x x) (\\y. y)"))
        self.assertTrue(term_alpha_equal(nf, parse_term("\\y. y")))
        self.assertEqual(steps, 2)

    def test_strategies_differ_on_erasure(self):
        t = parse_term("(\\x. z) ((\\y. y y) (\\y. y y))")
        nf, steps = normalize_term(t, "leftmost-outermost")
        self.assertEqual((nf, steps), (Var("z"), 1))
        with self.assertRaises(StepBudgetExceeded):
            normalize_term(t, "leftmost-innermost", max_steps=5)

    def test_unknown_strategy(self):
        with self.assertRaises(ValueError):
            normalize_term(Var("x"), "rightmost")


# ============ DERIVATIONS ============

class DerivationTests(SimpleTestCase):

    def test_fixture(self):
        j = conclusion(load_derivation(settings.PNET_FIXTURES_DIR / "two.drv"))
        self.assertEqual(j.context, {})
        self.assertTrue(alpha_equal(j.type, nat_lambda_type(1, 0, 0)))
        self.assertTrue(term_alpha_equal(j.term, church(2)))

    def test_linear_variable_used_twice(self):
        d = load_derivation(settings.PNET_FIXTURES_DIR / "bad_linear.drv")
        found = check_derivation(d)
        self.assertTrue(any("both premises" in v.message for v in found))
        with self.assertRaises(InvalidDerivation):
            conclusion(d)
        with self.assertRaises(InvalidDerivation):
            derivation_to_net(d)

    def test_church_family(self):
        for k in range(4):
            with self.subTest(k=k):
                d = nat_derivation(k)
                self.assertEqual(check_derivation(d), [])
                j = conclusion(d)
                self.assertTrue(alpha_equal(j.type, nat_lambda_type(1, 0, 0)))
                self.assertTrue(term_alpha_equal(j.term, church(k)))

    def test_church_type_needs_a_level(self):
        with self.assertRaises(ValueError):
            nat_lambda_type(0, 0, 0)

    def test_promotion_needs_labels(self):
        step = parse_formula("X_1 -o X_1")
        d = imp_e(forall_e("X_1", ax("m", nat_lambda_type(1, 0, 0))), ax("g", step))
        self.assertIn("imp-e", [v.rule for v in check_derivation(d)])

    def test_script_round_trip(self):
        d = add_derivation()
        self.assertEqual(parse_derivation(format_derivation(d)), d)

    def test_nets_are_sdnll(self):
        for d in (nat_derivation(2), add_derivation(), pair_derivation(nat_derivation(1), nat_derivation(2))):
            with self.subTest(term=format_term(conclusion(d).term)):
                self.assertEqual(check_derivation(d), [])
                self.assertEqual(check_sdnll(derivation_to_net(d)), [])


# ============ SUBJECT REDUCTION ============

class SubjectReductionTests(SimpleTestCase):

    def test_addition(self):
        d = apply_derivation(apply_derivation(add_derivation(), nat_derivation(2)), nat_derivation(2))
        self.assertTrue(alpha_equal(conclusion(d).type, nat_lambda_type(1, 0, 0)))
        report = subject_reduction_check(d)
        self.assertTrue(term_alpha_equal(parse_term(report.normal_form), church(4)))
        self.assertEqual(report.beta_steps, 6)
        self.assertEqual(len(report.steps), 6)
        self.assertIsInstance(report.bound, int)
        self.assertLessEqual(report.beta_steps, lambda_bound(d))
        for step in report.steps:
            self.assertIn(step.method, ("reached", "normal-form"))

    def test_addition_with_a_smaller_argument(self):
        d = apply_derivation(apply_derivation(add_derivation(), nat_derivation(2)), nat_derivation(1))
        report = subject_reduction_check(d)
        self.assertTrue(term_alpha_equal(parse_term(report.normal_form), church(3)))
        self.assertEqual(report.beta_steps, 6)

    def test_normal_term(self):
        report = subject_reduction_check(nat_derivation(2))
        self.assertEqual(report.beta_steps, 0)
        self.assertTrue(term_alpha_equal(parse_term(report.normal_form), church(2)))
