"""
Exceptions raised by the proof-net library.

Each class carries a ``default_detail`` and a ``default_code`` so that the
management command can turn any of them into a stable report entry.
Input errors map to exit code 2, analysis findings to exit code 1.
"""


class PnetError(Exception):
    default_detail = "Proof-net analysis failed."
    default_code = "error"

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        super().__init__(self.detail)

    def as_dict(self):
        return {"code": self.code, "detail": str(self.detail)}


# ============================================================
# INPUT ERRORS
# ============================================================

class PnetInputError(PnetError):
    default_detail = "Invalid input."
    default_code = "invalid_input"


class FormulaSyntaxError(PnetInputError):
    default_detail = "Formula could not be parsed."
    default_code = "formula_syntax"


class NetSyntaxError(PnetInputError):
    default_detail = "Net file could not be parsed."
    default_code = "net_syntax"

    def __init__(self, detail=None, line=None):
        self.line = line
        if line is not None and detail is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)


class DerivationSyntaxError(PnetInputError):
    default_detail = "Derivation script could not be parsed."
    default_code = "derivation_syntax"


class MixedIndexing(PnetInputError):
    default_detail = "Formula mixes indexed and unindexed connectives."
    default_code = "mixed_indexing"


class UnknownElement(PnetInputError):
    default_detail = "No such node, edge or box."
    default_code = "unknown_element"


class TraceMismatch(PnetInputError):
    default_detail = "Trace element does not match the formula."
    default_code = "trace_mismatch"


class IllFormedContext(PnetInputError):
    default_detail = "Context is not well formed for this net."
    default_code = "ill_formed_context"


class SizeLimit(PnetInputError):
    default_detail = "Net is too large for this operation."
    default_code = "size_limit"


# ============================================================
# ANALYSIS FINDINGS
# ============================================================

class PnetFinding(PnetError):
    default_detail = "Analysis reported a finding."
    default_code = "finding"


class UnclassifiableCut(PnetFinding):
    default_detail = "Cut premises match no reduction rule."
    default_code = "unclassifiable_cut"


class CycleDetected(PnetFinding):
    default_detail = "Token path revisits a context; the net does not normalize."
    default_code = "cycle_detected"


class StepBudgetExceeded(PnetFinding):
    default_detail = "Step budget exceeded."
    default_code = "step_budget_exceeded"

    def __init__(self, detail=None, log=None):
        # partial ReductionLog when raised by normalize
        self.log = log
        super().__init__(detail)


class ReductionMismatch(PnetFinding):
    default_detail = "Net-level simulation of a beta step failed."
    default_code = "reduction_mismatch"


class MixedNodes(PnetFinding):
    default_detail = "Net contains nodes outside the checked fragment."
    default_code = "mixed_nodes"


class InvalidDerivation(PnetFinding):
    default_detail = "Derivation does not type check."
    default_code = "invalid_derivation"

    def __init__(self, detail=None, violations=()):
        self.violations = list(violations)
        if detail is None and self.violations:
            first = self.violations[0]
            detail = f"{first.element}: {first.message}"
        super().__init__(detail)
