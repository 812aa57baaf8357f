import math

from rest_framework import serializers

from .exceptions import PnetInputError
from .formula import ExpIndex
from .lambda_calculus import TERM_STRATEGIES
from .rewrite import STRATEGIES
from .signatures import format_potential, format_signature, parse_potential


# ============================================================
# VALUE FIELDS
# ============================================================

class QuantityField(serializers.Field):
    """
    Integers, ``inf`` and symbolic bounds. Infinity is written as the
    string ``"inf"``; symbolic bounds are already strings.
    """

    def to_representation(self, value):
        if isinstance(value, float) and math.isinf(value):
            return "inf"
        return value


# ============================================================
# REWRITING
# ============================================================

class ReductionStepSerializer(serializers.Serializer):
    rule = serializers.CharField()
    cut = serializers.CharField()

    def to_representation(self, instance):
        rule, cut = instance
        return {"rule": rule, "cut": cut}


class ReductionLogSerializer(serializers.Serializer):
    """
    Fired rules in order, the size before the first step and after every
    step, and the size of the final net.
    """

    steps = ReductionStepSerializer(many=True)
    sizes = serializers.ListField(child=serializers.IntegerField())
    length = serializers.SerializerMethodField()
    rules = serializers.SerializerMethodField()

    def get_length(self, obj):
        return len(obj.steps)

    def get_rules(self, obj):
        counts = {}
        for rule, _ in obj.steps:
            counts[rule] = counts.get(rule, 0) + 1
        return dict(sorted(counts.items()))


# ============================================================
# CHECKS
# ============================================================

class ViolationSerializer(serializers.Serializer):
    element = serializers.CharField()
    rule = serializers.CharField()
    message = serializers.CharField()
    expected = serializers.CharField(allow_null=True)
    found = serializers.CharField(allow_null=True)


# ============================================================
# RELATIONS AND BOUNDS
# ============================================================

class BoxRelationSerializer(serializers.Serializer):
    kind = serializers.CharField()
    edges = serializers.SerializerMethodField()
    acyclic = serializers.BooleanField()
    stratum = serializers.SerializerMethodField()
    depth = QuantityField()
    cycle = serializers.ListField(child=serializers.CharField())

    def get_edges(self, obj):
        return [list(pair) for pair in obj.edges]

    def get_stratum(self, obj):
        return {box: ("inf" if math.isinf(value) else value) for box, value in sorted(obj.stratum.items())}


class BoundReportSerializer(serializers.Serializer):
    x = serializers.IntegerField()
    partial = serializers.IntegerField()
    S = QuantityField()
    D = QuantityField()
    N = QuantityField()
    elementary = QuantityField(allow_null=True)
    polynomial = QuantityField(allow_null=True)
    box_copies = QuantityField(allow_null=True)
    measured_steps = serializers.IntegerField(allow_null=True)


class CopiesReportSerializer(serializers.Serializer):
    box = serializers.CharField()
    potential = serializers.SerializerMethodField()
    restriction = serializers.ListField(child=serializers.CharField(), allow_null=True)
    copies = serializers.SerializerMethodField()
    count = serializers.SerializerMethodField()

    def get_potential(self, obj):
        return format_potential(obj["potential"])

    def get_copies(self, obj):
        return sorted(format_signature(t) for t in obj["copies"])

    def get_count(self, obj):
        return len(obj["copies"])


# ============================================================
# LAMBDA CALCULUS
# ============================================================

class BetaSimulationSerializer(serializers.Serializer):
    path = serializers.ListField(child=serializers.CharField())
    term = serializers.CharField()
    cut_steps = serializers.IntegerField(allow_null=True)
    method = serializers.CharField()


class SubjectReductionSerializer(serializers.Serializer):
    term = serializers.CharField()
    type = serializers.CharField()
    normal_form = serializers.CharField()
    beta_steps = serializers.IntegerField()
    bound = QuantityField()
    steps = BetaSimulationSerializer(many=True)


# ============================================================
# REPORT ENVELOPE
# ============================================================

class ReportSerializer(serializers.Serializer):
    """Envelope shared by every command."""

    command = serializers.CharField()
    inputs = serializers.ListField(child=serializers.CharField())
    results = serializers.JSONField()
    warnings = serializers.ListField(child=serializers.CharField(), default=list)


# ============================================================
# OPTIONS
# ============================================================

class OptionsSerializer(serializers.Serializer):
    """
    Composite command-line values. Every field is optional; ``validated_data``
    holds parsed Python values.
    """

    sdn = serializers.CharField(required=False)
    potential = serializers.CharField(required=False, allow_blank=True)
    restrict = serializers.CharField(required=False, allow_blank=True)
    bits = serializers.CharField(required=False, allow_blank=True)
    k = serializers.IntegerField(required=False, min_value=0)
    strategy = serializers.ChoiceField(choices=STRATEGIES, required=False)
    term_strategy = serializers.ChoiceField(choices=TERM_STRATEGIES, required=False)
    seed = serializers.IntegerField(required=False)
    max_steps = serializers.IntegerField(required=False, min_value=0)

    def validate_sdn(self, value):
        """
        Parse ``s,d,n``.

        Accepted:
        1,0,0
        2, 1, 3
        """
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 3 or not all(p.isdigit() for p in parts):
            raise serializers.ValidationError("Indices must read s,d,n with three natural numbers.")
        return ExpIndex(*(int(p) for p in parts))

    def validate_potential(self, value):
        try:
            return parse_potential(value)
        except PnetInputError as exc:
            raise serializers.ValidationError(str(exc.detail))

    def validate_restrict(self, value):
        boxes = [b.strip() for b in value.split(",") if b.strip()]
        return frozenset(boxes)

    def validate_bits(self, value):
        if any(ch not in "01" for ch in value):
            raise serializers.ValidationError("A bit list only holds the characters 0 and 1.")
        return value
