from rest_framework import serializers

from .bench import ACCESS_MODES
from .calibrate import RULES
from .survmodels import MODEL_TYPES, ROLES

MODEL_KINDS = ('auto', *MODEL_TYPES)


class CliConfigSerializer(serializers.Serializer):
    """Merged configuration of a tcsurv subcommand"""

    alpha = serializers.FloatField(min_value=0.0, max_value=1.0)
    beta = serializers.FloatField(min_value=0.0, max_value=1.0)
    eta2 = serializers.FloatField(min_value=0.0, max_value=1.0)
    grid_size = serializers.IntegerField(min_value=1)
    grid_max = serializers.FloatField(min_value=0.0, max_value=1.0)
    c_prop = serializers.FloatField(min_value=0.0, max_value=1.0)
    s_kind = serializers.ChoiceField(choices=MODEL_KINDS)
    g_kind = serializers.ChoiceField(choices=MODEL_KINDS)
    bandwidth = serializers.FloatField(required=False, allow_null=True, default=None)
    seed = serializers.IntegerField(min_value=0)
    n_mc = serializers.IntegerField(min_value=1000)
    jobs = serializers.IntegerField(min_value=1)
    exp_parameterization = serializers.ChoiceField(choices=('rate', 'mean'))
    censoring_access = serializers.ChoiceField(choices=ACCESS_MODES)
    fallback_zero = serializers.BooleanField()
    rule = serializers.ChoiceField(choices=RULES)

    def validate(self, data):
        """Open intervals the field bounds cannot express"""
        errors = {}
        for name in ('alpha', 'beta', 'eta2', 'c_prop'):
            if not 0 < data[name] < 1:
                errors[name] = f"must lie strictly between 0 and 1, got {data[name]}"
        if data['grid_max'] >= 1:
            errors['grid_max'] = "must lie in [0, 1)"
        bandwidth = data.get('bandwidth')
        if bandwidth is not None and bandwidth <= 0:
            errors['bandwidth'] = "must be positive"
        if errors:
            raise serializers.ValidationError(errors)
        return data


class CoverageReportSerializer(serializers.Serializer):
    """One CSV row per tau"""

    tau = serializers.FloatField()
    psi_hat = serializers.FloatField()
    plug_in = serializers.FloatField()
    sigma_hat = serializers.FloatField(min_value=0.0)
    clb = serializers.FloatField()
    n_cal = serializers.IntegerField(min_value=1)


class RunMetricsSerializer(serializers.Serializer):
    replicate = serializers.IntegerField()
    empirical_coverage = serializers.FloatField(min_value=0.0, max_value=1.0)
    average_lpb = serializers.FloatField(min_value=0.0)
    true_coverage = serializers.FloatField(allow_null=True)
    selected_tau = serializers.FloatField(allow_null=True)
    n_train = serializers.IntegerField()
    n_cal = serializers.IntegerField()
    n_test = serializers.IntegerField()
    seed = serializers.IntegerField()


class ProportionRowSerializer(serializers.Serializer):
    """Plot-data row: n against the proportion of covered replicates"""

    setting = serializers.IntegerField(allow_null=True)
    n = serializers.IntegerField()
    reps = serializers.IntegerField()
    failures = serializers.IntegerField()
    successes = serializers.IntegerField()
    proportion = serializers.FloatField(allow_null=True)
    wilson_lo = serializers.FloatField(allow_null=True)
    wilson_hi = serializers.FloatField(allow_null=True)
    mean_true_coverage = serializers.FloatField(allow_null=True)
    mean_empirical_coverage = serializers.FloatField(allow_null=True)
    mean_average_lpb = serializers.FloatField(allow_null=True)
    basis = serializers.ChoiceField(choices=('true', 'empirical'), allow_null=True)


class ReplicateFailureSerializer(serializers.Serializer):
    n = serializers.IntegerField(required=False)
    replicate = serializers.IntegerField()
    seed = serializers.IntegerField()
    error = serializers.CharField()
    message = serializers.CharField()


class ModelDocumentSerializer(serializers.Serializer):
    """Serialized nuisance model; the remaining keys depend on the kind"""

    kind = serializers.ChoiceField(choices=tuple(MODEL_TYPES))
    role = serializers.ChoiceField(choices=ROLES)
    p = serializers.IntegerField(min_value=1)
    grid = serializers.ListField(child=serializers.FloatField(), allow_empty=True)

    def to_internal_value(self, data):
        validated = super().to_internal_value(data)
        return {**data, **validated}


class ProvenanceSerializer(serializers.Serializer):
    version = serializers.CharField()
    seed = serializers.IntegerField()
    command = serializers.CharField()
    config = serializers.DictField()


class CalibrationSummarySerializer(serializers.Serializer):
    rule = serializers.ChoiceField(choices=RULES)
    alpha = serializers.FloatField()
    beta = serializers.FloatField(allow_null=True)
    selected_tau = serializers.FloatField(allow_null=True)
    fallback = serializers.BooleanField(default=False)


class LpbSerializer(serializers.Serializer):
    tau = serializers.FloatField(min_value=0.0, max_value=1.0)
    eta2 = serializers.FloatField(min_value=0.0, max_value=1.0)


class BundleSerializer(serializers.Serializer):
    """Model (fit) or model+LPB (calibrate) JSON bundle"""

    provenance = ProvenanceSerializer()
    s_model = ModelDocumentSerializer()
    g_model = ModelDocumentSerializer()
    lpb = LpbSerializer(required=False, allow_null=True, default=None)
    calibration = CalibrationSummarySerializer(required=False, allow_null=True, default=None)

    def validate(self, data):
        if data['s_model']['role'] != 'event':
            raise serializers.ValidationError("s_model must have role 'event'")
        if data['g_model']['role'] != 'censoring':
            raise serializers.ValidationError("g_model must have role 'censoring'")
        if data['s_model']['p'] != data['g_model']['p']:
            raise serializers.ValidationError("s_model and g_model disagree on the covariate dimension")
        return data
