from rest_framework import serializers

from ..models import InvariantModel
from ..validators import validate_theta, validate_wiener_window, validate_wiener_noise, validate_epsilon_log


class InvariantModelSerializer(serializers.Serializer):
    """
    Invariant transform settings as stored in checkpoints and reports
    """
    theta = serializers.FloatField(validators=[validate_theta])
    wiener_window = serializers.IntegerField(validators=[validate_wiener_window])
    wiener_noise = serializers.FloatField(allow_null=True, required=False, default=None,
                                          validators=[validate_wiener_noise])
    epsilon_log = serializers.FloatField(validators=[validate_epsilon_log])

    def create(self, validated_data):
        return InvariantModel(**validated_data)
