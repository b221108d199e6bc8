import math

from rest_framework import serializers


class RunConfigSerializer(serializers.Serializer):
    """
    Validates the merged run configuration (training, invariant and run
    settings) before any module sees it
    """
    MODE_CHOICES = ['batch', 'online']
    PRIOR_MODE_CHOICES = ['sigmoid', 'shifted']

    mode = serializers.ChoiceField(choices=MODE_CHOICES, default='batch')

    # Training
    latent_dim = serializers.IntegerField(min_value=1)
    hidden_sizes = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=2, max_length=2)
    weight_decay = serializers.FloatField(min_value=0.0)
    learning_rate = serializers.FloatField()
    epochs = serializers.IntegerField(min_value=1)
    minibatch_frames = serializers.IntegerField(min_value=0)
    online_iterations = serializers.IntegerField(min_value=1)
    online_stream = serializers.IntegerField(min_value=1)
    pretrain_fraction = serializers.FloatField()
    threshold_factor = serializers.FloatField()
    latent_init_std = serializers.FloatField(min_value=0.0)
    prior_mode = serializers.ChoiceField(choices=PRIOR_MODE_CHOICES)
    log_every = serializers.IntegerField(min_value=1)

    # Run
    seed = serializers.IntegerField(min_value=0)
    threads = serializers.IntegerField(min_value=1)

    # Invariant representation
    theta = serializers.FloatField(required=False, allow_null=True, default=None)
    wiener_window = serializers.IntegerField(min_value=3)
    wiener_noise = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)
    n_angles = serializers.IntegerField(min_value=1)
    epsilon_log = serializers.FloatField()

    def validate_learning_rate(self, value):
        if not value > 0:
            raise serializers.ValidationError("Learning rate must be positive")
        return value

    def validate_pretrain_fraction(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("Pretrain fraction must lie in (0, 1)")
        return value

    def validate_threshold_factor(self, value):
        if not value > 0:
            raise serializers.ValidationError("Threshold factor must be positive")
        return value

    def validate_theta(self, value):
        if value is not None and not 0.0 <= value < math.pi:
            raise serializers.ValidationError("Angle must lie in [0, pi)")
        return value

    def validate_wiener_window(self, value):
        if value % 2 == 0:
            raise serializers.ValidationError("Wiener window must be odd")
        return value

    def validate_epsilon_log(self, value):
        if not value > 0:
            raise serializers.ValidationError("Log floor must be positive")
        return value

    def validate_hidden_sizes(self, value):
        return tuple(value)
