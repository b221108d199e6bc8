import numpy as np
from rest_framework import serializers

from gfcn.models import GfcnParams, AdamState


class FloatArrayField(serializers.Field):
    """
    JSON list of numbers <-> 1D float64 numpy array
    """
    default_error_messages = {
        'invalid': 'Expected a list of numbers.',
        'not_finite': 'Values must be finite.',
    }

    def to_representation(self, value):
        return np.asarray(value, dtype=np.float64).reshape(-1).tolist()

    def to_internal_value(self, data):
        if not isinstance(data, (list, tuple)):
            self.fail('invalid')
        try:
            array = np.asarray(data, dtype=np.float64)
        except (TypeError, ValueError):
            self.fail('invalid')
        if array.ndim != 1:
            self.fail('invalid')
        if not np.all(np.isfinite(array)):
            self.fail('not_finite')
        return array


class AdamStateSerializer(serializers.Serializer):
    """
    Adam optimizer state for one parameter group
    """
    step_count = serializers.IntegerField(min_value=0)
    first_moment = FloatArrayField()
    second_moment = FloatArrayField()
    lr = serializers.FloatField()
    beta1 = serializers.FloatField()
    beta2 = serializers.FloatField()
    eps = serializers.FloatField()

    def validate(self, attrs):
        if attrs['first_moment'].shape != attrs['second_moment'].shape:
            raise serializers.ValidationError("Moment vectors must have the same length")
        if np.any(attrs['second_moment'] < 0):
            raise serializers.ValidationError("Second moment must be non-negative")
        return attrs

    def create(self, validated_data):
        return AdamState(**validated_data)

    @staticmethod
    def dump(state: AdamState) -> dict:
        return {
            'step_count': state.step_count,
            'first_moment': state.first_moment.tolist(),
            'second_moment': state.second_moment.tolist(),
            'lr': state.lr,
            'beta1': state.beta1,
            'beta2': state.beta2,
            'eps': state.eps,
        }


class NetworkStateSerializer(serializers.Serializer):
    """
    One network: layer dimensions, flat parameters (w1, b1, w2, b2, w3, b3
    in row-major order) and its Adam state
    """
    latent_dim = serializers.IntegerField(min_value=1)
    hidden_sizes = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=2, max_length=2)
    output_dim = serializers.IntegerField(min_value=1)
    params = FloatArrayField()
    adam = AdamStateSerializer(required=False, allow_null=True)

    def validate(self, attrs):
        shapes = GfcnParams.shapes(attrs['latent_dim'], tuple(attrs['hidden_sizes']), attrs['output_dim'])
        expected = sum(int(np.prod(shape)) for shape in shapes.values())
        if attrs['params'].size != expected:
            raise serializers.ValidationError(
                f"Parameter vector has {attrs['params'].size} values, layer dimensions need {expected}"
            )
        adam = attrs.get('adam')
        if adam is not None and adam['first_moment'].size != expected:
            raise serializers.ValidationError("Adam state length does not match the parameters")
        return attrs

    def create(self, validated_data):
        params = GfcnParams.from_flat(
            validated_data['params'],
            validated_data['latent_dim'],
            tuple(validated_data['hidden_sizes']),
            validated_data['output_dim'],
        )
        adam = validated_data.get('adam')
        return params, (AdamState(**adam) if adam is not None else None)

    @staticmethod
    def dump(params: GfcnParams, adam: AdamState = None) -> dict:
        return {
            'latent_dim': params.latent_dim,
            'hidden_sizes': list(params.hidden_sizes),
            'output_dim': params.output_dim,
            'params': params.flatten().tolist(),
            'adam': AdamStateSerializer.dump(adam) if adam is not None else None,
        }
