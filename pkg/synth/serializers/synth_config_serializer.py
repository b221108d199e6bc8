from rest_framework import serializers

from ..models import SynthObject, IlluminationEvent, SynthConfig, BACKGROUNDS, EVENT_KINDS


def _pair(child=None, **kwargs):
    return serializers.ListField(child=child or serializers.FloatField(), min_length=2, max_length=2, **kwargs)


def _triple(**kwargs):
    return serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3, **kwargs)


def _tuples(attrs):
    return {key: tuple(value) if isinstance(value, list) else value for key, value in attrs.items()}


class SynthObjectSerializer(serializers.Serializer):
    size = _pair(serializers.IntegerField(min_value=1))
    color = _triple()
    start = _pair()
    velocity = _pair(required=False, default=[0.0, 0.0])
    first_frame = serializers.IntegerField(min_value=0, required=False, default=0)
    last_frame = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)

    def validate(self, attrs):
        return SynthObject(**_tuples(attrs))


class IlluminationEventSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=EVENT_KINDS)
    start = serializers.IntegerField(min_value=0)
    end = serializers.IntegerField(min_value=0)
    magnitude = serializers.FloatField(required=False, default=1.0)
    magnitude_end = serializers.FloatField(required=False, allow_null=True, default=None)
    tint = _triple(required=False, allow_null=True, default=None)
    center = _pair(required=False, default=[0.0, 0.0])
    velocity = _pair(required=False, default=[0.0, 0.0])
    radii = _pair(required=False, default=[8.0, 5.0])

    def validate(self, attrs):
        return IlluminationEvent(**_tuples(attrs))


class SynthConfigSerializer(serializers.Serializer):
    """
    JSON form of a synthetic scene, used for --spec files and the
    config copy written next to the generated dataset
    """
    width = serializers.IntegerField(min_value=1)
    height = serializers.IntegerField(min_value=1)
    n_frames = serializers.IntegerField(min_value=1)
    background = serializers.ChoiceField(choices=BACKGROUNDS, default='gradient')
    background_seed = serializers.IntegerField(min_value=0, default=0)
    objects = SynthObjectSerializer(many=True, required=False, default=list)
    events = IlluminationEventSerializer(many=True, required=False, default=list)
    shadow_factor = serializers.FloatField(default=0.5)
    noise_std = serializers.FloatField(min_value=0.0, default=0.0)
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate(self, attrs):
        return SynthConfig(**attrs)
