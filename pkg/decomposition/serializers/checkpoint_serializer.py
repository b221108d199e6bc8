from rest_framework import serializers

from gfcn.serializers import FloatArrayField, NetworkStateSerializer
from invariant.serializers import InvariantModelSerializer
from ..models import (
    ModelCheckpoint,
    TrainConfig,
    ThresholdState,
    CHECKPOINT_FORMAT,
    CHECKPOINT_VERSION,
)
from ..validators import PRIOR_MODES


class TrainConfigSerializer(serializers.Serializer):
    latent_dim = serializers.IntegerField(min_value=1)
    hidden_sizes = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=2, max_length=2)
    weight_decay = serializers.FloatField(min_value=0.0)
    learning_rate = serializers.FloatField()
    epochs = serializers.IntegerField(min_value=1)
    minibatch_frames = serializers.IntegerField(min_value=0)
    online_iterations = serializers.IntegerField(min_value=1)
    online_stream = serializers.IntegerField(min_value=1)
    pretrain_fraction = serializers.FloatField()
    threshold_factor = serializers.FloatField()
    latent_init_std = serializers.FloatField(min_value=0.0)
    prior_mode = serializers.ChoiceField(choices=PRIOR_MODES)
    seed = serializers.IntegerField(min_value=0)
    log_every = serializers.IntegerField(min_value=1)

    def create(self, validated_data):
        return TrainConfig.from_dict(validated_data)


class ThresholdStateSerializer(serializers.Serializer):
    count = serializers.IntegerField(min_value=0)
    mean = serializers.FloatField()
    m2 = serializers.FloatField(min_value=0.0)

    def create(self, validated_data):
        return ThresholdState(**validated_data)


class CheckpointSerializer(serializers.Serializer):
    """
    JSON checkpoint, format 'numod-checkpoint' version 1

    Fields: format, version, width, height, channels, net1 and net2
    (latent_dim, hidden_sizes, output_dim, flat params, adam), train_config,
    invariant_model, last_u1, last_u2 (nullable), threshold_state.
    """
    format = serializers.CharField()
    version = serializers.IntegerField()
    width = serializers.IntegerField(min_value=1)
    height = serializers.IntegerField(min_value=1)
    channels = serializers.ChoiceField(choices=[1, 3])
    net1 = NetworkStateSerializer()
    net2 = NetworkStateSerializer()
    train_config = TrainConfigSerializer()
    invariant_model = InvariantModelSerializer()
    last_u1 = FloatArrayField(allow_null=True, required=False, default=None)
    last_u2 = FloatArrayField(allow_null=True, required=False, default=None)
    threshold_state = ThresholdStateSerializer()

    def validate_format(self, value):
        if value != CHECKPOINT_FORMAT:
            raise serializers.ValidationError(f"Not a checkpoint: format is '{value}'")
        return value

    def validate_version(self, value):
        if value != CHECKPOINT_VERSION:
            raise serializers.ValidationError(
                f"Unsupported checkpoint version {value}; this build reads version {CHECKPOINT_VERSION}"
            )
        return value

    def create(self, validated_data):
        net1, net1_adam = self.fields['net1'].create(validated_data['net1'])
        net2, net2_adam = self.fields['net2'].create(validated_data['net2'])
        return ModelCheckpoint(
            width=validated_data['width'],
            height=validated_data['height'],
            channels=validated_data['channels'],
            net1=net1,
            net2=net2,
            net1_adam=net1_adam,
            net2_adam=net2_adam,
            train_config=self.fields['train_config'].create(validated_data['train_config']),
            invariant_model=self.fields['invariant_model'].create(validated_data['invariant_model']),
            last_u1=validated_data.get('last_u1'),
            last_u2=validated_data.get('last_u2'),
            threshold_state=self.fields['threshold_state'].create(validated_data['threshold_state']),
        )

    @staticmethod
    def dump(checkpoint: ModelCheckpoint) -> dict:
        return {
            'format': CHECKPOINT_FORMAT,
            'version': CHECKPOINT_VERSION,
            'width': checkpoint.width,
            'height': checkpoint.height,
            'channels': checkpoint.channels,
            'net1': NetworkStateSerializer.dump(checkpoint.net1, checkpoint.net1_adam),
            'net2': NetworkStateSerializer.dump(checkpoint.net2, checkpoint.net2_adam),
            'train_config': checkpoint.train_config.to_dict(),
            'invariant_model': checkpoint.invariant_model.to_dict(),
            'last_u1': None if checkpoint.last_u1 is None else checkpoint.last_u1.tolist(),
            'last_u2': None if checkpoint.last_u2 is None else checkpoint.last_u2.tolist(),
            'threshold_state': checkpoint.threshold_state.to_dict(),
        }
