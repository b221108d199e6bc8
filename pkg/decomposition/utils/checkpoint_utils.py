"""
Checkpoint files
"""
import json
import logging
from pathlib import Path

from django.core.exceptions import ValidationError

from common.utils import CheckpointError, write_json
from ..models import ModelCheckpoint

logger = logging.getLogger(__name__)


def save_checkpoint(checkpoint: ModelCheckpoint, path) -> Path:
    """Write a checkpoint as JSON"""
    from ..serializers import CheckpointSerializer

    path = Path(path)
    write_json(path, CheckpointSerializer.dump(checkpoint))
    logger.info(f"Checkpoint written: {path}")
    return path


def load_checkpoint(path) -> ModelCheckpoint:
    """
    Read and validate a checkpoint

    Raises:
        CheckpointError: missing, unreadable or invalid file
    """
    from ..serializers import CheckpointSerializer

    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, ValueError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}", details={'path': str(path)})

    serializer = CheckpointSerializer(data=payload)
    if not serializer.is_valid():
        raise CheckpointError(
            f"Invalid checkpoint {path}",
            details={'path': str(path), 'errors': serializer.errors}
        )
    try:
        checkpoint = serializer.save()
    except ValidationError as e:
        raise CheckpointError(f"Inconsistent checkpoint {path}: {'; '.join(e.messages)}", details={'path': str(path)})
    logger.info(f"Loaded checkpoint {path} ({checkpoint.width}x{checkpoint.height}x{checkpoint.channels})")
    return checkpoint
