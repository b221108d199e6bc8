"""
Run configuration loading

Precedence: CLI flags > --config file > settings.NUMOD_DEFAULTS
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from decouple import RepositoryEnv
from django.conf import settings
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


class RunConfigLoader:
    """
    Merges defaults, a KEY=VALUE config file and CLI overrides, then
    validates the result with RunConfigSerializer
    """

    def __init__(self, defaults: Optional[Dict[str, Any]] = None):
        self.defaults = dict(settings.NUMOD_DEFAULTS if defaults is None else defaults)

    @staticmethod
    def read_config_file(path) -> Dict[str, str]:
        """
        Read a KEY=VALUE file the way python-decouple reads .env files

        Keys are case-insensitive; both EPOCHS and epochs map to 'epochs'.

        Args:
            path: Config file path

        Returns:
            dict: lower-cased keys to raw string values
        """
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"Config file not found: {path}")
        try:
            repository = RepositoryEnv(str(path))
        except (OSError, UnicodeDecodeError) as e:
            raise ValidationError(f"Config file unreadable: {path}: {e}")
        values = {key.strip().lower(): value for key, value in repository.data.items()}
        logger.debug(f"Read {len(values)} keys from {path}")
        return values

    def load(
        self,
        config_path=None,
        overrides: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Any]:
        """
        Build the validated run configuration

        Args:
            config_path: Optional KEY=VALUE file
            overrides: CLI values; None entries mean "not given"

        Returns:
            dict: validated configuration
        """
        from common.serializers import RunConfigSerializer

        merged: Dict[str, Any] = dict(self.defaults)
        if config_path:
            merged.update(self.read_config_file(config_path))
        if overrides:
            merged.update({key: value for key, value in overrides.items() if value is not None})

        hidden = merged.get('hidden_sizes')
        if isinstance(hidden, str):
            merged['hidden_sizes'] = [part.strip() for part in hidden.split(',') if part.strip()]

        serializer = RunConfigSerializer(data=merged)
        if not serializer.is_valid():
            raise ValidationError({field: [str(e) for e in errors] for field, errors in serializer.errors.items()})
        return dict(serializer.validated_data)
