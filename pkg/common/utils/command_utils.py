"""
Base class for the pipeline's management commands

Maps module errors to exit codes: 0 ok, 1 runtime failure, 2 usage error.
"""
import logging
from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from .exceptions_utils import NumodError

logger = logging.getLogger(__name__)

EXIT_RUNTIME_FAILURE = 1
EXIT_USAGE_ERROR = 2


class PipelineCommand(BaseCommand):
    """
    Subclasses implement run(*args, **options) instead of handle()
    """

    def add_common_arguments(self, parser):
        parser.add_argument('--config', dest='config_path', default=None,
                            help='KEY=VALUE config file (CLI flags take precedence)')
        parser.add_argument('--seed', type=int, default=None, help='Random seed')
        parser.add_argument('--threads', type=int, default=None,
                            help='Upper bound on worker threads for per-frame work')

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except ValidationError as e:
            logger.error(f"Usage error: {'; '.join(e.messages)}")
            raise CommandError('; '.join(e.messages), returncode=EXIT_USAGE_ERROR)
        except NumodError as e:
            logger.error(f"{e.error_code}: {e.message}")
            raise CommandError(f"{e.error_code}: {e.message}", returncode=EXIT_RUNTIME_FAILURE)
        except (OSError, MemoryError) as e:
            logger.error(f"Runtime failure: {e}", exc_info=True)
            raise CommandError(f"Runtime failure: {e}", returncode=EXIT_RUNTIME_FAILURE)

    def run(self, *args, **options):
        raise NotImplementedError('subclasses of PipelineCommand must provide a run() method')

    @staticmethod
    def require_directory(path, label: str) -> Path:
        """
        Usage error unless path is an existing directory

        Args:
            path: Directory to check
            label: Human readable name for the message

        Returns:
            Path: the directory
        """
        directory = Path(path)
        if not directory.is_dir():
            raise ValidationError(f"{label} is not a directory: {directory}")
        return directory

    @staticmethod
    def require_file(path, label: str) -> Path:
        """Usage error unless path is an existing file"""
        file_path = Path(path)
        if not file_path.is_file():
            raise ValidationError(f"{label} not found: {file_path}")
        return file_path

    @staticmethod
    def require_output_directory(path) -> Path:
        """Usage error if path exists as something other than a directory"""
        directory = Path(path)
        if directory.exists() and not directory.is_dir():
            raise ValidationError(f"Output exists and is not a directory: {directory}")
        return directory

    def success(self, message: str) -> None:
        self.stdout.write(self.style.SUCCESS(message))
