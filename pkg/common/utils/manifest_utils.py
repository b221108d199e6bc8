"""
Run manifest and JSON report writing
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np
from django.conf import settings

logger = logging.getLogger(__name__)


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_to_jsonable(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


class RunManifest:
    """
    Collects everything needed to reproduce a run and writes it as JSON

    Output carries no timestamps or host details, so two runs with the same
    seed and inputs produce byte-identical manifests.
    """

    def __init__(self, command: str, config: Dict[str, Any]):
        self.data: Dict[str, Any] = {
            'version': settings.NUMOD_VERSION,
            'command': command,
            'config': dict(config),
        }

    def set(self, key: str, value: Any) -> None:
        self.data[key] = value

    def update(self, values: Dict[str, Any]) -> None:
        self.data.update(values)

    def write(self, path) -> Path:
        path = Path(path)
        write_json(path, self.data)
        logger.info(f"Manifest written: {path}")
        return path


def write_json(path, payload: Dict[str, Any]) -> None:
    """Write payload as sorted, indented JSON"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_to_jsonable(payload), indent=2, sort_keys=True) + '\n')


def array_checksum(*arrays: np.ndarray) -> str:
    """sha256 over the raw float64 bytes of the given arrays, in order"""
    digest = hashlib.sha256()
    for array in arrays:
        digest.update(np.ascontiguousarray(array, dtype=np.float64).tobytes())
    return digest.hexdigest()
