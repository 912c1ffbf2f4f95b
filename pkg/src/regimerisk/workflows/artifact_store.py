"""
regimerisk.workflows.artifact_store
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
JSON store of fitted models under `<output_dir>/models/`.

Each entry records the key it was fitted under (a SHA-256 of the input data and the model
settings) and an integrity hash of its payload. An entry is reused only when both match and
the store was not opened with `force`.

Classes:
    - ArtifactStore: Keyed JSON model store.

Functions:
    - fingerprint: SHA-256 over arrays and JSON-serializable settings.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

logger = logging.getLogger(__name__)


def fingerprint(*parts: Any) -> str:
    """
    Deterministic SHA-256 of a sequence of numpy arrays, strings and JSON-serializable values.

    Returns:
        str: Hex digest.
    """
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            array = np.ascontiguousarray(part, dtype=float)
            digest.update(str(array.shape).encode("utf-8"))
            digest.update(array.tobytes())
        else:
            digest.update(json.dumps(part, sort_keys=True, default=str).encode("utf-8"))
        digest.update(b"|")
    return digest.hexdigest()


def _integrity(payload: Dict[str, Any]) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


class ArtifactStore:
    """ Keyed JSON model store """

    def __init__(self, root: Union[str, Path], force: bool = False):
        """
        Args:
            root (str | Path): Run output directory; entries live under `root/models`.
            force (bool): Ignore existing entries.
        """
        self.root = Path(root)
        self.force = force

    def path(self, kind: str, name: str) -> Path:
        return self.root / "models" / kind / f"{name}.json"

    def load(self, kind: str, name: str, key: str) -> Optional[Dict[str, Any]]:
        """
        Return the stored payload when it exists, matches `key` and passes the integrity check.
        """
        path = self.path(kind, name)
        if self.force or not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Ignoring unreadable model file {path}: {e}")
            return None
        if entry.get("key") != key:
            logger.info(f"Model {kind}/{name} is stale; refitting")
            return None
        if entry.get("integrity") != _integrity(entry.get("payload", {})):
            logger.warning(f"Integrity mismatch for {path}; refitting")
            return None
        logger.info(f"Reusing stored model {kind}/{name}")
        return entry["payload"]

    def save(self, kind: str, name: str, key: str, payload: Dict[str, Any]) -> Path:
        """
        Write an entry atomically.

        Returns:
            Path: The entry path.
        """
        path = self.path(kind, name)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {"key": key, "integrity": _integrity(payload), "payload": payload}
        temp_path = path.with_suffix(".tmp")
        try:
            temp_path.write_text(json.dumps(entry, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            temp_path.replace(path)
        except OSError:
            if temp_path.exists():
                temp_path.unlink()
            raise
        return path
