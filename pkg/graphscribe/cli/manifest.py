"""
Run manifests: what a command was asked to do, on which inputs, with which
resolved configuration.
"""

import hashlib
import json
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

from graphscribe import __version__

MANIFEST_FILE = "manifest.json"


def git_blob_sha1(path: Path) -> str:
    """Content hash as git computes it for a blob."""
    data = Path(path).read_bytes()
    hasher = hashlib.sha1()
    hasher.update(f"blob {len(data)}\0".encode("utf-8"))
    hasher.update(data)
    return hasher.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunManifest(BaseModel):
    """Everything needed to reproduce a run."""
    command: str
    version: str = __version__
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    inputs: Dict[str, str] = Field(default_factory=dict)
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    arguments: Dict[str, Any] = Field(default_factory=dict)
    python: str = Field(default_factory=platform.python_version)
    started_at: str = Field(default_factory=_now)
    finished_at: Optional[str] = None

    def add_input(self, name: str, path: Path):
        path = Path(path)
        self.inputs[name] = str(path)
        if path.is_file():
            self.input_hashes[name] = git_blob_sha1(path)

    def add_output(self, name: str, path: Path):
        self.outputs[name] = str(path)

    def finish(self):
        self.finished_at = _now()

    def write(self, run_dir: Path) -> Path:
        path = Path(run_dir) / MANIFEST_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.model_dump(mode="json"), f, indent=2, sort_keys=True)
        return path

    @classmethod
    def read(cls, run_dir: Path) -> "RunManifest":
        with open(Path(run_dir) / MANIFEST_FILE) as f:
            return cls.model_validate(json.load(f))
