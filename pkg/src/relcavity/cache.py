"""On-disk memo of Bogoliubov coefficient matrices.

Each entry is one ``.npz`` file holding ``alpha``, ``beta`` and a JSON header
with the format version and the key (geometry, truncation, tolerances).
Writers go through a temporary file and ``os.replace`` so concurrent readers
only ever see complete files; the last writer wins.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
ENV_VAR = "RELCAVITY_CACHE_DIR"


class CacheVersionError(RuntimeError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "relcavity"


def _canonical(key: dict) -> str:
    # repr() of floats round-trips exactly, so equal keys hash equally
    return json.dumps({k: repr(v) if isinstance(v, float) else v for k, v in sorted(key.items())})


class CoefficientCache:
    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()

    def path_for(self, key: dict) -> Path:
        digest = hashlib.sha256(_canonical(key).encode()).hexdigest()[:32]
        return self.directory / f"bogoliubov-{digest}.npz"

    def load(self, key: dict):
        """Return (alpha, beta) or None on a miss.

        Raises CacheVersionError for files written by a different format version.
        """
        path = self.path_for(key)
        if not path.exists():
            return None
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header.get("version") != FORMAT_VERSION:
                raise CacheVersionError(
                    f"{path} has cache format {header.get('version')}, expected {FORMAT_VERSION}"
                )
            if header.get("key") != _canonical(key):
                return None
            return data["alpha"].copy(), data["beta"].copy()

    def store(self, key: dict, alpha: np.ndarray, beta: np.ndarray) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(key)
        header = json.dumps({"version": FORMAT_VERSION, "key": _canonical(key)})
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(fh, alpha=np.ascontiguousarray(alpha), beta=np.ascontiguousarray(beta),
                         header=np.array(header))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path

    def clear(self) -> int:
        removed = 0
        if self.directory.exists():
            for p in self.directory.glob("bogoliubov-*.npz"):
                p.unlink()
                removed += 1
        return removed
