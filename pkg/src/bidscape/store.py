"""File-backed model store: one JSON file per landscape group, plus raw logs.

Layout under the store root:

    models/<quoted-group>.json   persisted landscapes
    logs/<name>.jsonl            validated ingested snapshots

Group names are URL-quoted in filenames so any label ("mobile|adv 12") maps
to a safe path. Writes go to a temp file in the same directory and are
renamed into place, so concurrent readers always see a complete model; a
per-group advisory file lock serializes writers. The directory scan is the
index, which leaves nothing to drift out of sync.

The store root defaults to ./bidscape_store and can be overridden with the
BIDSCAPE_STORE environment variable (explicit paths beat the environment).
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from filelock import FileLock

from .auction_log import AuctionSnapshot, dumps_log, parse_log
from .errors import ModelIntegrityError, ModelNotFoundError, SchemaError
from .landscape import BidLandscape, dumps_landscape, landscape_from_dict

from urllib.parse import quote, unquote

STORE_ENV_VAR = "BIDSCAPE_STORE"
DEFAULT_ROOT = "bidscape_store"

_LOCK_TIMEOUT_S = 10.0


class ModelStore:
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.models_dir = self.root / "models"
        self.logs_dir = self.root / "logs"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.logs_dir.mkdir(parents=True, exist_ok=True)

    @classmethod
    def from_env(cls, override: Optional[Union[str, Path]] = None) -> "ModelStore":
        root = override or os.environ.get(STORE_ENV_VAR) or DEFAULT_ROOT
        return cls(root)

    # -- models

    def model_path(self, group: str) -> Path:
        return self.models_dir / (quote(group, safe="") + ".json")

    def save(self, landscape: BidLandscape) -> Path:
        path = self.model_path(landscape.group)
        payload = dumps_landscape(landscape)
        lock = FileLock(str(path) + ".lock", timeout=_LOCK_TIMEOUT_S)
        with lock:
            _atomic_write(path, payload)
        return path

    def load(self, group: str) -> BidLandscape:
        path = self.model_path(group)
        try:
            text = path.read_text()
        except FileNotFoundError:
            raise ModelNotFoundError(f"no model for group {group!r}") from None
        try:
            return landscape_from_dict(json.loads(text))
        except (json.JSONDecodeError, SchemaError) as exc:
            raise ModelIntegrityError(f"model file {path} is corrupt: {exc}") from exc

    def groups(self) -> list[str]:
        return sorted(
            unquote(p.name[: -len(".json")])
            for p in self.models_dir.glob("*.json")
        )

    def save_all(self, landscapes: Iterable[BidLandscape]) -> list[Path]:
        return [self.save(l) for l in landscapes]

    # -- logs

    def append_log(self, snapshots: Iterable[AuctionSnapshot], name: Optional[str] = None) -> Path:
        snaps = list(snapshots)
        if name is None:
            name = f"ingest-{len(list(self.logs_dir.glob('*.jsonl'))):04d}"
        path = self.logs_dir / (quote(name, safe="") + ".jsonl")
        _atomic_write(path, dumps_log(snaps, fmt="jsonl"))
        return path

    def log_files(self) -> list[Path]:
        return sorted(self.logs_dir.glob("*.jsonl"))

    def iter_log_snapshots(self) -> Iterator[AuctionSnapshot]:
        """Snapshots from every stored log, in file order.

        Logs were validated at ingest; any line gone bad since is skipped
        rather than failing the whole read.
        """
        for path in self.log_files():
            result = parse_log(path.read_text(), fmt="jsonl")
            yield from result.snapshots


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
