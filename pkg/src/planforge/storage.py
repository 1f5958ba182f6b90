"""File-backed persistence: one JSON file per record, written atomically.

Directory-of-JSON replaces any real database behind the same interface; every
write goes through a temp file + rename so a crash can never leave a torn
record behind.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from .errors import CorruptRecord, UnknownPlanError
from .pipeline import LessonPlan


def atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.tmp.{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_json(path: Path, obj) -> None:
    atomic_write_bytes(path, (json.dumps(obj, ensure_ascii=False, indent=2) + "\n").encode("utf-8"))


def read_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, OSError, UnicodeDecodeError) as exc:
        raise CorruptRecord(str(path), str(exc)) from exc


class JsonDirectoryStore:
    """Records keyed by id, one ``<id>.json`` file each."""

    def __init__(self, root: Path, prefix: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.prefix = prefix
        self._lock = threading.Lock()

    def _path(self, record_id: str) -> Path:
        return self.root / f"{record_id}.json"

    def next_id(self) -> str:
        with self._lock:
            return f"{self.prefix}-{len(self.ids()) + 1:06d}"

    def save(self, record_id: str, record: dict) -> None:
        atomic_write_json(self._path(record_id), record)

    def load(self, record_id: str) -> dict:
        path = self._path(record_id)
        if not path.exists():
            raise KeyError(record_id)
        return read_json(path)

    def exists(self, record_id: str) -> bool:
        return self._path(record_id).exists()

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))


class FilePlanStore:
    """Plan store over a JsonDirectoryStore; satisfies the pipeline's store protocol."""

    def __init__(self, root: Path):
        self._store = JsonDirectoryStore(root, "plan")

    def next_id(self) -> str:
        return self._store.next_id()

    def save(self, plan: LessonPlan) -> None:
        self._store.save(plan.id, plan.to_dict())

    def get(self, plan_id: str) -> LessonPlan:
        try:
            return LessonPlan.from_dict(self._store.load(plan_id))
        except KeyError:
            raise UnknownPlanError(plan_id) from None

    def exists(self, plan_id: str) -> bool:
        return self._store.exists(plan_id)
