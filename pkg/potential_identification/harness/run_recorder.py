from __future__ import annotations

import datetime as dt
import os
from pathlib import Path
from threading import Lock


class RunRecorder:
    """Append-only, UTC-timestamped log of an identification run."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._lock = Lock()
        self._path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def path(self) -> Path:
        return self._path

    @classmethod
    def from_env(cls, name: str = "irrs.log") -> "RunRecorder | None":
        """Recorder under $PHASE_RUN_LOG_DIR/<run id>/, or None when unset."""
        base_dir = os.getenv("PHASE_RUN_LOG_DIR", "").strip()
        if not base_dir:
            return None
        run_id = dt.datetime.now(dt.timezone.utc).strftime("%Y%m%d_%H%M%S")
        return cls(Path(base_dir) / run_id / name)

    def record(self, line: str) -> None:
        timestamp = dt.datetime.now(dt.timezone.utc).isoformat()
        entry = f"[{timestamp}] {line}\n"
        with self._lock:
            with self._path.open("a", encoding="utf-8") as handle:
                handle.write(entry)
