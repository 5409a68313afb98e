import os
from typing import Iterable, List, Sequence

import ujson

from utils.helpers import format_row
from utils.logger import log


class ArtifactManager:
    """
    Writes the CSV/JSON outputs of one run and remembers every path, so a
    failed run can remove what it already wrote.
    """
    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: List[str] = []

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _open(self, name: str):
        os.makedirs(self.out_dir, exist_ok=True)
        path = self.path(name)
        self.files.append(path)
        # LF line endings on every platform
        return open(path, "w", newline="\n"), path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
        f, path = self._open(name)
        with f:
            f.write(",".join(header) + "\n")
            count = 0
            for row in rows:
                f.write(format_row(row) + "\n")
                count += 1
        log.info(f"Wrote {count} rows to {path}")
        return path

    def write_json(self, name: str, data) -> str:
        f, path = self._open(name)
        with f:
            ujson.dump(data, f, indent=2, escape_forward_slashes=False)
            f.write("\n")
        log.info(f"Wrote {path}")
        return path

    def cleanup(self):
        for path in self.files:
            try:
                if os.path.exists(path):
                    os.remove(path)
                    log.warning(f"Removed partial output {path}")
            except OSError as e:
                log.error(f"Failed to remove {path}: {e}")
        self.files = []

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self.cleanup()
        return False
