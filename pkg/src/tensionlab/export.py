"""Bit-stable file writers."""
from __future__ import annotations

import os
import tempfile

from .errors import TensionLabError
from .experiments import SweepRecord
from .tension import TensionResult, atlas_csv


class ExportError(TensionLabError):
    pass


def write_text(path, text: str) -> None:
    """Atomic write with '\\n' line endings."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from None


def results_csv(results) -> str:
    results = list(results)
    if not results:
        raise ExportError("nothing to export")
    if all(isinstance(r, TensionResult) for r in results):
        return atlas_csv(results)
    if len(results) == 1 and isinstance(results[0], SweepRecord):
        return results[0].to_csv()
    raise ExportError("export takes tension results or a single sweep record")


def export_csv(results, path) -> None:
    write_text(path, results_csv(results))
