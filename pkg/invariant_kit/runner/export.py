"""Report and CSV export."""

import csv
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return value


def export_to_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV file with LF line endings and round-trippable floats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.debug(f"Wrote {path}")
    return path


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings inf, -inf and nan."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, Path):
        return str(value)
    return value


def write_json_atomic(path: Path, data: dict[str, Any]) -> Path:
    """Serialise with sorted keys into a temp file, then rename over path."""
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def print_summary(report: dict[str, Any]):
    """Print a summary of a run to the console."""
    print("\n" + "=" * 60)
    print(f"INVARIANT-KIT - {report.get('name') or 'problem'} ({report.get('kind')})")
    print("=" * 60)

    for job in report.get("jobs", []):
        line = f"  [{job['outcome'].upper():>12}] {job['index']:02d} {job['job']}"
        if job.get("verdict"):
            line += f": {job['verdict']}"
        print(line)
        if job.get("error"):
            print(f"      error: {job['error']}")
        for caveat in job.get("caveats", []):
            print(f"      note: {caveat}")

    print("\n" + "-" * 60)
    print(f"Overall outcome: {report.get('outcome')}")
    print("=" * 60)
