"""Deterministic JSON and CSV writers.

Floats are written with ``repr`` (shortest round-trip form), keys are
sorted, and nothing time- or host-dependent is recorded, so identical
inputs give byte-identical files.
"""

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__


def plain(obj):
    """Convert numpy scalars/arrays and dataclasses to JSON-ready Python values."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return plain(obj.to_dict() if hasattr(obj, "to_dict") else asdict(obj))
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def envelope(config, body, grid=None, scheme=None):
    """Report wrapper: body plus config, its hash, seed, tolerances and version."""
    return plain({
        "version": __version__,
        "subcommand": config.subcommand,
        "seed": config.seed,
        "config": config.to_dict()["params"],
        "config_hash": config.digest(),
        "tolerances": config.tolerances(),
        "grid": grid,
        "scheme": scheme,
        "result": body,
    })


def dumps(obj):
    return json.dumps(plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def _cell(v):
    v = plain(v)
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


def write_csv(path, columns, rows):
    """Rows are dicts keyed by column name; missing keys give empty cells."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
    return path
