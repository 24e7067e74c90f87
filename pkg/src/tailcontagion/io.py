"""File formats: sample CSV ``z1,z2``, JSON records, and the provenance header.

CSV files may start with ``#`` comment lines; the first such line written by
this package holds the provenance record as JSON.  Floats are written with
``repr`` so that reading a file back reproduces the numbers bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .models import BivariateSample

TOOL = "tailcontagion"


def version() -> str:
    from . import __version__

    return __version__


def provenance(subcommand: str, args: dict | None = None, seed: int | None = None) -> dict:
    return {
        "tool": TOOL,
        "version": version(),
        "subcommand": subcommand,
        "args": dict(args or {}),
        "seed": seed,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
    }


def with_header(csv_text: str, prov: dict | None) -> str:
    if prov is None:
        return csv_text
    return "# " + json.dumps(prov, sort_keys=True, default=str) + "\n" + csv_text


def read_header(path) -> dict | None:
    """Provenance record of a CSV written by this package, if any."""
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("# "):
        try:
            return json.loads(first[2:])
        except json.JSONDecodeError:
            return None
    return None


def sample_to_csv(sample: BivariateSample) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z1", "z2"])
    for a, b in zip(sample.z1.tolist(), sample.z2.tolist()):
        w.writerow([repr(a), repr(b)])
    return buf.getvalue()


def write_sample_csv(sample: BivariateSample, path, prov: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(with_header(sample_to_csv(sample), prov))
    return path


def parse_sample_csv(text: str) -> BivariateSample:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InsufficientDataError("sample CSV is empty")
    rows = list(csv.reader(lines))
    header = [c.strip().lower() for c in rows[0]]
    if header[:2] != ["z1", "z2"]:
        raise ParameterError(f"expected header 'z1,z2', got {','.join(header)!r}")
    try:
        data = [(float(r[0]), float(r[1])) for r in rows[1:]]
    except (IndexError, ValueError) as exc:
        raise ParameterError(f"malformed sample row: {exc}") from None
    if not data:
        raise InsufficientDataError("sample CSV has no rows")
    return BivariateSample.from_pairs(data)


def read_sample_csv(path) -> BivariateSample:
    return parse_sample_csv(Path(path).read_text())


def _clean(obj):
    """Make floats JSON-safe: infinities and NaN become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf" if obj < 0 else "nan"
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def to_json(obj: dict, prov: dict | None = None) -> str:
    payload = dict(obj)
    if prov is not None:
        payload["provenance"] = prov
    return json.dumps(_clean(payload), indent=2, default=str)


def write_json(obj: dict, path, prov: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(obj, prov) + "\n")
    return path


def write_text(text: str, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
