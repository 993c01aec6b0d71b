"""CSV and JSON sidecar writers.

CSV files use RFC 4180 quoting with CRLF line endings; floats are written
with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import dissproj
from dissproj.xp.experiments import SweepResult


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _clean(value):
    # JSON has no NaN or infinity
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def sidecar(result: SweepResult, cfg) -> dict:
    return _clean({
        "experiment": result.experiment,
        "model": cfg.model.name,
        "version": dissproj.__version__,
        "seed": cfg.seed,
        "tolerances": cfg.tolerances,
        "fit": result.fit,
        "rows": len(result.rows),
        "extra": result.extra,
        "config": cfg.raw,
    })


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_outputs(result: SweepResult, cfg, csv_path) -> tuple[Path, Path]:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        fh.write(csv_text(result))
    side = sidecar_path(csv_path)
    side.write_text(json.dumps(sidecar(result, cfg), indent=2, sort_keys=True) + "\n")
    return csv_path, side
