"""Machine-readable report files: JSON, full-precision CSV, figures, metadata.

Report bytes are a pure function of the resolved configuration and inputs:
keys are sorted, floats use shortest round-trip representation in JSON and
17-significant-digit scientific notation in CSV, and anything wall-clock
dependent lives in a separate ``.meta.json`` sidecar so repeated runs with
the same seed produce byte-identical reports.
"""

from __future__ import annotations

import datetime
import json
import platform
from pathlib import Path

__all__ = ["write_report", "format_float", "csv_lines"]

SCHEMA = "radonlab-report/1"


def format_float(x) -> str:
    return "%.17e" % float(x)


def csv_lines(header, rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(
            format_float(v) if isinstance(v, float) else str(v) for v in row
        ))
    return "\n".join(out) + "\n"


def write_report(base_path, command: str, config: dict, report: dict,
                 csv_header=None, csv_rows=None, figure_fn=None,
                 runtime_s: float | None = None) -> dict:
    """Write <base>.json (+ optional .csv, .png) and a .meta.json sidecar.

    Returns the paths written.  The JSON report embeds the full resolved
    config for reproducibility and carries no timestamps.
    """
    base = Path(base_path)
    base.parent.mkdir(parents=True, exist_ok=True)
    paths = {}

    doc = {"schema": SCHEMA, "command": command, "config": config,
           "report": report}
    json_path = base.with_suffix(".json")
    json_path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    paths["json"] = str(json_path)

    if csv_rows is not None:
        csv_path = base.with_suffix(".csv")
        csv_path.write_text(csv_lines(csv_header, csv_rows))
        paths["csv"] = str(csv_path)

    if figure_fn is not None:
        png_path = base.with_suffix(".png")
        figure_fn(str(png_path))
        paths["figure"] = str(png_path)

    meta = {
        "written_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "platform": platform.platform(),
        "python": platform.python_version(),
    }
    if runtime_s is not None:
        meta["runtime_seconds"] = runtime_s
    meta_path = base.parent / (base.name + ".meta.json")
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    paths["meta"] = str(meta_path)
    return paths
