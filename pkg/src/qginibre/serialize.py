"""CSV / JSON writers for tables, eigenvalue dumps and reports.

CSV floats use 17 significant digits; every CSV written to a path gets a
``<stem>.meta.json`` sidecar with parameters and provenance.
"""

import csv
import io
import json
from pathlib import Path

import numpy as np

from qginibre import __version__


def fmt(x):
    return format(float(x), ".17g")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps_json(obj):
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def provenance(extra):
    return {"library": "qginibre", "version": __version__, **extra}


def write_output(path, fmt_name, header, rows, payload, meta, stream):
    """Write a CSV (plus sidecar) or JSON document to ``path``, or to ``stream`` if path is None."""
    meta = provenance(meta)
    if fmt_name == "json":
        text = dumps_json({"meta": meta, **payload})
    else:
        text = csv_text(header, rows)
    if path is None:
        stream.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    if fmt_name == "csv":
        sidecar_path(path).write_text(dumps_json(meta))
