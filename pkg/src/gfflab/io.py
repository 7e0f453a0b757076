"""Field files, CSV/JSON reports and SVG plots.

GFFB layout (little endian): magic ``b"GFFB"``, u16 version (1), u8 kind
(0 spectral, 1 lattice), u8 reserved (0), u32 dimension (cutoff or N), u64
seed, then the row-major f64 payload: the ``cutoff x cutoff`` alpha array or
the ``(N-1) x (N-1)`` interior values.
"""

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .exceptions import InvalidConfigError
from .lattice import LatticeField
from .spectral import SpectralField

MAGIC = b"GFFB"
VERSION = 1
KIND_SPECTRAL = 0
KIND_LATTICE = 1
_HEADER = struct.Struct("<4sHBBIQ")


def write_gffb(path, field):
    if isinstance(field, SpectralField):
        kind, dim, payload = KIND_SPECTRAL, field.cutoff, field.alpha
    elif isinstance(field, LatticeField):
        kind, dim, payload = KIND_LATTICE, field.n, field.values
    else:
        raise InvalidConfigError(f"cannot serialise {type(field).__name__}")
    header = _HEADER.pack(MAGIC, VERSION, kind, 0, dim, field.seed)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(payload, dtype="<f8").tobytes())


def read_gffb(path):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise InvalidConfigError(f"{path}: file too short for a GFFB header")
    magic, version, kind, reserved, dim, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidConfigError(f"{path}: bad magic {magic!r}")
    if version != VERSION or reserved != 0:
        raise InvalidConfigError(f"{path}: unsupported version {version} / reserved {reserved}")
    if kind == KIND_SPECTRAL:
        shape = (dim, dim)
    elif kind == KIND_LATTICE:
        shape = (dim - 1, dim - 1)
    else:
        raise InvalidConfigError(f"{path}: unknown field kind {kind}")
    expected = _HEADER.size + 8 * shape[0] * shape[1]
    if len(data) != expected:
        raise InvalidConfigError(f"{path}: expected {expected} bytes, found {len(data)}")
    payload = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(shape)
    if kind == KIND_SPECTRAL:
        return SpectralField(cutoff=dim, alpha=payload, seed=seed)
    return LatticeField(n=dim, values=payload, seed=seed)


def format_value(value):
    """Shortest round-tripping decimal for floats; plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row[h] for h in header]
            writer.writerow([format_value(v) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


HIGHPOINT_COLUMNS = ("N", "a", "threshold", "count", "seed")


def write_highpoints_csv(path, rows):
    write_csv(path, HIGHPOINT_COLUMNS, rows)


def read_highpoints_csv(path):
    """Rows of a high-point CSV as ``(N, a, threshold, count, seed)`` tuples."""
    rows = read_csv(path)
    if not rows:
        return []
    missing = set(HIGHPOINT_COLUMNS) - set(rows[0])
    if missing:
        raise InvalidConfigError(f"{path}: missing columns {sorted(missing)}")
    return [(int(r["N"]), float(r["a"]), float(r["threshold"]), int(r["count"]), int(r["seed"]))
            for r in rows]


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def _clean(obj):
    # JSON has no inf/nan; encode them as strings
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return str(float(obj))
    return obj


def dumps_json(obj):
    return json.dumps(_clean(obj), default=_json_default, indent=2, sort_keys=True)


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj) + "\n")


def _svg_document(body, size):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">\n'
            f'<rect width="{size}" height="{size}" fill="white" stroke="black"/>\n'
            f"{body}</svg>\n")


def write_points_svg(path, points, size=512, radius=1.5):
    """Scatter plot of points in the unit square (y axis pointing up)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    circles = "".join(
        f'<circle cx="{x * size:.3f}" cy="{(1 - y) * size:.3f}" r="{radius}" fill="crimson"/>\n'
        for x, y in pts)
    Path(path).write_text(_svg_document(circles, size))


def write_overlay_svg(path, polygons, colors=("navy", "darkorange"), size=512, margin=0.1):
    """Overlay of closed polygons, scaled to fill the canvas."""
    polys = [np.asarray(p, dtype=float) for p in polygons]
    allpts = np.vstack(polys)
    lo = allpts.min(axis=0)
    span = float(np.max(allpts.max(axis=0) - lo)) or 1.0
    scale = size * (1 - 2 * margin) / span

    def tx(p):
        x = (p[:, 0] - lo[0]) * scale + margin * size
        y = size - ((p[:, 1] - lo[1]) * scale + margin * size)
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(x, y))

    body = "".join(
        f'<polygon points="{tx(p)}" fill="none" stroke="{colors[k % len(colors)]}" stroke-width="1"/>\n'
        for k, p in enumerate(polys))
    Path(path).write_text(_svg_document(body, size))
