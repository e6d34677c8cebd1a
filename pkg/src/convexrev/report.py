"""Bit-stable serialization of reports plus SVG rendering of 2-d bodies.

JSON output uses sorted keys and fixed 17-significant-digit float formatting,
so identical inputs produce identical bytes.  Trial runtimes are volatile and
are excluded from serialized records unless explicitly requested.
"""

import csv
import io
import json

import numpy as np

from .bodies import ConvexBody, GeometryError
from .ops import touch_points
from .sampling import sphere_directions


def _canonical(obj):
    """Convert to plain JSON types, rejecting non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not np.isfinite(f):
            raise GeometryError("reports must not contain non-finite values")
        return f
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json_dict"):
        return _canonical(obj.to_json_dict())
    raise GeometryError(f"cannot serialize object of type {type(obj).__name__}")


def _dump(obj, out):
    if isinstance(obj, dict):
        out.write("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.write(",")
            out.write(json.dumps(key))
            out.write(":")
            _dump(obj[key], out)
        out.write("}")
    elif isinstance(obj, list):
        out.write("[")
        for i, v in enumerate(obj):
            if i:
                out.write(",")
            _dump(v, out)
        out.write("]")
    elif isinstance(obj, float):
        out.write(format(obj, ".17g"))
    else:
        out.write(json.dumps(obj))


def canonical_json(obj):
    """Deterministic JSON text: sorted keys, %.17g floats, newline-terminated."""
    buf = io.StringIO()
    _dump(_canonical(obj), buf)
    buf.write("\n")
    return buf.getvalue()


def records_payload(records, include_runtime=False):
    from .verify import summarize

    return {"records": [r.to_json_dict(include_runtime=include_runtime) for r in records],
            "summary": summarize(records)}


def emit_report(data, fmt="json", path=None, include_runtime=False):
    """Serialize trial records, a scan report, or any JSON-able payload.

    ``data`` may be a list of TrialRecord, a ScanReport, or a plain dict.
    Returns the serialized text; writes it to ``path`` when given.
    """
    if isinstance(data, (list, tuple)):
        if len(data) == 0:
            raise GeometryError("nothing to report")
        payload = records_payload(list(data), include_runtime=include_runtime)
        rows = [r.to_json_dict(include_runtime=include_runtime) for r in data]
    elif hasattr(data, "to_json_dict"):
        payload = data.to_json_dict()
        rows = None
    elif isinstance(data, dict):
        payload = data
        rows = None
    else:
        raise GeometryError("unsupported report payload")

    if fmt == "json":
        text = canonical_json(payload)
    elif fmt == "csv":
        text = _to_csv(payload, rows)
    else:
        raise GeometryError(f"unknown report format {fmt!r}")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IOError(f"cannot write report to {path}: {exc}") from exc
    return text


def _fmt_cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (dict, list)):
        return json.dumps(_canonical(v), sort_keys=True)
    return "" if v is None else str(v)


def _to_csv(payload, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows is not None:
        keys = []
        for r in rows:
            flat = _flatten_record(r)
            for k in flat:
                if k not in keys:
                    keys.append(k)
        writer.writerow(keys)
        for r in rows:
            flat = _flatten_record(r)
            writer.writerow([_fmt_cell(flat.get(k)) for k in keys])
        return buf.getvalue()
    if "pairwise_residuals" in payload:
        matrix = payload["pairwise_residuals"]
        m = len(matrix)
        writer.writerow(["shadow"] + [f"u{j}" for j in range(m)])
        for i in range(m):
            writer.writerow([f"u{i}"] + [_fmt_cell(float(x)) for x in matrix[i]])
        return buf.getvalue()
    writer.writerow(sorted(payload))
    writer.writerow([_fmt_cell(payload[k]) for k in sorted(payload)])
    return buf.getvalue()


def _flatten_record(rec):
    flat = {}
    for k, v in rec.items():
        if isinstance(v, dict):
            for kk, vv in sorted(v.items()):
                flat[f"{k}.{kk}"] = vv
        else:
            flat[k] = v
    return flat


def body_outline(body, samples=256):
    """Boundary polygon (counterclockwise) of a 2-d body."""
    if body.dim != 2:
        raise GeometryError("outline rendering is for 2-d bodies only")
    if body.representation == "point-cloud":
        from scipy.spatial import ConvexHull

        hull = ConvexHull(body.points)
        return body.points[hull.vertices]
    theta = 2.0 * np.pi * np.arange(samples) / samples
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    return touch_points(body, dirs)


def emit_svg(body, path=None, axes=None, samples=256, size=480):
    """Draw a 2-d body as an SVG polygon, with optional axis lines.

    ``axes`` is an iterable of Line objects (revolution or principal axes)
    drawn through the figure.
    """
    pts = body_outline(body, samples=samples)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.08 * span
    lo -= pad
    width = span + 2 * pad

    def to_px(p):
        q = (p - lo) / width * size
        return q[0], size - q[1]

    poly = " ".join(f"{x:.3f},{y:.3f}" for x, y in (to_px(p) for p in pts))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<polygon points="{poly}" fill="#dbeafe" stroke="#1d4ed8" stroke-width="1.5"/>']
    for line in axes or []:
        d = line.direction
        b = line.base_point
        a0 = to_px(b - d * width)
        a1 = to_px(b + d * width)
        parts.append(f'<line x1="{a0[0]:.3f}" y1="{a0[1]:.3f}" x2="{a1[0]:.3f}" '
                     f'y2="{a1[1]:.3f}" stroke="#dc2626" stroke-width="1" '
                     f'stroke-dasharray="6 4"/>')
    parts.append("</svg>\n")
    text = "\n".join(parts)
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IOError(f"cannot write SVG to {path}: {exc}") from exc
    return text
