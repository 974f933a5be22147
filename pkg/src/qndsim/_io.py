"""Deterministic file output helpers.

Every file the package writes goes through these functions so that
identical inputs produce byte-identical files: floats are rendered with 17
significant digits (full round-trip precision), dict keys are sorted,
column orders are frozen by the callers, and writes land via an atomic
rename. Each file carries a leading manifest comment (CSV) or a
``_manifest`` entry (JSON) holding a hash of the run configuration so
outputs can be traced back to their inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile


def format_float(x) -> str:
    """Fixed 17-significant-digit rendering; exact for round-tripping."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def manifest_line(meta: dict) -> str:
    """Comment line with a short hash of the (sorted) run configuration."""
    canonical = "; ".join(
        "%s=%s" % (k, format_value(meta[k])) for k in sorted(meta)
    )
    digest = hashlib.sha256(canonical.encode()).hexdigest()[:16]
    return "# manifest %s %s" % (digest, canonical)


def atomic_write_text(path: str, text: str) -> None:
    """Write text then atomically rename into place."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(header, rows, meta: dict | None = None) -> str:
    lines = []
    if meta is not None:
        lines.append(manifest_line(meta))
    lines.append(",".join(str(h) for h in header))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path: str, header, rows, meta: dict | None = None) -> None:
    """CSV with a manifest comment line, frozen column order, LF endings."""
    atomic_write_text(path, render_csv(header, rows, meta=meta))


def _json_safe(obj):
    """Replace non-finite floats (JSON has no spelling for them)."""
    if isinstance(obj, dict):
        return {k: _json_safe(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    return obj


def render_json(obj: dict, meta: dict | None = None) -> str:
    payload = dict(obj)
    if meta is not None:
        canonical = "; ".join(
            "%s=%s" % (k, format_value(meta[k])) for k in sorted(meta)
        )
        payload["_manifest"] = {
            "sha256_16": hashlib.sha256(canonical.encode()).hexdigest()[:16],
            "config": canonical,
        }
    return json.dumps(_json_safe(payload), sort_keys=True, indent=2) + "\n"


def write_json(path: str, obj: dict, meta: dict | None = None) -> None:
    """JSON with sorted keys and an embedded manifest record."""
    atomic_write_text(path, render_json(obj, meta=meta))
