"""JSON formats: report lines, matrix files and causal-spec files.

Report lines are UTF-8 JSON objects, one per line, with keys sorted and
compact separators so that emit -> parse -> emit is byte-identical.
Complex numbers are ``[re, im]`` pairs; matrices are row-major nested lists.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, TextIO

import numpy as np

from .products import CausalSpec

SCHEMA_VERSION = 1
REPORT_KINDS = ("trial", "summary", "search", "oracle")


class SchemaError(ValueError):
    pass


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers to plain JSON values.

    Non-finite floats become ``None``.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(
        to_jsonable(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False,
        allow_nan=False,
    )


def report_line(kind: str, payload: dict) -> str:
    if kind not in REPORT_KINDS:
        raise SchemaError(f"unknown report kind {kind!r}")
    return dumps({"schema_version": SCHEMA_VERSION, "kind": kind, "payload": payload})


def parse_report_line(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"report line is not JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise SchemaError("report line must be a JSON object")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {obj.get('schema_version')!r}")
    if obj.get("kind") not in REPORT_KINDS:
        raise SchemaError(f"unknown report kind {obj.get('kind')!r}")
    if not isinstance(obj.get("payload"), dict):
        raise SchemaError("payload must be a JSON object")
    if set(obj) != {"schema_version", "kind", "payload"}:
        raise SchemaError(f"unexpected keys {sorted(set(obj) - {'schema_version', 'kind', 'payload'})}")
    return obj


def write_lines(lines: Iterable[str], out: TextIO) -> None:
    for line in lines:
        out.write(line)
        out.write("\n")


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "n": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_dict(payload: dict) -> np.ndarray:
    try:
        n = int(payload["n"])
        entries = np.asarray(payload["entries"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed matrix object: {exc}") from None
    if entries.shape != (n, n, 2):
        raise SchemaError(f"matrix entries have shape {entries.shape}, expected ({n}, {n}, 2)")
    return entries[..., 0] + 1j * entries[..., 1]


def save_matrix(m: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(dumps(matrix_to_dict(m)) + "\n", encoding="utf-8")


def load_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_spec(path: str | Path) -> CausalSpec:
    """Read a ``{"n", "T", "sigma"}`` spec file; raises ``InvalidSpecError``."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return CausalSpec.from_dict(payload)


def save_spec(spec: CausalSpec, path: str | Path) -> None:
    Path(path).write_text(dumps(spec.to_dict()) + "\n", encoding="utf-8")
