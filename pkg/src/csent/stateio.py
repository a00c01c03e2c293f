"""Text state files: versioned JSON with one matrix row per line.

Entries are ``[re, im]`` pairs written with ``repr`` (shortest round-trip
decimal), so parsing a serialized file reproduces the matrix exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CsentError
from .qmat import Layout
from .states import MultipartiteState

VERSION = 1
TOP_FIELDS = {"version", "layout", "matrix", "metadata"}
FACTOR_FIELDS = {"label", "dim", "party"}


class StateFileError(CsentError, ValueError):
    """Malformed state file; the message names the offending position."""


@dataclass(frozen=True, eq=False)
class StateFile:
    layout: Layout
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)
    version: int = VERSION

    def state(self) -> MultipartiteState:
        """Validated state; raises the violated invariant's error."""
        return MultipartiteState(self.matrix, self.layout)

    @classmethod
    def from_state(cls, rho: MultipartiteState, metadata: dict | None = None) -> "StateFile":
        return cls(rho.layout, np.asarray(rho.matrix, dtype=complex), dict(metadata or {}))


def _num(x) -> str:
    return repr(float(x))


def dumps(sf: StateFile) -> str:
    lay = ",\n    ".join(json.dumps({"label": f.label, "dim": f.dim, "party": f.party})
                         for f in sf.layout.factors)
    rows = []
    for row in sf.matrix:
        rows.append("[" + ", ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in row) + "]")
    body = ",\n    ".join(rows)
    meta = json.dumps(sf.metadata, sort_keys=True)
    return (f'{{\n  "version": {int(sf.version)},\n  "layout": [\n    {lay}\n  ],\n'
            f'  "matrix": [\n    {body}\n  ],\n  "metadata": {meta}\n}}\n')


def _fail(where: str, msg: str):
    raise StateFileError(f"{where}: {msg}")


def loads(text: str) -> StateFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        _fail("top level", "expected an object")
    extra = set(doc) - TOP_FIELDS
    if extra:
        _fail("top level", f"unknown fields {sorted(extra)}")
    for key in ("version", "layout", "matrix"):
        if key not in doc:
            _fail("top level", f"missing field {key!r}")
    if doc["version"] != VERSION:
        _fail("version", f"unsupported version {doc['version']!r}")
    if not isinstance(doc["layout"], list) or not doc["layout"]:
        _fail("layout", "expected a non-empty list")
    factors = []
    for i, f in enumerate(doc["layout"]):
        where = f"layout[{i}]"
        if not isinstance(f, dict):
            _fail(where, "expected an object")
        if set(f) != FACTOR_FIELDS:
            _fail(where, f"fields must be {sorted(FACTOR_FIELDS)}, got {sorted(f)}")
        if not isinstance(f["dim"], int) or isinstance(f["dim"], bool) or f["dim"] < 1:
            _fail(where, f"dim must be a positive integer, got {f['dim']!r}")
        factors.append((f["label"], f["dim"], f["party"]))
    try:
        layout = Layout.of(*factors)
    except CsentError as exc:
        _fail("layout", str(exc))
    d = layout.dim
    rows = doc["matrix"]
    if not isinstance(rows, list) or len(rows) != d:
        _fail("matrix", f"expected {d} rows for layout dims {layout.dims}")
    m = np.empty((d, d), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            n = len(row) if isinstance(row, list) else type(row).__name__
            _fail(f"matrix[{i}]", f"row has {n} entries, expected {d}")
        for j, z in enumerate(row):
            ok = (isinstance(z, list) and len(z) == 2
                  and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z))
            if not ok:
                _fail(f"matrix[{i}][{j}]", f"expected a [re, im] pair, got {z!r}")
            m[i, j] = complex(float(z[0]), float(z[1]))
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        _fail("metadata", "expected an object")
    return StateFile(layout, m, meta, VERSION)


def read(path) -> StateFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StateFileError(f"{path}: {exc.strerror}") from None
    return loads(text)


def write(path, sf: StateFile) -> None:
    Path(path).write_text(dumps(sf))
