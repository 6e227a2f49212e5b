"""JSON relation documents.

A document is an object with ``kind`` in ``graph_span``, ``operator``,
``pair`` or ``product`` plus ``dim_h``/``dim_k`` and a kind-specific
payload of row-major nested lists::

    {"kind": "graph_span", "dim_h": 2, "dim_k": 2, "pairs": [[1, 0, 0, 1], [0, 0, 1, 0]]}
    {"kind": "operator", "dim_h": 2, "dim_k": 2, "matrix": [[1, 0], [0, 3]]}
    {"kind": "pair", "dim_h": 2, "dim_k": 2, "a": [[1, 0], [0, 0]], "b": [[1, 0], [0, 1]]}
    {"kind": "product", "dim_h": 2, "dim_k": 2, "x": [[1, 0]], "y": [[1, 0]]}

``graph_span`` rows are concatenated ``(f, f')`` vectors.  An optional
``tolerances`` object overrides fields of :class:`ToleranceConfig`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import relation as rl
from . import subspace as sp
from .exceptions import RelkitError
from .relation import LinearRelation
from .subspace import DEFAULT_TOL, ToleranceConfig

KINDS = ("graph_span", "operator", "pair", "product")


class DocumentError(RelkitError, ValueError):
    """Malformed document; ``location`` says where."""

    def __init__(self, message, location="$"):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True, eq=False)
class RelationDocument:
    kind: str
    dim_h: int
    dim_k: int
    payload: dict
    tolerances: Optional[dict] = None

    def tol(self, base: ToleranceConfig = DEFAULT_TOL) -> ToleranceConfig:
        if not self.tolerances:
            return base
        return base.replace(**self.tolerances)

    def to_relation(self, tol: ToleranceConfig = DEFAULT_TOL) -> LinearRelation:
        p = self.payload
        if self.kind == "graph_span":
            return rl.from_graph_span(list(p["pairs"]), self.dim_h, self.dim_k, tol)
        if self.kind == "operator":
            return rl.from_operator(p["matrix"], tol)
        if self.kind == "product":
            x = sp.span(list(p["x"]), tol, ambient_dim=self.dim_h)
            y = sp.span(list(p["y"]), tol, ambient_dim=self.dim_k)
            return rl.product_space(x, y)
        from .pairs import pair_relation

        return pair_relation(p["a"], p["b"], tol).relation

    def to_json(self) -> dict:
        out = {"kind": self.kind, "dim_h": self.dim_h, "dim_k": self.dim_k}
        for key, value in self.payload.items():
            out[key] = np.asarray(value, dtype=float).tolist()
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        return out


def _matrix(obj, key, rows, cols, location):
    """Validate a nested list; ``rows``/``cols`` of ``None`` accept any size."""
    if key not in obj:
        raise DocumentError(f"missing field '{key}'", location)
    value = obj[key]
    loc = f"{location}.{key}"
    if not isinstance(value, list):
        raise DocumentError("expected a list of rows", loc)
    out = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise DocumentError("expected a list of numbers", f"{loc}[{i}]")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise DocumentError(f"expected a number, got {x!r}", f"{loc}[{i}][{j}]")
        if cols is not None and len(row) != cols:
            raise DocumentError(f"row has length {len(row)}, expected {cols}", f"{loc}[{i}]")
        out.append([float(x) for x in row])
    if rows is not None and len(out) != rows:
        raise DocumentError(f"has {len(out)} rows, expected {rows}", loc)
    arr = np.array(out, dtype=float) if out else np.zeros((0, cols or 0))
    if not np.all(np.isfinite(arr)):
        raise DocumentError("contains non-finite numbers", loc)
    return arr


def _dim(obj, key, location):
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise DocumentError(f"'{key}' must be a positive integer", location)
    return value


def parse_document(obj, location="$") -> RelationDocument:
    if not isinstance(obj, dict):
        raise DocumentError("document must be a JSON object", location)
    kind = obj.get("kind")
    if kind not in KINDS:
        raise DocumentError(f"'kind' must be one of {', '.join(KINDS)}; got {kind!r}", location)
    h, k = _dim(obj, "dim_h", location), _dim(obj, "dim_k", location)
    if kind == "graph_span":
        payload = {"pairs": _matrix(obj, "pairs", None, h + k, location)}
    elif kind == "operator":
        payload = {"matrix": _matrix(obj, "matrix", k, h, location)}
    elif kind == "product":
        payload = {"x": _matrix(obj, "x", None, h, location), "y": _matrix(obj, "y", None, k, location)}
    else:
        a = _matrix(obj, "a", h, None, location)
        b = _matrix(obj, "b", k, None, location)
        if a.shape[1] != b.shape[1]:
            raise DocumentError(f"'a' has {a.shape[1]} columns but 'b' has {b.shape[1]}", location)
        payload = {"a": a, "b": b}
    tols = obj.get("tolerances")
    if tols is not None:
        names = {f.name for f in fields(ToleranceConfig)}
        if not isinstance(tols, dict) or not set(tols) <= names:
            raise DocumentError(f"'tolerances' keys must be among {sorted(names)}", f"{location}.tolerances")
        try:
            DEFAULT_TOL.replace(**tols)
        except (TypeError, ValueError) as exc:
            raise DocumentError(str(exc), f"{location}.tolerances") from None
    return RelationDocument(kind, h, k, payload, tols)


def loads(text: str) -> RelationDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
    return parse_document(obj)


def load(path) -> RelationDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError(f"cannot read file: {exc.strerror}", str(path)) from None
    return loads(text)


def relation_document(t: LinearRelation) -> RelationDocument:
    """``graph_span`` document whose rows are the graph frame columns."""
    return RelationDocument("graph_span", t.dim_h, t.dim_k, {"pairs": t.graph.frame.T.copy()})


def operator_document(m) -> RelationDocument:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    return RelationDocument("operator", m.shape[1], m.shape[0], {"matrix": m})


def subspace_json(s: sp.Subspace) -> dict:
    return {"ambient_dim": s.ambient_dim, "dim": s.dim, "frame": s.frame.T.tolist()}
