"""Reading and writing hypergraphs, matrices and tabular inputs.

Hypergraph JSON::

    {"rho": {"kind": "power", "sigma": -1.0},
     "vertices": ["a", "b"],
     "edges": [{"id": "e", "w": 1.0,
                "members": [{"v": "a", "q1": 1.0, "q2": 1.0}, ...]}],
     "meta": {...}}

``w`` defaults to 1 and ``meta`` is optional; any other key is an error.
Floats are written with Python's shortest round-trip representation, so
``parse(serialize(h)) == h`` holds exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .edvw import FeatureTable, ProteinChain
from .errors import FormatError, ValidationError
from .hypergraph import RHO_KINDS, GeneralizedHypergraph, RhoSpec, build_hypergraph


def _keys(obj, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise FormatError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise FormatError(f"unknown field(s) {sorted(unknown)} in {where}")
    missing = required - set(obj)
    if missing:
        raise FormatError(f"missing field(s) {sorted(missing)} in {where}")


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FormatError(f"{where} must be a number")
    return float(x)


def rho_to_dict(rho: RhoSpec) -> dict:
    return rho.to_dict()


def rho_from_dict(d) -> RhoSpec:
    _keys(d, {"kind", "sigma", "table"}, {"kind"}, "rho")
    kind = d["kind"]
    if kind not in RHO_KINDS:
        raise FormatError(f"unknown rho kind {kind!r}")
    if kind == "power":
        _keys(d, {"kind", "sigma"}, {"kind"}, "rho")
        return RhoSpec("power", _number(d.get("sigma", -1.0), "rho.sigma"))
    if kind == "custom_table":
        _keys(d, {"kind", "table"}, {"kind", "table"}, "rho")
        try:
            table = tuple((_number(k, "rho.table"), _number(v, "rho.table")) for k, v in d["table"])
        except (TypeError, ValueError):
            raise FormatError("rho.table must be a list of [degree, value] pairs") from None
        return RhoSpec("custom_table", table=table)
    _keys(d, {"kind"}, {"kind"}, "rho")
    return RhoSpec(kind)


def hypergraph_to_dict(h: GeneralizedHypergraph) -> dict:
    edges = []
    for j, e in enumerate(h.edge_ids):
        members = [{"v": h.vertex_ids[v], "q1": q1, "q2": q2} for v, q1, q2 in h.members(j)]
        edges.append({"id": e, "w": float(h.w[j]), "members": members})
    out = {"rho": rho_to_dict(h.rho), "vertices": list(h.vertex_ids), "edges": edges}
    if h.meta:
        out["meta"] = h.meta
    return out


def hypergraph_from_dict(d) -> GeneralizedHypergraph:
    """Parse the JSON object form.

    Raises
    ------
    FormatError
        Schema violations (unknown or missing keys, wrong types).
    ValidationError
        Well-formed input that violates a hypergraph invariant.
    """
    _keys(d, {"rho", "vertices", "edges", "meta"}, {"vertices", "edges"}, "hypergraph")
    rho = rho_from_dict(d["rho"]) if "rho" in d else RhoSpec()
    vertices = d["vertices"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise FormatError("vertices must be a list of strings")
    known = set(vertices)
    if not isinstance(d["edges"], list):
        raise FormatError("edges must be a list")
    records, weights = [], {}
    for i, e in enumerate(d["edges"]):
        _keys(e, {"id", "w", "members"}, {"id", "members"}, f"edges[{i}]")
        eid = e["id"]
        if not isinstance(eid, str):
            raise FormatError(f"edges[{i}].id must be a string")
        if eid in weights:
            raise ValidationError(f"duplicate edge id {eid!r}")
        weights[eid] = _number(e.get("w", 1.0), f"edges[{i}].w")
        if not isinstance(e["members"], list) or not e["members"]:
            raise ValidationError(f"edge {eid!r} has no members")
        for m in e["members"]:
            _keys(m, {"v", "q1", "q2"}, {"v", "q1", "q2"}, f"edge {eid!r} member")
            if m["v"] not in known:
                raise FormatError(f"edge {eid!r} references unknown vertex {m['v']!r}")
            records.append((m["v"], eid, _number(m["q1"], "q1"), _number(m["q2"], "q2")))
    h = build_hypergraph(records, weights, rho, vertices=vertices, default_weight=None)
    meta = d.get("meta", {})
    if not isinstance(meta, dict):
        raise FormatError("meta must be an object")
    if meta:
        h = GeneralizedHypergraph(h.vertex_ids, h.edge_ids, h.w, h.Q1, h.Q2, h.rho, meta)
    return h


def dumps(obj) -> str:
    return json.dumps(obj, allow_nan=False) + "\n"


def dumps_hypergraph(h: GeneralizedHypergraph) -> str:
    return dumps(hypergraph_to_dict(h))


def loads_hypergraph(text: str) -> GeneralizedHypergraph:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return hypergraph_from_dict(d)


def load_hypergraph(path) -> GeneralizedHypergraph:
    return loads_hypergraph(Path(path).read_text(encoding="utf-8"))


def save_hypergraph(h: GeneralizedHypergraph, path) -> None:
    Path(path).write_text(dumps_hypergraph(h), encoding="utf-8")


def jsonable(x):
    """Replace infinities by ``{"infinite": true}`` (negative: ``{"infinite": -1}``)."""
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return {"infinite": True} if x > 0 else {"infinite": -1}
        if math.isnan(x):
            raise ValidationError("NaN cannot be serialized")
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def matrix_to_dict(M, vertex_ids, sparse: bool = False) -> dict:
    """Dense ``{"vertices", "matrix"}`` or coordinate ``{"vertices", "shape", "entries"}``."""
    if sparse:
        C = sp.coo_matrix(M)
        order = np.lexsort((C.col, C.row))
        entries = [[int(C.row[k]), int(C.col[k]), float(C.data[k])] for k in order]
        return {"vertices": list(vertex_ids), "shape": list(C.shape), "entries": entries}
    A = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
    return {"vertices": list(vertex_ids), "matrix": A.tolist()}


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8 text ({exc})") from None
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    body = [[c.strip() for c in r] for r in rows[1:]]
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise FormatError(f"{path}: row {i + 2} has {len(r)} fields, expected {len(header)}")
    return header, body


def _float(s: str, where: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise FormatError(f"{where}: {s!r} is not a number") from None


def read_features(path, modality: str | None = None) -> FeatureTable:
    """Features from CSV (``id,f1,...,fd`` with a header) or a ``.npy`` array.

    For ``.npy`` input the ids are the row numbers ``"0", "1", ...``.
    """
    path = Path(path)
    if path.suffix == ".npy":
        try:
            X = np.load(path, allow_pickle=False)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None
        return FeatureTable.from_array(X, modality)
    header, body = _read_csv(path)
    if len(header) < 2:
        raise FormatError(f"{path}: expected an id column and at least one feature column")
    ids = [r[0] for r in body]
    X = [[_float(c, str(path)) for c in r[1:]] for r in body]
    return FeatureTable(ids, np.array(X, dtype=float).reshape(len(ids), len(header) - 1),
                        modality)


def read_protein(path) -> ProteinChain:
    """Residues from CSV with columns ``index,aa_code,x,y,z`` (extra columns are features)."""
    header, body = _read_csv(path)
    if [h.lower() for h in header[:5]] != ["index", "aa_code", "x", "y", "z"]:
        raise FormatError(f"{path}: header must start with index,aa_code,x,y,z")
    try:
        idx = [int(r[0]) for r in body]
    except ValueError:
        raise FormatError(f"{path}: residue index must be an integer") from None
    coords = [[_float(c, str(path)) for c in r[2:5]] for r in body]
    feats = None
    if len(header) > 5:
        feats = np.array([[_float(c, str(path)) for c in r[5:]] for r in body])
    return ProteinChain(idx, [r[1] for r in body], np.array(coords).reshape(-1, 3), feats)


def read_incidence(path) -> list[tuple]:
    """Incidence records from CSV with columns ``vertex,edge,q1,q2``."""
    header, body = _read_csv(path)
    if [h.lower() for h in header] != ["vertex", "edge", "q1", "q2"]:
        raise FormatError(f"{path}: header must be vertex,edge,q1,q2")
    return [(r[0], r[1], _float(r[2], str(path)), _float(r[3], str(path))) for r in body]


def read_edge_weights(path) -> dict:
    header, body = _read_csv(path)
    if [h.lower() for h in header] != ["edge", "w"]:
        raise FormatError(f"{path}: header must be edge,w")
    return {r[0]: _float(r[1], str(path)) for r in body}


SPLITS = ("train", "val", "test")


def read_labels(path, vertex_ids) -> tuple[np.ndarray, dict, list]:
    """Labels and split masks aligned to ``vertex_ids``.

    CSV columns ``id,label,split`` with split in ``train``/``val``/``test``
    (or empty for unused vertices).  Label strings are mapped to integers in
    sorted order; that order is returned as the third element.
    """
    header, body = _read_csv(path)
    if [h.lower() for h in header] != ["id", "label", "split"]:
        raise FormatError(f"{path}: header must be id,label,split")
    index = {v: i for i, v in enumerate(vertex_ids)}
    n = len(vertex_ids)
    raw = [None] * n
    masks = {s: np.zeros(n, dtype=bool) for s in SPLITS}
    for vid, lab, split in body:
        if vid not in index:
            raise ValidationError(f"{path}: unknown vertex {vid!r}")
        i = index[vid]
        if raw[i] is not None:
            raise ValidationError(f"{path}: vertex {vid!r} labelled twice")
        raw[i] = lab
        if split:
            if split not in masks:
                raise FormatError(f"{path}: unknown split {split!r}")
            masks[split][i] = True
    missing = [v for v, r in zip(vertex_ids, raw) if r is None]
    if missing:
        raise ValidationError(f"{path}: no label for vertex {missing[0]!r}")
    classes = sorted(set(raw))
    lookup = {c: k for k, c in enumerate(classes)}
    return np.array([lookup[r] for r in raw]), masks, classes
