"""File formats: JSON-lines point sets and graphs, JSON reports, CSV tables."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .graphgen import ModelParams, WeightedGraph, from_edges
from .pointprocess import BoxGeometry, PointSet
from .weights import WeightLaw, WeightVector

FORMAT_VERSION = 1


def _clean(obj):
    # JSON has no inf/nan and no numpy scalars
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_clean(obj), sort_keys=True, indent=indent, allow_nan=False)


def _float(v) -> float:
    return float(v) if isinstance(v, str) else v


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# point sets


def _geometry_dict(geom: BoxGeometry) -> dict:
    return {"dim": geom.dim, "side": geom.side, "topology": geom.topology.value}


def write_pointset(path, ps: PointSet, weights: WeightVector | None = None) -> Path:
    """Header line, then one JSON array per point (coordinates, then the weight if present)."""
    if weights is not None and len(weights) != len(ps):
        raise ValueError("weights and points differ in length")
    header = {
        "format": "sfperc-points", "version": FORMAT_VERSION, **_geometry_dict(ps.geometry),
        "intensity": ps.intensity, "seed": ps.seed, "count": len(ps),
        "weights": None if weights is None else {"law": weights.law.to_dict(), "seed": weights.seed},
    }
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(dumps(header, indent=None) + "\n")
        for k in range(len(ps)):
            row = ps.points[k].tolist()
            if weights is not None:
                row.append(float(weights.values[k]))
            fh.write(json.dumps(row) + "\n")
    return path


def _read_lines(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty file")
    return json.loads(lines[0]), lines[1:]


def _check_header(header: dict, kind: str, path):
    if header.get("format") != kind:
        raise ConfigError(f"{path}: not a {kind} file")
    if header.get("version") != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported version {header.get('version')}")


def read_pointset(path) -> tuple[PointSet, WeightVector | None]:
    header, lines = _read_lines(path)
    _check_header(header, "sfperc-points", path)
    geom = BoxGeometry(header["dim"], _float(header["side"]), header["topology"])
    rows = np.array([json.loads(ln) for ln in lines], dtype=float).reshape(len(lines), -1)
    if rows.shape[0] != header["count"]:
        raise ConfigError(f"{path}: header announces {header['count']} points, found {rows.shape[0]}")
    d = geom.dim
    ps = PointSet(geom, rows[:, :d] if rows.size else np.zeros((0, d)), _float(header["intensity"]), header["seed"])
    wv = None
    if header.get("weights") is not None:
        law = _law_from_dict(header["weights"]["law"])
        wv = WeightVector(rows[:, d] if rows.size else np.zeros(0), header["weights"]["seed"], law)
    return ps, wv


def _law_from_dict(d: dict) -> WeightLaw:
    return WeightLaw.from_dict({k: _float(v) if k != "kind" else v for k, v in d.items()})


# ---------------------------------------------------------------------------
# graphs


def write_graph(path, g: WeightedGraph) -> Path:
    """Header line, one ``{"v": ...}`` line per vertex, one ``{"e": [i, j]}`` line per edge (``i < j``)."""
    header = {
        "format": "sfperc-graph", "version": FORMAT_VERSION, **_geometry_dict(g.points.geometry),
        "intensity": g.points.intensity, "point_seed": g.points.seed, "weight_seed": g.weights.seed,
        "edge_seed": g.edge_seed, "engine": g.engine, "model": g.params.to_dict(),
        "n_vertices": g.n_vertices, "n_edges": g.n_edges,
    }
    ei, ej = g.edges()
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(dumps(header, indent=None) + "\n")
        for k in range(g.n_vertices):
            fh.write(json.dumps({"v": k, "x": g.points.points[k].tolist(), "w": float(g.weights.values[k])}) + "\n")
        for a, b in zip(ei.tolist(), ej.tolist()):
            fh.write(json.dumps({"e": [a, b]}) + "\n")
    return path


def read_graph(path) -> WeightedGraph:
    header, lines = _read_lines(path)
    _check_header(header, "sfperc-graph", path)
    geom = BoxGeometry(header["dim"], _float(header["side"]), header["topology"])
    n = header["n_vertices"]
    pts = np.zeros((n, geom.dim))
    w = np.zeros(n)
    ei, ej = [], []
    for ln in lines:
        rec = json.loads(ln)
        if "v" in rec:
            pts[rec["v"]] = rec["x"]
            w[rec["v"]] = rec["w"]
        else:
            ei.append(rec["e"][0])
            ej.append(rec["e"][1])
    if len(ei) != header["n_edges"]:
        raise ConfigError(f"{path}: header announces {header['n_edges']} edges, found {len(ei)}")
    model = header["model"]
    params = ModelParams(model["d"], _float(model["alpha"]), _law_from_dict(model["law"]), _float(model["intensity"]))
    ps = PointSet(geom, pts, _float(header["intensity"]), header["point_seed"])
    wv = WeightVector(w, header["weight_seed"], params.law)
    return from_edges(ps, wv, params, np.array(ei, dtype=np.int64), np.array(ej, dtype=np.int64),
                      header["engine"], header["edge_seed"])


# ---------------------------------------------------------------------------
# reports and tables


def estimator_record(operation: str, params: dict, seeds: dict, value, runtime_ms: float, stderr=None,
                     **extra) -> dict:
    rec = {"operation": operation, "params": params, "seeds": seeds, "value": value, "runtime_ms": runtime_ms}
    if stderr is not None:
        rec["stderr"] = stderr
    rec.update(extra)
    return rec


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + "\n")
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_tail_csv(path, s, prob) -> Path:
    return write_csv(path, ["s", "P(D>s)"], zip(np.asarray(s).tolist(), np.asarray(prob, dtype=float)))
