"""Deterministic JSON/CSV serialization and the published file formats.

Floats are written with 17 significant digits (full double round trip) and
dictionary keys are sorted, so byte-identical reruns are a meaningful
determinism check.  The stdlib json encoder cannot control float formatting,
hence the small writer here; reading uses json.loads as usual.
"""

from __future__ import annotations

import json
import math
from importlib import resources

from .errors import FormatError, ValidationError
from .filling import Filling, FillingParams
from .metric import FiniteMetricSpace, MetricGraph

_ESCAPES = {
    "\\": "\\\\", '"': '\\"', "\b": "\\b", "\f": "\\f",
    "\n": "\\n", "\r": "\\r", "\t": "\\t",
}


def _fmt_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _fmt(value, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return _fmt_str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"  # sentinels are reported via explicit flags
        return format(value, ".17g")
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = sorted(value.items(), key=lambda kv: str(kv[0]))
        body = ",\n".join(
            f"{pad}{_fmt_str(str(k))}: {_fmt(v, indent, level + 1)}" for k, v in items
        )
        return "{\n" + body + "\n" + close_pad + "}"
    if isinstance(value, (list, tuple)):
        seq = list(value)
        if not seq:
            return "[]"
        body = ",\n".join(f"{pad}{_fmt(v, indent, level + 1)}" for v in seq)
        return "[\n" + body + "\n" + close_pad + "]"
    if hasattr(value, "item"):  # numpy scalars
        return _fmt(value.item(), indent, level)
    raise FormatError(f"cannot serialize {type(value).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _fmt(obj, indent, 0) + "\n"


def dump_file(obj, path, schema: str | None = None):
    if schema is not None:
        validate_against_schema(obj, schema)
    text = dumps(obj)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def write_csv(path, header: list, rows: list):
    """Plot-ready CSV with .17g floats and a fixed newline."""
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return format(v, ".17g") if math.isfinite(v) else ""
        return str(v)

    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")


_SCHEMA_CACHE: dict = {}


def load_schema(name: str) -> dict:
    if name not in _SCHEMA_CACHE:
        ref = resources.files("hypfill").joinpath(f"schemas/{name}.schema.json")
        _SCHEMA_CACHE[name] = json.loads(ref.read_text())
    return _SCHEMA_CACHE[name]


def validate_against_schema(obj, name: str):
    import jsonschema

    try:
        jsonschema.validate(obj, load_schema(name))
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"{name} report fails its schema: {exc.message}") from exc


# -- graph / space / filling files ------------------------------------------

def graph_to_dict(g: MetricGraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [[u, v, length] for u, v, length in g.edges],
        "basepoint": g.basepoint,
    }


def graph_from_dict(obj: dict) -> MetricGraph:
    try:
        vertices = tuple(obj["vertices"])
        edges = tuple((e[0], e[1], float(e[2])) for e in obj["edges"])
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed graph object: {exc}") from exc
    return MetricGraph(vertices, edges, obj.get("basepoint"))


def save_graph(g: MetricGraph, path):
    dump_file(graph_to_dict(g), path, schema="graph")


def load_graph(path) -> MetricGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def space_to_dict(space: FiniteMetricSpace, meta: dict | None = None) -> dict:
    if space.coords is not None:
        points = [{"id": p, "coords": list(space.coords[p])} for p in space.points]
        obj = {"points": points, "metric": "euclidean"}
    else:
        points = [{"id": p} for p in space.points]
        obj = {"points": points, "metric": {"matrix": [list(r) for r in space.matrix]}}
    if meta:
        obj["meta"] = meta
    return obj


def space_from_dict(obj: dict) -> FiniteMetricSpace:
    try:
        ids = tuple(p["id"] for p in obj["points"])
        metric = obj["metric"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed space object: {exc}") from exc
    if metric == "euclidean":
        coords = {}
        for p in obj["points"]:
            if "coords" not in p:
                raise FormatError(f"point {p.get('id')!r} lacks coords under euclidean metric")
            coords[p["id"]] = tuple(float(c) for c in p["coords"])
        return FiniteMetricSpace(ids, coords=coords)
    if isinstance(metric, dict) and "matrix" in metric:
        m = tuple(tuple(float(x) for x in row) for row in metric["matrix"])
        return FiniteMetricSpace(ids, matrix=m)
    raise FormatError("metric must be 'euclidean' or {'matrix': [[...]]}")


def save_space(space: FiniteMetricSpace, path, meta: dict | None = None):
    dump_file(space_to_dict(space, meta), path, schema="space")


def load_space(path):
    with open(path) as fh:
        obj = json.load(fh)
    return space_from_dict(obj), obj.get("meta", {})


def save_filling(f: Filling, path):
    dump_file(f.to_dict(), path, schema="filling")


def load_filling_graph(path) -> MetricGraph:
    """Read any graph-shaped file (plain graph or filling) as a MetricGraph."""
    return load_graph(path)


def load_filling_levels(path):
    """Levels and params of a filling file, if present."""
    with open(path) as fh:
        obj = json.load(fh)
    if "levels" not in obj:
        return None, None
    params = obj.get("params", {})
    return [list(lev) for lev in obj["levels"]], params


def conformal_to_dict(cg) -> dict:
    order = list(cg.graph.vertex_order())
    return {
        "graph": graph_to_dict(cg.graph),
        "epsilon": cg.epsilon,
        "basepoint": cg.basepoint,
        "vertexOrder": order,
        "radialDistance": [cg.radial[v] for v in order],
        "conformalEdgeLength": [
            [u, v, cg.edge_weights[cg.graph.edge_key(u, v)]] for u, v, _ in cg.graph.edges
        ],
        "truncationDepth": cg.truncation_depth,
    }
