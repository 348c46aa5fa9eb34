"""JSON codecs for instances, targets and maps.

Instance files hold exactly one of::

    {"metric": {"dist": [[...]], "labels": [...]}}
    {"points": [[...]], "p": 2}
    {"graph": {"n": k, "edges": [[u, v, w], ...]}}

Map files look like ``{"domain": [...], "values": [[...], ...], "target": T}``
where ``T`` is ``{"kind": "euclidean", "dim": d}``, ``{"kind": "real_line"}``
or ``{"kind": "finite", "metric": {...}}``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .metric import (
    Euclidean,
    Finite,
    FiniteMetricSpace,
    PartialMap,
    RealLine,
    TargetSpace,
    equilateral,
    graph_metric,
    make_map,
    points_to_metric,
    validate_metric,
)


def _load(obj):
    if isinstance(obj, (str, Path)):
        try:
            return json.loads(Path(obj).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{obj}: {exc}") from exc
    return obj


def metric_to_json(space: FiniteMetricSpace) -> dict:
    out = {"dist": space.dist.tolist()}
    if space.labels is not None:
        out["labels"] = list(space.labels)
    return out


def instance_from_json(obj) -> FiniteMetricSpace:
    obj = _load(obj)
    if not isinstance(obj, dict):
        raise ParseError("instance must be a JSON object")
    if "metric" in obj:
        m = obj["metric"]
        return validate_metric(m["dist"], labels=m.get("labels"))
    if "points" in obj:
        p = obj.get("p", 2)
        p = math.inf if p in ("inf", "Infinity", None) else p
        return points_to_metric(obj["points"], p)
    if "graph" in obj:
        g = obj["graph"]
        return graph_metric(g["edges"], int(g["n"]), labels=g.get("labels"))
    raise ParseError("instance needs one of 'metric', 'points', 'graph'")


def instance_to_json(space: FiniteMetricSpace, source: dict | None = None) -> dict:
    """Serialise as the original generator description when given, else as a matrix."""
    if source is not None:
        return dict(source)
    return {"metric": metric_to_json(space)}


def target_to_json(target: TargetSpace) -> dict:
    if isinstance(target, RealLine):
        return {"kind": "real_line"}
    if isinstance(target, Euclidean):
        return {"kind": "euclidean", "dim": target.dim}
    return {"kind": "finite", "metric": metric_to_json(target.space)}


def target_from_json(obj) -> TargetSpace:
    obj = _load(obj)
    kind = obj.get("kind")
    if kind == "real_line":
        return RealLine()
    if kind == "euclidean":
        return Euclidean(int(obj["dim"]))
    if kind == "finite":
        return Finite(validate_metric(obj["metric"]["dist"], labels=obj["metric"].get("labels")))
    raise ParseError(f"unknown target kind {kind!r}")


def parse_target(text: str) -> TargetSpace:
    """Parse a CLI target: ``two-point``, ``simplex:K``, ``real``, ``euclidean:D`` or a JSON file."""
    t = text.strip().lower()
    if t in ("two-point", "2pt", "binary"):
        return equilateral(2)
    if t.startswith("simplex:"):
        return equilateral(int(t.split(":", 1)[1]))
    if t in ("equilateral3", "triangle"):
        return equilateral(3)
    if t in ("real", "real_line", "realline"):
        return RealLine()
    if t.startswith("euclidean:"):
        return Euclidean(int(t.split(":", 1)[1]))
    p = Path(text)
    if p.exists():
        obj = _load(p)
        if "kind" in obj:
            return target_from_json(obj)
        return Finite(instance_from_json(obj))
    raise ParseError(f"cannot parse target {text!r}")


def map_to_json(phi: PartialMap) -> dict:
    if isinstance(phi.target, Finite):
        values = [[int(v)] for v in phi.values]
    else:
        values = phi.values.tolist()
    return {"domain": list(phi.domain), "values": values, "target": target_to_json(phi.target)}


def map_from_json(obj, source: FiniteMetricSpace) -> PartialMap:
    obj = _load(obj)
    try:
        target = target_from_json(obj["target"])
        return make_map(source, obj["domain"], obj["values"], target)
    except KeyError as exc:
        raise ParseError(f"map is missing field {exc}") from exc


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, repr floats, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
