"""JSON problem files.

Schema::

    {"alpha": [...], "beta": [...], "costs": [cost, ...]}

with each cost one of::

    {"kind": "quadratic", "a": 1.0, "b": 0.0}
    {"kind": "power", "lambda": 2.0, "p": 2.0}
    {"kind": "pwl", "points": [[0, -1], [1, 1]], "offset": 0.0}
    {"kind": "dsep", "d": 1.0, "phi": "square" | "hypot"}

Any cost may also carry ``"domain_upper"``; ``"offset"`` is optional for
``pwl``. Floats are written with Python's shortest round-trip repr.
"""

from __future__ import annotations

import json
import math
from typing import Any

from ascendopt.costs import ConvexCost, DSeparable, PiecewiseLinear, PowerP, Quadratic
from ascendopt.errors import ProblemFileError
from ascendopt.problem import Instance


def _num(obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is not None:
            return default
        raise ProblemFileError(f"{where}: missing field '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ProblemFileError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def cost_from_dict(entry: Any, where: str = "cost") -> ConvexCost:
    if not isinstance(entry, dict):
        raise ProblemFileError(f"{where}: expected an object")
    kind = entry.get("kind")
    extra = {}
    if "domain_upper" in entry:
        extra["domain_upper"] = _num(entry, "domain_upper", where)
    try:
        if kind == "quadratic":
            return Quadratic(_num(entry, "a", where), _num(entry, "b", where, 0.0), **extra)
        if kind == "power":
            return PowerP(_num(entry, "lambda", where), _num(entry, "p", where), **extra)
        if kind == "dsep":
            phi = entry.get("phi", "square")
            if phi not in ("square", "hypot"):
                raise ProblemFileError(f"{where}.phi: expected 'square' or 'hypot', got {phi!r}")
            return DSeparable(_num(entry, "d", where), phi, **extra)
        if kind == "pwl":
            pts = entry.get("points")
            if not isinstance(pts, list) or not all(
                isinstance(p, list) and len(p) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)
                for p in pts
            ):
                raise ProblemFileError(f"{where}.points: expected a list of [start, slope] pairs")
            return PiecewiseLinear(tuple(map(tuple, pts)), _num(entry, "offset", where, 0.0), **extra)
    except ValueError as exc:
        raise ProblemFileError(f"{where}: {exc}") from None
    raise ProblemFileError(f"{where}.kind: unknown cost kind {kind!r}")


def cost_to_dict(cost: ConvexCost) -> dict:
    if isinstance(cost, Quadratic):
        d = {"kind": "quadratic", "a": cost.a, "b": cost.b}
    elif isinstance(cost, PowerP):
        d = {"kind": "power", "lambda": cost.lam, "p": cost.p}
    elif isinstance(cost, DSeparable):
        d = {"kind": "dsep", "d": cost.d, "phi": cost.phi.value}
    elif isinstance(cost, PiecewiseLinear):
        d = {"kind": "pwl", "points": [list(p) for p in cost.points]}
        if cost.offset:
            d["offset"] = cost.offset
    else:
        raise TypeError(f"cannot serialize {type(cost).__name__}")
    if math.isfinite(cost.domain_upper):
        d["domain_upper"] = cost.domain_upper
    return d


def instance_from_dict(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise ProblemFileError("top level: expected an object")
    arrays = {}
    for key in ("alpha", "beta", "costs"):
        if key not in doc:
            raise ProblemFileError(f"top level: missing field '{key}'")
        if not isinstance(doc[key], list):
            raise ProblemFileError(f"{key}: expected an array")
        arrays[key] = doc[key]
    for key in ("alpha", "beta"):
        for i, v in enumerate(arrays[key]):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ProblemFileError(f"{key}[{i}]: expected a number, got {v!r}")
    lengths = {k: len(v) for k, v in arrays.items()}
    if len(set(lengths.values())) != 1:
        raise ProblemFileError(f"array lengths differ: {lengths}")
    costs = [cost_from_dict(c, f"costs[{i}]") for i, c in enumerate(arrays["costs"])]
    try:
        return Instance(tuple(arrays["alpha"]), tuple(arrays["beta"]), tuple(costs))
    except (ValueError, TypeError) as exc:
        raise ProblemFileError(str(exc)) from None


def instance_to_dict(inst: Instance) -> dict:
    return {
        "alpha": list(inst.alpha),
        "beta": list(inst.beta),
        "costs": [cost_to_dict(c) for c in inst.costs],
    }


def loads(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(doc)


def dumps(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


def load(path) -> Instance:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFileError(f"{path}: {exc.strerror}") from None
    return loads(text)


def save(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst))
