"""JSON schemas and (de)serialization of bodies, measures, laws and D_p-balls.

Non-finite numbers are written as the strings ``"inf"`` / ``"-inf"``; the
readers accept them wherever a number is expected.
"""

from __future__ import annotations

import json
import math
from typing import Any

import jsonschema
import numpy as np

from .bodies import (
    ConvexBody,
    DiagScaled,
    GeneralizedZonoid,
    LpBall,
    MinkSum,
    Polygon2D,
    Scaled,
    Zonotope,
)
from .measures import DiscreteRandomVector, SphereMeasure
from .stable import DpBall, StableSpec

NUMBER = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}]}
VECTOR = {"type": "array", "items": {"type": "number"}, "minItems": 1}
MATRIX = {"type": "array", "items": VECTOR}

BODY_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "diagmink/body",
    "$ref": "#/$defs/body",
    "$defs": {
        "body": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["zonotope", "genzonoid", "lpball", "diag", "minksum", "scaled", "polygon2d"]}
            },
        },
    },
}


def _when(kind: str, required: list[str], props: dict) -> dict:
    return {
        "if": {"properties": {"kind": {"const": kind}}},
        "then": {
            "required": required,
            "properties": {"kind": {"const": kind}, **props},
            "additionalProperties": False,
        },
    }


BODY_SCHEMA["$defs"]["body"]["allOf"] = [
    _when("zonotope", ["generators"], {"generators": MATRIX, "dim": {"type": "integer", "minimum": 1}}),
    _when("genzonoid", ["directions", "weights"], {"directions": MATRIX, "weights": {"type": "array", "items": {"type": "number"}}}),
    _when("lpball", ["q", "dim"], {"q": NUMBER, "dim": {"type": "integer", "minimum": 1}}),
    _when("diag", ["scale", "inner"], {"scale": VECTOR, "inner": {"$ref": "#/$defs/body"}}),
    _when("minksum", ["parts"], {"parts": {"type": "array", "items": {"$ref": "#/$defs/body"}, "minItems": 1}}),
    _when("scaled", ["c", "inner"], {"c": {"type": "number", "minimum": 0}, "inner": {"$ref": "#/$defs/body"}}),
    _when("polygon2d", ["vertices"], {"vertices": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}, "minItems": 4}}),
]

MEASURE_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "diagmink/measure",
    "type": "object",
    "required": ["dim", "atoms"],
    "properties": {
        "kind": {"const": "measure"},
        "dim": {"type": "integer", "minimum": 1},
        "even": {"type": "boolean"},
        "atoms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["v", "w"],
                "properties": {"v": VECTOR, "w": {"type": "number"}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

LAW_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "diagmink/law",
    "type": "object",
    "required": ["dim", "atoms"],
    "properties": {
        "kind": {"const": "law"},
        "dim": {"type": "integer", "minimum": 1},
        "symmetric": {"type": "boolean"},
        "atoms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["x", "p"],
                "properties": {"x": VECTOR, "p": {"type": "number", "exclusiveMinimum": 0}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

DPBALL_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "diagmink/dpball",
    "type": "object",
    "required": ["kind", "p", "spectral"],
    "properties": {
        "kind": {"const": "dpball"},
        "p": NUMBER,
        "spectral": MEASURE_SCHEMA,
        "bounded": {"type": "boolean"},
    },
    "additionalProperties": False,
}

STABLE_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "diagmink/stable",
    "type": "object",
    "required": ["kind", "alpha", "atoms"],
    "properties": {
        "kind": {"const": "stable"},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "atoms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["v", "a"],
                "properties": {"v": VECTOR, "a": {"type": "number", "exclusiveMinimum": 0}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

GROUP_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "diagmink/group",
    "type": "object",
    "required": ["elements"],
    "properties": {
        "kind": {"const": "group"},
        "elements": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["matrix", "w"],
                "properties": {"matrix": MATRIX, "w": {"type": "number"}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

OUTPUT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "diagmink/output",
    "type": "object",
    "required": ["command", "tolerances", "result"],
    "properties": {
        "command": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": {"type": "object", "additionalProperties": NUMBER},
        "verdict": {"type": ["boolean", "null"]},
        "certified": {"type": "boolean"},
        "result": {"type": "object"},
    },
    "additionalProperties": False,
}

SCHEMAS = {
    "body": BODY_SCHEMA,
    "measure": MEASURE_SCHEMA,
    "law": LAW_SCHEMA,
    "dpball": DPBALL_SCHEMA,
    "stable": STABLE_SCHEMA,
    "group": GROUP_SCHEMA,
    "output": OUTPUT_SCHEMA,
}


class SchemaError(ValueError):
    """Input that fails to parse or to validate; carries a JSON path and line number."""

    def __init__(self, message: str, path: str = "$", line: int | None = None, source: str | None = None):
        where = f"{source}:" if source else ""
        where += f"{line}: " if line is not None else " "
        super().__init__(f"{where}{path}: {message}")
        self.message = message
        self.path = path
        self.line = line


# -- locating a JSON path in the source text ---------------------------------------------

_DECODER = json.JSONDecoder()


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def locate(text: str, path) -> int:
    """Character offset of the value at ``path`` (keys and indices) in ``text``."""
    i = _skip_ws(text, 0)
    for key in path:
        if text[i] == "{":
            i = _skip_ws(text, i + 1)
            while text[i] != "}":
                name, i = _DECODER.raw_decode(text, i)
                i = _skip_ws(text, i)
                i = _skip_ws(text, i + 1)  # colon
                if name == key:
                    break
                _, i = _DECODER.raw_decode(text, i)
                i = _skip_ws(text, i)
                if text[i] == ",":
                    i = _skip_ws(text, i + 1)
            else:
                return i
        elif text[i] == "[":
            i = _skip_ws(text, i + 1)
            for _ in range(int(key)):
                _, i = _DECODER.raw_decode(text, i)
                i = _skip_ws(text, i)
                i = _skip_ws(text, i + 1)  # comma
        else:
            return i
    return i


def _format_path(path) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def load_json(text: str, schema: dict, source: str | None = None) -> Any:
    """Parse ``text`` and validate it; errors carry the JSON path and line number."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, "$", exc.lineno, source) from None
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        # report the most specific failure
        err = max(errors, key=lambda e: len(e.absolute_path))
        if err.context:
            err = max(err.context, key=lambda e: len(e.absolute_path))
        path = list(err.absolute_path)
        line = text.count("\n", 0, locate(text, path)) + 1
        raise SchemaError(err.message, _format_path(path), line, source)
    return doc


def _num(x) -> float:
    return float(x)  # float() also parses "inf" and "-inf"


def _enc(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def jsonable(obj):
    """Recursively convert numpy values and non-finite floats to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        return _enc(x)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, ``repr`` floats)."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


# -- bodies ------------------------------------------------------------------------------------


def body_from_dict(d: dict) -> ConvexBody:
    kind = d["kind"]
    if kind == "zonotope":
        g = np.asarray(d["generators"], dtype=float)
        if "dim" in d:
            g = g.reshape(-1, d["dim"])
        return Zonotope(g, dim=d.get("dim"))
    if kind == "genzonoid":
        return GeneralizedZonoid(d["directions"], d["weights"])
    if kind == "lpball":
        return LpBall(_num(d["q"]), d["dim"])
    if kind == "diag":
        return DiagScaled(d["scale"], body_from_dict(d["inner"]))
    if kind == "minksum":
        return MinkSum(body_from_dict(p) for p in d["parts"])
    if kind == "scaled":
        return Scaled(d["c"], body_from_dict(d["inner"]))
    if kind == "polygon2d":
        return Polygon2D(d["vertices"])
    raise ValueError(f"unknown body kind {kind!r}")


def body_to_dict(K: ConvexBody) -> dict:
    if isinstance(K, Zonotope):
        return {"kind": "zonotope", "generators": K.generators.tolist(), "dim": K.dim}
    if isinstance(K, GeneralizedZonoid):
        return {"kind": "genzonoid", "directions": K.directions.tolist(), "weights": K.weights.tolist()}
    if isinstance(K, LpBall):
        return {"kind": "lpball", "q": _enc(K.q), "dim": K.dim}
    if isinstance(K, DiagScaled):
        return {"kind": "diag", "scale": K.scale.tolist(), "inner": body_to_dict(K.inner)}
    if isinstance(K, MinkSum):
        return {"kind": "minksum", "parts": [body_to_dict(p) for p in K.parts]}
    if isinstance(K, Scaled):
        return {"kind": "scaled", "c": K.c, "inner": body_to_dict(K.inner)}
    if isinstance(K, Polygon2D):
        return {"kind": "polygon2d", "vertices": K.vertices.tolist()}
    raise TypeError(f"cannot serialize {type(K).__name__}")


# -- measures and laws ---------------------------------------------------------------------------


def _check_dims(rows, dim: int, key: str) -> None:
    for i, r in enumerate(rows):
        if len(r) != dim:
            raise SchemaError(f"atom has dimension {len(r)}, declared dim is {dim}", f"$.atoms[{i}].{key}")


def measure_from_dict(d: dict) -> SphereMeasure:
    dirs = [a["v"] for a in d["atoms"]]
    _check_dims(dirs, d["dim"], "v")
    return SphereMeasure(np.asarray(dirs, dtype=float).reshape(-1, d["dim"]), [a["w"] for a in d["atoms"]],
                         even=d.get("even", False), dim=d["dim"])


def measure_to_dict(mu: SphereMeasure) -> dict:
    return {
        "dim": mu.dim,
        "even": mu.even,
        "atoms": [{"v": v.tolist(), "w": float(w)} for v, w in zip(mu.directions, mu.weights)],
    }


def law_from_dict(d: dict) -> DiscreteRandomVector:
    pts = [a["x"] for a in d["atoms"]]
    _check_dims(pts, d["dim"], "x")
    return DiscreteRandomVector(pts, [a["p"] for a in d["atoms"]], symmetric=d.get("symmetric", False), dim=d["dim"])


def law_to_dict(xi: DiscreteRandomVector) -> dict:
    return {
        "dim": xi.dim,
        "symmetric": xi.symmetric,
        "atoms": [{"x": x.tolist(), "p": float(p)} for x, p in zip(xi.points, xi.probs)],
    }


def dpball_from_dict(d: dict) -> DpBall:
    return DpBall(_num(d["p"]), measure_from_dict(d["spectral"]))


def dpball_to_dict(L: DpBall) -> dict:
    return {"kind": "dpball", "p": _enc(L.p), "spectral": measure_to_dict(L.spectral), "bounded": L.bounded}


def stable_from_dict(d: dict) -> StableSpec:
    return StableSpec(d["alpha"], [a["v"] for a in d["atoms"]], [a["a"] for a in d["atoms"]])


def stable_to_dict(s: StableSpec) -> dict:
    return {
        "kind": "stable",
        "alpha": s.alpha,
        "atoms": [{"v": v.tolist(), "a": float(a)} for v, a in zip(s.directions, s.weights)],
    }


def group_from_dict(d: dict) -> list[tuple[np.ndarray, float]]:
    return [(np.asarray(e["matrix"], dtype=float), float(e["w"])) for e in d["elements"]]


# -- file readers --------------------------------------------------------------------------------


def _read(path: str, schema: dict):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read file: {exc.strerror}", source=path) from None
    return load_json(text, schema, source=path)


def _build(path: str, schema: dict, factory):
    doc = _read(path, schema)
    try:
        return factory(doc)
    except SchemaError as exc:
        raise SchemaError(exc.message, exc.path, None, path) from None
    except (ValueError, TypeError) as exc:
        raise SchemaError(str(exc), "$", None, path) from None


def read_body(path: str) -> ConvexBody:
    return _build(path, BODY_SCHEMA, body_from_dict)


def read_measure(path: str) -> SphereMeasure:
    return _build(path, MEASURE_SCHEMA, measure_from_dict)


def read_law(path: str) -> DiscreteRandomVector:
    return _build(path, LAW_SCHEMA, law_from_dict)


def read_dpball(path: str) -> DpBall:
    """A ``dpball`` document, or a ``stable`` one converted to its D_{1/alpha}-ball."""
    doc = _read(path, {"type": "object", "required": ["kind"], "properties": {"kind": {"enum": ["dpball", "stable"]}}})
    if doc["kind"] == "stable":
        from .stable import stable_to_dp

        return stable_to_dp(_build(path, STABLE_SCHEMA, stable_from_dict))
    return _build(path, DPBALL_SCHEMA, dpball_from_dict)


def read_group(path: str) -> list[tuple[np.ndarray, float]]:
    return _build(path, GROUP_SCHEMA, group_from_dict)
