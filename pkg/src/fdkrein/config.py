"""JSON problem descriptions: schemas and conversion to solver objects.

Complex numbers are two-element arrays ``[re, im]``; a bare number is
accepted where a complex is expected and read as real.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .difference_ops import (
    ExtensionOperator,
    Geometry,
    extension_from_rows,
    periodic_extension,
    third_kind_extension,
)
from .errors import ConfigError
from .laplace import DEFAULT_LAMBDA, DefectProblem

__all__ = [
    "PROBLEM_SCHEMA",
    "CONVERGE_SCHEMA",
    "BENCH_SCHEMA",
    "ProblemConfig",
    "load_json",
    "parse_problem",
    "validate",
    "to_complex",
    "from_complex",
]

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_POINT2 = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}

PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["geometry"],
    "properties": {
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dim", "n"],
            "properties": {
                "dim": {"enum": [1, 2]},
                "n": {"type": "integer", "minimum": 2},
                "m": {"type": "integer", "minimum": 2},
                "holes": {"type": "array", "items": _POINT2},
            },
        },
        "lambda": _COMPLEX,
        "bc": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"enum": ["periodic", "dirichlet", "third_kind", "custom"]},
                "k": {"anyOf": [_COMPLEX, {"type": "array", "items": _COMPLEX}]},
                "custom_rows": {"type": "array", "items": {"type": "array", "items": _COMPLEX}},
            },
        },
        "holes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["point"],
                "properties": {
                    "point": _POINT2,
                    "alpha": {"type": "array", "items": _COMPLEX, "minItems": 4, "maxItems": 4},
                },
            },
        },
        "rhs": {"oneOf": [{"type": "string"}, {"type": "array", "items": _COMPLEX}]},
        "seed": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
        "verbosity": {"type": "integer", "minimum": 0},
        "cap": {"type": "integer", "minimum": 1},
    },
}

CONVERGE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mu": {"type": "number"},
        "lambda": _COMPLEX,
        "phi": {
            "oneOf": [
                {"enum": ["exp_cos", "constant"]},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["mode"],
                    "properties": {"mode": {"type": "integer"}},
                },
            ]
        },
        "M_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "truncation": {"type": "integer", "minimum": 1},
        "quad_points": {"type": "integer", "minimum": 2},
        "out": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "verbosity": {"type": "integer", "minimum": 0},
    },
}

BENCH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "sizes": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "repeats": {"type": "integer", "minimum": 1},
        "build_repeats": {"type": "integer", "minimum": 1},
        "lambda": _COMPLEX,
        "k": _COMPLEX,
        "dense_cap": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "verbosity": {"type": "integer", "minimum": 0},
    },
}


def to_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def from_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def load_json(path) -> dict:
    """Read JSON, turning decode failures into ``ConfigError`` with position."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def validate(data, schema) -> None:
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc


@dataclass
class ProblemConfig:
    geometry: Geometry
    lam: complex
    bc_type: str
    extension: ExtensionOperator
    holes: dict
    rhs_spec: object
    seed: int
    out: str | None
    verbosity: int
    cap: int

    @property
    def defect(self) -> DefectProblem | None:
        if not self.holes:
            return None
        return DefectProblem(self.geometry.n, self.geometry.m, self.holes, extension=self.extension)

    @property
    def unknowns(self) -> int:
        return self.geometry.partition.size


def _is_scalar(v) -> bool:
    if isinstance(v, (int, float)):
        return True
    return isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)


def _k_values(k, count: int):
    """A number or ``[re, im]`` is one coefficient for every point; anything
    else is a per-point list (so per-point values in 1D are written as pairs)."""
    if _is_scalar(k):
        return to_complex(k)
    out = np.array([to_complex(v) for v in k])
    if out.size != count:
        raise ConfigError(f"bc.k needs {count} entries (one per exterior point), got {out.size}")
    return out


def _build_extension(bc: dict, geometry: Geometry) -> ExtensionOperator:
    part = geometry.full().partition
    kind = bc.get("type", "dirichlet")
    if kind == "periodic":
        return periodic_extension(part, geometry.shape)
    if kind == "dirichlet":
        return third_kind_extension(part, -1.0)
    if kind == "third_kind":
        if "k" not in bc:
            raise ConfigError("third_kind boundary condition needs 'k'")
        return third_kind_extension(part, _k_values(bc["k"], len(part.exterior)))
    rows = bc.get("custom_rows")
    if rows is None:
        raise ConfigError("custom boundary condition needs 'custom_rows'")
    mat = np.array([[to_complex(v) for v in row] for row in rows])
    try:
        return extension_from_rows(part, mat)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_problem(data: dict) -> ProblemConfig:
    validate(data, PROBLEM_SCHEMA)
    g = data["geometry"]
    if g["dim"] == 1 and ("m" in g or g.get("holes") or data.get("holes")):
        raise ConfigError("1D geometry takes neither 'm' nor 'holes'")
    hole_alpha = {}
    for h in data.get("holes", []):
        hole_alpha[tuple(h["point"])] = [to_complex(a) for a in h.get("alpha", [0, 0, 0, 0])]
    for p in g.get("holes", []):
        hole_alpha.setdefault(tuple(p), [0j] * 4)
    try:
        geometry = Geometry(g["dim"], g["n"], g.get("m"), tuple(hole_alpha))
        extension = _build_extension(data.get("bc", {"type": "dirichlet"}), geometry)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ProblemConfig(
        geometry=geometry,
        lam=to_complex(data.get("lambda", [DEFAULT_LAMBDA.real, DEFAULT_LAMBDA.imag])),
        bc_type=data.get("bc", {"type": "dirichlet"})["type"],
        extension=extension,
        holes=hole_alpha,
        rhs_spec=data.get("rhs"),
        seed=int(data.get("seed", 0)),
        out=data.get("out"),
        verbosity=int(data.get("verbosity", 0)),
        cap=int(data.get("cap", 4096)),
    )


def read_rhs_file(path, base_dir=None) -> np.ndarray:
    """RHS from a solution-style CSV (``re``/``im`` columns) or a JSON array."""
    p = Path(path)
    if base_dir is not None and not p.is_absolute():
        p = Path(base_dir) / p
    if p.suffix.lower() == ".json":
        data = load_json(p)
        return np.array([to_complex(v) for v in data])
    with p.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "re" not in reader.fieldnames:
            raise ConfigError(f"{p}: CSV right-hand side needs 're' (and optionally 'im') columns")
        return np.array([complex(float(r["re"]), float(r.get("im") or 0.0)) for r in reader])
