"""JSON encoding of curves, points and results.

Complex numbers are ``[re, im]`` pairs, matrices nested row-major lists.
Plain real numbers are accepted wherever a complex number is read.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .curvegeom import Curve, CurvePoint, PathSpec, continue_segment, make_curve
from .errors import InputError
from .theta import ThetaChar

FORMAT_VERSION = 1


class MalformedInput(InputError):
    pass


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise MalformedInput(f"{path}: top level must be an object")
    return data


def dumps(obj) -> str:
    return json.dumps(encode(obj), sort_keys=True, indent=2) + "\n"


def encode(obj):
    """Recursively convert numpy and complex values into JSON-ready data."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_real(obj.real), _real(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _real(obj)
    if isinstance(obj, ThetaChar):
        return {"eps": encode(obj.eps), "eps_prime": encode(obj.eps_prime)}
    if isinstance(obj, CurvePoint):
        return {"x": encode(complex(obj.x)), "w": encode(complex(obj.w))}
    return obj


def _real(v) -> float | str:
    v = float(v)
    if np.isfinite(v):
        return v + 0.0  # no negative zero
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def to_complex(v, what: str = "value") -> complex:
    if isinstance(v, bool):
        raise MalformedInput(f"{what}: expected a number or [re, im], got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise MalformedInput(f"{what}: expected a number or [re, im], got {v!r}")


def to_cvector(v, what: str = "vector") -> np.ndarray:
    if not isinstance(v, list):
        raise MalformedInput(f"{what}: expected a list")
    return np.array([to_complex(t, f"{what}[{i}]") for i, t in enumerate(v)], dtype=complex)


def to_cmatrix(v, what: str = "matrix") -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise MalformedInput(f"{what}: expected a nested list")
    return np.array([to_cvector(r, f"{what}[{i}]") for i, r in enumerate(v)])


def to_char(v, what: str = "char") -> ThetaChar:
    try:
        return ThetaChar(np.asarray(v["eps"], dtype=float), np.asarray(v["eps_prime"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{what}: expected {{'eps': [..], 'eps_prime': [..]}}") from exc


def require(data: dict, key: str):
    if key not in data:
        raise MalformedInput(f"missing field {key!r}")
    return data[key]


def curve_from(data: dict) -> Curve:
    return make_curve(to_cvector(require(data, "branch_points"), "branch_points"))


def point_from(curve: Curve, v, what: str = "point") -> CurvePoint:
    """Curve point from ``{"x": z, "w": z}``, ``{"x": z, "sheet": +1|-1}`` or ``{"branch": s}``.

    ``sheet`` selects the sign relative to the principal branch
    :meth:`Curve.w_plus`; ``branch`` is a 1-based branch point index.
    """
    if not isinstance(v, dict):
        raise MalformedInput(f"{what}: expected an object")
    if "branch" in v:
        return curve.weierstrass_point(int(v["branch"]))
    x = to_complex(require(v, "x"), f"{what}.x")
    if "w" in v:
        return CurvePoint(x, to_complex(v["w"], f"{what}.w"))
    sheet = v.get("sheet", 1)
    if sheet not in (1, -1):
        raise MalformedInput(f"{what}.sheet must be 1 or -1")
    return CurvePoint(x, sheet * complex(curve.w_plus(x)))


def path_from(curve: Curve, v, what: str = "path") -> PathSpec:
    """``{"waypoints": [...], "sheet": +1|-1}`` or with an explicit ``"w"`` at the first waypoint."""
    if not isinstance(v, dict):
        raise MalformedInput(f"{what}: expected an object")
    pts = [complex(z) for z in to_cvector(require(v, "waypoints"), f"{what}.waypoints")]
    if len(pts) < 2:
        raise MalformedInput(f"{what}: at least two waypoints are needed")
    start = point_from(curve, {k: v[k] for k in ("w", "sheet") if k in v} | {"x": [pts[0].real, pts[0].imag]})
    return PathSpec(pts, start)


def continued_points(curve: Curve, start: CurvePoint, xs):
    """Curve points along an x-polyline, continuing ``w`` segment by segment."""
    out = [start]
    for x in xs[1:]:
        p = out[-1]
        out.append(CurvePoint(x, complex(continue_segment(curve, p.x, p.w, x))))
    return out
