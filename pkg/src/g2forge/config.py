"""Instance configs and JSON (de)serialization of scalars, forms and matrices.

Configs are JSON objects of one of three kinds::

    {"kind": "family", "A1": [[..],[..]], "A": [...], "B": [...], "C": [...]}
    {"kind": "structure-constants", "c": [[i, j, k, value], ...]}
    {"kind": "builtin", "name": "gs", "param": "1/4"}

Strings such as ``"3/8"`` or ``"2"`` are read as exact rationals, JSON
floats as floats, and ``"sqrt(15)/8"`` as a float.  Output follows the
same rule: exact values are written as strings, floats as JSON numbers.  A
builtin can also be given on the command line as ``gs:1/4``, ``sa:3/4`` or
``fr``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import family
from .exterior import KForm
from .g2core import G2Structure
from .liealg import LieAlgebra, jacobi_residual

RATIONAL, FLOAT = "rational", "float"
_SQRT = re.compile(r"^\s*(-?)\s*sqrt\(\s*(\d+)\s*\)\s*(?:/\s*(\d+))?\s*$")


class ConfigError(ValueError):
    """Malformed input (exit code 2)."""


class DomainError(ValueError):
    """Well-formed input violating a structural constraint (exit code 3)."""


def parse_scalar(value, mode: str = RATIONAL):
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    if isinstance(value, int):
        out = Fraction(value)
    elif isinstance(value, float):
        out = value
    elif isinstance(value, str):
        m = _SQRT.match(value)
        if m:
            sign = -1.0 if m.group(1) else 1.0
            out = sign * math.sqrt(int(m.group(2))) / int(m.group(3) or 1)
        else:
            try:
                out = Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"cannot parse number {value!r}") from exc
    else:
        raise ConfigError(f"not a number: {value!r}")
    if mode == FLOAT:
        return float(out)
    if isinstance(out, Fraction) and out.denominator == 1:
        return int(out)
    return out


def format_scalar(value) -> str:
    """Exact values as "p/q" (or integers), floats via repr."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def json_scalar(value):
    """Exact values as "p/q" strings, floats as JSON numbers; both re-parse unchanged."""
    if isinstance(value, (int, np.integer, Fraction)):
        return format_scalar(value)
    return float(value)


def form_to_json(a: KForm) -> dict:
    return {
        "degree": a.degree,
        "coeffs": {"".join(map(str, b)): json_scalar(v) for b, v in sorted(a.items())},
    }


def form_from_json(obj: dict, mode: str = RATIONAL) -> KForm:
    try:
        degree = int(obj["degree"])
        coeffs = {tuple(int(ch) for ch in key): parse_scalar(v, mode) for key, v in obj["coeffs"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed form: {exc}") from exc
    if any(len(b) != degree for b in coeffs):
        raise ConfigError("blade length does not match degree")
    return KForm(degree, coeffs)


def matrix_to_json(M) -> list[list]:
    return [[json_scalar(v) for v in row] for row in M]


def _matrix(obj, n: int, name: str, mode: str):
    if not isinstance(obj, list) or len(obj) != n or any(not isinstance(r, list) or len(r) != n for r in obj):
        raise ConfigError(f"{name} must be a {n}x{n} array")
    return [[parse_scalar(v, mode) for v in row] for row in obj]


@dataclass(frozen=True)
class Instance:
    label: str
    algebra: LieAlgebra
    spec: family.FamilySpec | None = None

    def structure(self) -> G2Structure:
        return G2Structure(self.algebra)


def parse_builtin(text: str, mode: str = RATIONAL) -> Instance:
    name, _, param = text.partition(":")
    name = name.strip().lower()
    if name in ("gs", "sa"):
        if not param:
            raise ConfigError(f"builtin {name} needs a parameter, e.g. {name}:1/4")
        return _builtin(name, parse_scalar(param, mode), mode)
    if name in ("fr", "flat"):
        return _builtin(name, None, mode)
    raise ConfigError(f"unknown builtin {text!r} (expected gs:<s>, sa:<a> or fr)")


def _builtin(name: str, param, mode: str) -> Instance:
    spec = family.builtin(name, param)
    if mode == FLOAT:
        spec = spec.to_float()
    return Instance(spec.label, spec.algebra, spec)


def load_config(obj, mode: str = RATIONAL) -> Instance:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("config must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "builtin":
        if "name" not in obj:
            raise ConfigError("builtin config needs 'name'")
        name = str(obj["name"]).lower()
        param = obj.get("param")
        if name in ("gs", "sa"):
            if param is None:
                raise ConfigError(f"builtin {name} needs 'param'")
            return _builtin(name, parse_scalar(param, mode), mode)
        if name in ("fr", "flat"):
            return _builtin(name, None, mode)
        raise ConfigError(f"unknown builtin name {name!r}")
    if kind == "family":
        try:
            mats = [_matrix(obj[k], n, k, mode) for k, n in (("A1", 2), ("A", 4), ("B", 4), ("C", 4))]
        except KeyError as exc:
            raise ConfigError(f"family config missing {exc}") from exc
        try:
            spec = family.build_family_instance(*mats, label=obj.get("label", "family"))
        except family.FamilyError as exc:
            raise DomainError(str(exc)) from exc
        return Instance(spec.label, spec.algebra, spec)
    if kind == "structure-constants":
        raw = obj.get("c")
        if not isinstance(raw, list):
            raise ConfigError("structure-constants config needs a list 'c'")
        consts = []
        for entry in raw:
            if not isinstance(entry, list) or len(entry) != 4:
                raise ConfigError(f"structure constant must be [i, j, k, value], got {entry!r}")
            i, j, k = (int(v) for v in entry[:3])
            consts.append((i, j, k, parse_scalar(entry[3], mode)))
        try:
            g = LieAlgebra(consts)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        res = jacobi_residual(g)
        if (res != 0) if g.is_exact() else res > 1e-9:
            raise DomainError(f"Jacobi identity fails (residual {float(res):g})")
        return Instance(obj.get("label", "structure-constants"), g)
    raise ConfigError(f"unknown config kind {kind!r}")


def resolve_instance(source: str, mode: str = RATIONAL) -> Instance:
    """A JSON file path, an inline JSON object or a builtin shorthand."""
    text = source.strip()
    if text.startswith("{"):
        try:
            return load_config(json.loads(text), mode)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        try:
            obj = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {source}: {exc}") from exc
        return load_config(obj, mode)
    return parse_builtin(text, mode)


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
