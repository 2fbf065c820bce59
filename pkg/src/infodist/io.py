"""JSON and CSV formats for structures, games and command results.

Numbers are written with 17 significant digits so floats survive a round
trip; exact values are written as ``"n/d"`` strings and read back as
fractions. Files are written atomically (temporary file, then rename).
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io as _io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .games import PayoffFunction
from .structures import FactoredStructure, Garbling, InfoStructure, as_table

SCHEMA = "infodist/1"
PARSE_MASS_TOL = 1e-6


class InputError(ValueError):
    """Malformed or inconsistent input file."""


# ---------------------------------------------------------------------------
# Encoding


def _float_token(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return json.dumps(None) if math.isnan(x) else ('"inf"' if x > 0 else '"-inf"')
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


def to_jsonable(obj):
    """Plain JSON types, with fractions as ``"n/d"`` and floats left as floats."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, Garbling):
        return to_jsonable(obj.rows)
    if isinstance(obj, InfoStructure):
        return dump_structure(obj)
    if isinstance(obj, FactoredStructure):
        return dump_structure(obj)
    if isinstance(obj, PayoffFunction):
        return dump_game(obj)
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(obj, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        out.append(_float_token(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for n, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(k)}: ")
            _emit(v, out, indent, level + 1)
            out.append(",\n" if n < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (list, dict)) for v in obj):
            out.append("[")
            for n, v in enumerate(obj):
                _emit(v, out, indent, level + 1)
                if n < len(obj) - 1:
                    out.append(", ")
            out.append("]")
        else:
            out.append("[\n")
            for n, v in enumerate(obj):
                out.append(pad)
                _emit(v, out, indent, level + 1)
                out.append(",\n" if n < len(obj) - 1 else "\n")
            out.append(end + "]")
    else:
        out.append(json.dumps(obj))


def dumps(obj, indent: int = 2) -> str:
    out: list[str] = []
    _emit(to_jsonable(obj), out, indent, 0)
    return "".join(out) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(rows: list[dict], columns: list[str] | tuple[str, ...]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        cells = []
        for c in columns:
            v = r.get(c)
            if v is None:
                cells.append("")
            elif isinstance(v, (float, np.floating)):
                cells.append(_float_token(float(v)).strip('"'))
            else:
                cells.append(str(v))
        w.writerow(cells)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Parsing


def _number(v):
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a number: {v!r}") from exc
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"not a number: {v!r}")
    return v


def _table(raw, shape: tuple[int, ...], name: str, exact: bool | None) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=object)
    except ValueError as exc:
        raise InputError(f"{name} is ragged") from exc
    if arr.shape != shape:
        raise InputError(f"{name} has shape {arr.shape}, expected {shape}")
    vals = [_number(v) for v in arr.ravel()]
    if exact is None:
        exact = any(isinstance(v, Fraction) for v in vals)
    if exact:
        return as_table(np.array([Fraction(v) for v in vals], dtype=object).reshape(shape), exact=True)
    return np.array([float(v) for v in vals]).reshape(shape)


def _int_field(d: dict, key: str) -> int:
    if key not in d:
        raise InputError(f"missing field {key!r}")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise InputError(f"{key!r} must be a positive integer")
    return v


def parse_structure(
    d: dict, renormalize: bool = False, exact: bool | None = None, tol: float = PARSE_MASS_TOL
) -> InfoStructure | FactoredStructure:
    """Structure from its JSON object.

    Total mass must be within ``tol`` of 1 (small deviations are scaled away)
    unless ``renormalize`` is set, in which case any positive total is scaled.
    """
    if not isinstance(d, dict):
        raise InputError("structure must be a JSON object")
    K, C, D = _int_field(d, "states"), _int_field(d, "c"), _int_field(d, "d")
    p = _table(d.get("prob"), (K, C, D), "prob", exact)
    if (p < 0).any():
        raise InputError("probabilities must be nonnegative")
    total = p.sum()
    if total <= 0:
        raise InputError("total mass must be positive")
    if not renormalize and abs(float(total) - 1) > tol:
        raise InputError(f"total mass {float(total)!r} deviates from 1 by more than {tol}")
    if total != 1:
        p = p / total
    u = InfoStructure(p, d.get("labels"))
    if "c_factors" in d or "d_factors" in d:
        try:
            return FactoredStructure(u, tuple(d.get("c_factors", [C])), tuple(d.get("d_factors", [D])))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    return u


def dump_structure(u: InfoStructure | FactoredStructure) -> dict:
    s = u.structure if isinstance(u, FactoredStructure) else u
    K, C, D = s.shape
    out = {"schema": SCHEMA, "states": K, "c": C, "d": D, "prob": to_jsonable(s.prob)}
    if s.labels:
        out["labels"] = s.labels
    if isinstance(u, FactoredStructure):
        out["c_factors"] = list(u.c_factors)
        out["d_factors"] = list(u.d_factors)
    return out


def parse_game(d: dict, exact: bool | None = None) -> PayoffFunction:
    if not isinstance(d, dict):
        raise InputError("game must be a JSON object")
    K, I, J = _int_field(d, "states"), _int_field(d, "i"), _int_field(d, "j")
    t = _table(d.get("payoff"), (K, I, J), "payoff", exact)
    try:
        return PayoffFunction(t)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def dump_game(g: PayoffFunction) -> dict:
    K, I, J = g.table.shape
    return {"schema": SCHEMA, "states": K, "i": I, "j": J, "payoff": to_jsonable(g.table)}


def parse_garbling(raw, exact: bool | None = None) -> Garbling:
    if isinstance(raw, dict):
        raw = raw.get("rows")
    try:
        arr = np.array(raw, dtype=object)
    except ValueError as exc:
        raise InputError("garbling rows are ragged") from exc
    if arr.ndim != 2:
        raise InputError("garbling must be a matrix of rows")
    try:
        return Garbling(_table(raw, arr.shape, "rows", exact))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def read_json(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_structure(path, renormalize: bool = False, exact: bool | None = None):
    return parse_structure(read_json(path), renormalize, exact)


def load_game(path, exact: bool | None = None) -> PayoffFunction:
    return parse_game(read_json(path), exact)
