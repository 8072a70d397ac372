"""File formats: channels and results as JSON, stochastic matrices as JSON or CSV.

Complex numbers are written as ``[re, im]`` pairs.  A channel file is
``{"dim": d, "form": "kraus" | "choi" | "superop" | "affine", "data": ...}`` with an
optional ``"tag"`` naming the constructor that produced it.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .chancore import FORMS, Affine, Channel
from .classical import ClassicalQiResult, renormalize


class InputError(ValueError):
    """A file could not be parsed; the message names the offending line or field."""


def encode_complex(a) -> list:
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_complex(obj, where: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: expected nested numeric arrays ({exc})") from None
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise InputError(f"{where}: complex entries must be [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def jsonable(obj):
    """Recursively convert numpy values (complex arrays as ``[re, im]``) to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode_complex(obj) if np.iscomplexobj(obj) else obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def channel_to_json(ch: Channel) -> dict:
    if ch.form == "affine":
        data = {"M": np.asarray(ch.data.M).tolist(), "t": np.asarray(ch.data.t).tolist()}
    elif ch.form == "kraus":
        data = [encode_complex(k) for k in ch.data]
    else:
        data = encode_complex(ch.data)
    out = {"dim": ch.dim, "form": ch.form, "data": data}
    if ch.tag is not None:
        out["tag"] = jsonable(ch.tag)
    return out


def channel_from_json(obj) -> Channel:
    if not isinstance(obj, dict):
        raise InputError("channel file: top level must be a JSON object")
    for key in ("dim", "form", "data"):
        if key not in obj:
            raise InputError(f"channel file: missing field {key!r}")
    dim, form, data = obj["dim"], obj["form"], obj["data"]
    if not isinstance(dim, int) or dim < 2:
        raise InputError(f"field 'dim': expected an integer >= 2, got {dim!r}")
    if form not in FORMS:
        raise InputError(f"field 'form': expected one of {list(FORMS)}, got {form!r}")
    tag = obj.get("tag")
    if form == "affine":
        if not isinstance(data, dict) or "M" not in data or "t" not in data:
            raise InputError("field 'data': affine form needs {'M': [[...]], 't': [...]}")
        m = np.asarray(data["M"], dtype=float)
        t = np.asarray(data["t"], dtype=float)
        if m.shape != (dim * dim - 1, dim * dim - 1) or t.shape != (dim * dim - 1,):
            raise InputError(f"field 'data': affine shapes {m.shape}, {t.shape} do not match dim {dim}")
        return Channel(dim, "affine", Affine(m, t), tag)
    if form == "kraus":
        if not isinstance(data, list) or not data:
            raise InputError("field 'data': kraus form needs a nonempty list of matrices")
        ops = [decode_complex(k, f"data[{i}]") for i, k in enumerate(data)]
        for i, k in enumerate(ops):
            if k.shape != (dim, dim):
                raise InputError(f"field 'data[{i}]': expected a {dim}x{dim} matrix, got {k.shape}")
        return Channel(dim, "kraus", ops, tag)
    mat = decode_complex(data, "data")
    if mat.shape != (dim * dim, dim * dim):
        raise InputError(f"field 'data': expected a {dim * dim}x{dim * dim} matrix, got {mat.shape}")
    return Channel(dim, form, mat, tag)


def _load_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def read_channel(path) -> Channel:
    return channel_from_json(_load_json(path))


def dump_json(obj, path=None) -> str:
    text = json.dumps(jsonable(obj), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def write_channel(ch: Channel, path) -> None:
    dump_json(channel_to_json(ch), path)


def read_stochastic(path) -> np.ndarray:
    """Column-stochastic matrix from ``{"dim", "mat"}`` JSON or a headerless CSV."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        rows = []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    rows.append([float(c) for c in row])
                except ValueError:
                    raise InputError(f"{path}: line {lineno}: non-numeric entry in {row}") from None
        if len({len(r) for r in rows}) != 1:
            raise InputError(f"{path}: rows have unequal lengths")
        mat = np.array(rows)
    else:
        obj = _load_json(path)
        if not isinstance(obj, dict) or "mat" not in obj:
            raise InputError(f"{path}: missing field 'mat'")
        mat = np.asarray(obj["mat"], dtype=float)
        if "dim" in obj and mat.shape != (obj["dim"], obj["dim"]):
            raise InputError(f"field 'mat': shape {mat.shape} does not match dim {obj['dim']}")
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError(f"{path}: stochastic matrix must be square, got shape {mat.shape}")
    try:
        return renormalize(mat)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def stochastic_to_json(t: np.ndarray) -> dict:
    t = np.asarray(t, dtype=float)
    return {"dim": t.shape[0], "mat": t.tolist()}


def is_stochastic_file(path) -> bool:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return True
    obj = _load_json(path)
    return isinstance(obj, dict) and "mat" in obj and "form" not in obj


def qi_result_to_json(res) -> dict:
    out = {
        "qi": channel_to_json(res.qi),
        "fidelity_before": res.fidelity_before,
        "fidelity_after": res.fidelity_after,
        "bounds": None if res.bound is None else {"lower": res.bound.lower, "upper": res.bound.upper},
        "solver": jsonable(res.solver),
    }
    if res.bound is not None:
        out["bounds"].update(p_max=res.bound.p_max, fef=res.bound.fef)
    return out


def classical_result_to_json(res: ClassicalQiResult) -> dict:
    return {
        "qi": stochastic_to_json(res.qi),
        "ties": res.ties,
        "fidelity_before": res.fidelity_before,
        "fidelity_after": res.fidelity_after,
    }
