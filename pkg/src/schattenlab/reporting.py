"""Deterministic JSON/CSV output, matrix export and the operator/config text formats.

JSON floats are written with 17 significant digits, keys are sorted, complex
numbers become ``{"im": ..., "re": ...}`` and non-finite floats become the
strings ``"inf"``, ``"-inf"`` and ``"nan"``, so the output is strict JSON and
two runs on the same inputs are byte-identical.
"""

import csv
import io
import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .operators import Bessel, Compose, Multiply, OperatorSpec

FLOAT_FORMAT = ".17g"


def _float_token(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, FLOAT_FORMAT)


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float_token(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        _emit({"re": obj.real, "im": obj.imag}, indent, level, out)
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted((str(k), v) for k, v in obj.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k, ensure_ascii=False) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(end + "]")
    elif hasattr(obj, "to_dict"):
        _emit(obj.to_dict(), indent, level, out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    out = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def loads(text):
    return json.loads(text)


def as_float(v):
    """Inverse of the non-finite float encoding."""
    return float(v)


def as_complex(v):
    return complex(float(v["re"]), float(v["im"]))


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return "inf" if math.isinf(x) and x > 0 else format(x, FLOAT_FORMAT)
    return str(v)


def write_text(path, text):
    Path(path).write_bytes(text.encode("utf-8"))


# -- matrix export -----------------------------------------------------------------


def write_matrix(prefix, op, spec=None):
    """``prefix.bin`` (little-endian float64, row-major, interleaved re/im) and ``prefix.json``."""
    prefix = Path(prefix)
    data = np.ascontiguousarray(op.matrix, dtype="<c16")
    prefix.with_suffix(".bin").write_bytes(data.tobytes(order="C"))
    side = {
        "shape": [op.side, op.side],
        "layout": "float64 little-endian, row-major, interleaved real/imaginary",
        "cutoff": op.cutoff,
        "manifold": op.manifold.to_dict(),
        "modes": op.modes.tolist(),
    }
    if spec is not None:
        side["operator"] = spec_to_text(spec)
    write_text(prefix.with_suffix(".json"), dumps(side))
    return prefix.with_suffix(".bin"), prefix.with_suffix(".json")


def read_matrix(prefix):
    prefix = Path(prefix)
    meta = loads(prefix.with_suffix(".json").read_text(encoding="utf-8"))
    raw = np.frombuffer(prefix.with_suffix(".bin").read_bytes(), dtype="<c16")
    return raw.reshape(meta["shape"]), meta


# -- config text -------------------------------------------------------------------


def parse_config(text):
    """Flat ``key = value`` lines; ``[section]`` headers prefix following keys with ``section.``."""
    out, section = {}, ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        out[f"{section}.{key}" if section else key] = value
    return out


def load_config(path):
    try:
        return parse_config(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc


_CALL = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


def _kwargs(body, name):
    out = {}
    for part in filter(None, (p.strip() for p in body.split(";"))):
        if "=" not in part:
            raise ConfigurationError(f"{name}: expected key=value, got {part!r}")
        k, v = (t.strip() for t in part.split("=", 1))
        out[k] = v
    return out


def parse_factor(text, dimension):
    m = _CALL.match(text)
    if not m:
        raise ConfigurationError(f"cannot parse factor {text!r}")
    name, body = m.group(1).lower(), m.group(2)
    try:
        if name == "bessel":
            return Bessel(float(_kwargs(body, name)["s"]))
        if name == "compose":
            kw = _kwargs(body, name)
            tau = tuple(float(v) for v in kw["tau"].replace(",", " ").split())
            return Compose(tau[0] if len(tau) == 1 else tau, float(kw.get("eps", 0.0)))
        if name == "multiply":
            coeffs = {}
            for part in filter(None, (p.strip() for p in body.split(";"))):
                freq, coef = part.split(":", 1)
                key = tuple(int(v) for v in freq.split(","))
                coeffs[key] = coeffs.get(key, 0) + complex(coef.strip().replace(" ", ""))
            return Multiply.from_coefficients(coeffs, dimension)
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"bad {name} factor {text!r}: {exc}") from exc
    raise ConfigurationError(f"unknown factor {name!r}")


def parse_operator(text, dimension):
    """``multiply(0:2; 1:0.5; -1:0.5) | bessel(s=3)``; left to right is composition order."""
    parts = [p for p in (t.strip() for t in text.split("|")) if p]
    if not parts:
        raise ConfigurationError("operator has no factors")
    return OperatorSpec(dimension, tuple(parse_factor(p, dimension) for p in parts))


def _num(x):
    return format(float(x), ".17g")


def _cnum(c):
    c = complex(c)
    if c.imag == 0:
        return _num(c.real)
    return f"{_num(c.real)}{'+' if c.imag >= 0 else '-'}{_num(abs(c.imag))}j"


def spec_to_text(spec):
    out = []
    for f in spec.factors:
        if isinstance(f, Bessel):
            out.append(f"bessel(s={_num(f.s)})")
        elif isinstance(f, Compose):
            tau = " ".join(_num(t) for t in f.tau)
            out.append(f"compose(tau={tau}; eps={_num(f.eps)})")
        else:
            terms = "; ".join(f"{','.join(str(v) for v in j)}:{_cnum(c)}" for j, c in f.terms)
            out.append(f"multiply({terms})")
    return " | ".join(out)
