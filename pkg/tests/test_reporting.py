import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schattenlab.errors import ConfigurationError
from schattenlab.operators import Bessel, Compose, Multiply, OperatorSpec, assemble
from schattenlab.reporting import (
    csv_text, dumps, loads, parse_config, parse_operator, read_matrix, spec_to_text, write_matrix,
)

from conftest import fio, mult_bessel


@settings(max_examples=100, deadline=None)
@given(st.floats(allow_nan=False))
def test_float_roundtrip(x):
    back = loads(dumps({"x": x}))["x"]
    assert float(back) == x


def test_json_shape():
    text = dumps({"b": 1.0, "a": [1, 2.5], "c": complex(1, -2), "d": math.inf, "e": True})
    d = json.loads(text)
    assert list(d) == ["a", "b", "c", "d", "e"]
    assert d["c"] == {"im": -2, "re": 1} and d["d"] == "inf" and d["e"] is True
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}\n'


def test_csv():
    text = csv_text(("a", "b"), [(1, 0.5), (2, math.inf)])
    assert text == "a,b\n1,0.5\n2,inf\n"


def test_config_parsing():
    cfg = parse_config("# comment\nmanifold = torus:1\n[cutoff]\nlambda = 32  # trailing\n")
    assert cfg == {"manifold": "torus:1", "cutoff.lambda": "32"}
    with pytest.raises(ConfigurationError):
        parse_config("no equals sign")


def test_operator_text_roundtrip():
    for spec in (mult_bessel(3), fio(4, 0.7, 0.2),
                 OperatorSpec(2, (Compose((0.1, -0.3)), Bessel(2.5))),
                 OperatorSpec(1, (Multiply.from_coefficients({2: 1 + 0.5j, -2: 1 - 0.5j}),))):
        assert parse_operator(spec_to_text(spec), spec.dimension) == spec
    with pytest.raises(ConfigurationError):
        parse_operator("warp(s=1)", 1)
    with pytest.raises(ConfigurationError):
        parse_operator("", 1)


def test_matrix_export(tmp_path):
    op = assemble(fio(2, 0.7, 0.2), 8)
    bin_path, meta_path = write_matrix(tmp_path / "m", op)
    raw = np.fromfile(bin_path, dtype="<f8")
    assert raw.size == 2 * op.side**2
    np.testing.assert_array_equal(raw[0::2].reshape(op.side, op.side), op.matrix.real)
    np.testing.assert_array_equal(raw[1::2].reshape(op.side, op.side), op.matrix.imag)
    mat, meta = read_matrix(tmp_path / "m")
    np.testing.assert_array_equal(mat, op.matrix)
    assert meta["modes"] == op.modes.tolist()
