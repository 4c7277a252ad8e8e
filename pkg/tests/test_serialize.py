import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from john_gauge import geom, john, mvie, serialize
from john_gauge.geom import Ellipsoid, HPolytope

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rewrite(text, reader):
    return serialize.dumps(reader(json.loads(text)))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=6), seeds)
def test_simplex_byte_round_trip(n, seed):
    s = geom.random_simplex(n, seed)
    text = serialize.dumps(s)
    back = serialize.simplex_from_json(json.loads(text))
    assert np.array_equal(back.vertices, s.vertices)
    assert rewrite(text, serialize.simplex_from_json) == text


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=6), seeds)
def test_polytope_byte_round_trip(n, seed):
    p = geom.to_halfspaces(geom.random_simplex(n, seed))
    text = serialize.dumps(p)
    back = serialize.polytope_from_json(json.loads(text))
    assert np.array_equal(back.normals, p.normals) and np.array_equal(back.offsets, p.offsets)
    assert rewrite(text, serialize.polytope_from_json) == text


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=5), seeds)
def test_ellipsoid_byte_round_trip(n, seed):
    e = mvie.analytic_simplex_john(geom.random_simplex(n, seed))
    text = serialize.dumps(e)
    assert rewrite(text, serialize.ellipsoid_from_json) == text


@pytest.mark.parametrize("n", [2, 3])
def test_certificate_round_trip(n):
    cert = john.simplex_certificate(geom.random_simplex(n, 1))
    text = serialize.dumps(cert)
    d = json.loads(text)
    assert set(d) == {"dim", "contacts", "weights", "residual_a", "residual_b"}
    back = serialize.certificate_from_json(d)
    assert np.array_equal(back.weights, cert.weights) and back.residual_a == cert.residual_a
    assert serialize.dumps(back) == text


def test_schemas():
    d = json.loads(serialize.dumps(geom.regular_simplex(2)))
    assert d["dim"] == 2 and len(d["vertices"]) == 3
    d = json.loads(serialize.dumps(HPolytope.cube(2)))
    assert set(d) == {"dim", "normals", "offsets"}
    d = json.loads(serialize.dumps(Ellipsoid.ball(2)))
    assert set(d) == {"center", "shape"}


def test_seventeen_digits():
    text = serialize.dumps(geom.regular_simplex(2))
    body = text[text.index("[[") :]
    toks = body.replace("[", " ").replace("]", " ").replace(",", " ").replace("}", " ").split()
    assert len(toks) == 6
    # every float literal carries 17 significant digits
    for tok in toks:
        mantissa = tok.split("e")[0]
        assert len(mantissa.replace("-", "").replace(".", "")) == 17


def test_body_dispatch_and_dim_check():
    assert isinstance(serialize.body_from_json(json.loads(serialize.dumps(HPolytope.cube(2)))), HPolytope)
    with pytest.raises(ValueError):
        serialize.body_from_json({"foo": 1})
    with pytest.raises(ValueError):
        serialize.simplex_from_json({"dim": 3, "vertices": [[0, 0], [1, 0], [0, 1]]})


def test_unnormalized_polytope_input():
    p = serialize.polytope_from_json({"normals": [[2, 0], [-3, 0], [0, 1], [0, -1]], "offsets": [2, 3, 1, 1]})
    assert np.allclose(p.offsets, 1)


def test_write_file(tmp_path):
    out = tmp_path / "r.json"
    text = serialize.write(out, geom.regular_simplex(3), regular=True)
    assert out.read_text() == text
    d = serialize.load(out)
    assert d["regular"] is True and len(d["vertices"]) == 4
