import json

import numpy as np
import pytest

from torsionlab.complex import BilinearStructure, GradedComplex
from torsionlab.exceptions import ParseError, ValidationError
from torsionlab.models.io import (
    complex_to_json,
    load_complex,
    load_scenario,
    load_torus,
    read_complex_file,
    save_complex,
    save_torus,
)
from torsionlab.models.random import random_compatible_pair, random_complex
from torsionlab.models.torus import random_torus_model


def test_complex_round_trip_is_bit_exact(tmp_path, rng):
    K = random_complex(rng, dims=(5, 5))
    b, G = random_compatible_pair(rng, 5)
    p = tmp_path / "c.json"
    save_complex(p, K, b, G)
    cf = read_complex_file(p)
    assert np.array_equal(cf.complex.d_even, K.d_even)
    assert np.array_equal(cf.complex.d_odd, K.d_odd)
    assert np.array_equal(cf.form.B_odd, b.B_odd)
    assert np.array_equal(cf.chirality.Gamma_even_to_odd, G.Gamma_even_to_odd)
    save_complex(tmp_path / "again.json", cf.complex, cf.form, cf.chirality)
    assert (tmp_path / "again.json").read_text() == p.read_text()


def test_torus_round_trip(tmp_path, rng):
    m = random_torus_model(rng, rank=2, cutoff=1)
    save_torus(tmp_path / "t.json", m)
    m2 = load_torus(tmp_path / "t.json")
    assert np.array_equal(m2.b_E, m.b_E)
    assert all(np.array_equal(x, y) for x, y in zip(m.A, m2.A))
    assert m2.scales == m.scales and m2.flux == m.flux and m2.cutoff == m.cutoff


def _write(tmp_path, obj, name="x.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_non_symmetric_form_rejected(tmp_path):
    obj = complex_to_json(GradedComplex.zero(2, 1), BilinearStructure.identity(2, 1))
    obj["b_even"][0][1] = [0.5, 0.0]
    with pytest.raises(ValidationError):
        load_complex(_write(tmp_path, obj))


def test_nonzero_square_rejected(tmp_path):
    obj = complex_to_json(GradedComplex.zero(1, 1), BilinearStructure.identity(1, 1))
    obj["d_even"] = [[[1.0, 0.0]]]
    obj["d_odd"] = [[[1.0, 0.0]]]
    with pytest.raises(ValidationError):
        load_complex(_write(tmp_path, obj))


def test_parse_error_names_the_field(tmp_path):
    obj = complex_to_json(GradedComplex.zero(2, 1), BilinearStructure.identity(2, 1))
    obj["d_even"][0][1] = "oops"
    with pytest.raises(ParseError) as ei:
        load_complex(_write(tmp_path, obj))
    assert "d_even[0][1]" in str(ei.value)


def test_wrong_shape_reports_location(tmp_path):
    obj = complex_to_json(GradedComplex.zero(2, 1), BilinearStructure.identity(2, 1))
    obj["n_odd"] = 2
    with pytest.raises(ParseError) as ei:
        load_complex(_write(tmp_path, obj))
    assert "d_even" in str(ei.value)


def test_missing_field(tmp_path):
    with pytest.raises(ParseError) as ei:
        load_complex(_write(tmp_path, {"n_even": 1}))
    assert "n_odd" in str(ei.value)


def test_malformed_json_has_line_and_column(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"n_even": 1,\n "n_odd": }')
    with pytest.raises(ParseError) as ei:
        load_complex(p)
    assert ":2:" in str(ei.value)


def test_scenario_with_inline_torus(tmp_path, rng):
    from torsionlab.models.io import torus_to_json

    m = torus_to_json(random_torus_model(rng, rank=1, cutoff=0))
    m["kind"] = "torus"
    obj = {"model": m, "path": {"kind": "metric", "generator": [0.1, -0.2, 0.05]}, "samples": [0.0, 0.5]}
    sc = load_scenario(_write(tmp_path, obj))
    assert sc.model_kind == "torus" and sc.path_kind == "metric"
    assert sc.generator == (0.1, -0.2, 0.05)
    assert sc.h == (1e-3, 1e-4)


def test_scenario_with_referenced_complex(tmp_path):
    save_complex(tmp_path / "k.json", GradedComplex([[2.0]], [[0.0]]), BilinearStructure.identity(1, 1))
    obj = {
        "model": {"kind": "explicit", "file": "k.json"},
        "path": {"kind": "bilinear", "generator": {"even": [[[0.1, 0]]], "odd": [[[0.0, 0]]]}},
    }
    sc = load_scenario(_write(tmp_path, obj, "s.json"))
    assert sc.model.complex.dims() == (1, 1)


def test_scenario_rejects_unknown_path_kind(tmp_path):
    obj = {"model": {"kind": "simplicial", "shape": "circle"}, "path": {"kind": "warp", "generator": []}}
    with pytest.raises(ParseError):
        load_scenario(_write(tmp_path, obj))
