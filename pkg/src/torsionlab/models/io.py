"""JSON readers and writers for explicit complexes, torus models and deformation scenarios.

Complex numbers are ``[re, im]`` pairs and matrices are lists of rows of pairs.
Python's float repr is the shortest string that parses back to the same double,
so a save/load cycle reproduces every payload bit for bit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..complex import BilinearStructure, GradedComplex, require_valid
from ..exceptions import ParseError, ValidationError
from ..torsion import ChiralityData
from .torus import TorusModel


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc
    except OSError as exc:
        raise ParseError(str(exc), str(path)) from exc


def _dump_json(obj, path):
    text = json.dumps(obj, indent=1, allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _require(obj, key, loc):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", loc)
    if key not in obj:
        raise ParseError(f"missing field '{key}'", loc)
    return obj[key]


def _number(x, loc):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"expected a number, got {type(x).__name__}", loc)
    return float(x)


def _int(x, loc):
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise ParseError("expected a non-negative integer", loc)
    return x


def parse_scalar(x, loc):
    """``[re, im]`` (or a bare real) to a Python complex."""
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(float(x), 0.0)
    if not isinstance(x, list) or len(x) != 2:
        raise ParseError("expected a [re, im] pair", loc)
    return complex(_number(x[0], f"{loc}[0]"), _number(x[1], f"{loc}[1]"))


def parse_matrix(x, loc, shape=None):
    if not isinstance(x, list):
        raise ParseError("expected a list of rows", loc)
    rows = []
    width = None
    for i, row in enumerate(x):
        if not isinstance(row, list):
            raise ParseError("expected a row of [re, im] pairs", f"{loc}[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", f"{loc}[{i}]")
        rows.append([parse_scalar(v, f"{loc}[{i}][{j}]") for j, v in enumerate(row)])
    n_rows = len(rows)
    n_cols = width if width is not None else (shape[1] if shape else 0)
    M = np.array(rows, dtype=complex).reshape(n_rows, n_cols)
    if shape is not None and M.shape != tuple(shape):
        raise ParseError(f"shape {M.shape}, expected {tuple(shape)}", loc)
    return M


def scalar_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


@dataclass(frozen=True, eq=False)
class ComplexFile:
    complex: GradedComplex
    form: BilinearStructure
    chirality: ChiralityData = None
    extras: dict = field(default_factory=dict)


def parse_complex(obj, loc="$"):
    n_e = _int(_require(obj, "n_even", loc), f"{loc}.n_even")
    n_o = _int(_require(obj, "n_odd", loc), f"{loc}.n_odd")
    de = parse_matrix(_require(obj, "d_even", loc), f"{loc}.d_even", (n_o, n_e))
    do = parse_matrix(_require(obj, "d_odd", loc), f"{loc}.d_odd", (n_e, n_o))
    be = parse_matrix(_require(obj, "b_even", loc), f"{loc}.b_even", (n_e, n_e))
    bo = parse_matrix(_require(obj, "b_odd", loc), f"{loc}.b_odd", (n_o, n_o))
    K = GradedComplex(de, do)
    b = BilinearStructure(be, bo)
    Gamma = None
    if "gamma_even_to_odd" in obj or "gamma_odd_to_even" in obj:
        ge = parse_matrix(_require(obj, "gamma_even_to_odd", loc), f"{loc}.gamma_even_to_odd", (n_o, n_e))
        go = parse_matrix(_require(obj, "gamma_odd_to_even", loc), f"{loc}.gamma_odd_to_even", (n_e, n_o))
        Gamma = ChiralityData(ge, go)
    require_valid(K, b)
    return ComplexFile(K, b, Gamma)


def read_complex_file(path):
    """Full contents of an explicit-complex file, including an optional chirality.

    Raises
    ------
    ParseError
        On malformed JSON or a schema violation, with the offending location.
    ValidationError
        If the parsed data violate an invariant (asymmetric form, ``d^2 != 0``).
    """
    return parse_complex(_load_json(path), f"{path}:$")


def load_complex(path):
    """``(K, b)`` from an explicit-complex file."""
    cf = read_complex_file(path)
    return cf.complex, cf.form


def complex_to_json(K, b, Gamma=None):
    obj = {
        "n_even": K.n_even,
        "n_odd": K.n_odd,
        "d_even": matrix_to_json(K.d_even),
        "d_odd": matrix_to_json(K.d_odd),
        "b_even": matrix_to_json(b.B_even),
        "b_odd": matrix_to_json(b.B_odd),
    }
    if Gamma is not None:
        obj["gamma_even_to_odd"] = matrix_to_json(Gamma.Gamma_even_to_odd)
        obj["gamma_odd_to_even"] = matrix_to_json(Gamma.Gamma_odd_to_even)
    return obj


def save_complex(path, K, b, Gamma=None):
    _dump_json(complex_to_json(K, b, Gamma), path)


def parse_torus(obj, loc="$"):
    r = _int(_require(obj, "rank", loc), f"{loc}.rank")
    A = _require(obj, "A", loc)
    if not isinstance(A, list) or len(A) != 3:
        raise ParseError("expected three matrices", f"{loc}.A")
    A = tuple(parse_matrix(a, f"{loc}.A[{i}]", (r, r)) for i, a in enumerate(A))
    scales = _require(obj, "scales", loc)
    if not isinstance(scales, list) or len(scales) != 3:
        raise ParseError("expected three scales", f"{loc}.scales")
    scales = tuple(_number(s, f"{loc}.scales[{i}]") for i, s in enumerate(scales))
    c = parse_scalar(_require(obj, "flux_c", loc), f"{loc}.flux_c")
    N = _int(_require(obj, "cutoff", loc), f"{loc}.cutoff")
    bE = parse_matrix(_require(obj, "b_E", loc), f"{loc}.b_E", (r, r))
    try:
        return TorusModel(r, A, scales, c, N, bE)
    except ValidationError as exc:
        raise ValidationError(f"{loc}: {exc}") from exc


def load_torus(path):
    return parse_torus(_load_json(path), f"{path}:$")


def torus_to_json(model):
    return {
        "rank": model.rank,
        "A": [matrix_to_json(a) for a in model.A],
        "scales": [float(s) for s in model.scales],
        "flux_c": scalar_to_json(model.flux),
        "cutoff": model.cutoff,
        "b_E": matrix_to_json(model.b_E),
    }


def save_torus(path, model):
    _dump_json(torus_to_json(model), path)


@dataclass(frozen=True, eq=False)
class Scenario:
    """A deformation scenario: a model, a path kind with its generator, and sampling data."""

    model_kind: str
    model: object
    path_kind: str
    generator: object
    samples: tuple
    h: tuple
    threshold_a: float


def _parse_model_ref(obj, loc, base):
    kind = _require(obj, "kind", loc)
    if kind not in ("torus", "explicit", "simplicial"):
        raise ParseError(f"unknown model kind '{kind}'", f"{loc}.kind")
    if "file" in obj:
        fname = obj["file"]
        if not isinstance(fname, str):
            raise ParseError("expected a file name", f"{loc}.file")
        p = fname if os.path.isabs(fname) else os.path.join(base, fname)
        if kind == "torus":
            return kind, load_torus(p)
        if kind == "explicit":
            return kind, read_complex_file(p)
        raise ParseError("simplicial models are given inline", f"{loc}.file")
    if kind == "torus":
        return kind, parse_torus(obj, loc)
    if kind == "explicit":
        return kind, parse_complex(obj, loc)
    from .simplicial import circle, sphere3

    shape = obj.get("shape", "circle")
    hol = parse_scalar(obj.get("holonomy", 1.0), f"{loc}.holonomy")
    flux = parse_scalar(obj.get("flux", 0.0), f"{loc}.flux")
    if shape == "circle":
        nv = _int(obj.get("vertices", 3), f"{loc}.vertices")
        return kind, circle(nv, hol, flux)
    if shape == "sphere3":
        return kind, sphere3(flux)
    raise ParseError(f"unknown simplicial shape '{shape}'", f"{loc}.shape")


def _parse_generator(kind, model_kind, g, loc):
    if kind == "metric":
        if model_kind != "torus":
            raise ParseError("metric paths need a torus model", loc)
        if not isinstance(g, list) or len(g) != 3:
            raise ParseError("expected three log-scale rates", loc)
        return tuple(_number(x, f"{loc}[{i}]") for i, x in enumerate(g))
    if kind == "bilinear" and model_kind == "torus":
        return parse_matrix(g, loc)
    if kind == "flux" and model_kind == "simplicial":
        vals = _require(g, "vertex_values", loc)
        if not isinstance(vals, list):
            raise ParseError("expected a list", f"{loc}.vertex_values")
        return {i: parse_scalar(v, f"{loc}.vertex_values[{i}]").real for i, v in enumerate(vals)}
    if kind in ("bilinear", "flux"):
        return (
            parse_matrix(_require(g, "even", loc), f"{loc}.even"),
            parse_matrix(_require(g, "odd", loc), f"{loc}.odd"),
        )
    raise ParseError(f"unknown path kind '{kind}'", loc)


def parse_scenario(obj, loc="$", base="."):
    model_kind, model = _parse_model_ref(_require(obj, "model", loc), f"{loc}.model", base)
    path = _require(obj, "path", loc)
    kind = _require(path, "kind", f"{loc}.path")
    gen = _parse_generator(kind, model_kind, _require(path, "generator", f"{loc}.path"), f"{loc}.path.generator")
    samples = obj.get("samples", [0.0])
    if not isinstance(samples, list) or not samples:
        raise ParseError("expected a non-empty list", f"{loc}.samples")
    samples = tuple(_number(u, f"{loc}.samples[{i}]") for i, u in enumerate(samples))
    hs = obj.get("h", [1e-3, 1e-4])
    if not isinstance(hs, list) or not hs:
        raise ParseError("expected a non-empty list", f"{loc}.h")
    hs = tuple(_number(x, f"{loc}.h[{i}]") for i, x in enumerate(hs))
    a = _number(obj.get("threshold_a", 0.0), f"{loc}.threshold_a")
    return Scenario(model_kind, model, kind, gen, samples, hs, a)


def load_scenario(path):
    return parse_scenario(_load_json(path), f"{path}:$", os.path.dirname(os.path.abspath(path)))
