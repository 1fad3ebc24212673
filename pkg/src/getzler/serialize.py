"""JSON and binary encodings for the package's data types.

Scalars are written exactly when possible: integers as JSON integers,
non-integral rationals as ``"p/q"`` strings, floats as JSON numbers, and
complex values as separate ``re``/``im`` fields.  Blades are listed by their
1-based generator indices.  Inputs are checked against the bundled JSON
schemas before decoding.

TorusKernel blob layout (little-endian)::

    offset  size  field
    0       8     magic b"GZKERNEL"
    8       4     uint32 format version (1)
    12      4     uint32 n
    16      4     uint32 G
    20      4     uint32 reserved (0)
    24      8     float64 lambda
    32      ...   float64 samples, row-major over shape (G^n, G^n, 2^n, 2)

where the last axis holds (real, imaginary).
"""

from __future__ import annotations

import json
import struct
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from numbers import Number
from typing import Any

import jsonschema
import numpy as np

from .calculus import Generator, GetzlerOp, SpinorLaurentSection, Word
from .clifford import CurvatureTensor, Multivector, SkewMatrix, indices_from_mask, mask_from_indices
from .convolution import FiberFunction, FiberGrid, TorusKernel, TorusSection, TorusTerm
from .gaussian import GaussianSection
from .jets import FormPoly, JetPoly, monomials
from .rees import ReesElement

KERNEL_MAGIC = b"GZKERNEL"
KERNEL_VERSION = 1
_HEADER = struct.Struct("<8sIIIId")


class SchemaError(ValueError):
    """Input JSON does not match its schema; ``location`` is a JSON path."""

    def __init__(self, message: str, location: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("getzler").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _validator(name: str):
    return jsonschema.Draft202012Validator(load_schema(name))


def validate(doc: Any, name: str) -> None:
    errors = sorted(_validator(name).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        raise SchemaError(err.message, path)


# -- scalars ----------------------------------------------------------------------

def _real_to_json(x):
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def _real_from_json(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def scalar_to_json(c) -> dict:
    if isinstance(c, complex):
        out = {"re": _real_to_json(c.real)}
        if c.imag:
            out["im"] = _real_to_json(c.imag)
        return out
    return {"re": _real_to_json(c)}


def scalar_from_json(d: dict):
    re = _real_from_json(d["re"])
    im = _real_from_json(d.get("im", 0))
    if im:
        return complex(float(re), float(im))
    return re


# -- algebra core -----------------------------------------------------------------

def multivector_to_json(a: Multivector) -> dict:
    terms = []
    for mask, c in sorted(a.items()):
        entry = {"blades": list(indices_from_mask(mask))}
        entry.update(scalar_to_json(c))
        terms.append(entry)
    return {"n": a.n, "terms": terms}


def multivector_from_json(d: dict, check: bool = True) -> Multivector:
    if check:
        validate(d, "multivector")
    n = d["n"]
    coeffs: dict[int, Any] = {}
    for t in d["terms"]:
        mask = mask_from_indices(t["blades"], n)
        coeffs[mask] = coeffs.get(mask, 0) + scalar_from_json(t)
    return Multivector(n, coeffs)


def skew_to_json(T: SkewMatrix) -> dict:
    return {"n": T.n, "upper": [{"i": i + 1, "j": j + 1, **scalar_to_json(v)}
                                for (i, j), v in sorted(T.upper.items()) if v != 0]}


def skew_from_json(d: dict) -> SkewMatrix:
    validate(d, "skew")
    return SkewMatrix(d["n"], {(e["i"] - 1, e["j"] - 1): scalar_from_json(e) for e in d["upper"]})


def curvature_to_json(kappa: CurvatureTensor) -> dict:
    return {"n": kappa.n,
            "entries": [{"i": i + 1, "j": j + 1, "form": multivector_to_json(f)}
                        for (i, j), f in sorted(kappa.entries().items()) if not f.is_zero()]}


def curvature_from_json(d: dict) -> CurvatureTensor:
    validate(d, "curvature")
    n = d["n"]
    entries = {}
    for k, e in enumerate(d["entries"]):
        i, j = e["i"] - 1, e["j"] - 1
        if not (0 <= i < j < n):
            raise SchemaError(f"need 1 <= i < j <= {n}", f"$.entries[{k}]")
        form = multivector_from_json(e["form"], check=False)
        if form.n != n:
            raise SchemaError("form dimension differs from n", f"$.entries[{k}].form")
        entries[(i, j)] = form
    return CurvatureTensor(n, entries)


# -- jets -------------------------------------------------------------------------

def _coef_to_json(c):
    if isinstance(c, Multivector):
        return multivector_to_json(c)
    return scalar_to_json(c)


def _coef_from_json(d):
    if "terms" in d:
        return multivector_from_json(d, check=False)
    return scalar_from_json(d)


def jet_to_json(jet: JetPoly) -> dict:
    """Dense, degree-graded layout: ``degrees[d]`` lists every monomial of degree ``d``
    in the order of :func:`getzler.jets.monomials`; zero slots are ``null``."""
    deg = int(jet.degree()) if not jet.is_zero() else -1
    degrees = []
    for d in range(deg + 1):
        row = []
        for alpha in monomials(jet.nvars, d):
            if sum(alpha) != d:
                continue
            c = jet.coefficient(alpha, None)
            row.append(None if c is None else _coef_to_json(c))
        degrees.append(row)
    return {"nvars": jet.nvars, "order": jet.order,
            "kind": "form" if isinstance(jet, FormPoly) else "plain", "degrees": degrees}


def jet_from_json(d: dict, check: bool = True) -> JetPoly:
    if check:
        validate(d, "jet")
    nvars = d["nvars"]
    terms = {}
    for deg, row in enumerate(d["degrees"]):
        alphas = [a for a in monomials(nvars, deg) if sum(a) == deg]
        if len(row) != len(alphas):
            raise SchemaError(f"degree {deg} needs {len(alphas)} slots", f"$.degrees[{deg}]")
        for alpha, c in zip(alphas, row):
            if c is not None:
                terms[alpha] = _coef_from_json(c)
    cls = FormPoly if d.get("kind") == "form" else JetPoly
    return cls(nvars, d.get("order"), terms)


def rees_to_json(a: ReesElement) -> dict:
    return {"n": a.n, "order": a.order,
            "terms": [{"p": p, "jet": jet_to_json(a[p])} for p in a.powers()]}


def rees_from_json(d: dict) -> ReesElement:
    validate(d, "rees")
    return ReesElement(d["n"], d["order"], {t["p"]: jet_from_json(t["jet"], check=False)
                                            for t in d["terms"]})


def spinor_section_to_json(s: SpinorLaurentSection) -> dict:
    return {"n": s.n, "order": s.order,
            "synchronous": [{"p": p, "jet": jet_to_json(s.synchronous[p])} for p in s.powers()]}


def spinor_section_from_json(d: dict) -> SpinorLaurentSection:
    validate(d, "spinor_section")
    return SpinorLaurentSection(d["n"], d["order"],
                                {t["p"]: jet_from_json(t["jet"], check=False) for t in d["synchronous"]})


def getzler_op_to_json(D: GetzlerOp) -> dict:
    words = []
    for w in D.words:
        gens = []
        for g in w.generators:
            entry = {"kind": g.kind}
            if g.kind == "mult":
                entry["jet"] = jet_to_json(g.poly)
            else:
                entry["index"] = g.index + 1
            gens.append(entry)
        coef = w.coefficient
        words.append({"coefficient": jet_to_json(coef) if isinstance(coef, JetPoly) else _coef_to_json(coef),
                      "generators": gens})
    return {"words": words}


def getzler_op_from_json(d: dict) -> GetzlerOp:
    validate(d, "getzler_op")
    words = []
    for w in d["words"]:
        gens = []
        for g in w["generators"]:
            if g["kind"] == "mult":
                gens.append(Generator("mult", 0, jet_from_json(g["jet"], check=False)))
            else:
                gens.append(Generator(g["kind"], g["index"] - 1))
        c = w["coefficient"]
        coef = jet_from_json(c, check=False) if "degrees" in c else _coef_from_json(c)
        words.append(Word(coef, tuple(gens)))
    return GetzlerOp(words)


# -- convolution data ---------------------------------------------------------------

def torus_section_to_json(s: TorusSection) -> dict:
    out = {"n": s.n, "terms": []}
    for p in sorted(s.factored):
        for t in s.factored[p]:
            out["terms"].append({"p": p, "coef": multivector_to_json(t.coef),
                                 "sin_powers": list(t.sin_powers), "a": list(t.a), "b": list(t.b)})
    if s.fourier_data:
        out["fourier"] = [{"p": p, "a": list(a), "b": list(b), "coef": multivector_to_json(c)}
                          for p in sorted(s.fourier_data)
                          for (a, b), c in sorted(s.fourier_data[p].items())]
    return out


def torus_section_from_json(d: dict) -> TorusSection:
    validate(d, "torus_section")
    n = d["n"]
    factored: dict[int, list[TorusTerm]] = {}
    for k, t in enumerate(d["terms"]):
        if not len(t["sin_powers"]) == len(t["a"]) == len(t["b"]) == n:
            raise SchemaError(f"vectors must have length {n}", f"$.terms[{k}]")
        factored.setdefault(t["p"], []).append(
            TorusTerm(multivector_from_json(t["coef"], check=False), tuple(t["sin_powers"]),
                      tuple(t["a"]), tuple(t["b"])))
    fourier: dict[int, dict] = {}
    for t in d.get("fourier", []):
        f = fourier.setdefault(t["p"], {})
        key = (tuple(t["a"]), tuple(t["b"]))
        c = multivector_from_json(t["coef"], check=False)
        f[key] = f[key] + c if key in f else c
    return TorusSection(n, factored, fourier)


def gaussian_to_json(g: GaussianSection) -> dict:
    return {"n": g.n,
            "A": [[multivector_to_json(v) for v in row] for row in g.A],
            "b": [multivector_to_json(v) for v in g.b],
            "c": multivector_to_json(g.c),
            "prefactor": jet_to_json(g.prefactor)}


def gaussian_from_json(d: dict) -> GaussianSection:
    mv = lambda x: multivector_from_json(x, check=False)
    pre = jet_from_json(d["prefactor"], check=False)
    if not isinstance(pre, FormPoly):
        pre = FormPoly(pre.nvars, pre.order, pre.terms())
    return GaussianSection(d["n"], [[mv(v) for v in row] for row in d["A"]],
                           [mv(v) for v in d["b"]], mv(d["c"]), pre)


def _complex_pairs(arr: np.ndarray) -> list:
    return np.stack([arr.real, arr.imag], axis=-1).reshape(-1).tolist()


def fiber_function_to_json(f: FiberFunction) -> dict:
    if f.backend == "gaussian":
        return {"backend": "gaussian", "n": f.n, "gaussian": gaussian_to_json(f.gaussian)}
    if f.backend == "grid":
        return {"backend": "grid", "n": f.n, "G": f.grid.G, "radius": f.grid.radius,
                "samples": _complex_pairs(f.samples)}
    raise ValueError("callable-backed fiber functions have no serial form")


def fiber_function_from_json(d: dict) -> FiberFunction:
    validate(d, "fiber_function")
    n = d["n"]
    if d["backend"] == "gaussian":
        return FiberFunction.from_gaussian(gaussian_from_json(d["gaussian"]))
    grid = FiberGrid(n, d["G"], d["radius"])
    flat = np.asarray(d["samples"], dtype=float)
    shape = (grid.G,) * n + (1 << n,)
    if flat.size != 2 * int(np.prod(shape)):
        raise SchemaError(f"expected {2 * int(np.prod(shape))} numbers", "$.samples")
    pairs = flat.reshape(shape + (2,))
    return FiberFunction(n, "grid", grid=grid, samples=pairs[..., 0] + 1j * pairs[..., 1])


# -- torus kernels ----------------------------------------------------------------------

def kernel_metadata(k: TorusKernel) -> dict:
    return {"n": k.n, "G": k.G, "lambda": float(k.lam), "encoding": "float64-le",
            "shape": [k.G ** k.n, k.G ** k.n, 1 << k.n, 2], "order": "row-major",
            "header_bytes": _HEADER.size, "version": KERNEL_VERSION}


def kernel_to_bytes(k: TorusKernel) -> bytes:
    head = _HEADER.pack(KERNEL_MAGIC, KERNEL_VERSION, k.n, k.G, 0, float(k.lam))
    body = np.stack([k.samples.real, k.samples.imag], axis=-1).astype("<f8").tobytes(order="C")
    return head + body


def kernel_from_bytes(blob: bytes) -> TorusKernel:
    if len(blob) < _HEADER.size:
        raise ValueError("blob shorter than the kernel header")
    magic, version, n, G, _, lam = _HEADER.unpack_from(blob)
    if magic != KERNEL_MAGIC:
        raise ValueError("not a kernel blob")
    if version != KERNEL_VERSION:
        raise ValueError(f"unsupported kernel format version {version}")
    size = G ** n
    data = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    expected = size * size * (1 << n) * 2
    if data.size != expected:
        raise ValueError(f"kernel body has {data.size} values, expected {expected}")
    data = data.reshape(size, size, 1 << n, 2)
    return TorusKernel(n, G, lam, data[..., 0] + 1j * data[..., 1])


def dumps(doc: Any) -> str:
    """Deterministic JSON text."""
    return json.dumps(doc, sort_keys=True, indent=2, default=_default) + "\n"


def _default(x):
    if isinstance(x, Fraction):
        return _real_to_json(x)
    if isinstance(x, complex):
        return scalar_to_json(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Number):
        return float(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")
