"""JSON documents for every domain type.

Complex entries are ``[re, im]`` pairs and matrices are row-major nested
lists.  Floats are written with ``repr`` precision, so ``serialize`` after
``parse`` reproduces a document byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .algebra import StarAlgebra
from .bimodules import BimoduleUnits, LinkingAlgebraPresentation
from .category import KAlgMorphism
from .correspondences import Correspondence
from .destabilization import KAlgebra
from .errors import DestabError
from .morphisms import NdMorphism
from .units import MatrixUnitSystem

SCHEMA_VERSION = "1"
KINDS = ("algebra", "units", "kalgebra", "linking", "correspondence", "morphism")


class DocumentError(DestabError, ValueError):
    """Malformed document; ``path`` locates the offending entry."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@lru_cache(maxsize=None)
def load_schema(name: str = "document") -> dict:
    text = resources.files("destab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


@dataclass
class LinkingDocument:
    """A linking algebra with optional bimodule units, as stored on disk."""

    link: LinkingAlgebraPresentation
    units: BimoduleUnits | None = None


@dataclass
class CorrespondenceDocument:
    """A correspondence with optional unit systems on its coefficient algebras."""

    X: Correspondence
    iota: MatrixUnitSystem | None = None
    zeta: MatrixUnitSystem | None = None


def _enc_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _enc_stack(s) -> list:
    return [_enc_matrix(m) for m in np.asarray(s, dtype=complex)]


def _dec_array(obj, shape_tail: tuple, path: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as err:
        raise DocumentError(f"ragged or non-numeric array ({err})", path) from None
    if arr.size == 0:
        return np.zeros((0,) + tuple(s for s in shape_tail if s is not None), dtype=complex)
    if arr.shape[-1] != 2:
        raise DocumentError("complex entries must be [re, im] pairs", path)
    # assign the parts separately; re + 1j * im would turn -0.0 into 0.0
    out = np.empty(arr.shape[:-1], dtype=complex)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    for axis, want in enumerate(shape_tail):
        got = out.shape[out.ndim - len(shape_tail) + axis]
        if want is not None and got != want:
            raise DocumentError(f"expected size {want} on axis {axis - len(shape_tail)}, got {got}", path)
    return out


def _enc_algebra(A: StarAlgebra) -> dict:
    return {"N": A.N, "basis": _enc_stack(A.basis)}


def _dec_algebra(p: dict, path: str) -> StarAlgebra:
    N = p["N"]
    basis = _dec_array(p["basis"], (N, N), f"{path}/basis")
    if basis.ndim != 3:
        raise DocumentError("basis must be a list of matrices", f"{path}/basis")
    return StarAlgebra(N, basis)


def _enc_units(E: MatrixUnitSystem) -> dict:
    return {"n": E.n, "N": E.N, "e": [_enc_stack(row) for row in E.e]}


def _dec_units(p: dict, path: str) -> MatrixUnitSystem:
    n, N = p["n"], p["N"]
    e = _dec_array(p["e"], (n, n, N, N), f"{path}/e")
    if e.ndim != 4:
        raise DocumentError("units must be an n x n grid of matrices", f"{path}/e")
    return MatrixUnitSystem(e)


def to_document(value) -> dict:
    """Plain-JSON document for a domain value."""
    if isinstance(value, StarAlgebra):
        kind, payload = "algebra", _enc_algebra(value)
    elif isinstance(value, MatrixUnitSystem):
        kind, payload = "units", _enc_units(value)
    elif isinstance(value, KAlgebra):
        kind = "kalgebra"
        payload = {
            "algebra": _enc_algebra(value.A),
            "units": _enc_units(value.iota),
            "planted": None if value.planted is None else _enc_algebra(value.planted),
        }
    elif isinstance(value, (LinkingDocument, LinkingAlgebraPresentation)):
        doc = value if isinstance(value, LinkingDocument) else LinkingDocument(value)
        kind = "linking"
        payload = {
            "p": doc.link.p,
            "q": doc.link.q,
            "algebra": _enc_algebra(doc.link.L),
            "units": None if doc.units is None else {"iota": _enc_units(doc.units.iota), "zeta": _enc_units(doc.units.zeta)},
        }
    elif isinstance(value, (CorrespondenceDocument, Correspondence)):
        doc = value if isinstance(value, CorrespondenceDocument) else CorrespondenceDocument(value)
        X = doc.X
        kind = "correspondence"
        units = None
        if doc.iota is not None and doc.zeta is not None:
            units = {"iota": _enc_units(doc.iota), "zeta": _enc_units(doc.zeta)}
        payload = {"A": _enc_algebra(X.A), "B": _enc_algebra(X.B), "X": _enc_stack(X.X),
                   "phi": _enc_stack(X.phi), "units": units}
    elif isinstance(value, (NdMorphism, KAlgMorphism)):
        phi = value.phi if isinstance(value, KAlgMorphism) else value
        kind = "morphism"
        payload = {"source": _enc_algebra(phi.source), "target": _enc_algebra(phi.target),
                   "images": _enc_stack(phi.images), "units": None}
        if isinstance(value, KAlgMorphism):
            payload["units"] = {"source": _enc_units(value.source.iota), "target": _enc_units(value.target.iota)}
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "payload": payload}


def serialize(value) -> str:
    """Canonical text: sorted keys, compact separators, trailing newline."""
    doc = value if isinstance(value, dict) else to_document(value)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def _path(parts) -> str:
    return "/" + "/".join(str(p) for p in parts)


def check_schema(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(load_schema("document"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        # the deepest error is usually the informative one
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise DocumentError(err.message, _path(err.absolute_path))


def from_document(doc: dict):
    check_schema(doc)
    kind, p = doc["kind"], doc["payload"]
    if kind == "algebra":
        return _dec_algebra(p, "/payload")
    if kind == "units":
        return _dec_units(p, "/payload")
    if kind == "kalgebra":
        A = _dec_algebra(p["algebra"], "/payload/algebra")
        planted = p.get("planted")
        return KAlgebra(A, _dec_units(p["units"], "/payload/units"),
                        planted=None if planted is None else _dec_algebra(planted, "/payload/planted"))
    if kind == "linking":
        L = _dec_algebra(p["algebra"], "/payload/algebra")
        if p["p"] + p["q"] != L.N:
            raise DocumentError(f"p + q = {p['p'] + p['q']} but the algebra lives in M_{L.N}", "/payload/p")
        units = p.get("units")
        bu = None
        if units is not None:
            bu = BimoduleUnits(_dec_units(units["iota"], "/payload/units/iota"),
                               _dec_units(units["zeta"], "/payload/units/zeta"))
        return LinkingDocument(LinkingAlgebraPresentation(L, p["p"], p["q"]), bu)
    if kind == "correspondence":
        A = _dec_algebra(p["A"], "/payload/A")
        B = _dec_algebra(p["B"], "/payload/B")
        X = _dec_array(p["X"], (None, B.N), "/payload/X")
        m = X.shape[1] if X.ndim == 3 else 0
        phi = _dec_array(p["phi"], (m, m), "/payload/phi")
        try:
            corr = Correspondence(A, B, X.reshape(-1, m, B.N), phi)
        except ValueError as err:
            raise DocumentError(str(err), "/payload") from None
        units = p.get("units")
        if units is None:
            return CorrespondenceDocument(corr)
        return CorrespondenceDocument(corr, _dec_units(units["iota"], "/payload/units/iota"),
                                      _dec_units(units["zeta"], "/payload/units/zeta"))
    if kind == "morphism":
        S = _dec_algebra(p["source"], "/payload/source")
        T = _dec_algebra(p["target"], "/payload/target")
        images = _dec_array(p["images"], (T.N, T.N), "/payload/images")
        try:
            phi = NdMorphism(S, T, images.reshape(-1, T.N, T.N))
        except ValueError as err:
            raise DocumentError(str(err), "/payload/images") from None
        units = p.get("units")
        if units is None:
            return phi
        src = KAlgebra(S, _dec_units(units["source"], "/payload/units/source"))
        tgt = KAlgebra(T, _dec_units(units["target"], "/payload/units/target"))
        return KAlgMorphism(src, tgt, phi)
    raise DocumentError(f"unknown kind {kind!r}", "/kind")  # unreachable after schema check


def parse(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise DocumentError(f"invalid JSON: {err.msg}", f"line {err.lineno} column {err.colno}") from None
    try:
        return from_document(doc)
    except DocumentError:
        raise
    except ValueError as err:
        raise DocumentError(str(err)) from None


def dump(value, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(value))


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
