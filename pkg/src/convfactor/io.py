"""JSON file formats for models, queries and model-builder specs.

Model file::

    {"semantics": "convolutional" | "multiplicative",
     "variables": [{"name": "x1", "size": 2}, ...],
     "factors": [{"name": "f1", "scope": ["x1", ...],
                  "values": [...], "complex": false}, ...]}

Values are flat and row-major (first scope variable slowest); when
``complex`` is true each entry is a ``[re, im]`` pair.  Variable ids are the
positions in ``variables``.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import Factor, Semantics, Variable
from .errors import GraphError, ModelFormatError, QueryError, SpecError
from .graph import FactorGraph, check
from .inference import Method, Query
from .models import CovarianceModel, IFSpec, LatentSumSpec

__all__ = [
    "read_json",
    "model_from_dict",
    "model_to_dict",
    "load_model",
    "save_model",
    "values_to_json",
    "query_from_dict",
    "load_query",
    "latent_sum_from_dict",
    "covariance_model_from_dict",
    "if_spec_from_dict",
]


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc


def _field(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ModelFormatError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ModelFormatError(f"{where}: field {key!r} has the wrong type")
    return value


def values_to_json(values: np.ndarray, as_complex: bool | None = None) -> tuple[list, bool]:
    """Flatten to a JSON list; pairs ``[re, im]`` when complex."""
    flat = np.asarray(values, dtype=complex).ravel()
    if as_complex is None:
        as_complex = bool(np.any(flat.imag != 0))
    if as_complex:
        return [[float(z.real), float(z.imag)] for z in flat], True
    return [float(z.real) for z in flat], False


def _values_from_json(raw: list, is_complex: bool, where: str) -> np.ndarray:
    try:
        if is_complex:
            pairs = np.asarray(raw, dtype=float).reshape(-1, 2) if raw else np.zeros((0, 2))
            return pairs[:, 0] + 1j * pairs[:, 1]
        return np.asarray(raw, dtype=float).ravel()
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: bad values ({exc})") from exc


def model_from_dict(doc: dict) -> FactorGraph:
    """Build a :class:`FactorGraph`; raises ModelFormatError or GraphError."""
    sem = _field(doc, "semantics", str, "model")
    try:
        semantics = Semantics(sem)
    except ValueError:
        raise ModelFormatError(f"model: unknown semantics {sem!r}") from None
    variables = []
    for k, entry in enumerate(_field(doc, "variables", list, "model")):
        name = _field(entry, "name", str, f"variable {k}")
        size = _field(entry, "size", int, f"variable {name}")
        if size < 1:
            raise GraphError(f"variable {name!r} has size {size}")
        variables.append(Variable(k, name, size))
    by_name = {}
    for v in variables:
        if v.name in by_name:
            raise GraphError(f"duplicate variable name {v.name!r}")
        by_name[v.name] = v
    factors = {}
    for k, entry in enumerate(_field(doc, "factors", list, "model")):
        name = _field(entry, "name", str, f"factor {k}")
        if name in factors:
            raise GraphError(f"duplicate factor name {name!r}")
        scope_names = _field(entry, "scope", list, f"factor {name}")
        raw = _field(entry, "values", list, f"factor {name}")
        is_complex = bool(entry.get("complex", False))
        try:
            scope = [by_name[s] for s in scope_names]
        except (KeyError, TypeError):
            raise GraphError(f"factor {name!r} references undeclared variables {scope_names}") from None
        values = _values_from_json(raw, is_complex, f"factor {name}")
        expected = math.prod(v.size for v in scope)
        if values.size != expected:
            raise GraphError(f"factor {name!r} has {values.size} values, scope needs {expected}")
        try:
            factors[name] = Factor(scope, values)
        except ValueError as exc:
            raise GraphError(f"factor {name!r}: {exc}") from exc
    return check(FactorGraph(variables, factors, semantics))


def model_to_dict(g: FactorGraph, as_complex: bool | None = None) -> dict:
    """``as_complex=None`` writes pairs only for factors with a non-zero imaginary part."""
    factors = []
    for name, f in g.factors.items():
        values, is_complex = values_to_json(f.values, as_complex)
        factors.append({"name": name, "scope": f.names, "values": values, "complex": is_complex})
    return {
        "semantics": g.semantics.value,
        "variables": [{"name": v.name, "size": v.size} for v in g.variables],
        "factors": factors,
    }


def load_model(path) -> FactorGraph:
    return model_from_dict(read_json(path))


def save_model(g: FactorGraph, path, as_complex: bool | None = None) -> None:
    Path(path).write_text(json.dumps(model_to_dict(g, as_complex), indent=1) + "\n")


def query_from_dict(doc: dict, g: FactorGraph) -> tuple[Query, Method, bool]:
    """Resolve a query file against ``g``: (query, method, check_against_oracle)."""
    if not isinstance(doc, dict):
        raise ModelFormatError("query: expected a JSON object")
    marg = doc.get("marginalize", [])
    evidence = doc.get("evidence", {})
    if not isinstance(marg, list) or not isinstance(evidence, dict):
        raise ModelFormatError("query: marginalize must be a list and evidence an object")
    try:
        method = Method(doc.get("method", "auto"))
    except ValueError:
        raise ModelFormatError(f"query: unknown method {doc.get('method')!r}") from None
    try:
        m = frozenset(g.var(name).id for name in marg)
        e = {g.var(name).id: int(value) for name, value in evidence.items()}
    except KeyError as exc:
        raise QueryError(f"query references unknown variable {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"query: bad evidence value ({exc})") from None
    query = Query(m, e)
    query.validate(g)
    return query, method, bool(doc.get("check_against_oracle", False))


def load_query(path, g: FactorGraph) -> tuple[Query, Method, bool]:
    return query_from_dict(read_json(path), g)


def latent_sum_from_dict(doc: dict) -> LatentSumSpec:
    """``{"blocks": [{"ids": [1, 2], "sizes": [2, 2], "values": [...]}], "sums": [[2, 4]]}``"""
    blocks = []
    for k, entry in enumerate(_field(doc, "blocks", list, "latent-sum spec"), 1):
        ids = _field(entry, "ids", list, f"block {k}")
        sizes = _field(entry, "sizes", list, f"block {k}")
        if len(ids) != len(sizes):
            raise SpecError(f"block {k}: {len(ids)} ids but {len(sizes)} sizes")
        names = entry.get("names") or [f"x{i}" for i in ids]
        scope = [Variable(int(i), str(n), int(s)) for i, n, s in zip(ids, names, sizes)]
        values = _values_from_json(_field(entry, "values", list, f"block {k}"), False, f"block {k}")
        try:
            blocks.append(Factor(scope, values))
        except ValueError as exc:
            raise SpecError(f"block {k}: {exc}") from exc
    return LatentSumSpec(blocks, [list(s) for s in doc.get("sums", [])])


def covariance_model_from_dict(doc: dict) -> CovarianceModel:
    """``{"covariance": [[...], ...] or flat, "mean": [...], "names": [...]}``"""
    raw = np.asarray(_field(doc, "covariance", list, "covariance model"), dtype=float)
    if raw.ndim == 1:
        n = math.isqrt(raw.size)
        if n * n != raw.size:
            raise ModelFormatError("covariance model: flat covariance is not square")
        raw = raw.reshape(n, n)
    return CovarianceModel(doc.get("mean"), raw, tuple(doc.get("names", ())))


def if_spec_from_dict(doc: dict) -> IFSpec:
    """``{"N": 3, "H": [[...]], "sources": [[...], ...], "noise": [flat N**L]}``"""
    n = _field(doc, "N", int, "IF spec")
    h = np.asarray(_field(doc, "H", list, "IF spec"), dtype=int)
    sources = [np.asarray(p, dtype=float) for p in _field(doc, "sources", list, "IF spec")]
    noise = np.asarray(_field(doc, "noise", list, "IF spec"), dtype=float)
    L = h.shape[0] if h.ndim == 2 else int(doc.get("L", 0))
    if noise.ndim == 1 and L:
        if noise.size != n**L:
            raise SpecError(f"noise has {noise.size} values, expected {n**L}")
        noise = noise.reshape((n,) * L)
    return IFSpec(h, sources, noise, n, tuple(doc.get("names", ())))
