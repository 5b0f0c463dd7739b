"""Reading and writing CP tensors as self-describing JSON documents.

Format (version 1): an object with fields ``format_version`` (int),
``dims`` (list of ints), ``weights`` (list of reals) and ``factors`` (one
matrix per dimension as a list of N_j rows of r reals each).  Reals are
serialized with full round-trip precision, so write followed by read
reproduces a tensor bit-exactly.

Structural problems raise :class:`ParseError` naming the offending field;
NaN/Inf entries raise :class:`cptt.core.TensorValueError`.
"""

from __future__ import annotations

import json

import numpy as np

from .core import CpTensor, Grid, TensorValueError

__all__ = ["ParseError", "read_cp", "write_cp"]

FORMAT_VERSION = 1


class ParseError(ValueError):
    """Malformed CP tensor file."""


def write_cp(a: CpTensor, path) -> None:
    """Serialize `a` to `path` in the versioned JSON format."""
    doc = {
        "format_version": FORMAT_VERSION,
        "dims": list(a.grid.dims),
        "weights": a.weights.tolist(),
        "factors": [mat.tolist() for mat in a.factors],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def _check_finite(values, field: str):
    flat = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(flat)):
        raise TensorValueError(f"field '{field}' contains non-finite values")


def read_cp(path) -> CpTensor:
    """Parse a CP tensor file, validating structure and values."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not valid JSON: {exc}") from None

    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    for field in ("format_version", "dims", "weights", "factors"):
        if field not in doc:
            raise ParseError(f"missing field '{field}'")
    if doc["format_version"] != FORMAT_VERSION:
        raise ParseError(
            f"field 'format_version' is {doc['format_version']!r}, expected {FORMAT_VERSION}"
        )

    dims = doc["dims"]
    if (
        not isinstance(dims, list)
        or not dims
        or not all(isinstance(n, int) and n >= 1 for n in dims)
    ):
        raise ParseError("field 'dims' must be a non-empty list of positive integers")

    weights = doc["weights"]
    if not isinstance(weights, list) or not all(
        isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights
    ):
        raise ParseError("field 'weights' must be a list of reals")
    _check_finite(weights, "weights")
    r = len(weights)

    factors = doc["factors"]
    if not isinstance(factors, list) or len(factors) != len(dims):
        raise ParseError(
            f"field 'factors' must list one matrix per dimension ({len(dims)})"
        )
    mats = []
    for j, rows in enumerate(factors):
        field = f"factors[{j}]"
        if not isinstance(rows, list) or len(rows) != dims[j]:
            raise ParseError(f"field '{field}' must have {dims[j]} rows")
        for row in rows:
            if not isinstance(row, list) or len(row) != r:
                raise ParseError(
                    f"field '{field}' rows must have {r} entries (one per weight)"
                )
            if not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in row
            ):
                raise ParseError(f"field '{field}' entries must be reals")
        mat = np.array(rows, dtype=float).reshape(dims[j], r)
        _check_finite(mat, field)
        mats.append(mat)

    if r == 0:
        return CpTensor.zero(Grid(tuple(dims)))
    return CpTensor(Grid(tuple(dims)), np.array(weights, dtype=float), tuple(mats))
