"""On-disk model artifacts.

A model artifact is a JSON document plus one raw little-endian ``f64`` file
per factor, referenced by a path relative to the JSON file. JSON is written
with sorted keys and ``repr``-exact floats so that identical runs produce
identical bytes.
"""

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidInput, ParseError
from .estimators import LowRankFactors

FORMAT = "lrdmd-model"
SPECTRAL_FORMAT = "lrdmd-spectral"


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def provenance(command, config, seed):
    return {"tool": "lrdmd", "version": __version__, "command": command, "config": config, "seed": seed}


def _write_block(path, array):
    data = np.ascontiguousarray(array, dtype="<f8").tobytes(order="C")
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def save_model(path, factors, report, meta):
    """Write ``<stem>.json`` and the factor blocks ``<stem>.P.f64``, ``<stem>.Q.f64``."""
    path = Path(path)
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    blocks = {}
    for name, arr in (("P", factors.P), ("Q", factors.Q)):
        fname = f"{stem}.{name}.f64"
        digest = _write_block(path.parent / fname, arr)
        blocks[name] = {"path": fname, "shape": list(arr.shape), "dtype": "<f8", "order": "C", "sha256": digest}
    doc = dict(meta)
    doc.update({
        "format": FORMAT,
        "method": factors.method,
        "k_requested": factors.k_requested,
        "rank": factors.r,
        "n": factors.n,
        "factors": blocks,
        "report": report.to_dict(),
    })
    path.write_text(dumps(doc))
    return path


def load_model(path):
    """Return ``(factors, document)`` from a model artifact."""
    path = Path(path)
    if not path.exists():
        raise InvalidInput(f"model artifact not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"model artifact is not valid JSON: {exc.msg}", f"line {exc.lineno}") from None
    if doc.get("format") != FORMAT:
        raise ParseError(f"not a model artifact (format={doc.get('format')!r})")
    arrays = {}
    for name in ("P", "Q"):
        info = doc["factors"][name]
        block = path.parent / info["path"]
        if not block.exists():
            raise InvalidInput(f"factor block missing: {block}")
        raw = block.read_bytes()
        shape = tuple(info["shape"])
        if len(raw) != 8 * int(np.prod(shape)):
            raise ParseError(f"factor block {block.name} has {len(raw)} bytes, expected {8 * int(np.prod(shape))}")
        if hashlib.sha256(raw).hexdigest() != info["sha256"]:
            raise ParseError(f"factor block {block.name} checksum mismatch")
        arrays[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)
    factors = LowRankFactors(
        P=arrays["P"], Q=arrays["Q"], r=int(doc["rank"]), method=doc["method"], k_requested=doc["k_requested"]
    )
    return factors, doc


def save_spectral(path, model, meta):
    doc = dict(meta)
    doc.update({"format": SPECTRAL_FORMAT, "model": model.to_dict()})
    Path(path).write_text(dumps(doc))


def load_spectral(path):
    from .spectral import SpectralModel

    path = Path(path)
    if not path.exists():
        raise InvalidInput(f"spectral artifact not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"spectral artifact is not valid JSON: {exc.msg}", f"line {exc.lineno}") from None
    if doc.get("format") != SPECTRAL_FORMAT:
        raise ParseError(f"not a spectral artifact (format={doc.get('format')!r})")
    return SpectralModel.from_dict(doc["model"]), doc
