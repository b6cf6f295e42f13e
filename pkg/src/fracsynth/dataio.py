"""Bit-exact array container files, example persistence, dataset splitting.

Container layout (all little-endian regardless of host):

    bytes 0..7    magic ``FSYN0001``
    bytes 8..11   header length, u32
    header        JSON ``{"dtype": "f32"|"c64", "shape": [...], "order": "row-major"}``
    payload       raw values; complex stored as interleaved (re, im) float32

Round trips are bit-identical, which is what makes dataset regeneration
checks meaningful.
"""

import json
import os

import numpy as np

from .errors import (
    BadMagic,
    BadShape,
    IoError,
    OutOfRange,
    TruncatedPayload,
    UnsupportedDtype,
)

MAGIC = b"FSYN0001"

_DTYPES = {"f32": np.dtype("<f4"), "c64": np.dtype("<c8")}
_CODES = {np.dtype(np.float32): "f32", np.dtype(np.complex64): "c64"}


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def dump_json(obj, path):
    """Write JSON with numpy scalars coerced; trailing newline included."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, default=_json_default)
            fh.write("\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return path


def write_array(x, path):
    """Write ``x`` (float32 or complex64) to ``path``; returns bytes written.

    The caller chooses the storage precision by casting beforehand; silent
    down-casts here would hide precision decisions.
    """
    x = np.asarray(x)
    code = _CODES.get(x.dtype)
    if code is None:
        raise UnsupportedDtype(f"dtype {x.dtype} not in (float32, complex64)")
    if x.ndim == 0 or any(s <= 0 for s in x.shape):
        raise BadShape(f"shape {x.shape} is empty or non-positive")
    header = json.dumps(
        {"dtype": code, "shape": list(x.shape), "order": "row-major"},
        separators=(",", ":"),
    ).encode("ascii")
    payload = np.ascontiguousarray(x).astype(_DTYPES[code], copy=False).tobytes()
    blob = MAGIC + len(header).to_bytes(4, "little") + header + payload
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return len(blob)


def read_array(path):
    """Read a container file back into a numpy array (validating layout)."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if blob[:8] != MAGIC:
        raise BadMagic(f"{path}: bad magic {blob[:8]!r}")
    if len(blob) < 12:
        raise TruncatedPayload(f"{path}: missing header length")
    header_len = int.from_bytes(blob[8:12], "little")
    if len(blob) < 12 + header_len:
        raise TruncatedPayload(f"{path}: header cut short")
    header = json.loads(blob[12:12 + header_len].decode("ascii"))
    code = header.get("dtype")
    if code not in _DTYPES:
        raise UnsupportedDtype(f"{path}: dtype {code!r}")
    shape = header.get("shape")
    if not shape or any(not isinstance(s, int) or s <= 0 for s in shape):
        raise BadShape(f"{path}: shape {shape!r}")
    dtype = _DTYPES[code]
    expected = dtype.itemsize * int(np.prod(shape))
    payload = blob[12 + header_len:]
    if len(payload) < expected:
        raise TruncatedPayload(f"{path}: {len(payload)} payload bytes, need {expected}")
    if len(payload) > expected:
        raise TruncatedPayload(f"{path}: {len(payload) - expected} trailing bytes")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def split_dataset(n):
    """Contiguous train/val/test index split: round(.75n)/round(.10n)/rest.

    Rounding is half-up for platform stability. Every partition keeps at
    least one example (indices are moved from the largest partition when a
    rounded size hits zero), so tiny datasets stay usable.
    """
    if n < 3:
        raise OutOfRange(f"need at least 3 examples to split, got {n}")
    sizes = [int(np.floor(0.75 * n + 0.5)), int(np.floor(0.10 * n + 0.5)), 0]
    sizes[2] = n - sizes[0] - sizes[1]
    while min(sizes) < 1:
        sizes[sizes.index(max(sizes))] -= 1
        sizes[sizes.index(min(sizes))] += 1
    train = list(range(0, sizes[0]))
    val = list(range(sizes[0], sizes[0] + sizes[1]))
    test = list(range(sizes[0] + sizes[1], n))
    return train, val, test


def example_dir(dataset_dir, index):
    return os.path.join(dataset_dir, "examples", f"{index:06d}")


def write_example(example, dirpath):
    """Persist one training pair; returns its manifest record.

    Writes ``input.arr`` (c64, coils x T x H x W), ``target.arr``
    (f32, T x H x W) and ``meta.json``.
    """
    try:
        os.makedirs(dirpath, exist_ok=True)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    write_array(example.input_stack, os.path.join(dirpath, "input.arr"))
    write_array(example.target, os.path.join(dirpath, "target.arr"))
    record = dict(example.meta)
    record["files"] = {"input": "input.arr", "target": "target.arr"}
    dump_json(record, os.path.join(dirpath, "meta.json"))
    return record


def read_example(dirpath):
    """Load (input, target, meta) from an example directory."""
    inp = read_array(os.path.join(dirpath, "input.arr"))
    tgt = read_array(os.path.join(dirpath, "target.arr"))
    try:
        with open(os.path.join(dirpath, "meta.json"), encoding="utf-8") as fh:
            meta = json.load(fh)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return inp, tgt, meta


def write_manifest(dataset_dir, manifest):
    return dump_json(manifest, os.path.join(dataset_dir, "manifest.json"))


def read_manifest(dataset_dir):
    try:
        with open(os.path.join(dataset_dir, "manifest.json"), encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(str(exc)) from exc
