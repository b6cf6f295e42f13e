"""Reader/writer for the dataset container format.

Independent implementation of the producer's byte layout: magic
``FSYN0001``, u32 little-endian header length, JSON header with dtype
(``f32``/``c64``), shape and order, then a little-endian payload with
complex values as interleaved float32 pairs.
"""

import json

import numpy as np

MAGIC = b"FSYN0001"
_DTYPES = {"f32": np.dtype("<f4"), "c64": np.dtype("<c8")}


class ContainerError(Exception):
    pass


class BadMagic(ContainerError):
    pass


class TruncatedPayload(ContainerError):
    pass


class UnsupportedDtype(ContainerError):
    pass


def read_array(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise BadMagic(f"{path}: bad magic {blob[:8]!r}")
    if len(blob) < 12:
        raise TruncatedPayload(f"{path}: missing header length")
    hlen = int.from_bytes(blob[8:12], "little")
    if len(blob) < 12 + hlen:
        raise TruncatedPayload(f"{path}: header cut short")
    header = json.loads(blob[12:12 + hlen].decode("ascii"))
    code = header.get("dtype")
    if code not in _DTYPES:
        raise UnsupportedDtype(f"{path}: dtype {code!r}")
    shape = header["shape"]
    dtype = _DTYPES[code]
    expected = dtype.itemsize * int(np.prod(shape))
    payload = blob[12 + hlen:]
    if len(payload) != expected:
        raise TruncatedPayload(
            f"{path}: payload {len(payload)} bytes, expected {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def write_array(x, path):
    """Serialize back to the same byte layout (used by roundtrip checks)."""
    x = np.asarray(x)
    code = {np.dtype(np.float32): "f32", np.dtype(np.complex64): "c64"}.get(x.dtype)
    if code is None:
        raise UnsupportedDtype(f"dtype {x.dtype}")
    header = json.dumps(
        {"dtype": code, "shape": list(x.shape), "order": "row-major"},
        separators=(",", ":"),
    ).encode("ascii")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(header).to_bytes(4, "little"))
        fh.write(header)
        fh.write(np.ascontiguousarray(x).astype(_DTYPES[code], copy=False).tobytes())
