"""Container parsing and dataset loading against producer-emitted files."""

import json
import os

import numpy as np
import pytest

from fracsynth_trainer.container import (
    BadMagic,
    TruncatedPayload,
    read_array,
    write_array,
)
from fracsynth_trainer.data import (
    MissingManifest,
    ShapeMismatch,
    channels_to_complex,
    complex_to_channels,
    load_dataset,
    rss_from_channels,
)


def example_dir(root, idx):
    return os.path.join(root, "examples", f"{idx:06d}")


def test_read_matches_independent_parse(small_dataset):
    path = os.path.join(example_dir(small_dataset, 0), "input.arr")
    got = read_array(path)
    blob = open(path, "rb").read()
    hlen = int.from_bytes(blob[8:12], "little")
    header = json.loads(blob[12:12 + hlen])
    raw = np.frombuffer(blob[12 + hlen:], dtype="<c8").reshape(header["shape"])
    assert got.dtype == np.complex64
    assert np.array_equal(got.view(np.float32), raw.view(np.float32))


def test_roundtrip_bitexact(small_dataset, tmp_path):
    for name in ("input.arr", "target.arr"):
        src = os.path.join(example_dir(small_dataset, 1), name)
        dst = tmp_path / name
        write_array(read_array(src), dst)
        assert open(src, "rb").read() == dst.read_bytes()


def test_bad_magic(tmp_path):
    p = tmp_path / "x.arr"
    p.write_bytes(b"WRONGMAG" + bytes(20))
    with pytest.raises(BadMagic):
        read_array(p)


def test_truncated(small_dataset, tmp_path):
    src = os.path.join(example_dir(small_dataset, 0), "target.arr")
    blob = open(src, "rb").read()
    p = tmp_path / "t.arr"
    p.write_bytes(blob[:-10])
    with pytest.raises(TruncatedPayload):
        read_array(p)


def test_load_dataset_shapes(small_dataset):
    datasets, manifest = load_dataset(small_dataset)
    n = sum(len(datasets[k]) for k in ("train", "val", "test"))
    assert n == 4
    inputs, target = datasets["train"][0]
    assert inputs.shape == (8, 8, 32, 32)  # 2 x 4 coils, 8 frames
    assert target.shape == (1, 8, 32, 32)
    assert inputs.dtype.is_floating_point


def test_channel_encoding_roundtrip(small_dataset):
    stack = read_array(os.path.join(example_dir(small_dataset, 2), "input.arr"))
    channels = complex_to_channels(stack)
    back = channels_to_complex(channels)
    assert np.array_equal(back, stack)
    rss = rss_from_channels(channels)
    direct = np.sqrt((np.abs(stack.astype(np.complex128)) ** 2).sum(axis=0))
    assert np.allclose(rss, direct, atol=1e-12)


def test_shape_mismatch_detected(small_dataset, tmp_path):
    import shutil

    root = tmp_path / "doctored"
    shutil.copytree(small_dataset, root)
    manifest = json.load(open(root / "manifest.json"))
    manifest["config"]["size"] = 64
    json.dump(manifest, open(root / "manifest.json", "w"))
    with pytest.raises(ShapeMismatch):
        load_dataset(str(root))


def test_missing_manifest(tmp_path):
    with pytest.raises(MissingManifest):
        load_dataset(str(tmp_path))
