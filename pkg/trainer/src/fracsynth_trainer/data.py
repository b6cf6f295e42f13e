"""Dataset loading: container files plus manifest into training tensors.

The complex coil stack becomes 2C real channels ordered
[re_0..re_{C-1}, im_0..im_{C-1}]; targets stay single-channel magnitudes.
"""

import json
import os

import numpy as np
import torch

from .container import read_array


class ShapeMismatch(Exception):
    pass


class MissingManifest(Exception):
    pass


def complex_to_channels(stack):
    """(C, T, H, W) complex64 to (2C, T, H, W) float32 channels."""
    return np.concatenate([stack.real, stack.imag], axis=0).astype(np.float32)


def channels_to_complex(channels):
    """Inverse of :func:`complex_to_channels`."""
    half = channels.shape[0] // 2
    return channels[:half] + 1j * channels[half:]


def rss_from_channels(channels):
    """Root-sum-of-squares magnitude of the channel-encoded coil stack."""
    return np.sqrt((channels.astype(np.float64) ** 2).sum(axis=0))


class FractalPairs(torch.utils.data.Dataset):
    """Paired (aliased channels, magnitude target) examples in memory."""

    def __init__(self, inputs, targets, indices):
        self.inputs = inputs
        self.targets = targets
        self.indices = list(indices)

    def __len__(self):
        return len(self.indices)

    def __getitem__(self, i):
        idx = self.indices[i]
        return (torch.from_numpy(self.inputs[idx]),
                torch.from_numpy(self.targets[idx][None]))


def load_dataset(root):
    """Read every example under ``root`` and return per-split datasets.

    Validates array shapes against the manifest configuration; raises
    ShapeMismatch when a file disagrees.
    """
    manifest_path = os.path.join(root, "manifest.json")
    if not os.path.exists(manifest_path):
        raise MissingManifest(f"no manifest.json under {root}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    cfg = manifest["config"]
    coils = cfg["compressed_coils"]
    shape_in = (coils, cfg["frames"], cfg["size"], cfg["size"])
    shape_tgt = (cfg["frames"], cfg["size"], cfg["size"])
    inputs, targets = [], []
    for record in manifest["examples"]:
        exdir = os.path.join(root, "examples", f"{record['index']:06d}")
        stack = read_array(os.path.join(exdir, "input.arr"))
        target = read_array(os.path.join(exdir, "target.arr"))
        if stack.shape != shape_in:
            raise ShapeMismatch(
                f"{exdir}: input shape {stack.shape}, manifest {shape_in}")
        if target.shape != shape_tgt:
            raise ShapeMismatch(
                f"{exdir}: target shape {target.shape}, manifest {shape_tgt}")
        inputs.append(complex_to_channels(stack))
        targets.append(target)
    split = manifest.get("split") or {
        "train": list(range(len(inputs))), "val": [], "test": []}
    return {
        name: FractalPairs(inputs, targets, split[name])
        for name in ("train", "val", "test")
    }, manifest
