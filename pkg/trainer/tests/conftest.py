"""Shared fixtures: datasets produced by the generator CLI."""

import subprocess
import sys

import pytest


def generate_dataset(outdir, n, size, frames, coils, compressed, seed,
                     jobs=2):
    cmd = [
        sys.executable, "-m", "fracsynth.cli", "gen-dataset",
        "--n", str(n), "--size", str(size), "--frames", str(frames),
        "--coils", str(coils), "--compressed-coils", str(compressed),
        "--seed", str(seed), "--jobs", str(jobs), "--out", str(outdir),
    ]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    return str(outdir)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """4 tiny examples: 32x32, 8 frames, 6 -> 4 coils."""
    out = tmp_path_factory.mktemp("small") / "data"
    return generate_dataset(out, n=4, size=32, frames=8, coils=6,
                            compressed=4, seed=5)
