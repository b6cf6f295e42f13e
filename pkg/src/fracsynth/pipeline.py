"""End-to-end example generation: fractal field to paired training files.

Every random draw in an example flows from (dataset_seed, index) through
named purpose substreams, so examples can be regenerated individually and
worker scheduling cannot change any output byte.
"""

import os
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import dataio
from .errors import OutOfRange, ShapeMismatch
from .forward_model import (
    apply_forward_model,
    make_background_phase,
    make_body_mask,
    make_coil_maps,
    sample_noise_sigma,
    to_cartesian_kspace,
)
from .fractal import CCatalogue, GridSpec4, IterationParams, Quaternion, \
    render_julia_slice, scan_c_catalogue
from .kspace import (
    NufftPlan,
    apply_compression,
    coil_compression_matrix,
    density_compensation,
    golden_angle_trajectory,
    make_training_pair,
)
from .rng import Xoshiro256pp, example_seed, purpose_seed
from .synthesis import SynthesisParams, synthesize_complex_video


@dataclass(frozen=True)
class PipelineConfig:
    """Generation geometry and sampling configuration."""

    size: int = 192
    frames: int = 20
    coils: int = 16
    compressed_coils: int = 10
    spokes_per_frame: int = 13
    samples_per_spoke: int = 0  # 0 means 2 * size (2x readout oversampling)
    max_iter: int = 100

    def __post_init__(self):
        if self.size < 8:
            raise OutOfRange("size must be at least 8")
        if self.frames < 1:
            raise OutOfRange("frames must be at least 1")
        if self.coils < 1:
            raise OutOfRange("need at least one simulated coil")
        if not (1 <= self.compressed_coils <= self.coils):
            raise OutOfRange("compressed coil count must be in [1, coils]")
        if self.spokes_per_frame < 1:
            raise OutOfRange("need at least one spoke per frame")
        r = self.readout_samples
        if r < 2 or r % 2:
            raise OutOfRange("samples per spoke must be even and >= 2")
        if self.max_iter <= 30:
            raise OutOfRange("max_iter must exceed 30")

    @property
    def readout_samples(self):
        return self.samples_per_spoke if self.samples_per_spoke else 2 * self.size

    def as_dict(self):
        d = asdict(self)
        d["samples_per_spoke"] = self.readout_samples
        return d

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in
                 ("size", "frames", "coils", "compressed_coils",
                  "spokes_per_frame", "samples_per_spoke", "max_iter") if k in d}
        return cls(**known)


# Per-process cache: trajectory, DCF, and NUFFT plan are pure functions of
# the configuration and are reused across examples.
_GEOMETRY_CACHE = {}


def sampling_geometry(cfg):
    key = (cfg.size, cfg.frames, cfg.spokes_per_frame, cfg.readout_samples)
    if key not in _GEOMETRY_CACHE:
        plan = NufftPlan(cfg.size)
        traj = golden_angle_trajectory(cfg.frames, cfg.spokes_per_frame,
                                       cfg.readout_samples, cfg.size)
        dcf = density_compensation(traj, plan)
        _GEOMETRY_CACHE[key] = (plan, traj, dcf)
    return _GEOMETRY_CACHE[key]


def default_scan_catalogue(max_iter=100, samples=17, count_range=(10, 30)):
    """Catalogue from the default parameter-space scan."""
    grid = GridSpec4(nx=samples, ny=samples, nz=samples, nt=samples)
    return scan_c_catalogue(grid, IterationParams(max_iter=max_iter), count_range)


def generate_intermediates(cfg, dataset_seed, index, c):
    """All deterministic intermediate state for one example.

    Returns a dict with the synthesized video, acquisition parameters,
    compressed k-space, and the virtual (compressed) coil maps the CS
    reconstructor needs.
    """
    ex_seed = example_seed(dataset_seed, index)
    params = SynthesisParams.sample(
        Xoshiro256pp(purpose_seed(ex_seed, "synthesis")))
    grid = GridSpec4(nx=cfg.size, ny=cfg.size, nz=1, nt=cfg.frames)
    field = render_julia_slice(c, grid, IterationParams(max_iter=cfg.max_iter))
    video = synthesize_complex_video(field, params)

    mask = make_body_mask(cfg.size, cfg.size,
                          Xoshiro256pp(purpose_seed(ex_seed, "mask")))
    phase = make_background_phase(cfg.size, cfg.size,
                                  Xoshiro256pp(purpose_seed(ex_seed, "phase")))
    coils = make_coil_maps(cfg.size, cfg.size, cfg.coils,
                           Xoshiro256pp(purpose_seed(ex_seed, "coils")))
    noise_seed = purpose_seed(ex_seed, "noise")
    noise_sigma = sample_noise_sigma(Xoshiro256pp(noise_seed))
    multicoil = apply_forward_model(video, mask, phase, coils, noise_sigma,
                                    noise_seed)
    proj, retained = coil_compression_matrix(multicoil, cfg.compressed_coils)
    compressed = apply_compression(multicoil, proj)
    virtual_maps = apply_compression(coils.maps, proj)
    kspace = to_cartesian_kspace(compressed)
    return {
        "synthesis": params, "mask": mask, "phase": phase, "coils": coils,
        "noise_sigma": noise_sigma, "retained_energy": retained,
        "kspace": kspace, "virtual_maps": virtual_maps,
    }


def generate_example(cfg, dataset_seed, index, c, count=None):
    """One full training pair with its provenance metadata."""
    inter = generate_intermediates(cfg, dataset_seed, index, c)
    plan, traj, dcf = sampling_geometry(cfg)
    example = make_training_pair(inter["kspace"], traj, dcf, plan)
    example.meta = {
        "index": index,
        "dataset_seed": dataset_seed,
        "c": list(c),
        "c_count": count,
        "config": cfg.as_dict(),
        "synthesis": inter["synthesis"].as_dict(),
        "mask": inter["mask"].params_dict(),
        "phase": inter["phase"].params_dict(),
        "coils": inter["coils"].params_dict(),
        "noise_sigma": inter["noise_sigma"],
        "retained_energy": inter["retained_energy"],
        **example.meta,
    }
    return example


def _worker(args):
    cfg_dict, dataset_seed, index, c_parts, count, outdir = args
    cfg = PipelineConfig.from_dict(cfg_dict)
    start = time.perf_counter()
    example = generate_example(cfg, dataset_seed, index, Quaternion(*c_parts),
                               count)
    record = dataio.write_example(example, dataio.example_dir(outdir, index))
    elapsed = time.perf_counter() - start
    return index, record, elapsed


def generate_dataset(cfg, n_examples, dataset_seed, catalogue, outdir,
                     jobs=1, progress=None):
    """Emit ``n_examples`` training pairs plus a manifest.

    c values come round-robin from the catalogue by example index. Returns
    the manifest dict. ``progress`` (if given) is called with
    (index, record, seconds) after each example lands.
    """
    if n_examples < 1:
        raise OutOfRange("need at least one example")
    if not catalogue.entries:
        raise ShapeMismatch("catalogue has no entries")
    os.makedirs(outdir, exist_ok=True)
    tasks = []
    for i in range(n_examples):
        c, count = catalogue.entries[i % len(catalogue.entries)]
        tasks.append((cfg.as_dict(), dataset_seed, i, tuple(c), count, outdir))

    records = {}
    manifest = {
        "dataset_seed": dataset_seed,
        "n_examples": n_examples,
        "config": cfg.as_dict(),
        "catalogue_range": [catalogue.lo, catalogue.hi],
        "incomplete": True,
        "split": None,
        "examples": [],
    }
    try:
        if jobs <= 1:
            results = map(_worker, tasks)
            for index, record, elapsed in results:
                record["wall_time_s"] = elapsed
                records[index] = record
                if progress:
                    progress(index, record, elapsed)
        else:
            import multiprocessing as mp

            with mp.get_context("fork").Pool(jobs) as pool:
                for index, record, elapsed in pool.imap_unordered(_worker, tasks):
                    record["wall_time_s"] = elapsed
                    records[index] = record
                    if progress:
                        progress(index, record, elapsed)
        manifest["incomplete"] = False
    finally:
        manifest["examples"] = [records[i] for i in sorted(records)]
        if n_examples >= 3:
            train, val, test = dataio.split_dataset(n_examples)
            manifest["split"] = {"train": train, "val": val, "test": test}
        dataio.write_manifest(outdir, manifest)
    return manifest


def radial_data(kspace, traj, plan):
    """Resample fully sampled Cartesian k-space onto the radial trajectory."""
    from .fft import ifft2c

    imgs = ifft2c(np.asarray(kspace))
    n_samples = traj.spokes_per_frame * traj.samples_per_spoke
    y = np.empty((imgs.shape[0], traj.n_frames, n_samples), dtype=np.complex128)
    for t in range(traj.n_frames):
        y[:, t] = plan.forward(imgs[:, t], traj.frame_coords(t))
    return y


def regenerate_for_recon(example_meta):
    """Rebuild the radial data and virtual coil maps behind a stored example.

    The example directories keep only the paired arrays and metadata; the
    reconstruction inputs (radial samples, compressed sensitivities) are
    replayed deterministically from the recorded seeds.
    """
    cfg = PipelineConfig.from_dict(example_meta["config"])
    c = Quaternion(*example_meta["c"])
    inter = generate_intermediates(cfg, example_meta["dataset_seed"],
                                   example_meta["index"], c)
    plan, traj, dcf = sampling_geometry(cfg)
    return {
        "radial": radial_data(inter["kspace"], traj, plan),
        "virtual_maps": inter["virtual_maps"],
        "traj": traj, "dcf": dcf, "plan": plan,
    }
