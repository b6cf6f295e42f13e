"""Complex video to fully sampled multi-coil Cartesian k-space.

The acquisition model: elliptical body mask, smooth random background phase,
Gaussian-profile surface-coil sensitivities, per-coil/per-frame complex
noise, then a centered orthonormal FFT per frame.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch
from .fft import fft2c
from .rng import XoshiroLanes, derive_seed

# Sampling ranges for the simulated acquisition geometry. The distributions
# themselves are not dictated by physics; they are fixed, documented choices.
ELLIPSE_SEMIAXIS_RANGE = (0.55, 0.95)   # fraction of the image half-extent
ELLIPSE_OFFSET_RANGE = (-0.1, 0.1)      # fraction of the full extent
COIL_RING_RADIUS_RANGE = (0.45, 0.55)   # fraction of the full extent
COIL_SIGMA_RANGE = (0.15, 0.5)          # fraction of the full extent
COIL_INTENSITY_RANGE = (0.5, 1.0)
NOISE_SIGMA_RANGE = (0.002, 0.02)       # relative to unit-normalized images


@dataclass(frozen=True)
class BodyMask:
    """Binary elliptical support with its generating parameters."""

    data: np.ndarray
    semi_axis_x: float
    semi_axis_y: float
    rotation: float
    offset_x: float
    offset_y: float

    def params_dict(self):
        return {
            "semi_axis_x": self.semi_axis_x, "semi_axis_y": self.semi_axis_y,
            "rotation": self.rotation,
            "offset_x": self.offset_x, "offset_y": self.offset_y,
        }


def ellipse_mask(h, w, semi_axis_x, semi_axis_y, rotation, offset_x, offset_y):
    """Pixel-inside-ellipse test on the pixel-center grid.

    Semi-axes and offsets are in pixels; the ellipse center sits at the
    image center plus the offset.
    """
    cy = (h - 1) / 2.0 + offset_y
    cx = (w - 1) / 2.0 + offset_x
    y, x = np.mgrid[0:h, 0:w]
    dx, dy = x - cx, y - cy
    ct, st = np.cos(rotation), np.sin(rotation)
    u = dx * ct + dy * st
    v = -dx * st + dy * ct
    inside = (u / semi_axis_x) ** 2 + (v / semi_axis_y) ** 2 <= 1.0
    return inside.astype(np.float64)


def make_body_mask(h, w, rng):
    """Randomly scaled, rotated, and shifted elliptical body support."""
    if h < 8 or w < 8:
        raise ShapeMismatch(f"mask needs at least 8x8 pixels, got {h}x{w}")
    a = rng.uniform_in(*ELLIPSE_SEMIAXIS_RANGE) * (w / 2.0)
    b = rng.uniform_in(*ELLIPSE_SEMIAXIS_RANGE) * (h / 2.0)
    theta = rng.uniform_in(0.0, np.pi)
    off_y = rng.uniform_in(*ELLIPSE_OFFSET_RANGE) * h
    off_x = rng.uniform_in(*ELLIPSE_OFFSET_RANGE) * w
    data = ellipse_mask(h, w, a, b, theta, off_x, off_y)
    return BodyMask(data=data, semi_axis_x=a, semi_axis_y=b, rotation=theta,
                    offset_x=off_x, offset_y=off_y)


@dataclass(frozen=True)
class PhaseMap:
    """Smooth background phase from a bilinearly upsampled control grid."""

    data: np.ndarray
    control: np.ndarray  # 6x6 values in radians

    def params_dict(self):
        return {"control": self.control.tolist()}


def bilinear_upsample(control, h, w):
    """Bilinear interpolation with control points pinned to the image frame.

    Control point (0, 0) maps to pixel (0, 0) and (5, 5) to (h-1, w-1);
    queries at control points reproduce the control values exactly.
    """
    m, n = control.shape
    ys = np.linspace(0.0, m - 1.0, h)
    xs = np.linspace(0.0, n - 1.0, w)
    y0 = np.minimum(ys.astype(np.int64), m - 2)
    x0 = np.minimum(xs.astype(np.int64), n - 2)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    c00 = control[y0][:, x0]
    c01 = control[y0][:, x0 + 1]
    c10 = control[y0 + 1][:, x0]
    c11 = control[y0 + 1][:, x0 + 1]
    return ((1 - fy) * (1 - fx) * c00 + (1 - fy) * fx * c01
            + fy * (1 - fx) * c10 + fy * fx * c11)


def make_background_phase(h, w, rng):
    """6x6 uniform phase control grid upsampled to the image size."""
    if h < 6 or w < 6:
        raise ShapeMismatch(f"phase map needs at least 6x6 pixels, got {h}x{w}")
    control = np.array([rng.uniform_in(-np.pi, np.pi) for _ in range(36)],
                       dtype=np.float64).reshape(6, 6)
    return PhaseMap(data=bilinear_upsample(control, h, w), control=control)


@dataclass(frozen=True)
class CoilSet:
    """Complex sensitivity maps plus the parameters that generated them."""

    maps: np.ndarray          # (C, H, W) complex
    params: tuple             # per-coil dicts

    @property
    def n_coils(self):
        return self.maps.shape[0]

    def params_dict(self):
        return {"coils": list(self.params)}


def gaussian_coil_map(h, w, center, sigmas, intensity, phase):
    """Single anisotropic-Gaussian sensitivity with a constant phase offset.

    Magnitude peaks at ``intensity`` at ``center`` (pixel coordinates, which
    may lie outside the image for surface coils).
    """
    cy, cx = center
    sy, sx = sigmas
    y, x = np.mgrid[0:h, 0:w]
    mag = intensity * np.exp(-(((x - cx) ** 2) / (2.0 * sx * sx)
                               + ((y - cy) ** 2) / (2.0 * sy * sy)))
    return mag * np.exp(1j * phase)


def make_coil_maps(h, w, ncoils, rng):
    """Sensitivities for ``ncoils`` coils centered on a border ring.

    Per coil the draws are: ring angle, ring radii (x, y), sigma_x, sigma_y,
    intensity, phase offset.
    """
    if ncoils < 1:
        raise ShapeMismatch("need at least one coil")
    maps = np.empty((ncoils, h, w), dtype=np.complex128)
    params = []
    for k in range(ncoils):
        angle = rng.uniform_in(0.0, 2.0 * np.pi)
        rad_x = rng.uniform_in(*COIL_RING_RADIUS_RANGE) * w
        rad_y = rng.uniform_in(*COIL_RING_RADIUS_RANGE) * h
        sx = rng.uniform_in(*COIL_SIGMA_RANGE) * w
        sy = rng.uniform_in(*COIL_SIGMA_RANGE) * h
        intensity = rng.uniform_in(*COIL_INTENSITY_RANGE)
        phase = rng.uniform_in(0.0, 2.0 * np.pi)
        cx = (w - 1) / 2.0 + rad_x * np.cos(angle)
        cy = (h - 1) / 2.0 + rad_y * np.sin(angle)
        maps[k] = gaussian_coil_map(h, w, (cy, cx), (sy, sx), intensity, phase)
        params.append({
            "center_y": cy, "center_x": cx, "sigma_y": sy, "sigma_x": sx,
            "intensity": intensity, "phase": phase,
        })
    return CoilSet(maps=maps, params=tuple(params))


def sample_noise_sigma(rng):
    """Per-example noise level, uniform over the configured range."""
    return rng.uniform_in(*NOISE_SIGMA_RANGE)


def complex_noise_fields(n_coils, n_frames, h, w, sigma, noise_seed):
    """(C, T, H, W) i.i.d. complex Gaussian noise, one stream per (coil, frame).

    Each (coil, frame) owns a child stream of ``noise_seed``, so any
    parallel schedule produces identical fields.
    """
    seeds = [derive_seed(noise_seed, c * n_frames + t)
             for c in range(n_coils) for t in range(n_frames)]
    lanes = XoshiroLanes(seeds)
    z = lanes.normals(2 * h * w)
    z = z.reshape(n_coils, n_frames, h, w, 2)
    return sigma * (z[..., 0] + 1j * z[..., 1])


def apply_forward_model(video, mask, phase, coils, noise_sigma, noise_seed):
    """Mask, phase-modulate, weight by coils, and add independent noise.

    out[c, t] = coils[c] * (video[t] * mask * exp(i phase)) + eta, with eta
    complex Gaussian of std ``noise_sigma`` per real component.
    """
    video = np.asarray(video)
    n_frames, h, w = video.shape
    if mask.data.shape != (h, w) or phase.data.shape != (h, w):
        raise ShapeMismatch("mask/phase shape does not match video frames")
    if coils.maps.shape[1:] != (h, w):
        raise ShapeMismatch("coil map shape does not match video frames")
    scene = video * (mask.data * np.exp(1j * phase.data))[None, :, :]
    out = coils.maps[:, None, :, :] * scene[None, :, :, :]
    if noise_sigma > 0:
        out = out + complex_noise_fields(coils.n_coils, n_frames, h, w,
                                         noise_sigma, noise_seed)
    return out


def to_cartesian_kspace(multicoil):
    """Centered orthonormal FFT per coil and frame."""
    return fft2c(np.asarray(multicoil))
