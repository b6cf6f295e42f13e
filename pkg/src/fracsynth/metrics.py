"""Image-quality measures: SSIM, contrast-to-noise, and edge sharpness.

SSIM follows the standard local-statistics form with an 11x11 sigma-1.5
Gaussian window, computed per frame and averaged. Edge sharpness fits a
logistic step to an interpolated intensity profile and reports the
amplitude-normalized maximum slope 1/(4w).
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d, map_coordinates
from scipy.optimize import least_squares
from scipy.special import expit

from .errors import FitFailure, ShapeMismatch, SingleFrame, TooFewFits, ZeroNoise


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 1.0


def _ssim_window(params):
    half = (params.window_size - 1) / 2.0
    x = np.arange(params.window_size) - half
    w = np.exp(-(x**2) / (2.0 * params.window_sigma**2))
    return w / w.sum()


def _local_mean(img, kernel):
    out = convolve1d(img, kernel, axis=-1, mode="reflect")
    return convolve1d(out, kernel, axis=-2, mode="reflect")


def ssim(a, b, params=SsimParams()):
    """Mean SSIM between two videos (or single frames) in [0, data_range].

    Frames are scored independently with Gaussian-weighted local statistics
    (reflect padding) and averaged; identical inputs score exactly 1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes {a.shape} and {b.shape} differ")
    if a.ndim == 2:
        a, b = a[None], b[None]
    kernel = _ssim_window(params)
    c1 = (params.k1 * params.data_range) ** 2
    c2 = (params.k2 * params.data_range) ** 2
    total = 0.0
    for t in range(a.shape[0]):
        mu_a = _local_mean(a[t], kernel)
        mu_b = _local_mean(b[t], kernel)
        var_a = _local_mean(a[t] * a[t], kernel) - mu_a * mu_a
        var_b = _local_mean(b[t] * b[t], kernel) - mu_b * mu_b
        cov = _local_mean(a[t] * b[t], kernel) - mu_a * mu_b
        num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
        den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
        total += np.mean(num / den)
    return float(total / a.shape[0])


@dataclass(frozen=True)
class RoiSpec:
    """Pixel masks for signal region A, signal region B, and a noise region."""

    region_a: np.ndarray
    region_b: np.ndarray
    noise: np.ndarray

    def __post_init__(self):
        for name, m in (("region_a", self.region_a), ("region_b", self.region_b),
                        ("noise", self.noise)):
            if not np.any(m):
                raise ShapeMismatch(f"{name} mask is empty")
        if np.any(self.region_a & self.region_b) or \
           np.any(self.region_a & self.noise) or \
           np.any(self.region_b & self.noise):
            raise ShapeMismatch("ROI masks must be pairwise disjoint")


def cnr(video, roi):
    """Mean(A) - mean(B), over frames, divided by the noise-region std.

    The noise standard deviation pools all noise pixels across frames
    (population form).
    """
    video = np.asarray(video, dtype=np.float64)
    if video.ndim == 2:
        video = video[None]
    if roi.region_a.shape != video.shape[1:]:
        raise ShapeMismatch("ROI masks do not match the frame shape")
    mean_a = video[:, roi.region_a].mean()
    mean_b = video[:, roi.region_b].mean()
    noise_std = video[:, roi.noise].std()  # population: ddof=0
    if noise_std == 0:
        raise ZeroNoise("noise region has zero variance")
    return float((mean_a - mean_b) / noise_std)


@dataclass(frozen=True)
class EdgeProbe:
    """Line segment across an intensity edge, sampled ``n_samples`` times."""

    start: tuple  # (y, x) pixel coordinates
    end: tuple
    n_samples: int = 64
    pixel_spacing: float = 1.0  # length units per pixel; 1 keeps ES in 1/px

    def __post_init__(self):
        if self.start == self.end:
            raise ShapeMismatch("probe endpoints must be distinct")
        if self.n_samples < 8:
            raise ShapeMismatch("probe needs at least 8 samples")


def _sample_profile(frame, probe):
    """Bilinear profile along the probe; distances in pixel units."""
    y0, x0 = probe.start
    y1, x1 = probe.end
    t = np.linspace(0.0, 1.0, probe.n_samples)
    ys = y0 + t * (y1 - y0)
    xs = x0 + t * (x1 - x0)
    values = map_coordinates(np.asarray(frame, dtype=np.float64),
                             np.vstack([ys, xs]), order=1, mode="nearest")
    dist = t * np.hypot(y1 - y0, x1 - x0)
    return dist, values


def _fit_logistic(dist, values):
    """Least-squares fit of a + b * logistic((d - d0)/w); returns params + R^2."""
    span = values.max() - values.min()
    if span <= 0:
        raise FitFailure("flat profile")
    sstot = float(((values - values.mean()) ** 2).sum())

    def linear_fit(d0, w):
        basis = expit((dist - d0) / w)
        design = np.column_stack([np.ones_like(basis), basis])
        coef, *_ = np.linalg.lstsq(design, values, rcond=None)
        resid = values - design @ coef
        return coef, float((resid**2).sum())

    length = dist[-1] - dist[0]
    best = None
    for w in np.geomspace(0.25, max(0.5, length / 4.0), 15):
        for d0 in dist[1:-1:max(1, len(dist) // 32)]:
            coef, sse = linear_fit(d0, w)
            if best is None or sse < best[0]:
                best = (sse, coef[0], coef[1], d0, w)

    def residual(p):
        a, b, d0, w = p
        return a + b * expit((dist - d0) / w) - values

    sol = least_squares(
        residual, x0=np.array(best[1:]),
        bounds=([-np.inf, -np.inf, dist[0] - length, 1e-3],
                [np.inf, np.inf, dist[-1] + length, 10.0 * length]),
    )
    a, b, d0, w = sol.x
    sse = float((sol.fun**2).sum())
    r2 = 1.0 - sse / sstot if sstot > 0 else 0.0
    if r2 < 0.5:
        raise FitFailure(f"edge fit R^2 {r2:.3f} below 0.5")
    if abs(b) < 0.01 * span:
        raise FitFailure("fitted edge amplitude below 1% of profile range")
    return a, b, d0, abs(w), r2


def edge_sharpness(frame, probe):
    """Inverse edge width 1/(4 w * pixel_spacing) from a logistic-step fit."""
    dist, values = _sample_profile(frame, probe)
    _, _, _, w, _ = _fit_logistic(dist, values)
    return float(1.0 / (4.0 * w * probe.pixel_spacing))


@dataclass(frozen=True)
class TemporalEsResult:
    std: float
    values: tuple
    excluded_frames: int


def temporal_std_es(video, probe):
    """Population std of per-frame edge sharpness; failed fits are skipped."""
    video = np.asarray(video, dtype=np.float64)
    if video.ndim != 3 or video.shape[0] < 2:
        raise SingleFrame("need a video with at least two frames")
    values, excluded = [], 0
    for frame in video:
        try:
            values.append(edge_sharpness(frame, probe))
        except FitFailure:
            excluded += 1
    if len(values) < 2:
        raise TooFewFits(f"only {len(values)} frames produced an edge fit")
    return TemporalEsResult(
        std=float(np.std(values)), values=tuple(values), excluded_frames=excluded)


def metric_record(metric, value, params=None, excluded_frames=0):
    """JSON-ready record shared by the CLI and downstream consumers."""
    return {
        "metric": metric,
        "value": value,
        "params": params or {},
        "excluded_frames": excluded_frames,
    }
