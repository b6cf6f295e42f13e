"""Iteration fields to complex-valued dynamic images.

Normalized counts drive two sinusoids whose outputs become the real and
imaginary channels; per-frame Gaussian blur suppresses the finest detail and
an unsharp pass restores edge contrast.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .errors import OutOfRange


@dataclass(frozen=True)
class SynthesisParams:
    """Channel-mapping and filtering parameters for one example.

    ``f1`` is fixed at 0.25 Hz; ``f2``, the phases, and the blur width are
    sampled per example (draw order: f2, phi1, phi2, blur_sigma).
    """

    f1: float = 0.25
    f2: float = 0.25
    phi1: float = 0.0
    phi2: float = 0.0
    blur_sigma: float = 0.3
    unsharp_sigma: float = 0.1
    unsharp_alpha: float = 50.0

    @classmethod
    def sample(cls, rng):
        f2 = rng.uniform_in(0.25, 1.0)
        phi1 = rng.uniform_in(0.0, 2.0 * np.pi)
        phi2 = rng.uniform_in(0.0, 2.0 * np.pi)
        blur_sigma = rng.uniform_in(0.2, 0.4)
        return cls(f2=f2, phi1=phi1, phi2=phi2, blur_sigma=blur_sigma)

    def as_dict(self):
        return {
            "f1": self.f1, "f2": self.f2, "phi1": self.phi1, "phi2": self.phi2,
            "blur_sigma": self.blur_sigma, "unsharp_sigma": self.unsharp_sigma,
            "unsharp_alpha": self.unsharp_alpha,
        }


def normalize01(v):
    """Affine rescale of the whole video to [0, 1]; constant input maps to 0."""
    v = np.asarray(v, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def map_to_complex(v, params):
    """Two-sinusoid mapping of normalized intensities to a complex image.

    The unit interval spans one second, so an input value v contributes
    sin(2 pi f v + phi) on each channel.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.min() < 0.0 or v.max() > 1.0:
        raise OutOfRange("mapping expects values in [0, 1]; normalize first")
    re = np.sin(2.0 * np.pi * params.f1 * v + params.phi1)
    im = np.sin(2.0 * np.pi * params.f2 * v + params.phi2)
    return re + 1j * im


def gaussian_kernel1d(sigma):
    """Sampled Gaussian of radius ceil(3 sigma), normalized to sum 1."""
    radius = max(1, int(np.ceil(3.0 * sigma)))
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return w / w.sum()


def gaussian_blur(channel, sigma):
    """Separable Gaussian blur with reflect boundaries; sigma=0 is identity."""
    if sigma < 0:
        raise OutOfRange("sigma must be nonnegative")
    if sigma == 0:
        return np.asarray(channel, dtype=np.float64).copy()
    kernel = gaussian_kernel1d(sigma)
    out = convolve1d(np.asarray(channel, dtype=np.float64), kernel,
                     axis=-1, mode="reflect")
    return convolve1d(out, kernel, axis=-2, mode="reflect")


def unsharp_mask(channel, sigma, alpha):
    """Standard unsharp: out = in + alpha * (in - blur(in, sigma))."""
    channel = np.asarray(channel, dtype=np.float64)
    return channel + alpha * (channel - gaussian_blur(channel, sigma))


def synthesize_complex_video(field, params):
    """Full chain: normalize, map to complex, then per-frame blur + unsharp.

    The real and imaginary channels are filtered independently, frame by
    frame; filtering is spatial only.
    """
    mapped = map_to_complex(normalize01(field), params)
    out = np.empty_like(mapped)
    for t in range(mapped.shape[0]):
        for comp in (np.real, np.imag):
            ch = gaussian_blur(comp(mapped[t]), params.blur_sigma)
            ch = unsharp_mask(ch, params.unsharp_sigma, params.unsharp_alpha)
            if comp is np.real:
                out[t] = ch
            else:
                out[t] = out[t] + 1j * ch
    return out
