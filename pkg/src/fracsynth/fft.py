"""Centered orthonormal 2D FFT shared by every frequency-domain module.

DC lives at index (H//2, W//2) in both domains; scaling is unitary
(1/sqrt(HW)), so Parseval holds exactly up to rounding.
"""

import numpy as np


def fft2c(x):
    """Image to k-space over the last two axes."""
    return np.fft.fftshift(
        np.fft.fft2(np.fft.ifftshift(x, axes=(-2, -1)), norm="ortho", axes=(-2, -1)),
        axes=(-2, -1),
    )


def ifft2c(k):
    """K-space to image over the last two axes."""
    return np.fft.fftshift(
        np.fft.ifft2(np.fft.ifftshift(k, axes=(-2, -1)), norm="ortho", axes=(-2, -1)),
        axes=(-2, -1),
    )
