"""Acquisition-simulation tests: mask, phase, coils, noise, FFT."""

import numpy as np
import pytest

from fracsynth.errors import ShapeMismatch
from fracsynth.fft import fft2c, ifft2c
from fracsynth.forward_model import (
    BodyMask,
    CoilSet,
    PhaseMap,
    apply_forward_model,
    bilinear_upsample,
    complex_noise_fields,
    ellipse_mask,
    gaussian_coil_map,
    make_background_phase,
    make_body_mask,
    make_coil_maps,
    sample_noise_sigma,
)
from fracsynth.rng import Xoshiro256pp


def identity_mask(h, w):
    return BodyMask(data=np.ones((h, w)), semi_axis_x=w, semi_axis_y=h,
                    rotation=0.0, offset_x=0.0, offset_y=0.0)


def flat_phase(h, w, value=0.0):
    return PhaseMap(data=np.full((h, w), value), control=np.full((6, 6), value))


def unit_coils(h, w, n=1):
    return CoilSet(maps=np.ones((n, h, w), dtype=np.complex128), params=())


# --- body mask ---------------------------------------------------------------

def test_mask_center_inside():
    m = ellipse_mask(32, 32, 0.95 * 16, 0.95 * 16, 0.0, 0.0, 0.0)
    assert m[15, 15] == 1.0 and m[16, 16] == 1.0


def test_mask_corners_outside():
    rng = Xoshiro256pp(11)
    for _ in range(20):
        mask = make_body_mask(24, 40, rng)
        m = mask.data
        assert m[0, 0] == 0 and m[0, -1] == 0 and m[-1, 0] == 0 and m[-1, -1] == 0
        assert set(np.unique(m)) <= {0.0, 1.0}


def test_mask_circle_rotation_invariance():
    a = ellipse_mask(33, 33, 12.0, 12.0, 0.4, 1.0, -2.0)
    b = ellipse_mask(33, 33, 12.0, 12.0, 0.4 + np.pi, 1.0, -2.0)
    assert np.array_equal(a, b)


def test_mask_size_guard():
    with pytest.raises(ShapeMismatch):
        make_body_mask(4, 64, Xoshiro256pp(0))


# --- background phase --------------------------------------------------------

def test_phase_constant_control():
    up = bilinear_upsample(np.full((6, 6), 1.23), 20, 30)
    assert np.allclose(up, 1.23, atol=1e-12)


def test_phase_bounded_by_control():
    rng = Xoshiro256pp(5)
    pm = make_background_phase(48, 40, rng)
    assert pm.data.min() >= pm.control.min() - 1e-12
    assert pm.data.max() <= pm.control.max() + 1e-12
    assert pm.data.shape == (48, 40)


def test_phase_control_points_exact():
    rng = Xoshiro256pp(9)
    control = np.array([rng.uniform_in(-np.pi, np.pi) for _ in range(36)]).reshape(6, 6)
    # 6 samples per axis puts every pixel exactly on a control point
    up = bilinear_upsample(control, 6, 6)
    assert np.allclose(up, control, atol=0)
    # 11 samples: every second pixel is a control point
    up = bilinear_upsample(control, 11, 11)
    assert np.allclose(up[::2, ::2], control, atol=1e-15)


# --- coil maps ---------------------------------------------------------------

def test_coil_peak_equals_intensity():
    m = gaussian_coil_map(32, 32, (10.0, 20.0), (5.0, 7.0), 0.8, 1.1)
    assert abs(abs(m[10, 20]) - 0.8) < 1e-12
    assert np.all(np.abs(m) <= 0.8 + 1e-12)
    assert np.allclose(np.angle(m), 1.1, atol=1e-12)


def test_make_coil_maps_shapes_and_ranges():
    cs = make_coil_maps(24, 24, 16, Xoshiro256pp(21))
    assert cs.maps.shape == (16, 24, 24)
    assert len(cs.params) == 16
    for p in cs.params:
        assert 0.5 <= p["intensity"] <= 1.0
        assert 0.15 * 24 <= p["sigma_x"] <= 0.5 * 24


# --- forward model -----------------------------------------------------------

def test_identity_configuration():
    rng = np.random.default_rng(0)
    video = rng.standard_normal((3, 12, 12)) + 1j * rng.standard_normal((3, 12, 12))
    out = apply_forward_model(video, identity_mask(12, 12), flat_phase(12, 12),
                              unit_coils(12, 12), 0.0, noise_seed=0)
    assert out.shape == (1, 3, 12, 12)
    assert np.allclose(out[0], video, atol=0)


def test_phase_leaves_magnitude():
    rng = np.random.default_rng(1)
    video = rng.standard_normal((2, 10, 10)) + 1j * rng.standard_normal((2, 10, 10))
    base = apply_forward_model(video, identity_mask(10, 10), flat_phase(10, 10),
                               unit_coils(10, 10), 0.0, 0)
    shifted = apply_forward_model(video, identity_mask(10, 10),
                                  flat_phase(10, 10, 0.77),
                                  unit_coils(10, 10), 0.0, 0)
    assert np.allclose(np.abs(base), np.abs(shifted), atol=1e-12)


def test_forward_linearity_noiseless():
    rng = np.random.default_rng(2)
    video = rng.standard_normal((2, 16, 16)) + 1j * rng.standard_normal((2, 16, 16))
    mask = make_body_mask(16, 16, Xoshiro256pp(1))
    phase = make_background_phase(16, 16, Xoshiro256pp(2))
    coils = make_coil_maps(16, 16, 4, Xoshiro256pp(3))
    a = apply_forward_model(3.5 * video, mask, phase, coils, 0.0, 0)
    b = 3.5 * apply_forward_model(video, mask, phase, coils, 0.0, 0)
    assert np.allclose(a, b, atol=1e-12)


def test_mask_idempotent():
    mask = make_body_mask(16, 16, Xoshiro256pp(4))
    assert np.array_equal(mask.data * mask.data, mask.data)


def test_noise_std():
    video = np.zeros((4, 64, 64), dtype=np.complex128)
    out = apply_forward_model(video, identity_mask(64, 64), flat_phase(64, 64),
                              unit_coils(64, 64, n=4), 0.01, noise_seed=123)
    comps = np.concatenate([out.real.ravel(), out.imag.ravel()])
    assert 0.009 <= comps.std() <= 0.011


def test_noise_streams_distinct_and_reproducible():
    f1 = complex_noise_fields(3, 2, 8, 8, 1.0, noise_seed=9)
    f2 = complex_noise_fields(3, 2, 8, 8, 1.0, noise_seed=9)
    assert np.array_equal(f1, f2)
    # distinct (coil, frame) slabs differ at a fixed pixel
    vals = f1[:, :, 3, 3].ravel()
    assert len(set(vals.tolist())) == len(vals)


def test_noise_sigma_sampling_range():
    for seed in range(5):
        s = sample_noise_sigma(Xoshiro256pp(seed))
        assert 0.002 <= s <= 0.02


def test_shape_mismatch_guard():
    video = np.zeros((2, 10, 10), dtype=np.complex128)
    with pytest.raises(ShapeMismatch):
        apply_forward_model(video, identity_mask(8, 8), flat_phase(10, 10),
                            unit_coils(10, 10), 0.0, 0)
    with pytest.raises(ShapeMismatch):
        apply_forward_model(video, identity_mask(10, 10), flat_phase(10, 10),
                            unit_coils(12, 12), 0.0, 0)


# --- centered FFT ------------------------------------------------------------

def test_fft_constant_frame():
    a = 2.5 + 0.5j
    img = np.full((16, 16), a)
    k = fft2c(img)
    assert abs(k[8, 8] - a * 16.0) < 1e-12
    k[8, 8] = 0
    assert np.max(np.abs(k)) < 1e-12


def test_fft_parseval_and_roundtrip():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    k = fft2c(x)
    assert abs(np.linalg.norm(k) - np.linalg.norm(x)) / np.linalg.norm(x) < 1e-10
    assert np.max(np.abs(ifft2c(k) - x)) < 1e-12
