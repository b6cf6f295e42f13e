"""Fractal iteration tests: hand vectors, oracles, and cross-checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsynth.errors import EmptyCatalogue, OutOfRange
from fracsynth.fractal import (
    CCatalogue,
    GridSpec4,
    IterationParams,
    Quaternion,
    julia_iterations,
    mandelbrot_iterations,
    quat_square,
    render_julia_slice,
    render_julia_volume,
    scan_c_catalogue,
)

P100 = IterationParams(max_iter=100)


def hamilton_product(a, b):
    """Full quaternion product, the independent oracle for squaring."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def test_quat_square_hand_values():
    assert quat_square(Quaternion(1, 0, 0, 0)) == Quaternion(1, 0, 0, 0)
    assert quat_square(Quaternion(0, 1, 0, 0)) == Quaternion(-1, 0, 0, 0)
    assert quat_square(Quaternion(1, 1, 0, 0)) == hamilton_product(
        Quaternion(1, 1, 0, 0), Quaternion(1, 1, 0, 0)
    ) == Quaternion(0, 2, 0, 0)


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.floats(-3, 3) for _ in range(4)]))
def test_quat_square_matches_hamilton(parts):
    q = Quaternion(*parts)
    s = quat_square(q)
    h = hamilton_product(q, q)
    assert np.allclose(s, h, rtol=0, atol=1e-12)


def test_julia_hand_vectors():
    zero = Quaternion(0, 0, 0, 0)
    assert julia_iterations(Quaternion(2, 0, 0, 0), zero, P100) == 2
    assert julia_iterations(zero, zero, P100) == 100
    assert julia_iterations(Quaternion(5, 0, 0, 0), zero, P100) == 1


def test_mandelbrot_hand_vectors():
    assert mandelbrot_iterations(Quaternion(0, 0, 0, 0), P100) == 100
    assert mandelbrot_iterations(Quaternion(1, 0, 0, 0), P100) == 3
    assert mandelbrot_iterations(Quaternion(-1, 0, 0, 0), P100) == 100


def test_center_identity_random_c():
    rng = np.random.default_rng(42)
    zero = Quaternion(0, 0, 0, 0)
    for _ in range(200):
        c = Quaternion(
            rng.uniform(-1, 1), rng.uniform(-1, 1),
            rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2),
        )
        assert julia_iterations(zero, c, P100) == mandelbrot_iterations(c, P100)


def test_escape_monotonicity():
    rng = np.random.default_rng(3)
    big = IterationParams(max_iter=200)
    for _ in range(50):
        c = Quaternion(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0, 0.0)
        n100 = mandelbrot_iterations(c, P100)
        if n100 < 100:
            assert mandelbrot_iterations(c, big) == n100


def test_real_axis_embedding():
    """Counts on the real axis equal the scalar real iteration x -> x^2 + a."""

    def real_count(b, a, max_iter=100):
        x = b
        for n in range(1, max_iter + 1):
            x = x * x + a
            if abs(x) > 4.0:
                return n
        return max_iter

    for a in np.linspace(-2, 0.5, 11):
        for b in np.linspace(-1, 1, 7):
            got = julia_iterations(
                Quaternion(b, 0, 0, 0), Quaternion(a, 0, 0, 0), P100
            )
            assert got == real_count(b, a)


def test_params_validation():
    with pytest.raises(OutOfRange):
        IterationParams(max_iter=30)
    with pytest.raises(OutOfRange):
        IterationParams(escape_threshold=0.0)
    with pytest.raises(OutOfRange):
        GridSpec4(nx=0, ny=1, nz=1, nt=1)


# --- catalogue scan ----------------------------------------------------------

def point_grid(c):
    """Grid whose every axis collapses to a single coordinate of ``c``."""
    return GridSpec4(
        nx=1, ny=1, nz=1, nt=1,
        x_extent=(c.w, c.w), y_extent=(c.x, c.x),
        z_extent=(c.y, c.y), t_extent=(c.z, c.z),
    )


def test_scan_rejects_never_escaping_point():
    with pytest.raises(EmptyCatalogue):
        scan_c_catalogue(point_grid(Quaternion(-1, 0, 0, 0)), P100)


def test_scan_rejects_fast_escaping_point():
    with pytest.raises(EmptyCatalogue):
        scan_c_catalogue(point_grid(Quaternion(1, 0, 0, 0)), P100)


def test_scan_range_validation():
    with pytest.raises(OutOfRange):
        scan_c_catalogue(point_grid(Quaternion(0, 0, 0, 0)), P100, (30, 10))


@pytest.fixture(scope="module")
def default_scan():
    grid = GridSpec4(nx=17, ny=17, nz=17, nt=17)
    return scan_c_catalogue(grid, P100, (10, 30))


def test_default_scan_nonempty_and_in_band(default_scan):
    assert len(default_scan.entries) > 0
    for c, n in default_scan.entries:
        assert 10 <= n <= 30
        assert mandelbrot_iterations(c, P100) == n


def test_scan_matches_scalar(default_scan):
    # spot-check a handful of entries against the scalar recurrence
    for c, n in default_scan.entries[::max(1, len(default_scan.entries) // 7)]:
        assert mandelbrot_iterations(c, P100) == n


def test_catalogue_roundtrip(tmp_path, default_scan):
    path = tmp_path / "catalogue.json"
    default_scan.save(path)
    back = CCatalogue.load(path)
    assert back.lo == 10 and back.hi == 30 and back.max_iter == 100
    assert back.entries == default_scan.entries


# --- rendering --------------------------------------------------------------

def test_render_shape_and_corner_value():
    grid = GridSpec4(nx=3, ny=3, nz=1, nt=1)
    field = render_julia_slice(Quaternion(1, 0, 0, 0), grid, P100)
    assert field.shape == (1, 3, 3)
    # corner (x, y) = (1, 1): hand iteration escapes at the second step
    assert field[0, 2, 2] == 2
    # every pixel agrees with the scalar loop
    xs, ys = grid.x_axis(), grid.y_axis()
    for iy in range(3):
        for ix in range(3):
            expect = julia_iterations(
                Quaternion(xs[ix], ys[iy], 0.0, 0.0), Quaternion(1, 0, 0, 0), P100
            )
            assert field[0, iy, ix] == expect


def test_render_center_equals_mandelbrot():
    grid = GridSpec4(nx=9, ny=9, nz=1, nt=9)
    rng = np.random.default_rng(7)
    for _ in range(5):
        c = Quaternion(rng.uniform(-1, 1), rng.uniform(-1, 1),
                       rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2))
        field = render_julia_slice(c, grid, P100)
        # odd grid: coordinate (0, 0, 0, 0) sits at the central indices
        assert field[4, 4, 4] == mandelbrot_iterations(c, P100)


def test_render_deterministic():
    grid = GridSpec4(nx=16, ny=16, nz=1, nt=4)
    c = Quaternion(-0.2, 0.6, 0.1, -0.05)
    a = render_julia_slice(c, grid)
    b = render_julia_slice(c, grid)
    assert np.array_equal(a, b)


def test_volume_slice_consistency():
    grid = GridSpec4(nx=8, ny=8, nz=3, nt=2)
    c = Quaternion(-0.4, 0.3, 0.2, 0.0)
    vol = render_julia_volume(c, grid)
    assert vol.shape == (2, 3, 8, 8)
    # middle z sample of a 3-sample axis over [-0.5, 0.5] is exactly 0
    sliced = render_julia_slice(c, grid)
    assert np.array_equal(vol[:, 1], sliced)
