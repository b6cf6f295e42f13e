"""Quaternion Julia iteration fields and structure-rich parameter scans.

The iteration q -> q^2 + c runs over a 4D coordinate grid; the per-point
count of steps until |q| exceeds the escape bound is the rendered intensity.
Parameters c whose divergence count (seeded from the origin) falls in a
mid band produce the most intricate fields, so a catalogue scan collects
exactly those grid points.
"""

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EmptyCatalogue, OutOfRange


class Quaternion(NamedTuple):
    """Hypercomplex value w + x*i + y*j + z*k."""

    w: float
    x: float
    y: float
    z: float


def quat_square(q):
    """Square of a quaternion by itself.

    Cross terms between the imaginary units cancel when squaring a value by
    itself, leaving (w^2 - x^2 - y^2 - z^2, 2wx, 2wy, 2wz).
    """
    w, x, y, z = q
    return Quaternion(w * w - x * x - y * y - z * z, 2 * w * x, 2 * w * y, 2 * w * z)


@dataclass(frozen=True)
class IterationParams:
    """Escape-iteration controls.

    ``max_iter`` must exceed 30 so the catalogue band [10, 30] stays
    meaningful; the escape magnitude bound is 4.0.
    """

    max_iter: int = 100
    escape_threshold: float = 4.0

    def __post_init__(self):
        if self.max_iter <= 30:
            raise OutOfRange(f"max_iter must exceed 30, got {self.max_iter}")
        if self.escape_threshold <= 0:
            raise OutOfRange("escape_threshold must be positive")


@dataclass(frozen=True)
class GridSpec4:
    """Endpoint-inclusive uniform 4D grid.

    Default extents X, Y in [-1, 1], Z in [-0.5, 0.5], T in [-0.2, 0.2].
    An axis with a single sample collapses to the extent midpoint.
    """

    nx: int
    ny: int
    nz: int
    nt: int
    x_extent: tuple = (-1.0, 1.0)
    y_extent: tuple = (-1.0, 1.0)
    z_extent: tuple = (-0.5, 0.5)
    t_extent: tuple = (-0.2, 0.2)

    def __post_init__(self):
        for n in (self.nx, self.ny, self.nz, self.nt):
            if n < 1:
                raise OutOfRange("grid counts must be >= 1")

    @staticmethod
    def _axis(extent, n):
        if n == 1:
            return np.array([0.5 * (extent[0] + extent[1])])
        return np.linspace(extent[0], extent[1], n)

    def x_axis(self):
        return self._axis(self.x_extent, self.nx)

    def y_axis(self):
        return self._axis(self.y_extent, self.ny)

    def z_axis(self):
        return self._axis(self.z_extent, self.nz)

    def t_axis(self):
        return self._axis(self.t_extent, self.nt)


def _escape_counts(w, x, y, z, cw, cx, cy, cz, params):
    """Vectorized divergence counts for q0 components against c components.

    All arguments broadcast together; the update order and escape test
    (strict |q|^2 > threshold^2, checked after each step, counting from 1)
    match the scalar loop bit for bit.
    """
    shape = np.broadcast(w, x, y, z, cw, cx, cy, cz).shape
    qw = np.broadcast_to(np.asarray(w, dtype=np.float64), shape).ravel().copy()
    qx = np.broadcast_to(np.asarray(x, dtype=np.float64), shape).ravel().copy()
    qy = np.broadcast_to(np.asarray(y, dtype=np.float64), shape).ravel().copy()
    qz = np.broadcast_to(np.asarray(z, dtype=np.float64), shape).ravel().copy()
    kw = np.broadcast_to(np.asarray(cw, dtype=np.float64), shape).ravel()
    kx = np.broadcast_to(np.asarray(cx, dtype=np.float64), shape).ravel()
    ky = np.broadcast_to(np.asarray(cy, dtype=np.float64), shape).ravel()
    kz = np.broadcast_to(np.asarray(cz, dtype=np.float64), shape).ravel()

    counts = np.full(qw.shape, params.max_iter, dtype=np.int64)
    active = np.arange(qw.size)
    thresh2 = params.escape_threshold * params.escape_threshold
    for n in range(1, params.max_iter + 1):
        nw = qw * qw - qx * qx - qy * qy - qz * qz + kw[active]
        nx = 2 * qw * qx + kx[active]
        ny = 2 * qw * qy + ky[active]
        nz = 2 * qw * qz + kz[active]
        mag2 = nw * nw + nx * nx + ny * ny + nz * nz
        escaped = mag2 > thresh2
        counts[active[escaped]] = n
        keep = ~escaped
        if not keep.all():
            active = active[keep]
            qw, qx, qy, qz = nw[keep], nx[keep], ny[keep], nz[keep]
        else:
            qw, qx, qy, qz = nw, nx, ny, nz
        if active.size == 0:
            break
    return counts.reshape(shape)


def julia_iterations(q0, c, params=IterationParams()):
    """Steps until |q_n| exceeds the escape bound, capped at max_iter.

    q_n = q_{n-1}^2 + c starting from q_1; the test is strict and runs after
    each update.
    """
    qw, qx, qy, qz = (float(v) for v in q0)
    cw, cx, cy, cz = (float(v) for v in c)
    thresh2 = params.escape_threshold * params.escape_threshold
    for n in range(1, params.max_iter + 1):
        qw, qx, qy, qz = (
            qw * qw - qx * qx - qy * qy - qz * qz + cw,
            2 * qw * qx + cx,
            2 * qw * qy + cy,
            2 * qw * qz + cz,
        )
        if qw * qw + qx * qx + qy * qy + qz * qz > thresh2:
            return n
    return params.max_iter


def mandelbrot_iterations(c, params=IterationParams()):
    """Divergence count with the start fixed at the origin."""
    return julia_iterations(Quaternion(0.0, 0.0, 0.0, 0.0), c, params)


@dataclass
class CCatalogue:
    """Grid points whose origin-seeded count lies in [lo, hi], inclusive."""

    lo: int
    hi: int
    max_iter: int
    entries: list = field(default_factory=list)  # (Quaternion, count) pairs

    def to_json(self):
        return {
            "range": [self.lo, self.hi],
            "max_iter": self.max_iter,
            "entries": [{"c": [float(v) for v in c], "count": int(n)}
                        for c, n in self.entries],
        }

    @classmethod
    def from_json(cls, obj):
        lo, hi = obj["range"]
        entries = [(Quaternion(*e["c"]), int(e["count"])) for e in obj["entries"]]
        return cls(lo=lo, hi=hi, max_iter=obj["max_iter"], entries=entries)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def scan_c_catalogue(grid, params=IterationParams(), count_range=(10, 30)):
    """Catalogue every grid coordinate c with count in the inclusive band.

    Scans origin-seeded counts over the full 4D grid in row-major
    (x, y, z, t) order.
    """
    lo, hi = count_range
    if not (lo <= hi <= params.max_iter):
        raise OutOfRange(f"need lo <= hi <= max_iter, got [{lo}, {hi}]")
    xs, ys = grid.x_axis(), grid.y_axis()
    zs, ts = grid.z_axis(), grid.t_axis()
    cw, cx, cy, cz = np.meshgrid(xs, ys, zs, ts, indexing="ij")
    counts = _escape_counts(0.0, 0.0, 0.0, 0.0, cw, cx, cy, cz, params)
    sel = (counts >= lo) & (counts <= hi)
    idx = np.flatnonzero(sel.ravel())
    if idx.size == 0:
        raise EmptyCatalogue(
            f"no grid point with count in [{lo}, {hi}]; adjust grid resolution"
        )
    flat = [a.ravel() for a in (cw, cx, cy, cz)]
    entries = [
        (Quaternion(flat[0][i], flat[1][i], flat[2][i], flat[3][i]),
         int(counts.ravel()[i]))
        for i in idx
    ]
    return CCatalogue(lo=lo, hi=hi, max_iter=params.max_iter, entries=entries)


def render_julia_slice(c, grid, params=IterationParams()):
    """Central-z iteration field as frames x rows x cols counts.

    Evaluates only the z = 0 plane; grid points iterate independently, so
    this equals rendering the full volume and slicing it.
    """
    xs, ys, ts = grid.x_axis(), grid.y_axis(), grid.t_axis()
    t, y, x = np.meshgrid(ts, ys, xs, indexing="ij")
    counts = _escape_counts(x, y, 0.0, t, c.w, c.x, c.y, c.z, params)
    return counts.astype(np.float64)


def render_julia_volume(c, grid, params=IterationParams()):
    """Full 4D field (frames x z x rows x cols) for 3D+time use."""
    xs, ys = grid.x_axis(), grid.y_axis()
    zs, ts = grid.z_axis(), grid.t_axis()
    t, z, y, x = np.meshgrid(ts, zs, ys, xs, indexing="ij")
    counts = _escape_counts(x, y, z, t, c.w, c.x, c.y, c.z, params)
    return counts.astype(np.float64)
