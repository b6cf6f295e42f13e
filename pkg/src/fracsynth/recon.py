"""Iterative reconstruction of radial multi-coil data.

Gradient descent on the smoothed objective

    J(x) = 1/2 sum_{c,t} || F_t(S_c x_t) - y_{c,t} ||^2 + lambda * TV_t(x)

where F_t is the frame's NUFFT, S_c the known coil sensitivities, and TV_t
the temporally smoothed total variation. The step size comes from a power
estimate of the normal operator's largest eigenvalue.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteObjective, ShapeMismatch, SingleFrame
from .kspace import NufftPlan


@dataclass(frozen=True)
class CsParams:
    """Solver knobs; the default regularization weight is 5e-4."""

    lam: float = 5e-4
    n_iters: int = 50
    tv_epsilon: float = 1e-6
    step_safety: float = 0.9

    def __post_init__(self):
        if self.lam < 0 or self.n_iters < 1 or self.tv_epsilon <= 0:
            raise ShapeMismatch("invalid CS parameters")


def temporal_tv(video, epsilon):
    """Smoothed absolute frame-to-frame difference, summed over all pixels.

    sum sqrt(|v[t+1] - v[t]|^2 + eps^2) - eps; the eps subtraction keeps
    temporally constant videos at exactly zero.
    """
    video = np.asarray(video)
    if video.ndim != 3 or video.shape[0] < 2:
        raise SingleFrame("temporal TV needs at least two frames")
    d = np.diff(video, axis=0)
    return float(np.sum(np.sqrt(np.abs(d) ** 2 + epsilon**2) - epsilon))


def _tv_gradient(video, epsilon):
    """Gradient of the smoothed temporal TV (treating re/im as independent)."""
    d = np.diff(video, axis=0)
    scaled = d / np.sqrt(np.abs(d) ** 2 + epsilon**2)
    grad = np.zeros_like(video)
    grad[:-1] -= scaled
    grad[1:] += scaled
    return grad


def _forward_all(x, maps, traj, plan):
    """(T, H, W) image series to (C, T, n_samples) radial samples."""
    n_coils = maps.shape[0]
    out = np.empty((n_coils, x.shape[0], traj.coords.shape[1] * traj.coords.shape[2]),
                   dtype=np.complex128)
    for t in range(x.shape[0]):
        out[:, t] = plan.forward(maps * x[t][None], traj.frame_coords(t))
    return out


def _adjoint_all(y, maps, traj, plan, dcf=None):
    """(C, T, n_samples) samples to a coil-combined (T, H, W) series."""
    n_frames = y.shape[1]
    n = plan.grid_size
    out = np.empty((n_frames, n, n), dtype=np.complex128)
    for t in range(n_frames):
        w = None if dcf is None else dcf.frame(t)
        coil_imgs = plan.adjoint(y[:, t], traj.frame_coords(t), w)
        out[t] = (maps.conj() * coil_imgs).sum(axis=0)
    return out


def cs_objective(x, y, maps, traj, params, plan):
    """Objective value at ``x`` (used directly by the gradient checks)."""
    r = _forward_all(x, maps, traj, plan) - y
    return 0.5 * float(np.sum(np.abs(r) ** 2)) + params.lam * temporal_tv(
        x, params.tv_epsilon)


def cs_gradient(x, y, maps, traj, params, plan):
    """Gradient of the objective at ``x`` under the real-pair inner product."""
    r = _forward_all(x, maps, traj, plan) - y
    g = _adjoint_all(r, maps, traj, plan)
    return g + params.lam * _tv_gradient(x, params.tv_epsilon)


def estimate_step(maps, traj, plan, safety, n_power=10):
    """2 * safety / L with L from power iteration on the normal operator."""
    n = plan.grid_size
    z = np.ones((traj.n_frames, n, n), dtype=np.complex128)
    lmax = 1.0
    for _ in range(n_power):
        w = _adjoint_all(_forward_all(z, maps, traj, plan), maps, traj, plan)
        lmax = np.linalg.norm(w.ravel())
        z = w / lmax
    return 2.0 * safety / lmax


def cs_reconstruct(y, maps, traj, params=CsParams(), plan=None):
    """Minimize the data-consistency + temporal-TV objective.

    ``y`` is (C, T, n_samples) radial data, ``maps`` the (C, H, W) known
    sensitivities. Starts from the density-compensated adjoint, runs exactly
    ``params.n_iters`` fixed-step gradient iterations, and returns
    (reconstruction, objective trace); the trace has n_iters + 1 entries.
    """
    from .kspace import density_compensation

    y = np.asarray(y, dtype=np.complex128)
    maps = np.asarray(maps, dtype=np.complex128)
    if plan is None:
        plan = NufftPlan(traj.grid_size)
    n = plan.grid_size
    expected = (maps.shape[0], traj.n_frames,
                traj.spokes_per_frame * traj.samples_per_spoke)
    if y.shape != expected:
        raise ShapeMismatch(f"radial data shape {y.shape}, expected {expected}")
    if maps.shape[1:] != (n, n):
        raise ShapeMismatch("coil maps do not match the plan size")

    dcf = density_compensation(traj, plan)
    x = _adjoint_all(y, maps, traj, plan, dcf)
    step = estimate_step(maps, traj, plan, params.step_safety)

    trace = []
    for _ in range(params.n_iters):
        r = _forward_all(x, maps, traj, plan) - y
        obj = 0.5 * float(np.sum(np.abs(r) ** 2)) + params.lam * temporal_tv(
            x, params.tv_epsilon)
        if not np.isfinite(obj):
            raise NonFiniteObjective(f"objective diverged at iteration {len(trace)}")
        trace.append(obj)
        g = _adjoint_all(r, maps, traj, plan) + params.lam * _tv_gradient(
            x, params.tv_epsilon)
        x = x - step * g
    final = cs_objective(x, y, maps, traj, params, plan)
    if not np.isfinite(final):
        raise NonFiniteObjective("objective diverged at the final iterate")
    trace.append(final)
    return x, trace
