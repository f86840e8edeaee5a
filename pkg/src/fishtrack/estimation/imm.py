"""Two-mode IMM filter bank over constant-velocity Kalman filters.

State vector per mode is [x, vx, y, vy] in the local metric plane; both
modes share the constant-velocity transition and a white-noise-acceleration
process noise, differing only in noise intensity: a quiet mode for straight
legs and a loud mode for accelerations, decelerations and turns. Because
the measurement model is linear in the local plane, each per-mode step
degenerates to a standard Kalman update (the projection carries the
nonlinearity; there is no separate Jacobian to derive).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DataError, NumericalError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
# Innovation covariances with a worse spread than this are treated as a
# filter failure rather than silently inverted.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ModeConfig:
    """One motion mode: white-noise-acceleration intensity q in m^2/s^3."""
    q: float
    name: str = "linear"

    def __post_init__(self):
        if self.q <= 0:
            raise DataError("process noise intensity must be positive")


@dataclass(frozen=True)
class ImmConfig:
    modes: tuple = (ModeConfig(q=0.01, name="linear"), ModeConfig(q=1.0, name="maneuver"))
    transition: tuple = ((0.95, 0.05), (0.05, 0.95))
    meas_noise_sigma: float = 10.0   # average GPS error in meters
    init_pos_var: float = 100.0
    init_vel_var: float = 100.0

    def __post_init__(self):
        if len(self.modes) != 2:
            raise DataError("exactly two modes are supported")
        if self.modes[1].q < self.modes[0].q:
            raise DataError("second (maneuver) mode must be at least as noisy as the first")
        pi = np.asarray(self.transition, dtype=float)
        if pi.shape != (2, 2) or np.any(pi < 0) or np.any(pi > 1):
            raise DataError("transition matrix must be 2x2 with entries in [0, 1]")
        if np.any(np.abs(pi.sum(axis=1) - 1.0) > 1e-12):
            raise DataError("transition matrix rows must sum to 1")
        if self.meas_noise_sigma <= 0:
            raise DataError("measurement noise sigma must be positive")

    @property
    def pi(self) -> np.ndarray:
        return np.asarray(self.transition, dtype=float)


@dataclass
class ImmState:
    """Filter-bank state after a step: per-mode estimates plus the mixture."""
    xs: np.ndarray            # (2, 4) per-mode state
    ps: np.ndarray            # (2, 4, 4) per-mode covariance
    mu: np.ndarray            # (2,) mode probabilities
    x: np.ndarray = field(default=None)   # (4,) combined state
    p: np.ndarray = field(default=None)   # (4, 4) combined covariance

    def __post_init__(self):
        if self.x is None or self.p is None:
            self.x, self.p = _moment_match(self.xs, self.ps, self.mu)


def _moment_match(xs: np.ndarray, ps: np.ndarray, w: np.ndarray):
    """Mean and covariance of a Gaussian mixture (spread-of-means included)."""
    x = w[0] * xs[0] + w[1] * xs[1]
    p = np.zeros((4, 4))
    for j in range(2):
        d = xs[j] - x
        p = p + w[j] * (ps[j] + np.outer(d, d))
    return x, 0.5 * (p + p.T)


def transition_matrix(dt: float) -> np.ndarray:
    f = np.eye(4)
    f[0, 1] = dt
    f[2, 3] = dt
    return f


def process_noise(dt: float, q: float) -> np.ndarray:
    """Continuous white-noise-acceleration covariance for one CV axis pair."""
    a = q * dt ** 3 / 3.0
    b = q * dt ** 2 / 2.0
    c = q * dt
    return np.array([
        [a, b, 0.0, 0.0],
        [b, c, 0.0, 0.0],
        [0.0, 0.0, a, b],
        [0.0, 0.0, b, c],
    ])


_H = np.array([[1.0, 0.0, 0.0, 0.0],
               [0.0, 0.0, 1.0, 0.0]])


def ekf_step(x: np.ndarray, p: np.ndarray, z: np.ndarray, dt: float,
             mode: ModeConfig, meas_sigma: float):
    """One predict+update cycle of a single mode.

    Returns (x', P', innovation, S, likelihood) with the Gaussian innovation
    likelihood N(innovation; 0, S). Covariance update uses the Joseph form
    so P stays symmetric PSD.

    Raises NumericalError when the innovation covariance is too badly
    conditioned to invert (condition number above 1e12).
    """
    if dt <= 0:
        raise DataError("ekf_step requires dt > 0")
    f = transition_matrix(dt)
    q = process_noise(dt, mode.q)
    x_pred = f @ x
    p_pred = f @ p @ f.T + q
    p_pred = 0.5 * (p_pred + p_pred.T)

    r_var = meas_sigma * meas_sigma
    s = _H @ p_pred @ _H.T
    s = s + r_var * np.eye(2)

    # closed-form 2x2 conditioning: ratio of symmetric eigenvalues
    tr = s[0, 0] + s[1, 1]
    disc = math.sqrt(max(0.0, (s[0, 0] - s[1, 1]) ** 2 + 4.0 * s[0, 1] * s[1, 0]))
    lam_max = 0.5 * (tr + disc)
    lam_min = 0.5 * (tr - disc)
    det_s = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    if lam_min <= 0 or lam_max / lam_min > MAX_CONDITION or det_s <= 0:
        raise NumericalError(
            f"innovation covariance ill-conditioned (det={det_s:.3e})")

    s_inv = np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]]) / det_s
    innovation = z - _H @ x_pred
    k = p_pred @ _H.T @ s_inv
    x_new = x_pred + k @ innovation
    a = np.eye(4) - k @ _H
    p_new = a @ p_pred @ a.T + (k * r_var) @ k.T
    p_new = 0.5 * (p_new + p_new.T)

    maha = float(innovation @ s_inv @ innovation)
    likelihood = math.exp(-0.5 * maha) / (TWO_PI * math.sqrt(det_s))
    return x_new, p_new, innovation, s, likelihood


def ekf_predict(x: np.ndarray, p: np.ndarray, dt: float, mode: ModeConfig):
    """Prediction half of the cycle, exposed for diagnostics and tests."""
    f = transition_matrix(dt)
    q = process_noise(dt, mode.q)
    x_pred = f @ x
    p_pred = f @ p @ f.T + q
    return x_pred, 0.5 * (p_pred + p_pred.T)


def initial_state(z0: np.ndarray, cfg: ImmConfig) -> ImmState:
    """Uninformative start at the first measurement with zero velocity."""
    x0 = np.array([z0[0], 0.0, z0[1], 0.0])
    p0 = np.diag([cfg.init_pos_var, cfg.init_vel_var, cfg.init_pos_var, cfg.init_vel_var])
    return ImmState(
        xs=np.stack([x0, x0.copy()]),
        ps=np.stack([p0, p0.copy()]),
        mu=np.array([0.5, 0.5]),
    )


def imm_step(state: ImmState, z: np.ndarray, dt: float, cfg: ImmConfig) -> ImmState:
    """One full IMM cycle: mix, filter per mode, reweigh, combine.

    When a mode's predicted probability underflows to zero its mixing
    weights collapse to "keep own state"; when every mode likelihood
    underflows the mode probabilities are carried over unchanged.
    """
    pi = cfg.pi
    mu = state.mu

    # predicted mode probabilities c_j and mixing weights mu_{i|j}
    c = np.array([pi[0, 0] * mu[0] + pi[1, 0] * mu[1],
                  pi[0, 1] * mu[0] + pi[1, 1] * mu[1]])
    mixed_xs = np.empty_like(state.xs)
    mixed_ps = np.empty_like(state.ps)
    for j in range(2):
        if c[j] <= 0.0:
            mixed_xs[j] = state.xs[j]
            mixed_ps[j] = state.ps[j]
            continue
        w = np.array([pi[0, j] * mu[0], pi[1, j] * mu[1]]) / c[j]
        mixed_xs[j], mixed_ps[j] = _moment_match(state.xs, state.ps, w)

    new_xs = np.empty_like(state.xs)
    new_ps = np.empty_like(state.ps)
    lik = np.empty(2)
    for j in range(2):
        new_xs[j], new_ps[j], _, _, lik[j] = ekf_step(
            mixed_xs[j], mixed_ps[j], z, dt, cfg.modes[j], cfg.meas_noise_sigma)

    weighted = c * lik
    total = weighted.sum()
    if total > 0.0:
        new_mu = weighted / total
    else:
        log.warning("IMM mode likelihoods underflowed; keeping previous mode probabilities")
        new_mu = mu.copy()

    return ImmState(xs=new_xs, ps=new_ps, mu=new_mu)
