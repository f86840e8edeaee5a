# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled track-pass kernel for the two-mode IMM filter.

Hand-unrolled 4x4 arithmetic for the per-measurement loop, mirroring the
pure-NumPy reference kernel step for step. The measurement model selects
the two position components of the [x, vx, y, vy] state, so all H products
are written out directly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

from fishtrack.errors import NumericalError

cnp.import_array()

BACKEND_NAME = "cython"

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double MAX_CONDITION = 1e12


cdef inline void mat4_mul(double[4][4] a, double[4][4] b, double[4][4] out) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += a[i][k] * b[k][j]
            out[i][j] = acc


cdef inline void mat4_mul_bt(double[4][4] a, double[4][4] b, double[4][4] out) noexcept nogil:
    # out = a @ b.T
    cdef int i, j, k
    cdef double acc
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += a[i][k] * b[j][k]
            out[i][j] = acc


cdef inline void symmetrize(double[4][4] p) noexcept nogil:
    cdef int i, j
    cdef double v
    for i in range(4):
        for j in range(i + 1, 4):
            v = 0.5 * (p[i][j] + p[j][i])
            p[i][j] = v
            p[j][i] = v


cdef int ekf_step_c(double* x, double[4][4] p, double zx, double zy,
                    double dt, double q, double r_var,
                    double* likelihood) noexcept nogil:
    """Predict + update of one mode, in place. Returns 0 on success."""
    cdef double[4][4] f
    cdef double[4][4] tmp
    cdef double[4][4] p_pred
    cdef double[4][4] a
    cdef double x_pred[4]
    cdef double k_gain[4][2]
    cdef int i, j
    cdef double qa = q * dt * dt * dt / 3.0
    cdef double qb = q * dt * dt / 2.0
    cdef double qc = q * dt

    for i in range(4):
        for j in range(4):
            f[i][j] = 1.0 if i == j else 0.0
    f[0][1] = dt
    f[2][3] = dt

    x_pred[0] = x[0] + dt * x[1]
    x_pred[1] = x[1]
    x_pred[2] = x[2] + dt * x[3]
    x_pred[3] = x[3]

    mat4_mul(f, p, tmp)
    mat4_mul_bt(tmp, f, p_pred)
    p_pred[0][0] += qa
    p_pred[0][1] += qb
    p_pred[1][0] += qb
    p_pred[1][1] += qc
    p_pred[2][2] += qa
    p_pred[2][3] += qb
    p_pred[3][2] += qb
    p_pred[3][3] += qc
    symmetrize(p_pred)

    # S = H P H' + R with H selecting rows/cols (0, 2)
    cdef double s00 = p_pred[0][0] + r_var
    cdef double s01 = p_pred[0][2]
    cdef double s10 = p_pred[2][0]
    cdef double s11 = p_pred[2][2] + r_var

    cdef double tr = s00 + s11
    cdef double d0 = s00 - s11
    cdef double disc = d0 * d0 + 4.0 * s01 * s10
    if disc < 0.0:
        disc = 0.0
    disc = sqrt(disc)
    cdef double lam_max = 0.5 * (tr + disc)
    cdef double lam_min = 0.5 * (tr - disc)
    cdef double det_s = s00 * s11 - s01 * s10
    if lam_min <= 0.0 or lam_max / lam_min > MAX_CONDITION or det_s <= 0.0:
        return 1

    cdef double si00 = s11 / det_s
    cdef double si01 = -s01 / det_s
    cdef double si10 = -s10 / det_s
    cdef double si11 = s00 / det_s

    cdef double iy0 = zx - x_pred[0]
    cdef double iy1 = zy - x_pred[2]

    # K = P H' S^-1, using P columns 0 and 2
    for i in range(4):
        k_gain[i][0] = p_pred[i][0] * si00 + p_pred[i][2] * si10
        k_gain[i][1] = p_pred[i][0] * si01 + p_pred[i][2] * si11

    for i in range(4):
        x[i] = x_pred[i] + k_gain[i][0] * iy0 + k_gain[i][1] * iy1

    # Joseph form: P = (I - K H) P (I - K H)' + r_var K K'
    for i in range(4):
        for j in range(4):
            a[i][j] = 1.0 if i == j else 0.0
        a[i][0] -= k_gain[i][0]
        a[i][2] -= k_gain[i][1]
    mat4_mul(a, p_pred, tmp)
    mat4_mul_bt(tmp, a, p)
    for i in range(4):
        for j in range(4):
            p[i][j] += r_var * (k_gain[i][0] * k_gain[j][0] + k_gain[i][1] * k_gain[j][1])
    symmetrize(p)

    cdef double maha = iy0 * (si00 * iy0 + si01 * iy1) + iy1 * (si10 * iy0 + si11 * iy1)
    likelihood[0] = exp(-0.5 * maha) / (TWO_PI * sqrt(det_s))
    return 0


cdef void moment_match(double[2][4] xs, double[2][4][4] ps, double w0, double w1,
                       double* x_out, double[4][4] p_out) noexcept nogil:
    cdef int i, j
    cdef double d0[4]
    cdef double d1[4]
    for i in range(4):
        x_out[i] = w0 * xs[0][i] + w1 * xs[1][i]
    for i in range(4):
        d0[i] = xs[0][i] - x_out[i]
        d1[i] = xs[1][i] - x_out[i]
    for i in range(4):
        for j in range(4):
            p_out[i][j] = (w0 * (ps[0][i][j] + d0[i] * d0[j])
                           + w1 * (ps[1][i][j] + d1[i] * d1[j]))
    symmetrize(p_out)


def filter_track(double[:, ::1] zs, double[::1] dts, cfg):
    """Run the IMM over one track; same contract as the NumPy kernel."""
    cdef Py_ssize_t n = zs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] states = np.empty((n, 4))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mode_probs = np.empty((n, 2))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] covs = np.empty((n, 4, 4))
    cdef double[:, ::1] states_v = states
    cdef double[:, ::1] mu_v = mode_probs
    cdef double[:, :, ::1] covs_v = covs

    pi_obj = np.asarray(cfg.pi, dtype=np.float64)
    cdef double pi00 = pi_obj[0, 0]
    cdef double pi01 = pi_obj[0, 1]
    cdef double pi10 = pi_obj[1, 0]
    cdef double pi11 = pi_obj[1, 1]
    cdef double q0 = cfg.modes[0].q
    cdef double q1 = cfg.modes[1].q
    cdef double sigma = cfg.meas_noise_sigma
    cdef double r_var = sigma * sigma
    cdef double init_pos = cfg.init_pos_var
    cdef double init_vel = cfg.init_vel_var

    cdef double[2][4] xs
    cdef double[2][4][4] ps
    cdef double[2][4] mixed_xs
    cdef double[2][4][4] mixed_ps
    cdef double mu0 = 0.5, mu1 = 0.5
    cdef double c0, c1, w0, w1, lik0, lik1, total, dt
    cdef double comb_x[4]
    cdef double[4][4] comb_p
    cdef int i, j, k, fail
    cdef double lik_out
    cdef Py_ssize_t step

    # initialization at the first measurement with zero velocity
    for j in range(2):
        xs[j][0] = zs[0, 0]
        xs[j][1] = 0.0
        xs[j][2] = zs[0, 1]
        xs[j][3] = 0.0
        for i in range(4):
            for k in range(4):
                ps[j][i][k] = 0.0
        ps[j][0][0] = init_pos
        ps[j][1][1] = init_vel
        ps[j][2][2] = init_pos
        ps[j][3][3] = init_vel

    moment_match(xs, ps, mu0, mu1, comb_x, comb_p)
    for i in range(4):
        states_v[0, i] = comb_x[i]
        for k in range(4):
            covs_v[0, i, k] = comb_p[i][k]
    mu_v[0, 0] = mu0
    mu_v[0, 1] = mu1

    for step in range(1, n):
        dt = dts[step - 1]
        c0 = pi00 * mu0 + pi10 * mu1
        c1 = pi01 * mu0 + pi11 * mu1

        if c0 <= 0.0:
            for i in range(4):
                mixed_xs[0][i] = xs[0][i]
                for k in range(4):
                    mixed_ps[0][i][k] = ps[0][i][k]
        else:
            w0 = pi00 * mu0 / c0
            w1 = pi10 * mu1 / c0
            moment_match(xs, ps, w0, w1, mixed_xs[0], mixed_ps[0])
        if c1 <= 0.0:
            for i in range(4):
                mixed_xs[1][i] = xs[1][i]
                for k in range(4):
                    mixed_ps[1][i][k] = ps[1][i][k]
        else:
            w0 = pi01 * mu0 / c1
            w1 = pi11 * mu1 / c1
            moment_match(xs, ps, w0, w1, mixed_xs[1], mixed_ps[1])

        for i in range(4):
            xs[0][i] = mixed_xs[0][i]
            xs[1][i] = mixed_xs[1][i]
            for k in range(4):
                ps[0][i][k] = mixed_ps[0][i][k]
                ps[1][i][k] = mixed_ps[1][i][k]

        fail = ekf_step_c(xs[0], ps[0], zs[step, 0], zs[step, 1], dt, q0, r_var, &lik_out)
        if fail:
            raise NumericalError(
                f"innovation covariance ill-conditioned at step {step}")
        lik0 = lik_out
        fail = ekf_step_c(xs[1], ps[1], zs[step, 0], zs[step, 1], dt, q1, r_var, &lik_out)
        if fail:
            raise NumericalError(
                f"innovation covariance ill-conditioned at step {step}")
        lik1 = lik_out

        total = c0 * lik0 + c1 * lik1
        if total > 0.0:
            mu0 = c0 * lik0 / total
            mu1 = c1 * lik1 / total
        # else: likelihood underflow, mode probabilities carried over

        moment_match(xs, ps, mu0, mu1, comb_x, comb_p)
        for i in range(4):
            states_v[step, i] = comb_x[i]
            for k in range(4):
                covs_v[step, i, k] = comb_p[i][k]
        mu_v[step, 0] = mu0
        mu_v[step, 1] = mu1

    return states, mode_probs, covs
