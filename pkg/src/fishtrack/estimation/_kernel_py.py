"""Pure-NumPy track-pass kernel: the reference implementation.

Selected at import time when the compiled extension is unavailable (or
forced via FISHTRACK_FORCE_PY). Semantics match the Cython kernel to
floating-point noise; this path is the one the unit tests pin down.
"""

from __future__ import annotations

import numpy as np

from .imm import ImmConfig, ImmState, imm_step, initial_state

BACKEND_NAME = "python"


def filter_track(zs: np.ndarray, dts: np.ndarray, cfg: ImmConfig):
    """Run the IMM over one track of planar measurements.

    zs: (n, 2) measured positions in meters; dts: (n-1,) seconds between
    consecutive measurements. Returns (states (n, 4), mode_probs (n, 2),
    covs (n, 4, 4)) of the combined estimate at every measurement, the
    first row being the initialization.
    """
    n = zs.shape[0]
    states = np.empty((n, 4))
    mode_probs = np.empty((n, 2))
    covs = np.empty((n, 4, 4))

    state = initial_state(zs[0], cfg)
    states[0] = state.x
    mode_probs[0] = state.mu
    covs[0] = state.p
    for i in range(1, n):
        state = imm_step(state, zs[i], float(dts[i - 1]), cfg)
        states[i] = state.x
        mode_probs[i] = state.mu
        covs[i] = state.p
    return states, mode_probs, covs
