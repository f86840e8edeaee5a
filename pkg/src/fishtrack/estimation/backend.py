"""Import-time selection of the track-pass kernel.

Prefers the compiled extension; falls back to the pure-NumPy kernel when
the extension was not built. FISHTRACK_FORCE_PY=1 forces the fallback
(used by the benchmark and the parity tests).
"""

import os

if os.environ.get("FISHTRACK_FORCE_PY"):
    from . import _kernel_py as kernel
else:
    try:
        from . import _imm_cy as kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as kernel

BACKEND = kernel.BACKEND_NAME


def available_kernels():
    """All importable kernels, for benchmarks and cross-checks."""
    from . import _kernel_py
    kernels = {"python": _kernel_py}
    try:
        from . import _imm_cy
        kernels["cython"] = _imm_cy
    except ImportError:
        pass
    return kernels
