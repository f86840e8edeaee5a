import os

from setuptools import Extension, setup


def extensions():
    """Build the compiled IMM kernel unless explicitly disabled.

    Set FISHTRACK_NO_EXT=1 to skip compilation; the package then falls back
    to the pure-NumPy kernel at import time.
    """
    if os.environ.get("FISHTRACK_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "fishtrack.estimation._imm_cy",
        ["src/fishtrack/estimation/_imm_cy.pyx"],
        include_dirs=[numpy.get_include()],
    )
    return cythonize(ext, language_level="3")


setup(ext_modules=extensions())
