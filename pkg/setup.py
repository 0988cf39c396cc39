"""Build script for the optional compiled RK4 kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); building it just makes propagation and sweeps
roughly an order of magnitude faster.
"""
from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "rydchirp._rk4",
                ["src/rydchirp/_rk4.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
