"""Build script for the compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile is downgraded to a warning rather than a
hard install error.
"""

import warnings

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cubetrack.kernels._core",
                ["src/cubetrack/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - environment without cython
    warnings.warn(f"building without compiled kernels: {exc}")
    ext_modules = []

setup(ext_modules=ext_modules)
