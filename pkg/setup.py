"""Build script: compiles the optional quadrature kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the compiled core exists because grid sums over
10^8+ cells dominate the sweep runtime.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "varbound._kernels",
                ["src/varbound/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
